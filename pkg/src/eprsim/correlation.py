"""Spin-correlation functions for two observers with localized detectors.

The scenario fixes a prepared two-particle state (given in the preparation
frame at the time of the first measurement), two observers in uniform
motion, their detector regions, spin axes and measurement times, and a
backend.  Observer velocities are the velocity of the preparation frame
relative to the observer, so covariance of localization turns a
measurement at time t into a box integral over the region shifted by -v t.

The closed-form backend evaluates equal-time scenarios exactly through
Gaussian box integrals; everything else (unequal times, identical
particles) runs on the lattice backend, which doubles as the oracle for
the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import grid as _grid
from .errors import ValidationError
from .grid import GridConfig
from .measurement import Region
from .spin import Direction, spin_component, spin_dim, spin_projector, spin_values
from .states import TwoParticleState, _packet_overlap, localized_pair_expectation

__all__ = [
    "ObserverSpec",
    "Scenario",
    "CorrelationResult",
    "joint_probabilities",
    "correlation_distinguishable",
    "correlation_symmetrized",
    "correlation_equal_time",
    "singlet_closed_form",
    "triplet_closed_form",
    "correlation_identical",
    "chsh_value",
]

_CLASS_TOL = 1e-10


@dataclass(frozen=True)
class ObserverSpec:
    """One observer: frame velocity, measurement time, detector, spin axis.

    ``velocity`` is the velocity of the preparation frame with respect to
    this observer.
    """

    velocity: tuple
    time: float
    region: Region
    direction: Direction

    def __post_init__(self):
        object.__setattr__(self, "velocity",
                           tuple(float(v) for v in np.atleast_1d(self.velocity)))
        object.__setattr__(self, "time", float(self.time))


@dataclass(frozen=True)
class Scenario:
    """State plus two observers plus backend choice; the unit of work."""

    state: TwoParticleState
    observer_a: ObserverSpec
    observer_b: ObserverSpec
    backend: str = "analytic"
    grid: GridConfig | None = None

    def __post_init__(self):
        if self.backend not in ("analytic", "grid"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if self.backend == "grid" and self.grid is None:
            raise ValidationError("grid backend needs a GridConfig")
        if self.observer_b.time < self.observer_a.time:
            raise ValidationError("observer B must measure at or after observer A")
        d = self.state.dimension
        for name, obs in (("a", self.observer_a), ("b", self.observer_b)):
            if len(obs.velocity) != d:
                raise ValidationError(f"observer {name} velocity must have {d} components")
            if not obs.region.is_all and obs.region.dimension != d:
                raise ValidationError(f"observer {name} region must have {d} components")
        if self.grid is not None and self.grid.dimension != d:
            raise ValidationError("grid dimension must match the state")


@dataclass
class CorrelationResult:
    """Joint outcome table, marginals, correlation value and diagnostics.

    ``joint[i, j]`` is p(lambda_a, lambda_b) with both indices in descending
    eigenvalue order.  ``marginal_a`` holds the unconditional first-
    measurement probabilities; ``marginal_b`` the column sums of the joint
    table (B's outcome distribution within the sequential experiment).
    The table may sum to less than one: mass can escape both detectors.
    """

    lambdas: tuple
    joint: np.ndarray
    marginal_a: np.ndarray
    marginal_b: np.ndarray
    value: float
    backend_used: str
    diagnostics: dict

    def __eq__(self, other) -> bool:
        if not isinstance(other, CorrelationResult):
            return NotImplemented
        return (self.lambdas == other.lambdas
                and np.array_equal(self.joint, other.joint)
                and np.array_equal(self.marginal_a, other.marginal_a)
                and np.array_equal(self.marginal_b, other.marginal_b)
                and self.value == other.value
                and self.backend_used == other.backend_used
                and self.diagnostics == other.diagnostics)


def _require_equal_times(scenario: Scenario):
    if scenario.observer_a.time != scenario.observer_b.time:
        raise ValidationError(
            "the analytic backend handles equal measurement times only; "
            "use the grid backend for t_B > t_A")


def _shifted_bounds(obs: ObserverSpec):
    moved = obs.region.translate(tuple(-v * obs.time for v in obs.velocity))
    return moved.bounds()


def _joint_analytic(scenario: Scenario, a_measures: str) -> CorrelationResult:
    _require_equal_times(scenario)
    state = scenario.state
    obs_a, obs_b = scenario.observer_a, scenario.observer_b
    s = state.spin
    lambdas = spin_values(s)
    eye = np.eye(spin_dim(s), dtype=complex)
    bounds_a, bounds_b = _shifted_bounds(obs_a), _shifted_bounds(obs_b)
    proj_a = [spin_projector(obs_a.direction, lam, s) for lam in lambdas]
    proj_b = [spin_projector(obs_b.direction, lam, s) for lam in lambdas]

    m = lambdas.size
    joint = np.zeros((m, m))
    marginal_a = np.zeros(m)
    for i in range(m):
        if a_measures == "alpha":
            marginal_a[i] = localized_pair_expectation(
                state, bounds_a, None, proj_a[i], eye).real
        else:
            marginal_a[i] = localized_pair_expectation(
                state, None, bounds_a, eye, proj_a[i]).real
        for j in range(m):
            if a_measures == "alpha":
                p = localized_pair_expectation(
                    state, bounds_a, bounds_b, proj_a[i], proj_b[j]).real
            else:
                p = localized_pair_expectation(
                    state, bounds_b, bounds_a, proj_b[j], proj_a[i]).real
            joint[i, j] = max(p, 0.0)

    value = float(np.einsum("i,j,ij->", lambdas, lambdas, joint))
    norm_defect = abs(localized_pair_expectation(state, None, None, eye, eye).real - 1.0)
    return CorrelationResult(
        lambdas=tuple(lambdas), joint=joint,
        marginal_a=marginal_a, marginal_b=joint.sum(axis=0),
        value=value, backend_used="analytic",
        diagnostics={"norm_defect": norm_defect})


def joint_probabilities(scenario: Scenario, a_measures: str = "alpha") -> CorrelationResult:
    """Joint outcome table p(lambda_a, lambda_b) for the sequential experiment."""
    if a_measures not in ("alpha", "beta"):
        raise ValueError("a_measures must be 'alpha' or 'beta'")
    if scenario.backend == "grid":
        return _grid.joint_probabilities_grid(scenario, a_measures)
    return _joint_analytic(scenario, a_measures)


def correlation_distinguishable(scenario: Scenario) -> CorrelationResult:
    """Correlation sum(lam_a lam_b p) with observer A reading particle alpha."""
    return joint_probabilities(scenario, "alpha")


def correlation_symmetrized(scenario: Scenario) -> float:
    """Observer-symmetrized correlation: A reads alpha plus A reads beta."""
    return (joint_probabilities(scenario, "alpha").value
            + joint_probabilities(scenario, "beta").value)


def correlation_equal_time(scenario: Scenario) -> float:
    """Equal-time correlation contracted directly with the spin matrices.

    Same quantity as ``correlation_distinguishable`` on its shared domain,
    evaluated without forming the outcome table.
    """
    _require_equal_times(scenario)
    state = scenario.state
    mat_a = spin_component(scenario.observer_a.direction, state.spin)
    mat_b = spin_component(scenario.observer_b.direction, state.spin)
    val = localized_pair_expectation(
        state, _shifted_bounds(scenario.observer_a),
        _shifted_bounds(scenario.observer_b), mat_a, mat_b)
    return float(val.real)


# ---------------------------------------------------------------------------
# closed forms for the spin-1/2 singlet and triplet classes

def _component(state: TwoParticleState, ma: float, mb: float) -> list:
    return [(t.amplitude, t.packet_alpha, t.packet_beta) for t in state.terms
            if t.m_alpha == ma and t.m_beta == mb]


def _comp_overlap(c1: list, c2: list, bounds_a=None, bounds_b=None) -> complex:
    out = 0.0 + 0.0j
    for a1, pa1, pb1 in c1:
        for a2, pa2, pb2 in c2:
            out += (a1.conjugate() * a2
                    * _packet_overlap(pa1, pa2, bounds_a)
                    * _packet_overlap(pb1, pb2, bounds_b))
    return out


def _scaled(c: list, factor: complex) -> list:
    return [(a * factor, pa, pb) for a, pa, pb in c]


def _require_spin_half(state: TwoParticleState, what: str):
    if abs(state.spin - 0.5) > 1e-12:
        raise ValidationError(f"{what} requires a spin-1/2 state")


def singlet_closed_form(scenario: Scenario) -> float:
    """-(1/2) cos(theta_ab) times the detector weight of |psi_(+-)|^2.

    Rejects states outside the singlet class (antisymmetric spin part).
    """
    _require_equal_times(scenario)
    state = scenario.state
    _require_spin_half(state, "the singlet closed form")
    c_pp = _component(state, 0.5, 0.5)
    c_mm = _component(state, -0.5, -0.5)
    c_pm = _component(state, 0.5, -0.5)
    c_mp = _component(state, -0.5, 0.5)
    if (_comp_overlap(c_pp, c_pp).real > _CLASS_TOL
            or _comp_overlap(c_mm, c_mm).real > _CLASS_TOL):
        raise ValidationError("state is not a singlet: aligned spin components present")
    defect = c_pm + c_mp
    if _comp_overlap(defect, defect).real > _CLASS_TOL:
        raise ValidationError("state is not a singlet: psi(+-) != -psi(-+)")
    weight = _comp_overlap(c_pm, c_pm,
                           _shifted_bounds(scenario.observer_a),
                           _shifted_bounds(scenario.observer_b)).real
    angle = scenario.observer_a.direction.angle_to(scenario.observer_b.direction)
    return -0.5 * math.cos(angle) * weight


def triplet_closed_form(scenario: Scenario) -> float:
    """Six-term closed form for symmetric-spin (triplet-class) states."""
    _require_equal_times(scenario)
    state = scenario.state
    _require_spin_half(state, "the triplet closed form")
    c_pp = _component(state, 0.5, 0.5)
    c_mm = _component(state, -0.5, -0.5)
    c_pm = _component(state, 0.5, -0.5)
    c_mp = _component(state, -0.5, 0.5)
    defect = c_pm + _scaled(c_mp, -1.0)
    if _comp_overlap(defect, defect).real > _CLASS_TOL:
        raise ValidationError("state is not a triplet: psi(+-) != psi(-+)")

    ba = _shifted_bounds(scenario.observer_a)
    bb = _shifted_bounds(scenario.observer_b)

    def t(c1, c2):
        return _comp_overlap(c1, c2, ba, bb)

    da, db = scenario.observer_a.direction, scenario.observer_b.direction
    cta, ctb = math.cos(da.theta), math.cos(db.theta)
    sta, stb = math.sin(da.theta), math.sin(db.theta)
    epa, epb = np.exp(1j * da.phi), np.exp(1j * db.phi)

    val = ((t(c_pp, c_pp) + t(c_mm, c_mm)) * cta * ctb
           + (t(c_pp, c_mm) * epa * epb
              + t(c_mm, c_pp) * np.conj(epa * epb)) * sta * stb
           + (t(c_pp, c_pm) - t(c_pm, c_mm)) * (cta * stb * epb + sta * ctb * epa)
           + (t(c_pm, c_pp) - t(c_mm, c_pm)) * (cta * stb * np.conj(epb)
                                                + sta * ctb * np.conj(epa))
           - 2.0 * t(c_pm, c_pm) * (cta * ctb - sta * stb * math.cos(da.phi - db.phi)))
    return float(0.25 * val.real)


def correlation_identical(scenario: Scenario, detail: bool = False):
    """Correlation for indistinguishable particles (lattice backend only).

    Returns the one-particle-per-detector value; with ``detail=True`` a
    dict also carrying the commuted disjoint-region form (when defined)
    and numerical diagnostics.
    """
    if scenario.backend != "grid":
        raise ValidationError("identical-particle correlation runs on the grid backend")
    result = _grid.correlation_identical_grid(scenario)
    return result if detail else result["value"]


def chsh_value(scenario: Scenario, a: Direction, a_prime: Direction,
               b: Direction, b_prime: Direction) -> float:
    """|C(a,b) - C(a,b') + C(a',b) + C(a',b')| over four scenario runs."""

    def corr(da: Direction, db: Direction) -> float:
        s = replace(scenario,
                    observer_a=replace(scenario.observer_a, direction=da),
                    observer_b=replace(scenario.observer_b, direction=db))
        return correlation_distinguishable(s).value

    return abs(corr(a, b) - corr(a, b_prime) + corr(a_prime, b) + corr(a_prime, b_prime))
