"""Localized spin observables, projector families and state reduction.

A localized projector selects "particle inside the region Omega" and
"spin component lambda along axis n" simultaneously.  Projectors are kept
symbolic here; the closed-form backend consumes them through Gaussian box
integrals while the lattice backend materializes their action pointwise.

Pair observables are sums of tensor products with real coefficients.  The
number-resolved families for two identical spin-1/2 particles,

    Pi(2) = P x P
    Pi(1) = P x I + I x P - 2 P x P          with P = Pi+ + Pi-
    Pi(0) = I x I - P x I - I x P + P x P

and the six-member refinement Pi(1,+-), Pi(2,+-1), Pi(2,0), Pi(0,0), are
orthogonal idempotents that sum to the identity and reassemble the
symmetric observable Delta = Lambda x I + I x Lambda.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import Direction, spin_dim, spin_projector, spin_values

__all__ = [
    "EPS_PROB",
    "Region",
    "LocalizedSpinProjector",
    "PairObservable",
    "localized_projector",
    "spin_observable",
    "symmetric_observable",
    "number_projectors",
    "one_particle_spin_projectors",
    "luders_reduce",
    "expectation_analytic",
]

# Probabilities below this are reported as exact zeros with a flag instead
# of being propagated through conditional divisions.
EPS_PROB = 1e-12


@dataclass(frozen=True)
class Region:
    """Axis-aligned box (lo < hi componentwise) or all of space."""

    lo: tuple | None = None
    hi: tuple | None = None

    def __post_init__(self):
        if (self.lo is None) != (self.hi is None):
            raise ValueError("box needs both lo and hi")
        if self.lo is not None:
            lo = tuple(float(v) for v in np.atleast_1d(self.lo))
            hi = tuple(float(v) for v in np.atleast_1d(self.hi))
            if len(lo) != len(hi):
                raise ValueError("lo and hi must share one length")
            if any(l >= h for l, h in zip(lo, hi)):
                raise ValueError("box requires lo < hi componentwise")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)

    @classmethod
    def all_space(cls) -> "Region":
        return cls()

    @classmethod
    def box(cls, lo, hi) -> "Region":
        return cls(lo, hi)

    @property
    def is_all(self) -> bool:
        return self.lo is None

    @property
    def dimension(self) -> int | None:
        return None if self.lo is None else len(self.lo)

    def translate(self, shift) -> "Region":
        if self.is_all:
            return self
        shift = np.atleast_1d(np.asarray(shift, dtype=float))
        return Region(tuple(l + s for l, s in zip(self.lo, shift)),
                      tuple(h + s for h, s in zip(self.hi, shift)))

    def bounds(self) -> tuple | None:
        """(lo, hi) arrays for box integration, or None for all space."""
        if self.is_all:
            return None
        return np.asarray(self.lo), np.asarray(self.hi)


@dataclass(frozen=True)
class LocalizedSpinProjector:
    """Projector on "inside region" and "spin lambda along direction"."""

    region: Region
    direction: Direction
    lam: float
    spin: float

    def spin_matrix(self) -> np.ndarray:
        return spin_projector(self.direction, self.lam, self.spin)


@dataclass(frozen=True)
class PairObservable:
    """Sum of coeff * (factor_alpha tensor factor_beta); None factor = identity."""

    terms: tuple
    spin: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(
            (float(c), fa, fb) for c, fa, fb in self.terms))


def localized_projector(region: Region, direction: Direction, lam, s) -> LocalizedSpinProjector:
    lam = float(lam)
    svals = spin_values(s)
    if not np.any(np.abs(svals - lam) < 1e-9):
        raise ValueError(f"lambda={lam} is not an eigenvalue for spin {s}")
    return LocalizedSpinProjector(region, direction, lam, float(s))


def spin_observable(region: Region, direction: Direction, s) -> tuple:
    """Spectral pairs (lambda, projector) of the localized spin component."""
    return tuple((float(lam), localized_projector(region, direction, lam, s))
                 for lam in spin_values(s))


def symmetric_observable(region: Region, direction: Direction, s=0.5) -> PairObservable:
    """Total spin component along ``direction`` of all particles inside ``region``."""
    terms = []
    for lam, proj in spin_observable(region, direction, s):
        if lam == 0.0:
            continue
        terms.append((lam, proj, None))
        terms.append((lam, None, proj))
    return PairObservable(tuple(terms), float(s))


def _pi_family(region: Region, s) -> tuple:
    """Single-particle projectors summing to "inside region" (z axis reference)."""
    z = Direction(0.0, 0.0)
    return tuple(localized_projector(region, z, lam, s) for lam in spin_values(s))


def number_projectors(region: Region, s=0.5) -> tuple:
    """(Pi(2), Pi(1), Pi(0)): both / exactly one / no particle inside."""
    pis = _pi_family(region, s)
    both = [(1.0, p1, p2) for p1 in pis for p2 in pis]
    one = ([(1.0, p, None) for p in pis]
           + [(1.0, None, p) for p in pis]
           + [(-2.0, p1, p2) for p1 in pis for p2 in pis])
    none = ([(1.0, None, None)]
            + [(-1.0, p, None) for p in pis]
            + [(-1.0, None, p) for p in pis]
            + [(1.0, p1, p2) for p1 in pis for p2 in pis])
    s = float(s)
    return (PairObservable(tuple(both), s),
            PairObservable(tuple(one), s),
            PairObservable(tuple(none), s))


def one_particle_spin_projectors(region: Region, direction: Direction) -> dict:
    """Six orthogonal idempotents refining the number projectors (spin 1/2).

    Keys are (N, lambda_N): N particles inside the region with total spin
    component lambda_N along the measurement direction.
    """
    pp = localized_projector(region, direction, 0.5, 0.5)
    pm = localized_projector(region, direction, -0.5, 0.5)
    family = {
        (1, 0.5): ((1.0, pp, None), (1.0, None, pp), (-2.0, pp, pp),
                   (-1.0, pp, pm), (-1.0, pm, pp)),
        (1, -0.5): ((1.0, pm, None), (1.0, None, pm), (-2.0, pm, pm),
                    (-1.0, pp, pm), (-1.0, pm, pp)),
        (2, 1.0): ((1.0, pp, pp),),
        (2, -1.0): ((1.0, pm, pm),),
        (2, 0.0): ((1.0, pp, pm), (1.0, pm, pp)),
        (0, 0.0): ((1.0, None, None),
                   (-1.0, pp, None), (-1.0, pm, None),
                   (-1.0, None, pp), (-1.0, None, pm),
                   (1.0, pp, pp), (1.0, pm, pm), (1.0, pp, pm), (1.0, pm, pp)),
    }
    return {key: PairObservable(terms, 0.5) for key, terms in family.items()}


def expectation_analytic(state, obs: PairObservable) -> float:
    """<psi|obs|psi> on a Gaussian-superposition state via box integrals."""
    from .states import localized_pair_expectation

    dim_s = spin_dim(state.spin)
    eye = np.eye(dim_s, dtype=complex)
    out = 0.0 + 0.0j
    for coeff, fa, fb in obs.terms:
        ba = None if fa is None else fa.region.bounds()
        bb = None if fb is None else fb.region.bounds()
        ma = eye if fa is None else fa.spin_matrix()
        mb = eye if fb is None else fb.spin_matrix()
        out += coeff * localized_pair_expectation(state, ba, bb, ma, mb)
    return out.real


def luders_reduce(state, projector):
    """Projective measurement on a lattice state.

    Returns (probability, reduced_state); the reduced state is
    Pi psi / sqrt(p).  When p < EPS_PROB the outcome is flagged by
    returning (0.0, None) rather than dividing by noise.  ``projector``
    may be a LocalizedSpinProjector (acting on the alpha particle), a
    tuple (projector, particle), an idempotent PairObservable, or None
    for the identity.
    """
    from . import grid as _grid

    if projector is None:
        return 1.0, state
    if isinstance(projector, tuple):
        proj, particle = projector
        reduced = _grid.apply_localized(state, proj, particle)
    elif isinstance(projector, LocalizedSpinProjector):
        reduced = _grid.apply_localized(state, projector, "alpha")
    elif isinstance(projector, PairObservable):
        reduced = _grid.apply_pair_observable(state, projector)
    else:
        raise TypeError(f"cannot realize projector of type {type(projector)!r}")
    p = _grid.lattice_norm_squared(reduced)
    if p < EPS_PROB:
        return 0.0, None
    reduced.psi /= np.sqrt(p)
    return float(p), reduced
