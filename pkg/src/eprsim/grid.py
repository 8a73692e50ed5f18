"""Independent lattice realization of states and operators.

Position space is discretized on a periodic grid of N points per axis
spanning [-L, L), spacing dx = 2L/N.  A two-particle amplitude array has
axes (spin_a, x_a..., spin_b, x_b...).  Conventions:

* free evolution is spectral: psi_hat(k) *= exp(-i tau k^2 / 2M) per
  particle, exactly unitary on the lattice;
* spatial shifts are band-limited (a linear phase exp(i k.a) in the
  conjugate domain), exact for on-lattice states and an exact index
  permutation when the shift is a whole number of spacings;
* a Galilean boost is the shift x -> x - t v followed by the pointwise
  ray phase exp(-i M t v^2/2) exp(-i M v.x); its inverse is the boost
  with -v;
* box regions are rasterized half-open, [lo, hi), with edges snapped to
  the nearest lattice plane, so complementary boxes tile the lattice
  exactly and commensurate shifts move masks without error.

This backend is the brute-force oracle for every closed-form quantity and
the only backend for unequal measurement times and identical particles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import NumericalFailure, ValidationError
from .measurement import (
    EPS_PROB,
    LocalizedSpinProjector,
    PairObservable,
    Region,
    one_particle_spin_projectors,
    symmetric_observable,
)
from .spin import Direction, spin_dim, spin_index, spin_projector, spin_values
from .states import GaussianPacket, TwoParticleState

__all__ = [
    "GridConfig",
    "LatticeState",
    "discretize",
    "lattice_inner",
    "lattice_norm_squared",
    "boundary_mass",
    "evolve_grid",
    "apply_boost_grid",
    "apply_translation_grid",
    "apply_rotation_spin",
    "region_mask",
    "apply_localized",
    "apply_pair_observable",
    "expectation_grid",
    "project_grid",
    "covariance_check",
    "dense_factor",
    "dense_operator",
    "joint_probabilities_grid",
    "correlation_identical_grid",
]

BOUNDARY_FAIL = 1e-6
BOUNDARY_WARN = 1e-10


@dataclass(frozen=True)
class GridConfig:
    """Periodic lattice: N points per axis (power of two) on [-L, L)."""

    dimension: int
    points_per_axis: int
    half_extent: float

    def __post_init__(self):
        n = self.points_per_axis
        if self.dimension not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError("points_per_axis must be a power of two >= 16")
        if self.half_extent <= 0.0:
            raise ValueError("half_extent must be positive")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / self.points_per_axis

    def coords(self) -> np.ndarray:
        n = self.points_per_axis
        return -self.half_extent + self.spacing * np.arange(n)

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)


@dataclass
class LatticeState:
    """Discretized two-particle state; axes (spin_a, x_a..., spin_b, x_b...)."""

    grid: GridConfig
    spin: float
    mass_alpha: float
    mass_beta: float
    psi: np.ndarray
    time: float = 0.0
    meta: dict = field(default_factory=dict)

    def copy(self, psi=None) -> "LatticeState":
        return LatticeState(self.grid, self.spin, self.mass_alpha, self.mass_beta,
                            self.psi.copy() if psi is None else psi,
                            self.time, dict(self.meta))


def _spatial_axes(d: int, particle: str) -> tuple:
    if particle == "alpha":
        return tuple(range(1, 1 + d))
    if particle == "beta":
        return tuple(range(d + 2, 2 * d + 2))
    raise ValueError("particle must be 'alpha' or 'beta'")


def _spin_axis(d: int, particle: str) -> int:
    return 0 if particle == "alpha" else d + 1


def _measure(state: LatticeState) -> float:
    return state.grid.spacing ** (2 * state.grid.dimension)


def lattice_inner(a: LatticeState, b: LatticeState) -> complex:
    return complex(np.vdot(a.psi, b.psi)) * _measure(a)


def lattice_norm_squared(state: LatticeState) -> float:
    return float(np.vdot(state.psi, state.psi).real) * _measure(state)


def boundary_mass(state: LatticeState) -> float:
    """Probability mass on the outermost lattice planes of either particle."""
    d = state.grid.dimension
    interior = [slice(None)] * state.psi.ndim
    for p in ("alpha", "beta"):
        for ax in _spatial_axes(d, p):
            interior[ax] = slice(1, state.grid.points_per_axis - 1)
    inner = float(np.sum(np.abs(state.psi[tuple(interior)]) ** 2)) * _measure(state)
    return max(0.0, lattice_norm_squared(state) - inner)


def _packet_on_grid(p: GaussianPacket, grid: GridConfig) -> np.ndarray:
    """Sample one packet on the lattice as an outer product of axis profiles."""
    x = grid.coords()
    per_axis = []
    for j in range(p.dimension):
        a = (1.0 - 1j * p.chirp[j]) / (4.0 * p.width[j] ** 2)
        u = x - p.center[j]
        per_axis.append((2.0 * math.pi * p.width[j] ** 2) ** -0.25
                        * np.exp(-a * u * u + 1j * p.momentum[j] * u))
    out = reduce(np.multiply.outer, per_axis)
    return out * np.exp(1j * p.phase)


def discretize(state: TwoParticleState, grid: GridConfig,
               normalize: bool = True) -> LatticeState:
    """Sample a Gaussian-superposition state on the lattice.

    Fails when the boundary mass reaches 1e-6 (support leaves the box);
    attaches a warning flag above 1e-10.  The result is renormalized to
    unit lattice norm and the discretization defect is recorded in
    ``meta['discretization_defect']``.
    """
    if grid.dimension != state.dimension:
        raise ValidationError("grid dimension does not match the state")
    d = grid.dimension
    n = grid.points_per_axis
    dim_s = spin_dim(state.spin)
    shape = (dim_s,) + (n,) * d + (dim_s,) + (n,) * d
    psi = np.zeros(shape, dtype=complex)
    for t in state.terms:
        ia = spin_index(state.spin, t.m_alpha)
        ib = spin_index(state.spin, t.m_beta)
        block = t.amplitude * np.multiply.outer(
            _packet_on_grid(t.packet_alpha, grid), _packet_on_grid(t.packet_beta, grid))
        idx = (ia,) + (slice(None),) * d + (ib,) + (slice(None),) * d
        psi[idx] += block
    out = LatticeState(grid, state.spin, state.mass_alpha, state.mass_beta, psi)
    n2 = lattice_norm_squared(out)
    if n2 < 1e-14:
        raise NumericalFailure("state vanishes on the lattice")
    bmass = boundary_mass(out) / n2
    if bmass >= BOUNDARY_FAIL:
        raise NumericalFailure(
            f"boundary mass {bmass:.3e} >= {BOUNDARY_FAIL}; enlarge the lattice")
    out.meta["boundary_mass"] = bmass
    out.meta["boundary_warning"] = bool(bmass >= BOUNDARY_WARN)
    out.meta["discretization_defect"] = abs(n2 - 1.0)
    if normalize:
        out.psi /= math.sqrt(n2)
    return out


def _kinetic_phase(state: LatticeState, tau: float) -> LatticeState:
    """Spectral free evolution; tau may be negative (used for conjugations)."""
    if tau == 0.0:
        return state.copy()
    grid = state.grid
    d = grid.dimension
    k = grid.wavenumbers()
    psi = np.fft.fftn(state.psi, axes=_spatial_axes(d, "alpha") + _spatial_axes(d, "beta"))
    for particle, mass in (("alpha", state.mass_alpha), ("beta", state.mass_beta)):
        for ax in _spatial_axes(d, particle):
            shape = [1] * psi.ndim
            shape[ax] = k.size
            psi *= np.exp(-0.5j * tau * k * k / mass).reshape(shape)
    psi = np.fft.ifftn(psi, axes=_spatial_axes(d, "alpha") + _spatial_axes(d, "beta"))
    out = state.copy(psi)
    out.time = state.time + tau
    return out


def evolve_grid(state: LatticeState, tau: float) -> LatticeState:
    """Free evolution by tau >= 0; exactly unitary on the lattice."""
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    return _kinetic_phase(state, tau)


def _shift_particle(state: LatticeState, shift, particle: str) -> LatticeState:
    """Band-limited substitution psi(x) -> psi(x + shift) for one particle."""
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    if not shift.any():
        return state.copy()
    grid = state.grid
    axes = _spatial_axes(grid.dimension, particle)
    k = grid.wavenumbers()
    psi = np.fft.fftn(state.psi, axes=axes)
    for ax, a in zip(axes, shift):
        shape = [1] * psi.ndim
        shape[ax] = k.size
        psi *= np.exp(1j * k * a).reshape(shape)
    return state.copy(np.fft.ifftn(psi, axes=axes))


def _position_phase(state: LatticeState, coeffs, particle: str,
                    constant: complex = 1.0) -> LatticeState:
    """Multiply by constant * exp(i sum_j coeffs[j] x_j) on one particle."""
    grid = state.grid
    x = grid.coords()
    psi = state.psi * constant
    for ax, c in zip(_spatial_axes(grid.dimension, particle), np.atleast_1d(coeffs)):
        if c == 0.0:
            continue
        shape = [1] * psi.ndim
        shape[ax] = x.size
        psi *= np.exp(1j * c * x).reshape(shape)
    return state.copy(psi)


def apply_translation_grid(state: LatticeState, a, particle: str = "both") -> LatticeState:
    """Translation by a: amplitudes move so that centers shift by -a."""
    out = state
    for p in (("alpha", "beta") if particle == "both" else (particle,)):
        out = _shift_particle(out, a, p)
    return out


def apply_boost_grid(state: LatticeState, v, t: float,
                     particle: str = "both") -> LatticeState:
    """Galilean boost at time t; inverse is the same call with -v."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    out = state
    targets = ("alpha", "beta") if particle == "both" else (particle,)
    for p in targets:
        mass = out.mass_alpha if p == "alpha" else out.mass_beta
        out = _shift_particle(out, t * v, p)
        const = np.exp(-0.5j * mass * t * float(v @ v))
        out = _position_phase(out, -mass * v, p, const)
    return out


def _apply_spin_matrix(psi: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, psi, axes=([1], [axis])), 0, axis)


def apply_rotation_spin(state: LatticeState, rot: np.ndarray) -> LatticeState:
    """Apply a spin-space rotation matrix to both particles' spin indices."""
    d = state.grid.dimension
    psi = _apply_spin_matrix(state.psi, rot, _spin_axis(d, "alpha"))
    psi = _apply_spin_matrix(psi, rot, _spin_axis(d, "beta"))
    return state.copy(psi)


def region_mask(region, grid: GridConfig) -> np.ndarray:
    """Boolean lattice mask; boxes are half-open with snapped edges.

    Accepts a Region or a precomputed boolean array (testing hook).
    """
    n, d = grid.points_per_axis, grid.dimension
    if isinstance(region, np.ndarray):
        if region.shape != (n,) * d:
            raise ValueError("mask shape does not match the grid")
        return region.astype(bool)
    if region.is_all:
        return np.ones((n,) * d, dtype=bool)
    if region.dimension != d:
        raise ValidationError("region dimension does not match the grid")
    axis_masks = []
    for j in range(d):
        i_lo = round((region.lo[j] + grid.half_extent) / grid.spacing)
        i_hi = round((region.hi[j] + grid.half_extent) / grid.spacing)
        idx = np.arange(n)
        axis_masks.append((idx >= i_lo) & (idx < i_hi))
    return reduce(np.multiply.outer, axis_masks) if d > 1 else axis_masks[0]


def _mask_shape(d: int, n: int, particle: str) -> tuple:
    if particle == "alpha":
        return (1,) + (n,) * d + (1,) + (1,) * d
    return (1,) + (1,) * d + (1,) + (n,) * d


def apply_localized(state: LatticeState, proj: LocalizedSpinProjector | None,
                    particle: str) -> LatticeState:
    """Action of one localized spin projector on one particle (no renorm)."""
    if proj is None:
        return state.copy()
    d, n = state.grid.dimension, state.grid.points_per_axis
    mat = spin_projector(proj.direction, proj.lam, state.spin)
    psi = _apply_spin_matrix(state.psi, mat, _spin_axis(d, particle))
    mask = region_mask(proj.region, state.grid)
    psi = psi * mask.reshape(_mask_shape(d, n, particle))
    return state.copy(psi)


def apply_pair_observable(state: LatticeState, obs: PairObservable) -> LatticeState:
    """Sum of tensor-product actions; factors commute across particles."""
    acc = np.zeros_like(state.psi)
    for coeff, fa, fb in obs.terms:
        part = apply_localized(state, fa, "alpha")
        part = apply_localized(part, fb, "beta")
        acc += coeff * part.psi
    return state.copy(acc)


def expectation_grid(state: LatticeState, obs: PairObservable) -> float:
    return lattice_inner(state, apply_pair_observable(state, obs)).real


def project_grid(state: LatticeState, region, direction: Direction, lam,
                 particle: str):
    """Localized spin projection on one particle.

    Returns (probability, reduced_state); (0.0, None) below EPS_PROB.
    """
    d, n = state.grid.dimension, state.grid.points_per_axis
    mat = spin_projector(direction, lam, state.spin)
    psi = _apply_spin_matrix(state.psi, mat, _spin_axis(d, particle))
    mask = region_mask(region, state.grid)
    psi = psi * mask.reshape(_mask_shape(d, n, particle))
    reduced = state.copy(psi)
    p = lattice_norm_squared(reduced)
    if p < EPS_PROB:
        return 0.0, None
    reduced.psi /= math.sqrt(p)
    return float(p), reduced


# ---------------------------------------------------------------------------
# dense tiny-N mode: literal matrices for spectral verification

def dense_factor(proj: LocalizedSpinProjector | None, grid: GridConfig, s) -> np.ndarray:
    """Single-particle dense matrix, basis (spin outer lattice), row-major."""
    n_sites = grid.points_per_axis ** grid.dimension
    dim = spin_dim(s) * n_sites
    if proj is None:
        return np.eye(dim, dtype=complex)
    mask = region_mask(proj.region, grid).ravel().astype(float)
    return np.kron(spin_projector(proj.direction, proj.lam, s), np.diag(mask))


def dense_operator(obs: PairObservable, grid: GridConfig, s=0.5) -> np.ndarray:
    """Two-particle dense matrix; tiny lattices only (N^d <= 64)."""
    if grid.points_per_axis ** grid.dimension > 64:
        raise ValueError("dense mode is restricted to N^d <= 64")
    dim = spin_dim(s) * grid.points_per_axis ** grid.dimension
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for coeff, fa, fb in obs.terms:
        out += coeff * np.kron(dense_factor(fa, grid, s), dense_factor(fb, grid, s))
    return out


# ---------------------------------------------------------------------------
# covariance of localization under boosts (single-particle check)

def covariance_check(region: Region, direction: Direction, lam, v, t: float,
                     grid: GridConfig, s=0.5, num_states: int = 4,
                     seed: int = 7) -> float:
    """Max pointwise deviation of U_t(v) Pi U_t(v)^dag from Pi on the moved region.

    Both sides act on random band-limited test packets whose support stays
    clear of the (snapped) region edges, so the comparison probes the shift
    and phase algebra rather than edge rasterization.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    d, n, dx = grid.dimension, grid.points_per_axis, grid.spacing
    mass = 1.0
    mat = spin_projector(direction, lam, s)
    mask_here = region_mask(region, grid).astype(float)
    moved = region.translate(-t * v)
    if not moved.is_all:
        if any(abs(l) > grid.half_extent or abs(h) > grid.half_extent
               for l, h in zip(moved.lo, moved.hi)):
            raise ValidationError("shifted region leaves the lattice")
    mask_moved = region_mask(moved, grid).astype(float)

    edges = []
    for reg in (region, moved):
        if not reg.is_all:
            edges.extend(reg.lo)
            edges.extend(reg.hi)
    sigma = 6.0 * dx
    margin = 8.0 * sigma
    rng = np.random.default_rng(seed)
    x = grid.coords()
    k_grid = grid.wavenumbers()

    def random_state() -> np.ndarray:
        psi = np.zeros((spin_dim(s),) + (n,) * d, dtype=complex)
        for _ in range(3):
            center = []
            for _j in range(d):
                while True:
                    c = rng.uniform(-grid.half_extent + margin, grid.half_extent - margin)
                    if all(abs(c - e) > margin for e in edges):
                        break
                center.append(c)
            kvec = rng.uniform(-math.pi / (8.0 * dx), math.pi / (8.0 * dx), size=d)
            prof = [np.exp(-(x - c) ** 2 / (4.0 * sigma ** 2) + 1j * kk * x)
                    for c, kk in zip(center, kvec)]
            packet = reduce(np.multiply.outer, prof) if d > 1 else prof[0]
            comp = rng.integers(0, spin_dim(s))
            psi[comp] += (rng.normal() + 1j * rng.normal()) * packet
        return psi / math.sqrt(np.vdot(psi, psi).real * dx ** d)

    def shift(psi: np.ndarray, a: np.ndarray) -> np.ndarray:
        f = np.fft.fftn(psi, axes=tuple(range(1, 1 + d)))
        for j in range(d):
            shape = [1] * psi.ndim
            shape[1 + j] = n
            f *= np.exp(1j * k_grid * a[j]).reshape(shape)
        return np.fft.ifftn(f, axes=tuple(range(1, 1 + d)))

    def boost_action(psi: np.ndarray, vel: np.ndarray) -> np.ndarray:
        out = shift(psi, t * vel)
        out = out * np.exp(-0.5j * mass * t * float(vel @ vel))
        for j in range(d):
            shape = [1] * psi.ndim
            shape[1 + j] = n
            out = out * np.exp(-1j * mass * vel[j] * x).reshape(shape)
        return out

    def project(psi: np.ndarray, mask: np.ndarray) -> np.ndarray:
        out = np.tensordot(mat, psi, axes=([1], [0]))
        return out * mask.reshape((1,) + mask.shape if d > 1 else (1, n))

    worst = 0.0
    for _ in range(num_states):
        psi = random_state()
        lhs = boost_action(project(boost_action(psi, -v), mask_here), v)
        rhs = project(psi, mask_moved)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ---------------------------------------------------------------------------
# measurement pipeline on the lattice

def _boost_state(state: LatticeState, v, t: float) -> LatticeState:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if not v.any():
        return state
    return apply_boost_grid(state, v, t, "both")


def _kernel_identity_deviation(grid: GridConfig, s, masses, region: Region,
                               direction: Direction, lam, v_obs, t_obs,
                               tau: float, num_states: int = 3,
                               seed: int = 11) -> float:
    """Eq-style check: boost+evolution conjugation of a projector versus the
    direct momentum-kernel form (shifted region, spectral phases only)."""
    rng = np.random.default_rng(seed)
    v_obs = np.atleast_1d(np.asarray(v_obs, dtype=float))
    dx = grid.spacing
    worst = 0.0
    for _ in range(num_states):
        terms = []
        for _t in range(2):
            packets = []
            for _p in range(2):
                center = rng.uniform(-grid.half_extent / 3, grid.half_extent / 3, size=grid.dimension)
                sigma = rng.uniform(6 * dx, 10 * dx, size=grid.dimension)
                kvec = rng.uniform(-math.pi / (8 * dx), math.pi / (8 * dx), size=grid.dimension)
                packets.append(GaussianPacket(tuple(center), tuple(sigma), tuple(kvec),
                                              rng.uniform(0, 2 * math.pi)))
            svals = spin_values(s)
            terms.append((complex(rng.normal(), rng.normal()), packets[0], packets[1],
                          float(rng.choice(svals)), float(rng.choice(svals))))
        from .states import StateTerm
        test = TwoParticleState(
            spin=s, dimension=grid.dimension, mass_alpha=masses[0], mass_beta=masses[1],
            statistics="distinguishable",
            terms=tuple(StateTerm(*t) for t in terms)).normalized()
        psi = discretize(test, grid)

        # step sequence: evolve, boost into the observer frame, project, return
        seq = _kinetic_phase(psi, tau) if tau != 0.0 else psi
        seq = _boost_state(seq, -v_obs, t_obs)
        seq = apply_localized(seq, LocalizedSpinProjector(region, direction, float(lam), float(s)), "beta")
        seq = _boost_state(seq, v_obs, t_obs)
        if tau != 0.0:
            seq = _kinetic_phase(seq, -tau)

        # direct kernel: spectral phases and the shifted-region mask only
        direct = _kinetic_phase(psi, tau) if tau != 0.0 else psi
        moved = region.translate(-t_obs * v_obs)
        direct = apply_localized(direct, LocalizedSpinProjector(moved, direction, float(lam), float(s)), "beta")
        if tau != 0.0:
            direct = _kinetic_phase(direct, -tau)

        worst = max(worst, float(np.max(np.abs(seq.psi - direct.psi))))
    return worst


def joint_probabilities_grid(scenario, a_measures: str = "alpha"):
    """Sequential two-observer pipeline on the lattice.

    For each first outcome the state is boosted into observer A's frame,
    reduced, boosted back, freely evolved to t_B, boosted into B's frame,
    and the conditional outcome distribution is read off.  The joint table
    is p(lam_a) p(lam_b | lam_a).
    """
    from .correlation import CorrelationResult

    state = scenario.state
    grid = scenario.grid
    obs_a, obs_b = scenario.observer_a, scenario.observer_b
    tau = obs_b.time - obs_a.time
    slot_a = "alpha" if a_measures == "alpha" else "beta"
    slot_b = "beta" if a_measures == "alpha" else "alpha"

    psi0 = discretize(state, grid)
    psi0.time = obs_a.time
    lambdas = spin_values(state.spin)
    m = lambdas.size
    joint = np.zeros((m, m))
    marginal_a = np.zeros(m)
    zero_branches = 0

    psi_a = _boost_state(psi0, np.negative(obs_a.velocity), obs_a.time)
    for i, lam_a in enumerate(lambdas):
        p_a, reduced = project_grid(psi_a, obs_a.region, obs_a.direction, lam_a, slot_a)
        marginal_a[i] = p_a
        if reduced is None:
            zero_branches += 1
            continue
        back = _boost_state(reduced, obs_a.velocity, obs_a.time)
        evolved = _kinetic_phase(back, tau) if tau != 0.0 else back
        psi_b = _boost_state(evolved, np.negative(obs_b.velocity), obs_b.time)
        for j, lam_b in enumerate(lambdas):
            cond = apply_localized(
                psi_b, LocalizedSpinProjector(obs_b.region, obs_b.direction,
                                              float(lam_b), state.spin), slot_b)
            joint[i, j] = p_a * lattice_norm_squared(cond)

    kernel_dev = _kernel_identity_deviation(
        grid, state.spin, (state.mass_alpha, state.mass_beta),
        obs_b.region, obs_b.direction, lambdas[0],
        obs_b.velocity, obs_b.time, tau)

    value = float(np.einsum("i,j,ij->", lambdas, lambdas, joint))
    diagnostics = {
        "boundary_mass": psi0.meta["boundary_mass"],
        "discretization_defect": psi0.meta["discretization_defect"],
        "kernel_identity_deviation": kernel_dev,
        "zero_probability_branches": float(zero_branches),
    }
    return CorrelationResult(
        lambdas=tuple(lambdas), joint=joint,
        marginal_a=marginal_a, marginal_b=joint.sum(axis=0),
        value=value, backend_used="grid", diagnostics=diagnostics)


def _conjugate_by_observer(state: LatticeState, apply_fn, v_obs, t_obs,
                           tau: float = 0.0) -> LatticeState:
    """U(tau-conj) U_t(v) X U_t(v)^dag U(tau-conj)^dag applied to a state."""
    v_obs = np.atleast_1d(np.asarray(v_obs, dtype=float))
    out = _kinetic_phase(state, tau) if tau != 0.0 else state
    out = _boost_state(out, -v_obs, t_obs)
    out = apply_fn(out)
    out = _boost_state(out, v_obs, t_obs)
    if tau != 0.0:
        out = _kinetic_phase(out, -tau)
    return out


def correlation_identical_grid(scenario) -> dict:
    """Identical-particle correlation on the lattice.

    Evaluates the one-particle-per-detector trace formula
    sum_l <psi| P_A(1,l) D_B D_A P_A(1,l) |psi> with all operators
    conjugated into the preparation frame.  When the detector regions are
    disjoint and both observers are at rest with equal times, the
    commuted form Tr{rho D_A D_B} is evaluated as well.
    """
    state = scenario.state
    if state.statistics == "distinguishable":
        raise ValidationError("identical-particle correlation requires boson or fermion statistics")
    if abs(state.spin - 0.5) > 1e-12:
        raise ValidationError("identical-particle correlation is implemented for spin 1/2")
    grid = scenario.grid
    obs_a, obs_b = scenario.observer_a, scenario.observer_b
    tau = obs_b.time - obs_a.time

    delta_a = symmetric_observable(obs_a.region, obs_a.direction)
    delta_b = symmetric_observable(obs_b.region, obs_b.direction)
    family = one_particle_spin_projectors(obs_a.region, obs_a.direction)

    psi0 = discretize(state, grid)
    psi0.time = obs_a.time

    def conj_a(fn):
        return lambda st: _conjugate_by_observer(st, fn, obs_a.velocity, obs_a.time)

    def conj_b(fn):
        return lambda st: _conjugate_by_observer(st, fn, obs_b.velocity, obs_b.time, tau)

    apply_da = conj_a(lambda st: apply_pair_observable(st, delta_a))
    apply_db = conj_b(lambda st: apply_pair_observable(st, delta_b))

    total = 0.0 + 0.0j
    for lam in (0.5, -0.5):
        proj = family[(1, lam)]
        bra = conj_a(lambda st, p=proj: apply_pair_observable(st, p))(psi0)
        ket = apply_db(apply_da(bra))
        total += lattice_inner(bra, ket)

    out = {
        "value": float(total.real),
        "imag_defect": abs(total.imag),
        "boundary_mass": psi0.meta["boundary_mass"],
        "value_commuted": None,
    }

    at_rest = (not np.any(np.atleast_1d(obs_a.velocity))
               and not np.any(np.atleast_1d(obs_b.velocity)))
    mask_overlap = np.logical_and(region_mask(obs_a.region, grid),
                                  region_mask(obs_b.region, grid))
    if at_rest and tau == 0.0 and not mask_overlap.any():
        da = apply_pair_observable(psi0, delta_a)
        db = apply_pair_observable(psi0, delta_b)
        out["value_commuted"] = float(lattice_inner(da, db).real)
    return out
