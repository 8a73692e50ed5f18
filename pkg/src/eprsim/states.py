"""Two-particle wavepacket states as finite sums of Gaussian product terms.

Natural units: hbar = 1, masses dimensionless.  Each spatial factor is a
normalized Gaussian, per axis

    phi(x) = (2 pi sigma^2)^(-1/4)
             * exp( -(1 - i eta) (x - c)^2 / (4 sigma^2) + i k (x - c) ),

times a single packet-level phase exp(i gamma).  ``sigma`` is the standard
deviation of |phi|^2, ``k`` the mean momentum and ``eta`` a quadratic chirp.
The chirp keeps the family closed under free evolution: a packet prepared
with eta = 0 evolves into one with

    sigma(tau)^2 = sigma^2 + (tau / (2 M sigma))^2

and nonzero eta, with the drift c -> c + k tau / M and an exactly tracked
global phase.  Galilean boosts act as

    c -> c - t v,   k -> k - M v,   gamma -> gamma - M t v^2/2 - M v . c',

so all group-law identities hold to machine precision.

Overlaps, norms and box integrals of any two terms reduce to complex
Gaussian integrals, evaluated in closed form with the (complex-argument)
error function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erf as _erf

__all__ = [
    "GaussianPacket",
    "StateTerm",
    "TwoParticleState",
    "norm_squared",
    "inner_product",
    "make_singlet",
    "make_triplet",
    "evolve_free",
    "boost",
    "translate",
    "exchanged",
    "exchange_defect",
    "localized_pair_expectation",
    "packet_values",
    "position_wavefunction",
]

STATISTICS = ("distinguishable", "boson", "fermion")

_SQRT_PI = math.sqrt(math.pi)


def _vec(x, name: str) -> tuple[float, ...]:
    v = tuple(float(c) for c in np.atleast_1d(x))
    if not v:
        raise ValueError(f"{name} must have at least one component")
    return v


@dataclass(frozen=True)
class GaussianPacket:
    """Normalized Gaussian wavepacket with per-axis width, momentum and chirp."""

    center: tuple
    width: tuple
    momentum: tuple | None = None
    phase: float = 0.0
    chirp: tuple | None = None

    def __post_init__(self):
        c = _vec(self.center, "center")
        w = _vec(self.width, "width")
        k = _vec(self.momentum, "momentum") if self.momentum is not None else (0.0,) * len(c)
        eta = _vec(self.chirp, "chirp") if self.chirp is not None else (0.0,) * len(c)
        if not len(c) == len(w) == len(k) == len(eta):
            raise ValueError("center, width, momentum and chirp must share one length")
        if any(s <= 0.0 for s in w):
            raise ValueError("widths must be strictly positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "width", w)
        object.__setattr__(self, "momentum", k)
        object.__setattr__(self, "phase", float(self.phase))
        object.__setattr__(self, "chirp", eta)

    @property
    def dimension(self) -> int:
        return len(self.center)


def _quad_coeff(p: GaussianPacket, j: int) -> complex:
    """Coefficient A in exp(-A (x-c)^2); Re A > 0."""
    s2 = p.width[j] ** 2
    return (1.0 - 1j * p.chirp[j]) / (4.0 * s2)


def _axis_overlap(p1: GaussianPacket, p2: GaussianPacket, j: int,
                  lo: float | None, hi: float | None) -> complex:
    """Integral of conj(phi1) phi2 along axis j, over (lo, hi) or all space."""
    a1 = _quad_coeff(p1, j).conjugate()
    a2 = _quad_coeff(p2, j)
    c1, c2 = p1.center[j], p2.center[j]
    k1, k2 = p1.momentum[j], p2.momentum[j]
    a = a1 + a2
    b = 2.0 * a1 * c1 + 2.0 * a2 * c2 + 1j * (k2 - k1)
    c0 = -a1 * c1 * c1 - a2 * c2 * c2 + 1j * (k1 * c1 - k2 * c2)
    mu = b / (2.0 * a)
    pref = (2.0 * math.pi * p1.width[j] ** 2) ** -0.25 \
        * (2.0 * math.pi * p2.width[j] ** 2) ** -0.25
    amp = pref * cmath.exp(c0 + a * mu * mu)
    root = cmath.sqrt(a)
    if lo is None and hi is None:
        return amp * _SQRT_PI / root
    # erf handles complex arguments (Re a > 0 keeps the integral convergent)
    e_hi = _erf(root * (hi - mu)) if hi is not None else 1.0
    e_lo = _erf(root * (lo - mu)) if lo is not None else -1.0
    return amp * _SQRT_PI / root * 0.5 * (e_hi - e_lo)


def _packet_overlap(p1: GaussianPacket, p2: GaussianPacket,
                    bounds: tuple | None = None) -> complex:
    """<phi1|phi2> over all space or over an axis-aligned box (lo, hi)."""
    if p1.dimension != p2.dimension:
        raise ValueError("packet dimensions differ")
    lo, hi = (None, None) if bounds is None else bounds
    out = cmath.exp(1j * (p2.phase - p1.phase))
    for j in range(p1.dimension):
        out *= _axis_overlap(p1, p2, j,
                             None if lo is None else float(lo[j]),
                             None if hi is None else float(hi[j]))
    return out


@dataclass(frozen=True)
class StateTerm:
    """One Gaussian product term amp * phi(x) chi(y) |m_alpha, m_beta>."""

    amplitude: complex
    packet_alpha: GaussianPacket
    packet_beta: GaussianPacket
    m_alpha: float
    m_beta: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "m_alpha", float(self.m_alpha))
        object.__setattr__(self, "m_beta", float(self.m_beta))


@dataclass(frozen=True)
class TwoParticleState:
    """Finite superposition of Gaussian product terms with spin labels."""

    spin: float
    dimension: int
    mass_alpha: float
    mass_beta: float
    statistics: str
    terms: tuple

    def __post_init__(self):
        if self.statistics not in STATISTICS:
            raise ValueError(f"unknown statistics {self.statistics!r}")
        if self.dimension not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        if self.mass_alpha <= 0.0 or self.mass_beta <= 0.0:
            raise ValueError("masses must be positive")
        if self.statistics != "distinguishable" and self.mass_alpha != self.mass_beta:
            raise ValueError("identical particles must share one mass")
        terms = tuple(self.terms)
        if not terms:
            raise ValueError("state needs at least one term")
        s = float(self.spin)
        for t in terms:
            if abs(t.m_alpha) > s + 1e-12 or abs(t.m_beta) > s + 1e-12:
                raise ValueError(f"spin label outside [-s, s] for s={s}")
            if t.packet_alpha.dimension != self.dimension \
                    or t.packet_beta.dimension != self.dimension:
                raise ValueError("packet dimension does not match the state")
        object.__setattr__(self, "terms", terms)

    def normalized(self) -> "TwoParticleState":
        n2 = norm_squared(self)
        if n2 < 1e-14:
            raise ValueError("cannot normalize a vanishing state")
        scale = 1.0 / math.sqrt(n2)
        return replace(self, terms=tuple(
            replace(t, amplitude=t.amplitude * scale) for t in self.terms))


def inner_product(s1: TwoParticleState, s2: TwoParticleState) -> complex:
    """<s1|s2> via closed-form Gaussian overlaps; spin labels must match."""
    out = 0.0 + 0.0j
    for t1 in s1.terms:
        for t2 in s2.terms:
            if t1.m_alpha != t2.m_alpha or t1.m_beta != t2.m_beta:
                continue
            out += (t1.amplitude.conjugate() * t2.amplitude
                    * _packet_overlap(t1.packet_alpha, t2.packet_alpha)
                    * _packet_overlap(t1.packet_beta, t2.packet_beta))
    return out


def norm_squared(state: TwoParticleState) -> float:
    return inner_product(state, state).real


def localized_pair_expectation(state: TwoParticleState,
                               bounds_alpha: tuple | None,
                               bounds_beta: tuple | None,
                               mat_alpha: np.ndarray,
                               mat_beta: np.ndarray) -> complex:
    """<psi| (1_A x M_a) tensor (1_B x M_b) |psi>.

    ``bounds_*`` is None for all space or a per-axis (lo, hi) pair; the
    spin-space matrices are indexed in the descending-m basis.  This single
    quadratic form covers norms, joint detection probabilities and the
    equal-time correlation contraction.
    """
    from .spin import spin_index

    s = state.spin
    out = 0.0 + 0.0j
    for t1 in state.terms:
        i_a, i_b = spin_index(s, t1.m_alpha), spin_index(s, t1.m_beta)
        for t2 in state.terms:
            j_a, j_b = spin_index(s, t2.m_alpha), spin_index(s, t2.m_beta)
            w = mat_alpha[i_a, j_a] * mat_beta[i_b, j_b]
            if w == 0.0:
                continue
            out += (t1.amplitude.conjugate() * t2.amplitude * w
                    * _packet_overlap(t1.packet_alpha, t2.packet_alpha, bounds_alpha)
                    * _packet_overlap(t1.packet_beta, t2.packet_beta, bounds_beta))
    return out


def exchanged(state: TwoParticleState) -> TwoParticleState:
    """Simultaneous exchange of packets and spin labels."""
    return replace(state, terms=tuple(
        StateTerm(t.amplitude, t.packet_beta, t.packet_alpha, t.m_beta, t.m_alpha)
        for t in state.terms))


def exchange_defect(state: TwoParticleState) -> float:
    """|psi - sign P_ex psi|^2; zero when the state conforms to its statistics.

    Returns 0.0 for distinguishable particles.
    """
    if state.statistics == "distinguishable":
        return 0.0
    sign = 1.0 if state.statistics == "boson" else -1.0
    swapped = exchanged(state)
    n2 = norm_squared(state)
    cross = inner_product(state, swapped).real
    return abs(2.0 * n2 - 2.0 * sign * cross)


def _apply_statistics(state: TwoParticleState) -> TwoParticleState:
    """Project onto the (anti)symmetric subspace and normalize."""
    if state.statistics == "distinguishable":
        return state.normalized()
    sign = 1.0 if state.statistics == "boson" else -1.0
    swapped = exchanged(state)
    combined = replace(state, terms=state.terms + tuple(
        replace(t, amplitude=sign * t.amplitude) for t in swapped.terms))
    if norm_squared(combined) < 1e-12:
        raise ValueError(
            f"state has no {state.statistics} component under exchange")
    return combined.normalized()


def make_singlet(phi: GaussianPacket, chi: GaussianPacket,
                 masses=(1.0, 1.0),
                 statistics: str = "distinguishable") -> TwoParticleState:
    """Spin-1/2 singlet (phi chi) (|+-> - |-+>) / sqrt(2).

    For boson/fermion statistics the product is projected onto the
    (anti)symmetric subspace; the fermion case pairs the antisymmetric spin
    part with a symmetrized spatial part.
    """
    r = 1.0 / math.sqrt(2.0)
    state = TwoParticleState(
        spin=0.5, dimension=phi.dimension,
        mass_alpha=float(masses[0]), mass_beta=float(masses[1]),
        statistics=statistics,
        terms=(StateTerm(r, phi, chi, 0.5, -0.5),
               StateTerm(-r, phi, chi, -0.5, 0.5)))
    return _apply_statistics(state)


def make_triplet(phi: GaussianPacket, chi: GaussianPacket, m_total: int,
                 masses=(1.0, 1.0),
                 statistics: str = "distinguishable") -> TwoParticleState:
    """Spin-1/2 triplet component with total Sz projection m_total in {-1,0,+1}."""
    if m_total not in (-1, 0, 1):
        raise ValueError("m_total must be -1, 0 or +1")
    if m_total == 0:
        r = 1.0 / math.sqrt(2.0)
        terms = (StateTerm(r, phi, chi, 0.5, -0.5),
                 StateTerm(r, phi, chi, -0.5, 0.5))
    else:
        m = 0.5 * m_total
        terms = (StateTerm(1.0, phi, chi, m, m),)
    state = TwoParticleState(
        spin=0.5, dimension=phi.dimension,
        mass_alpha=float(masses[0]), mass_beta=float(masses[1]),
        statistics=statistics, terms=terms)
    return _apply_statistics(state)


def _evolve_packet(p: GaussianPacket, tau: float, mass: float) -> GaussianPacket:
    """Exact free propagation of one packet (see module docstring)."""
    center, width, chirp = [], [], []
    dphase = 0.0
    for j in range(p.dimension):
        a = _quad_coeff(p, j)
        b = 1.0 / (4.0 * a) + 0.5j * tau / mass
        s2 = abs(b) ** 2 / b.real
        width.append(math.sqrt(s2))
        chirp.append(b.imag / b.real)
        center.append(p.center[j] + p.momentum[j] * tau / mass)
        k = p.momentum[j]
        dphase += 0.5 * tau * k * k / mass - 0.5 * (cmath.phase(a) + cmath.phase(b))
    return GaussianPacket(tuple(center), tuple(width), p.momentum,
                          p.phase + dphase, tuple(chirp))


def evolve_free(state: TwoParticleState, tau: float) -> TwoParticleState:
    """Free time evolution by tau >= 0; unitary in closed form."""
    if tau < 0.0:
        raise ValueError("tau must be non-negative")
    if tau == 0.0:
        return state
    return replace(state, terms=tuple(
        replace(t,
                packet_alpha=_evolve_packet(t.packet_alpha, tau, state.mass_alpha),
                packet_beta=_evolve_packet(t.packet_beta, tau, state.mass_beta))
        for t in state.terms))


def _boost_packet(p: GaussianPacket, v: np.ndarray, t: float,
                  mass: float) -> GaussianPacket:
    center = tuple(c - t * vj for c, vj in zip(p.center, v))
    momentum = tuple(k - mass * vj for k, vj in zip(p.momentum, v))
    v2 = float(np.dot(v, v))
    dphase = -0.5 * mass * t * v2 - mass * float(np.dot(v, center))
    return GaussianPacket(center, p.width, momentum, p.phase + dphase, p.chirp)


def boost(state: TwoParticleState, v, t: float) -> TwoParticleState:
    """Galilean boost at time t: positions shift by -t v, momenta by -M v.

    Each particle picks up its own mass-dependent ray phase.  The inverse
    of boost(v, t) is boost(-v, t).
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (state.dimension,):
        raise ValueError("velocity dimension does not match the state")
    return replace(state, terms=tuple(
        replace(t_,
                packet_alpha=_boost_packet(t_.packet_alpha, v, t, state.mass_alpha),
                packet_beta=_boost_packet(t_.packet_beta, v, t, state.mass_beta))
        for t_ in state.terms))


def translate(state: TwoParticleState, a) -> TwoParticleState:
    """Spatial translation: both packets' centers shift by -a."""
    a = np.asarray(a, dtype=float)
    if a.shape != (state.dimension,):
        raise ValueError("translation dimension does not match the state")

    def shift(p: GaussianPacket) -> GaussianPacket:
        return replace(p, center=tuple(c - aj for c, aj in zip(p.center, a)))

    return replace(state, terms=tuple(
        replace(t, packet_alpha=shift(t.packet_alpha), packet_beta=shift(t.packet_beta))
        for t in state.terms))


def packet_values(p: GaussianPacket, points: np.ndarray) -> np.ndarray:
    """Evaluate the packet wavefunction at points of shape (n, d) or (n,)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[1] != p.dimension:
        raise ValueError("points dimension does not match the packet")
    out = np.full(pts.shape[0], cmath.exp(1j * p.phase), dtype=complex)
    for j in range(p.dimension):
        a = _quad_coeff(p, j)
        u = pts[:, j] - p.center[j]
        out *= (2.0 * math.pi * p.width[j] ** 2) ** -0.25 \
            * np.exp(-a * u * u + 1j * p.momentum[j] * u)
    return out


def position_wavefunction(state: TwoParticleState, m_alpha, m_beta,
                          x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """psi_{m_alpha m_beta}(x, y) sampled at paired points x, y."""
    out = None
    for t in state.terms:
        if t.m_alpha != float(m_alpha) or t.m_beta != float(m_beta):
            continue
        v = t.amplitude * packet_values(t.packet_alpha, x) * packet_values(t.packet_beta, y)
        out = v if out is None else out + v
    if out is None:
        n = np.asarray(x).shape[0]
        out = np.zeros(n, dtype=complex)
    return out
