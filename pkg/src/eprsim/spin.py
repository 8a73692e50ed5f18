"""Spin-s matrix algebra: generators, axis components, eigenbasis rotations.

Conventions: hbar = 1, Condon-Shortley phases, basis ordered by descending
magnetic quantum number (s, s-1, ..., -s).  A measurement axis is a point
on the unit sphere,

    n = (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)),

and the in-plane rotation axis associated with it is

    omega = (sin(phi), -cos(phi), 0),        omega . n = 0.

The unitary U = exp(i theta omega.S) maps the z eigenbasis onto the
n eigenbasis column by column: (n.S) U = U Sz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Direction",
    "spin_dim",
    "spin_values",
    "spin_index",
    "spin_generators",
    "spin_component",
    "direction_rotation",
    "spin_projector",
]


def _twice(s) -> int:
    """2s as an exact non-negative integer; rejects anything else."""
    t = 2.0 * float(s)
    ti = round(t)
    if abs(t - ti) > 1e-9 or ti < 0:
        raise ValueError(f"spin must be a non-negative half-integer, got {s}")
    return int(ti)


def spin_dim(s) -> int:
    """Dimension 2s+1 of the spin-s representation."""
    return _twice(s) + 1


def spin_values(s) -> np.ndarray:
    """Eigenvalues of Sz in basis order: s, s-1, ..., -s."""
    t = _twice(s)
    return (t - 2.0 * np.arange(t + 1)) / 2.0


def spin_index(s, m) -> int:
    """Basis index of magnetic quantum number m."""
    t = _twice(s)
    k = round(t / 2.0 - float(m))
    if abs((t / 2.0 - float(m)) - k) > 1e-9 or not 0 <= k <= t:
        raise ValueError(f"m={m} is not a valid level for spin {s}")
    return int(k)


@dataclass(frozen=True)
class Direction:
    """Measurement axis on the unit sphere, theta in [0, pi], phi in [0, 2pi)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * math.pi:
            raise ValueError(f"phi must lie in [0, 2*pi), got {self.phi}")

    @property
    def unit(self) -> np.ndarray:
        st, ct = math.sin(self.theta), math.cos(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), ct])

    @property
    def axis(self) -> np.ndarray:
        """Rotation axis omega orthogonal to the direction (degenerate at theta=0)."""
        return np.array([math.sin(self.phi), -math.cos(self.phi), 0.0])

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        r = np.linalg.norm(v)
        if r == 0.0:
            raise ValueError("zero vector has no direction")
        theta = math.acos(min(1.0, max(-1.0, v[2] / r)))
        phi = math.atan2(v[1], v[0]) % (2.0 * math.pi)
        return cls(theta, phi)

    def angle_to(self, other: "Direction") -> float:
        """Angle between two axes, arccos clamped against rounding at +-1."""
        c = float(np.dot(self.unit, other.unit))
        return math.acos(min(1.0, max(-1.0, c)))


def spin_generators(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard (Sx, Sy, Sz) built from ladder operators.

    Satisfies [Si, Sj] = i eps_ijk Sk and the Casimir sum s(s+1) I.
    """
    sv = float(_twice(s)) / 2.0
    m = spin_values(s)
    dim = m.size
    sp = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        mm = m[i + 1]
        sp[i, i + 1] = math.sqrt(sv * (sv + 1.0) - mm * (mm + 1.0))
    sm = sp.conj().T
    sx = (sp + sm) / 2.0
    sy = (sp - sm) / 2.0j
    sz = np.diag(m.astype(complex))
    return sx, sy, sz


def spin_component(n: Direction, s) -> np.ndarray:
    """n.S for the axis n; Hermitian with eigenvalues -s..s."""
    sx, sy, sz = spin_generators(s)
    nx, ny, nz = n.unit
    return nx * sx + ny * sy + nz * sz


def direction_rotation(n: Direction, s) -> np.ndarray:
    """Unitary U = exp(i theta omega.S) whose columns are n.S eigenvectors.

    Column k carries the eigenvalue spin_values(s)[k], i.e. (n.S) U = U Sz.
    Computed by eigendecomposition of the Hermitian omega.S, which is exact
    up to rounding (no series truncation).
    """
    sx, sy, _ = spin_generators(s)
    wx, wy, _ = n.axis
    h = wx * sx + wy * sy
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * n.theta * evals)) @ vecs.conj().T


def spin_projector(n: Direction, lam, s) -> np.ndarray:
    """Rank-one projector onto the n.S eigenvector with eigenvalue lam."""
    u = direction_rotation(n, s)[:, spin_index(s, lam)]
    return np.outer(u, u.conj())
