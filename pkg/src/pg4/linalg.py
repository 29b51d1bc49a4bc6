"""
Pseudo-Galilean linear algebra on 4-vectors.

The scalar product uses the first coordinate alone whenever either vector
has a nonzero first component, and the signature (-, +, +) product on the
remaining three coordinates when both are isotropic (first component 0).
All functions accept single vectors or stacked arrays of shape ``(..., 4)``;
branch selection is then done per element.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .numerics import det3

__all__ = [
    "ISO_TOL",
    "PGVec4",
    "CausalCharacter",
    "lorentz_dot",
    "pg_dot",
    "pg_norm",
    "classify",
    "pg_cross",
    "pg_distance",
]

# Threshold on |first component| separating isotropic from non-isotropic.
ISO_TOL = 1e-12


@dataclass(frozen=True)
class PGVec4:
    x: float
    y: float
    z: float
    w: float

    def __post_init__(self):
        for name in ("x", "y", "z", "w"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"PGVec4.{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, v) -> "PGVec4":
        a = np.asarray(v, dtype=float).reshape(4)
        return cls(*a)

    def __iter__(self):
        return iter((self.x, self.y, self.z, self.w))

    def __len__(self):
        return 4

    def __getitem__(self, i):
        return (self.x, self.y, self.z, self.w)[i]

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z, self.w], dtype=dtype or float)

    def __add__(self, other):
        return PGVec4.of(np.asarray(self) + np.asarray(other))

    def __sub__(self, other):
        return PGVec4.of(np.asarray(self) - np.asarray(other))

    def __mul__(self, c):
        return PGVec4.of(np.asarray(self) * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return PGVec4(-self.x, -self.y, -self.z, -self.w)

    @property
    def is_isotropic(self) -> bool:
        return abs(self.x) <= ISO_TOL


class CausalCharacter(enum.Enum):
    NonIsotropic = "non-isotropic"
    SpacelikeIsotropic = "spacelike"
    TimelikeIsotropic = "timelike"
    Lightlike = "lightlike"


def _arr(u):
    return np.asarray(u, dtype=float)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def lorentz_dot(u, v):
    """Signature (-, +, +) product of the last three components."""
    u, v = _arr(u), _arr(v)
    return -u[..., 1] * v[..., 1] + u[..., 2] * v[..., 2] + u[..., 3] * v[..., 3]


def pg_dot(u, v, tol: float = ISO_TOL):
    """Pseudo-Galilean scalar product.

    ``u1*v1`` if either first component is nonzero (beyond ``tol``), else
    ``-u2 v2 + u3 v3 + u4 v4``. A mixed pair (one isotropic, one not) gives
    ``u1*v1 = 0`` exactly.
    """
    u, v = _arr(u), _arr(v)
    first = (np.abs(u[..., 0]) > tol) | (np.abs(v[..., 0]) > tol)
    return _scalar_or_array(np.where(first, u[..., 0] * v[..., 0], lorentz_dot(u, v)))


def pg_norm(u, tol: float = ISO_TOL):
    return _scalar_or_array(np.sqrt(np.abs(pg_dot(u, u, tol))))


def classify(u, tol: float = ISO_TOL) -> CausalCharacter:
    """Causal character of a single vector."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    u = _arr(u).reshape(4)
    if abs(u[0]) > tol:
        return CausalCharacter.NonIsotropic
    q = float(lorentz_dot(u, u))
    if abs(q) <= tol:
        return CausalCharacter.Lightlike
    return CausalCharacter.SpacelikeIsotropic if q > 0 else CausalCharacter.TimelikeIsotropic


def pg_cross(u, v, w, tol: float = ISO_TOL):
    """Triple cross product ``u ^ v ^ w``.

    The formal 4x4 determinant is expanded along its symbolic first row,
    ``(0, -e2, e3, e4)`` when any of u, v, w is non-isotropic and
    ``(-e1, e2, e3, e4)`` when all three are isotropic.
    """
    u, v, w = _arr(u), _arr(v), _arr(w)
    shape = np.broadcast_shapes(u.shape, v.shape, w.shape)
    u, v, w = (np.broadcast_to(a, shape) for a in (u, v, w))

    def minor(j):
        cols = [k for k in range(4) if k != j]
        return det3(u[..., cols], v[..., cols], w[..., cols])

    m = [minor(j) for j in range(4)]
    # cofactor C_1j = (-1)**j * M_1j with 0-based j
    c = [m[0], -m[1], m[2], -m[3]]
    mixed = (np.abs(u[..., 0]) > tol) | (np.abs(v[..., 0]) > tol) | (np.abs(w[..., 0]) > tol)
    out_mixed = np.stack([np.zeros_like(c[0]), -c[1], c[2], c[3]], axis=-1)
    out_iso = np.stack([-c[0], c[1], c[2], c[3]], axis=-1)
    return np.where(mixed[..., None], out_mixed, out_iso)


def pg_distance(p1, p2, tol: float = ISO_TOL):
    """Pseudo-Galilean distance between two points."""
    p1, p2 = _arr(p1), _arr(p2)
    d = p2 - p1
    spatial = np.sqrt(np.abs(lorentz_dot(d, d)))
    return _scalar_or_array(np.where(np.abs(d[..., 0]) > tol, np.abs(d[..., 0]), spatial))
