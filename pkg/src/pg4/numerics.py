"""
Shared numerical kernels: finite-difference stencils, composite quadrature,
convergence-order fits and small dense linear algebra.

Everything here is stateless; stencils are cached per (order, offsets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateFit, GridTooSmall, NormTooLarge

__all__ = [
    "Stencil",
    "make_stencil",
    "central_stencil",
    "diff",
    "simpson",
    "simpson_error",
    "det3",
    "det4",
    "expm4",
    "observed_order",
    "SATURATION_FLOOR",
]

SATURATION_FLOOR = 1e-14
EXPM_MAX_NORM = 10.0


@dataclass(frozen=True)
class Stencil:
    """Finite-difference weights on integer offsets, for unit spacing.

    Apply with ``sum(w * f[i + o]) / h**order``.
    """

    order: int
    offsets: tuple
    weights: tuple

    @property
    def accuracy(self) -> int:
        n = len(self.offsets)
        acc = n - self.order
        # symmetric stencils pick up one order for free when parity matches
        if _is_symmetric(self.offsets) and (n - self.order) % 2 == 1:
            acc += 1
        return acc

    def moments(self, upto: int) -> np.ndarray:
        """Return ``sum(w * o**p)`` for p = 0..upto."""
        o = np.asarray(self.offsets, dtype=float)
        w = np.asarray(self.weights)
        return np.array([np.sum(w * o**p) for p in range(upto + 1)])

    def check_moments(self, tol: float = 1e-9) -> None:
        """Raise if the moment conditions fail up to order+accuracy-1."""
        top = self.order + self.accuracy - 1
        got = self.moments(top)
        want = np.zeros(top + 1)
        want[self.order] = math.factorial(self.order)
        o = np.abs(np.asarray(self.offsets, dtype=float))
        w = np.abs(np.asarray(self.weights))
        scale = np.array([max(1.0, np.sum(w * o**p)) for p in range(top + 1)])
        if np.any(np.abs(got - want) > tol * scale):
            raise ValueError(f"stencil {self} fails moment conditions: {got}")

    def apply(self, samples: np.ndarray, h: float, i: int):
        f = np.asarray(samples)
        acc = 0.0
        for o, w in zip(self.offsets, self.weights):
            acc = acc + w * f[i + o]
        return acc / h**self.order


def _is_symmetric(offsets) -> bool:
    return tuple(sorted(-o for o in offsets)) == tuple(sorted(offsets))


@lru_cache(maxsize=None)
def make_stencil(order: int, offsets: tuple) -> Stencil:
    """Solve the Vandermonde moment system for the given offsets.

    The system is solved exactly in rationals, so symmetric stencils come
    out exactly (anti)symmetric and annihilate constants without residue.
    """
    offsets = tuple(int(o) for o in offsets)
    n = len(offsets)
    if order < 0 or n <= order:
        raise ValueError(f"need more than {order} offsets, got {n}")
    if len(set(offsets)) != n:
        raise ValueError("stencil offsets must be distinct")
    A = [[Fraction(o) ** p for o in offsets] + [Fraction(math.factorial(order) if p == order else 0)] for p in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                fac = A[r][col] / A[col][col]
                A[r] = [a - fac * b for a, b in zip(A[r], A[col])]
    w = [A[i][n] / A[i][i] for i in range(n)]
    st = Stencil(order, offsets, tuple(float(x) for x in w))
    st.check_moments()
    return st


def _central_half_width(order: int, accuracy: int) -> int:
    return (order + 1) // 2 - 1 + accuracy // 2


def central_stencil(order: int, accuracy: int) -> Stencil:
    if accuracy % 2:
        raise ValueError("central stencils need an even accuracy")
    p = _central_half_width(order, accuracy)
    return make_stencil(order, tuple(range(-p, p + 1)))


def diff(samples, h: float, derivative_order: int = 1, accuracy: int = 4) -> np.ndarray:
    """Differentiate uniformly spaced samples along axis 0.

    Interior points use the central stencil of the requested accuracy;
    the boundary bands use shifted one-sided stencils with
    ``derivative_order + accuracy`` points, so the accuracy order holds
    up to the ends.

    Parameters
    ----------
    samples : array_like, shape (n, ...)
    h : float
        Grid spacing.
    derivative_order : int
        1 to 4.
    accuracy : int
        Even accuracy order (2, 4, 6, ...).

    Returns
    -------
    np.ndarray with the same shape as ``samples``.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if derivative_order not in (1, 2, 3, 4):
        raise ValueError("derivative_order must be in 1..4")
    f = np.asarray(samples, dtype=float)
    n = f.shape[0]
    p = _central_half_width(derivative_order, accuracy)
    q = derivative_order + accuracy
    if n < max(2 * p + 1, q):
        raise GridTooSmall(
            f"{n} samples are too few for a derivative of order "
            f"{derivative_order} at accuracy {accuracy}"
        )

    # Weights sum to zero, so differencing against the centre value first
    # makes constant data give exactly zero.
    out = np.empty_like(f)
    st = central_stencil(derivative_order, accuracy)
    centre = f[p : n - p]
    interior = np.zeros_like(centre)
    for o, w in zip(st.offsets, st.weights):
        if w != 0.0 and o != 0:
            interior += w * (f[p + o : n - p + o] - centre)
    out[p : n - p] = interior

    for i in list(range(p)) + list(range(n - p, n)):
        start = 0 if i < p else n - q
        bst = make_stencil(derivative_order, tuple(range(start - i, start - i + q)))
        acc = np.zeros_like(f[0])
        for o, w in zip(bst.offsets, bst.weights):
            if o != 0:
                acc = acc + w * (f[i + o] - f[i])
        out[i] = acc
    return out / h**derivative_order


def simpson(samples, h: float) -> float:
    """Composite Simpson rule along axis 0.

    An odd number of intervals is closed with a Simpson 3/8 panel over the
    last three intervals.
    """
    f = np.asarray(samples)
    f = f.astype(complex if np.iscomplexobj(f) else float, copy=False)
    n = f.shape[0]
    if n < 3:
        raise GridTooSmall("Simpson needs at least 3 samples")
    if (n - 1) % 2 == 0:
        return _simpson_even(f, h)
    if n == 4:
        return _three_eighths(f, h)
    return _simpson_even(f[: n - 3], h) + _three_eighths(f[n - 4 :], h)


def _simpson_even(f, h):
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum(axis=0) + 2.0 * f[2:-1:2].sum(axis=0))


def _three_eighths(f, h):
    return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3])


def simpson_error(samples, h: float) -> float:
    """Richardson estimate ``|S(h) - S(2h)| / 15`` of the Simpson error.

    With an odd interval count the comparison runs on the leading even
    part, and the trailing 3/8 panel adds its own leading error term with
    the fourth derivative taken from a fourth difference. A bound on the
    summation rounding is added so the estimate never drops below what
    floating point can resolve. Returns ``nan`` when the grid is too
    coarse for a 2h comparison.
    """
    f = np.asarray(samples)
    n = f.shape[0]
    m = n if (n - 1) % 2 == 0 else n - 3
    if m < 5:
        return float("nan")
    fine = simpson(f[:m], h)
    coarse = simpson(f[:m:2], 2.0 * h)
    est = float(np.max(np.abs(fine - coarse))) / 15.0
    if m != n:
        # 3/8 panel error is (3/80) h^5 f4; f4 comes from the last five samples
        d4 = f[-5] - 4.0 * f[-4] + 6.0 * f[-3] - 4.0 * f[-2] + f[-1]
        est += 3.0 / 80.0 * abs(h) * float(np.max(np.abs(d4)))
    # pairwise summation bound on the rounding in the weighted sum
    rounding = (math.log2(n) + 1.0) * np.finfo(float).eps * abs(h) * float(np.max(np.sum(np.abs(f), axis=0)))
    return est + rounding


def det3(a, b, c):
    """Determinant of the 3x3 matrix with rows a, b, c (vectorized)."""
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    return (
        a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
        - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
        + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0])
    )


def det4(m) -> float:
    """Determinant of a 4x4 matrix by cofactor expansion along row 0.

    Accepts a ``(..., 4, 4)`` array or a sequence of four 4-vectors
    (taken as columns; the determinant is transpose-invariant).
    """
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (4, 4):
        raise ValueError("det4 needs 4x4 input")
    total = 0.0
    for j in range(4):
        cols = [k for k in range(4) if k != j]
        minor = det3(m[..., 1, cols], m[..., 2, cols], m[..., 3, cols])
        total = total + (-1) ** j * m[..., 0, j] * minor
    return total


def expm4(M, t: float = 1.0, order: int = 18) -> np.ndarray:
    """Matrix exponential ``exp(M t)`` by scaling and squaring.

    A truncated Taylor series is evaluated on ``M t / 2**s`` with the
    scaled norm at most 1/2, then squared ``s`` times.
    """
    A = np.asarray(M, dtype=float) * t
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expm4 needs a square matrix")
    norm = float(np.max(np.sum(np.abs(A), axis=0)))
    if norm > EXPM_MAX_NORM:
        raise NormTooLarge(f"||M t||_1 = {norm:.3g} exceeds {EXPM_MAX_NORM}")
    s = 0 if norm <= 0.5 else int(math.ceil(math.log2(norm / 0.5)))
    A = A / 2.0**s
    eye = np.eye(A.shape[0])
    # Horner form of sum_{j<=order} A^j / j!
    E = eye.copy()
    for j in range(order, 0, -1):
        E = eye + A @ E / j
    for _ in range(s):
        E = E @ E
    return E


def observed_order(errors: Iterable[Sequence[float]], floor: float = SATURATION_FLOOR) -> float:
    """Least-squares slope of log(err) against log(h).

    Pairs with ``err <= floor`` sit at the round-off floor and are dropped;
    if fewer than two remain the fit is saturated and ``DegenerateFit`` is
    raised (its ``saturated`` attribute is True).
    """
    pairs = [(float(h), float(e)) for h, e in errors]
    if len(pairs) < 2:
        raise ValueError("need at least two refinement levels")
    if any(h <= 0 for h, _ in pairs):
        raise ValueError("grid spacings must be positive")
    kept = [(h, e) for h, e in pairs if e > floor]
    if len(kept) < 2:
        err = DegenerateFit("errors are at the round-off floor")
        err.saturated = True
        raise err
    x = np.log([h for h, _ in kept])
    y = np.log([e for _, e in kept])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
