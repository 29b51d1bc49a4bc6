"""
Frenet-Serret apparatus of admissible curves in pseudo-Galilean 4-space.

Every curve provider reduces to a *jet*: the position and its first four
derivatives with respect to arc length, stacked as an array of shape
``(5, n, 4)``. The apparatus is then computed pointwise from the jet, with
the derivatives of the normal and first binormal obtained in closed form
(quotient rule) rather than by differencing the frame again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import numerics
from .errors import DomainOutOfRange, FrenetDegenerate, LightlikeDegeneracy, NotAdmissible
from .linalg import lorentz_dot, pg_cross, pg_dot

__all__ = [
    "KAPPA_MIN",
    "TAU_MIN",
    "FRAME_TOL",
    "ADMISSIBLE_TOL",
    "AdmissibleCurve",
    "AnalyticCurve",
    "Helix",
    "PolynomialCurve",
    "SampledCurve",
    "FrenetApparatus",
    "FramePoint",
    "apparatus_from_jet",
    "frame_at",
    "frenet_apparatus",
    "tangent",
    "curvature_kappa",
    "principal_normal",
    "torsion_tau",
    "binormal1",
    "binormal2",
    "third_curvature_sigma",
    "frenet_matrix",
    "frenet_residuals",
    "pg_gram",
    "sign_rule_eps3",
]

KAPPA_MIN = 1e-9
TAU_MIN = 1e-9
# relative measure |<v,v>| / |v|_E^2 below which an isotropic vector is lightlike
FRAME_TOL = 1e-8
ADMISSIBLE_TOL = 1e-9
UNIFORM_TOL = 1e-12


# ---------------------------------------------------------------------------
# curve providers
# ---------------------------------------------------------------------------


class AdmissibleCurve:
    """A curve ``s -> (x, y, z, w)`` with ``x' != 0``.

    Subclasses implement :meth:`grid_jet`, returning derivatives of orders
    0..4 with respect to arc length on a uniform grid.
    """

    domain: tuple
    n: int

    def grid(self, n: Optional[int] = None, domain: Optional[Sequence[float]] = None) -> np.ndarray:
        a, b = domain if domain is not None else self.domain
        return np.linspace(float(a), float(b), int(n or self.n))

    def grid_jet(self, n=None, domain=None):
        """Return ``(s, jet, speed)`` on the evaluation grid."""
        raise NotImplementedError


class AnalyticCurve(AdmissibleCurve):
    """Curve given by a callable ``jet(s) -> array (5, len(s), 4)``.

    The callable must return derivatives with respect to arc length, so the
    first component of the first derivative must be exactly 1.
    """

    def __init__(self, jet: Callable[[np.ndarray], np.ndarray], domain=(0.0, 1.0), n: int = 256):
        self._jet = jet
        self.domain = (float(domain[0]), float(domain[1]))
        self.n = int(n)

    def jet(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        J = np.asarray(self._jet(s), dtype=float)
        bad = np.abs(J[1, :, 0] - 1.0) > ADMISSIBLE_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NotAdmissible(f"x'(s) = {J[1, i, 0]!r} at s = {s[i]!r}; arc-length curves need x' = 1")
        return J

    def grid_jet(self, n=None, domain=None):
        s = self.grid(n, domain)
        return s, self.jet(s), np.ones_like(s)

    def sample(self, n=None, domain=None) -> "SampledCurve":
        s = self.grid(n, domain)
        return SampledCurve(s, self.jet(s)[0])


class Helix(AnalyticCurve):
    """``(s, b s, a cos ks, a sin ks)``."""

    def __init__(self, a: float = 1.0, b: float = 1.0, k: float = 1.0, domain=(0.0, 2 * math.pi), n: int = 512):
        self.a, self.b, self.k = float(a), float(b), float(k)
        super().__init__(self._helix_jet, domain, n)

    def _helix_jet(self, s):
        a, b, k = self.a, self.b, self.k
        c, sn = np.cos(k * s), np.sin(k * s)
        z = np.zeros_like(s)
        one = np.ones_like(s)
        return np.stack(
            [
                np.stack([s, b * s, a * c, a * sn], axis=-1),
                np.stack([one, b * one, -a * k * sn, a * k * c], axis=-1),
                np.stack([z, z, -a * k**2 * c, -a * k**2 * sn], axis=-1),
                np.stack([z, z, a * k**3 * sn, -a * k**3 * c], axis=-1),
                np.stack([z, z, a * k**4 * c, a * k**4 * sn], axis=-1),
            ]
        )

    def __repr__(self):
        return f"Helix(a={self.a}, b={self.b}, k={self.k}, domain={self.domain}, n={self.n})"


class PolynomialCurve(AnalyticCurve):
    """``(s, y(s), z(s), w(s))`` with polynomial coordinates.

    Coefficients are given in increasing degree order.
    """

    def __init__(self, y: Sequence[float], z: Sequence[float], w: Sequence[float], domain=(0.0, 1.0), n: int = 256):
        P = np.polynomial.Polynomial
        self.polys = [P([0.0, 1.0]), P(list(y) or [0.0]), P(list(z) or [0.0]), P(list(w) or [0.0])]
        super().__init__(self._poly_jet, domain, n)

    def _poly_jet(self, s):
        return np.stack([np.stack([p.deriv(m)(s) if m else p(s) for p in self.polys], axis=-1) for m in range(5)])


class SampledCurve(AdmissibleCurve):
    """Positions on a uniform parameter grid.

    The parameter need not be arc length; derivatives are taken with
    respect to the grid parameter by finite differences and converted to
    arc-length derivatives by the chain rule, using ``ds/du = x_u``.
    """

    def __init__(self, s, positions, accuracy: int = 4):
        s = np.asarray(s, dtype=float)
        P = np.asarray(positions, dtype=float)
        if P.shape != (s.size, 4):
            raise ValueError("positions must have shape (n, 4)")
        if s.size < 2:
            raise ValueError("need at least two samples")
        steps = np.diff(s)
        h = float(steps.mean())
        if h <= 0 or np.max(np.abs(steps - h)) > UNIFORM_TOL * max(abs(h), 1.0) * max(1.0, np.max(np.abs(s))):
            raise ValueError("sampled grids must be uniform and increasing")
        if not np.all(np.isfinite(P)):
            raise ValueError("positions must be finite")
        self.s = s
        self.positions = P
        self.h = h
        self.accuracy = accuracy
        self.domain = (float(s[0]), float(s[-1]))
        self.n = s.size

    def grid_jet(self, n=None, domain=None):
        if (n is not None and int(n) != self.n) or (
            domain is not None and not np.allclose(domain, self.domain, rtol=0, atol=1e-12 * max(1.0, abs(self.h)))
        ):
            raise DomainOutOfRange("a sampled curve is evaluated on its own grid only")
        Ju = [self.positions] + [numerics.diff(self.positions, self.h, m, self.accuracy) for m in (1, 2, 3, 4)]
        return self.s, *reparameterize_jet(np.stack(Ju))


def reparameterize_jet(Ju: np.ndarray):
    """Convert u-derivatives to arc-length derivatives.

    ``Ju`` has shape (5, n, 4); the arc length is the first coordinate, so
    ``g = x_u`` is the speed. Returns ``(jet_s, speed)`` with the first
    components of the arc-length jet set to (x, 1, 0, 0, 0) exactly.
    """
    g, g1, g2, g3 = Ju[1, :, 0], Ju[2, :, 0], Ju[3, :, 0], Ju[4, :, 0]
    bad = ~(g > 0)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotAdmissible(f"x'(u) = {g[i]!r} at index {i}; admissible curves need x' > 0", )
    # derivatives of the inverse map u(s)
    u1 = 1.0 / g
    u2 = -g1 / g**3
    u3 = (3.0 * g1**2 - g * g2) / g**5
    u4 = (-(g**2) * g3 + 10.0 * g * g1 * g2 - 15.0 * g1**3) / g**7
    u1, u2, u3, u4 = (c[:, None] for c in (u1, u2, u3, u4))
    F1, F2, F3, F4 = Ju[1], Ju[2], Ju[3], Ju[4]
    Js = np.empty_like(Ju)
    Js[0] = Ju[0]
    Js[1] = F1 * u1
    Js[2] = F2 * u1**2 + F1 * u2
    Js[3] = F3 * u1**3 + 3.0 * F2 * u1 * u2 + F1 * u3
    Js[4] = F4 * u1**4 + 6.0 * F3 * u1**2 * u2 + F2 * (3.0 * u2**2 + 4.0 * u1 * u3) + F1 * u4
    Js[1, :, 0] = 1.0
    Js[2:, :, 0] = 0.0
    return Js, g


# ---------------------------------------------------------------------------
# pointwise apparatus
# ---------------------------------------------------------------------------


@dataclass
class FramePoint:
    """Frame, curvatures and their derivatives at a set of points.

    Arrays are per point; the signs here are pointwise (no global choice).
    """

    T: np.ndarray
    N: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray
    dN: np.ndarray
    dB1: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    mu: np.ndarray


def _normalize_isotropic(v, vmin, what, index_offset=0, strict=True):
    """Return (|<v,v>|^(1/2), sign) and raise on degeneracy."""
    q = lorentz_dot(v, v)
    nrm = np.sqrt(np.abs(q))
    e2 = np.einsum("...i,...i->...", v[..., 1:], v[..., 1:])
    if strict:
        light = (np.abs(q) <= FRAME_TOL * e2) & (np.sqrt(e2) > vmin)
        small = nrm <= vmin
        if np.any(light):
            i = int(np.argmax(light))
            raise LightlikeDegeneracy(f"{what} is lightlike at grid index {i + index_offset}", i + index_offset, what)
        if np.any(small):
            i = int(np.argmax(small))
            quantity = {"N": "kappa", "B1": "tau"}[what]
            raise FrenetDegenerate(
                f"{quantity} = {float(np.ravel(nrm)[i]):.3g} <= {vmin:g} at grid index {i + index_offset}",
                i + index_offset,
                quantity,
            )
    return nrm, np.sign(q)


def apparatus_from_jet(J: np.ndarray, kappa_min: float = KAPPA_MIN, tau_min: float = TAU_MIN, stop_at: str = "sigma") -> FramePoint:
    """Pointwise apparatus from an arc-length jet of shape (5, n, 4).

    ``stop_at`` may be ``"N"``, ``"B1"`` or ``"B2"`` to skip the later
    quantities (their fields are then ``None``); this lets flows that only
    move along the tangent avoid needing a nondegenerate normal.
    """
    T = J[1].copy()
    T[:, 0] = 1.0
    P2 = J[2].copy()
    P3 = J[3].copy()
    P4 = J[4].copy()
    P2[:, 0] = P3[:, 0] = P4[:, 0] = 0.0
    none = dict(N=None, B1=None, B2=None, kappa=None, tau=None, sigma=None, dN=None, dB1=None, eps1=None, eps2=None, mu=None)
    if stop_at == "T":
        return FramePoint(T=T, **none)

    kappa, s1 = _normalize_isotropic(P2, kappa_min, "N")
    k = kappa[:, None]
    q23 = lorentz_dot(P2, P3)
    dkappa = s1 * q23 / kappa
    N = P2 / k
    dN = P3 / k - P2 * (dkappa / kappa**2)[:, None]
    if stop_at == "N":
        none.update(N=N, kappa=kappa, eps1=s1, dN=dN)
        return FramePoint(T=T, **{kk: v for kk, v in none.items()})

    tau, s2 = _normalize_isotropic(dN, tau_min, "B1")
    B1 = dN / tau[:, None]
    cr = pg_cross(T, N, B1)
    M = np.stack([T, N, B1, cr], axis=-2)
    mu = np.sign(numerics.det4(M))
    B2 = mu[:, None] * cr

    sigma = dB1 = None
    if stop_at == "sigma":
        q33 = lorentz_dot(P3, P3)
        q24 = lorentz_dot(P2, P4)
        ddkappa = (s1 * (q33 + q24) - dkappa**2) / kappa
        ddN = (
            P4 / k
            - 2.0 * P3 * (dkappa / kappa**2)[:, None]
            - P2 * (ddkappa / kappa**2)[:, None]
            + 2.0 * P2 * (dkappa**2 / kappa**3)[:, None]
        )
        dtau = s2 * lorentz_dot(dN, ddN) / tau
        dB1 = ddN / tau[:, None] - dN * (dtau / tau**2)[:, None]
        sigma = lorentz_dot(dB1, B2)
    return FramePoint(T=T, N=N, B1=B1, B2=B2, kappa=kappa, tau=tau, sigma=sigma, dN=dN, dB1=dB1, eps1=s1, eps2=s2, mu=mu)


def frame_at(curve: AdmissibleCurve, s) -> FramePoint:
    """Pointwise apparatus at parameter value(s) ``s``.

    Analytic curves are evaluated directly; sampled curves only at their
    grid nodes.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    lo, hi = curve.domain
    span = hi - lo
    if np.any(s_arr < lo - 1e-12 * max(1.0, abs(span))) or np.any(s_arr > hi + 1e-12 * max(1.0, abs(span))):
        raise DomainOutOfRange(f"s outside the curve domain {curve.domain}")
    if isinstance(curve, AnalyticCurve):
        return apparatus_from_jet(curve.jet(s_arr))
    grid, J, _ = curve.grid_jet()
    idx = np.rint((s_arr - grid[0]) / curve.h).astype(int)
    if np.any(np.abs(grid[idx] - s_arr) > 1e-9 * curve.h):
        raise DomainOutOfRange("sampled curves are evaluated at grid nodes only")
    return apparatus_from_jet(J[:, idx])


def _one(x):
    return x[0] if np.ndim(x) and np.shape(x)[0] == 1 else x


def tangent(curve, s):
    return _one(apparatus_from_jet(_jet_at(curve, s), stop_at="T").T)


def curvature_kappa(curve, s):
    J = _jet_at(curve, s)
    P2 = J[2].copy()
    P2[:, 0] = 0.0
    return _one(np.sqrt(np.abs(lorentz_dot(P2, P2))))


def principal_normal(curve, s):
    return _one(apparatus_from_jet(_jet_at(curve, s), stop_at="N").N)


def torsion_tau(curve, s):
    return _one(apparatus_from_jet(_jet_at(curve, s), stop_at="B2").tau)


def binormal1(curve, s):
    return _one(apparatus_from_jet(_jet_at(curve, s), stop_at="B2").B1)


def binormal2(T, N, B1):
    """``mu * T ^ N ^ B1`` with ``mu`` making det[T, N, B1, B2] = +1."""
    cr = pg_cross(T, N, B1)
    mu = np.sign(numerics.det4(np.stack([np.asarray(T, float), np.asarray(N, float), np.asarray(B1, float), cr], axis=-2)))
    return mu[..., None] * cr if np.ndim(mu) else mu * cr


def third_curvature_sigma(curve, s):
    return _one(frame_at(curve, s).sigma)


def _jet_at(curve, s):
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if isinstance(curve, AnalyticCurve):
        return curve.jet(s_arr)
    grid, J, _ = curve.grid_jet()
    idx = np.rint((s_arr - grid[0]) / curve.h).astype(int)
    if np.any(idx < 0) or np.any(idx >= grid.size) or np.any(np.abs(grid[idx] - s_arr) > 1e-9 * curve.h):
        raise DomainOutOfRange("sampled curves are evaluated at grid nodes only")
    return J[:, idx]


# ---------------------------------------------------------------------------
# grid apparatus
# ---------------------------------------------------------------------------


def sign_rule_eps3(eps1: int, eps2: int) -> int:
    return 1 if (eps1 == -1 or eps2 == -1) else -1


@dataclass
class FrenetApparatus:
    """Per-grid-point frames and curvatures with global signs."""

    s: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray
    eps1: int
    eps2: int
    eps3: int
    mu: int
    speed: np.ndarray = field(default=None)
    dN: np.ndarray = field(default=None, repr=False)
    dB1: np.ndarray = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.s.size

    @property
    def h(self) -> float:
        return float(self.s[1] - self.s[0])

    @property
    def eps(self) -> tuple:
        return (self.eps1, self.eps2, self.eps3)

    @property
    def frames(self) -> np.ndarray:
        """Frames stacked as (n, 4, 4) with rows T, N, B1, B2."""
        return np.stack([self.T, self.N, self.B1, self.B2], axis=-2)

    def gram(self) -> np.ndarray:
        return pg_gram(self.T, self.N, self.B1, self.B2)

    def determinant(self) -> np.ndarray:
        return numerics.det4(self.frames)

    def subset(self, idx) -> "FrenetApparatus":
        pick = lambda a: None if a is None else a[idx]
        return FrenetApparatus(
            s=self.s[idx], T=self.T[idx], N=self.N[idx], B1=self.B1[idx], B2=self.B2[idx],
            kappa=self.kappa[idx], tau=self.tau[idx], sigma=self.sigma[idx],
            eps1=self.eps1, eps2=self.eps2, eps3=self.eps3, mu=self.mu,
            speed=pick(self.speed), dN=pick(self.dN), dB1=pick(self.dB1),
        )


def _fixed_sign(values, name, exc=LightlikeDegeneracy):
    n = values.size
    ref = values[n // 2]
    flips = values != ref
    if np.any(flips):
        i = int(np.argmax(flips))
        raise exc(f"{name} changes sign at grid index {i} (reference {int(ref):+d} at index {n // 2})", i, name)
    return int(ref)


def frenet_apparatus(curve: AdmissibleCurve, n: Optional[int] = None, domain=None) -> FrenetApparatus:
    """Full apparatus on the curve's evaluation grid.

    The signs (eps1, eps2, eps3) and the orientation factor mu are fixed at
    the grid midpoint and required to be constant along the grid.
    """
    s, J, speed = curve.grid_jet(n, domain)
    fp = apparatus_from_jet(J)
    e1 = _fixed_sign(fp.eps1, "eps1")
    e2 = _fixed_sign(fp.eps2, "eps2")
    mu = _fixed_sign(fp.mu, "mu", exc=FrenetDegenerate)
    q3 = lorentz_dot(fp.B2, fp.B2)
    e3 = _fixed_sign(np.sign(q3), "eps3")
    return FrenetApparatus(
        s=s, T=fp.T, N=fp.N, B1=fp.B1, B2=fp.B2, kappa=fp.kappa, tau=fp.tau, sigma=fp.sigma,
        eps1=e1, eps2=e2, eps3=e3, mu=mu, speed=speed, dN=fp.dN, dB1=fp.dB1,
    )


def pg_gram(T, N, B1, B2) -> np.ndarray:
    """pg scalar products of the four frame fields, shape (n, 4, 4)."""
    F = [np.asarray(v, float) for v in (T, N, B1, B2)]
    G = np.empty(F[0].shape[:-1] + (4, 4))
    for i in range(4):
        for j in range(4):
            G[..., i, j] = pg_dot(F[i], F[j])
    return G


def frenet_matrix(kappa, tau, sigma, eps) -> np.ndarray:
    """Coefficient matrix C with d/ds [T, N, B1, B2] = C [T, N, B1, B2].

    Note ``eps3*sigma`` in the B1 row against ``-eps2*sigma`` in the B2 row.
    """
    e1, e2, e3 = eps
    kappa, tau, sigma = np.broadcast_arrays(*(np.asarray(x, float) for x in (kappa, tau, sigma)))
    C = np.zeros(kappa.shape + (4, 4))
    C[..., 0, 1] = e1 * kappa
    C[..., 1, 2] = e2 * tau
    C[..., 2, 1] = -e2 * tau
    C[..., 2, 3] = e3 * sigma
    C[..., 3, 2] = -e2 * sigma
    return C


def frenet_residuals(app: FrenetApparatus, accuracy: int = 2) -> dict:
    """Max Euclidean residual of each frame-derivative row.

    The s-derivatives of the stored frames are taken by finite differences
    of the given accuracy and compared with the Frenet matrix applied to the
    frame. Keys: ``"T"``, ``"N"``, ``"B1"``, ``"B2"``.
    """
    F = app.frames
    dF = numerics.diff(F, app.h, 1, accuracy)
    rhs = np.einsum("nij,njk->nik", frenet_matrix(app.kappa, app.tau, app.sigma, app.eps), F)
    r = np.linalg.norm(dF - rhs, axis=-1).max(axis=0)
    return dict(zip(("T", "N", "B1", "B2"), (float(x) for x in r)))
