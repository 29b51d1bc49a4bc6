"""
Curve flows: velocity fields in the moving frame, method-of-lines
evolution, the inextensibility test, extended (time) Frenet coefficients
and frame transport under a prescribed coefficient matrix.

Grid labels ``u`` are material coordinates: each grid point follows one
particle of the curve, flow components are evaluated at ``(u, t)``, and
time derivatives are taken at fixed grid index.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import numerics
from .errors import FrenetDegenerate, GramDrift, InsufficientHistory, StepRejected
from .frenet import (
    AdmissibleCurve,
    FrenetApparatus,
    SampledCurve,
    apparatus_from_jet,
    frenet_apparatus,
    reparameterize_jet,
)
from .linalg import pg_distance, pg_dot

log = logging.getLogger(__name__)

__all__ = [
    "Const",
    "PolyS",
    "Sinusoid",
    "Table",
    "FlowField",
    "EvolutionState",
    "History",
    "ExtendedCoeffs",
    "polyline_arclength",
    "speed_rate",
    "is_inextensible",
    "xi_coeffs",
    "gamma_coeffs_numeric",
    "extended_coeffs",
    "extended_frenet_matrix",
    "evolve",
    "frame_evolve",
    "induced_gram",
]


# ---------------------------------------------------------------------------
# flow components
# ---------------------------------------------------------------------------


class Component:
    """Scalar flow component f(s, t) with analytic s-derivatives."""

    family = "component"

    def __call__(self, s, t=0.0, order: int = 0) -> np.ndarray:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False


@dataclass(frozen=True)
class Const(Component):
    c: float
    family = "constant"

    def __call__(self, s, t=0.0, order=0):
        s = np.asarray(s, dtype=float)
        return np.full(s.shape, self.c if order == 0 else 0.0)

    def to_spec(self):
        return {"const": self.c}

    def is_zero(self):
        return self.c == 0.0


@dataclass(frozen=True)
class PolyS(Component):
    coeffs: tuple
    family = "polynomial-in-s"

    def __call__(self, s, t=0.0, order=0):
        p = np.polynomial.Polynomial(self.coeffs or (0.0,))
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(p.deriv(order)(s) if order else p(s), s.shape).astype(float)

    def to_spec(self):
        return {"poly_s": list(self.coeffs)}

    def is_zero(self):
        return all(c == 0.0 for c in self.coeffs)


@dataclass(frozen=True)
class Sinusoid(Component):
    """``amp * sin(freq * v + phase)`` with ``v`` the arc length or time."""

    amp: float
    freq: float
    phase: float = 0.0
    var: str = "s"
    family = "sinusoidal"

    def __post_init__(self):
        if self.var not in ("s", "t"):
            raise ValueError("var must be 's' or 't'")

    def __call__(self, s, t=0.0, order=0):
        s = np.asarray(s, dtype=float)
        if self.var == "t":
            v = self.amp * math.sin(self.freq * t + self.phase)
            return np.full(s.shape, v if order == 0 else 0.0)
        arg = self.freq * s + self.phase
        # d^m/ds^m sin(w s + p) = w^m sin(w s + p + m pi/2)
        return self.amp * self.freq**order * np.sin(arg + order * math.pi / 2)

    def to_spec(self):
        d = {"amp": self.amp, "freq": self.freq, "phase": self.phase}
        if self.var != "s":
            d["var"] = self.var
        return {"sin": d}

    def is_zero(self):
        return self.amp == 0.0


class Table(Component):
    """Tabulated f(s), interpolated by a not-a-knot cubic spline."""

    family = "tabulated"

    def __init__(self, s, values, source: Optional[str] = None):
        from scipy.interpolate import CubicSpline

        self.s = np.asarray(s, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.s.size < 4:
            raise ValueError("a flow table needs at least 4 rows")
        self.source = source
        self._spline = CubicSpline(self.s, self.values)

    def __call__(self, s, t=0.0, order=0):
        s = np.asarray(s, dtype=float)
        return self._spline(s, order) if order <= 3 else np.zeros(s.shape)

    def to_spec(self):
        return {"table": self.source} if self.source else {"table_values": [self.s.tolist(), self.values.tolist()]}

    def is_zero(self):
        return not np.any(self.values)


@dataclass
class FlowField:
    """Velocity components along T, N, B1, B2."""

    f1: Component
    f2: Component
    f3: Component
    f4: Component

    @classmethod
    def constant(cls, c1=0.0, c2=0.0, c3=0.0, c4=0.0) -> "FlowField":
        return cls(Const(c1), Const(c2), Const(c3), Const(c4))

    @property
    def components(self):
        return (self.f1, self.f2, self.f3, self.f4)

    @property
    def family(self) -> str:
        fams = {c.family for c in self.components}
        return fams.pop() if len(fams) == 1 else "mixed"

    def evaluate(self, s, t=0.0, order: int = 0) -> np.ndarray:
        """Stack of the four components (or their s-derivatives), shape (4, ...)."""
        return np.stack([c(s, t, order) for c in self.components])

    def is_static(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def to_spec(self) -> dict:
        return {f"f{i + 1}": c.to_spec() for i, c in enumerate(self.components)}


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------


@dataclass
class EvolutionState:
    t: float
    u: np.ndarray
    positions: np.ndarray
    apparatus: FrenetApparatus
    speed: np.ndarray
    arclength: float


@dataclass
class History:
    """Stored evolution states at uniformly spaced times."""

    states: List[EvolutionState]
    flow: FlowField
    dt: float

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([st.t for st in self.states])

    @property
    def u(self) -> np.ndarray:
        return self.states[0].u

    @property
    def h(self) -> float:
        u = self.u
        return float(u[1] - u[0])

    @property
    def eps(self) -> tuple:
        return self.states[0].apparatus.eps

    def stack(self, name: str) -> np.ndarray:
        """Stack an apparatus attribute over time: shape (m, n, ...)."""
        return np.stack([getattr(st.apparatus, name) for st in self.states])

    @property
    def frames(self) -> np.ndarray:
        return np.stack([st.apparatus.frames for st in self.states])

    @property
    def arclengths(self) -> np.ndarray:
        return np.array([st.arclength for st in self.states])


def polyline_arclength(positions) -> float:
    P = np.asarray(positions, dtype=float)
    return float(np.sum(pg_distance(P[:-1], P[1:])))


def _jet_u(P, h, accuracy=4, upto=4):
    Ju = [P] + [numerics.diff(P, h, m, accuracy) for m in range(1, upto + 1)]
    Ju += [np.zeros_like(P)] * (4 - upto)
    return np.stack(Ju)


def velocity(positions, u, t, flow: FlowField, h: float) -> np.ndarray:
    """Pointwise velocity f1 T + f2 N + f3 B1 + f4 B2 of the sampled curve."""
    f = flow.evaluate(u, t)
    need = [bool(np.any(f[i] != 0.0)) for i in range(4)]
    if need[2] or need[3]:
        stop, upto = "B2", 3
    elif need[1]:
        stop, upto = "N", 2
    else:
        stop, upto = "T", 1
    if not any(need):
        return np.zeros_like(positions)
    Js, _ = reparameterize_jet(_jet_u(positions, h, upto=upto))
    fp = apparatus_from_jet(Js, stop_at=stop)
    V = f[0][:, None] * fp.T
    if need[1]:
        V = V + f[1][:, None] * fp.N
    if need[2]:
        V = V + f[2][:, None] * fp.B1
    if need[3]:
        V = V + f[3][:, None] * fp.B2
    return V


def _make_state(t, u, P, window=slice(None), band=8) -> EvolutionState:
    if window == slice(None):
        app = frenet_apparatus(SampledCurve(u, P))
    else:
        lo, hi = max(window.start - band, 0), min(window.stop + band, u.size)
        app = frenet_apparatus(SampledCurve(u[lo:hi], P[lo:hi]))
        app = app.subset(slice(window.start - lo, window.stop - lo))
        u, P = u[window], P[window]
    return EvolutionState(t=t, u=u, positions=P, apparatus=app, speed=app.speed, arclength=polyline_arclength(P))


# Classical RK4 is stable for |lambda dt| up to about 2.8 on both the
# imaginary and the negative real axis; keep a margin.
STABILITY_LIMIT = 2.0
# Spectral radii of the 4th-order central stencils for derivative orders 1..3.
_STENCIL_RADIUS = (1.3723, 5.3334, 4.6088)


def _max_speed(flow, u, t0, t1) -> float:
    return max(float(np.max(np.abs(flow.evaluate(u, t)))) for t in np.linspace(t0, t1, 5))


def _stiffness(flow, u, t0, t1, kappa, tau) -> float:
    """Rough spectral radius of the semi-discrete velocity operator.

    A tangential speed f1 transports (first derivatives), f2 N adds a
    second-derivative term scaled by 1/kappa, and f3 B1, f4 B2 add
    third-derivative terms scaled by 1/(kappa tau).
    """
    h = float(u[1] - u[0])
    f = np.stack([np.abs(flow.evaluate(u, t)) for t in np.linspace(t0, t1, 5)]).max(axis=(0, 2))
    k = float(np.min(np.abs(kappa)))
    rho1, rho2, rho3 = _STENCIL_RADIUS
    lam = f[0] * rho1 / h
    if f[1]:
        lam += f[1] * rho2 / (k * h**2)
    if f[2] or f[3]:
        lam += (f[2] + f[3]) * rho3 / (k * float(np.min(np.abs(tau))) * h**3)
    return lam


def _auto_pad(flow, u, t0, t1, margin=16) -> int:
    """Ghost points per side so that data entering through the ends during
    ``[t0, t1]`` comes from the curve itself instead of extrapolation."""
    h = float(u[1] - u[0])
    return int(math.ceil(_max_speed(flow, u, t0, t1) * (t1 - t0) / h)) + margin


def evolve(
    curve: AdmissibleCurve,
    flow: FlowField,
    dt: float,
    steps: int,
    n: Optional[int] = None,
    store_every: int = 1,
    t0: float = 0.0,
    pad: Optional[int] = None,
) -> History:
    """Evolve ``curve`` under ``d Omega/dt = f1 T + f2 N + f3 B1 + f4 B2``.

    Positions are advanced with classical RK4; the frame is recomputed from
    the sampled positions at every stage. When a stiffness estimate puts
    ``dt`` outside the RK4 stability region, each step is split into equal
    substeps. Every ``store_every``-th state is kept (the initial state
    always is), each with its full apparatus.

    Parameters
    ----------
    pad : int, optional
        Ghost grid points added on each side of the domain. Characteristics
        of a tangential flow enter through one end, so the evolved window
        is only determined by the initial data if the curve continues past
        it. Analytic curves are padded automatically from the flow speed;
        sampled curves cannot be extended and default to 0, in which case
        the ends are closed by one-sided stencils.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if isinstance(curve, SampledCurve):
        u, P = curve.s.copy(), curve.positions.copy()
        if pad:
            raise ValueError("sampled curves cannot be padded")
        pad = 0
    else:
        u = curve.grid(n)
        if pad is None:
            pad = _auto_pad(flow, u, t0, t0 + dt * steps)
        h0 = float(u[1] - u[0])
        u = np.concatenate([u[0] - h0 * np.arange(pad, 0, -1), u, u[-1] + h0 * np.arange(1, pad + 1)])
        P = curve.jet(u)[0].copy()
    window = slice(pad, u.size - pad) if pad else slice(None)
    h = float(u[1] - u[0])
    states = [_make_state(t0, u, P, window)]
    app0 = states[0].apparatus
    lam_dt = _stiffness(flow, u, t0, t0 + dt * steps, app0.kappa, app0.tau) * dt
    sub = max(1, int(math.ceil(lam_dt / STABILITY_LIMIT)))
    if sub > 1:
        log.info("stiffness |lambda dt| ~ %.3g: splitting each step into %d substeps", lam_dt, sub)
    dts = dt / sub
    t = t0
    for k in range(1, steps + 1):
        for j in range(sub):
            ts = t0 + (k - 1) * dt + j * dts
            try:
                k1 = velocity(P, u, ts, flow, h)
                k2 = velocity(P + 0.5 * dts * k1, u, ts + 0.5 * dts, flow, h)
                k3 = velocity(P + 0.5 * dts * k2, u, ts + 0.5 * dts, flow, h)
                k4 = velocity(P + dts * k3, u, ts + dts, flow, h)
            except FrenetDegenerate as exc:
                exc.step = k
                exc.args = (f"{exc.args[0]} (during step {k}, t = {ts:.6g})",)
                raise
            P = P + dts / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = t0 + k * dt
        if not np.all(np.isfinite(P)):
            raise StepRejected(f"non-finite positions after step {k}", step=k)
        if k % store_every == 0 or k == steps:
            try:
                states.append(_make_state(t, u, P, window))
            except FrenetDegenerate as exc:
                exc.step = k
                raise
    return History(states=states, flow=flow, dt=dt * store_every)


# ---------------------------------------------------------------------------
# inextensibility
# ---------------------------------------------------------------------------


def speed_rate(state: EvolutionState, flow: FlowField) -> np.ndarray:
    """Rate of change of the curve speed, d f1 / du at each grid point.

    On arc-length grids v = 1 and d/du = d/ds.
    """
    return state.speed * flow.f1(state.u, state.t, order=1)


def is_inextensible(flow: FlowField, domain, tol: float = 1e-10, n: int = 257, times: Sequence[float] = (0.0,)) -> bool:
    """True iff max |d f1/ds| over the sampled domain is at most ``tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.linspace(float(domain[0]), float(domain[1]), n)
    worst = max(float(np.max(np.abs(flow.f1(s, t, order=1)))) for t in times)
    return worst <= tol


# ---------------------------------------------------------------------------
# extended coefficients
# ---------------------------------------------------------------------------


@dataclass
class ExtendedCoeffs:
    """xi and Gamma coefficients; arrays share a shape (typically (m, n))."""

    xi1: np.ndarray
    xi2: np.ndarray
    xi3: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray

    def at(self, idx) -> "ExtendedCoeffs":
        return ExtendedCoeffs(*(getattr(self, k)[idx] for k in ("xi1", "xi2", "xi3", "gamma1", "gamma2", "gamma3")))


def xi_coeffs(kappa, tau, sigma, eps, flow: FlowField, s, t=0.0):
    """Tangential coefficients of dT/dt.

    ``xi1 = e1 k f1 + f2' - e1 tau f3``, ``xi2 = e2 tau f2 + f3' - e2 sigma f4``,
    ``xi3 = f4' + e3 sigma f3``, primes being s-derivatives.
    """
    e1, e2, e3 = eps
    f = flow.evaluate(s, t)
    df = flow.evaluate(s, t, 1)
    xi1 = e1 * kappa * f[0] + df[1] - e1 * tau * f[2]
    xi2 = e2 * tau * f[1] + df[2] - e2 * sigma * f[3]
    xi3 = df[3] + e3 * sigma * f[2]
    return xi1, xi2, xi3


def _require_levels(m):
    if m < 3:
        raise InsufficientHistory(f"need at least 3 time levels, have {m}")


def frame_time_derivative(history: History) -> np.ndarray:
    """d/dt of the stacked frames, shape (m, n, 4, 4); central in the interior."""
    _require_levels(len(history))
    return numerics.diff(history.frames, history.dt, 1, 2)


def gamma_coeffs_numeric(history: History):
    """Gamma1 = -<dB1/dt, N>, Gamma2 = <dB2/dt, N>, Gamma3 = <dB1/dt, B2>.

    Time derivatives by 3-level central differences (one-sided 2nd order at
    the first and last stored states). Arrays have shape (m, n).
    """
    F = history.frames
    dF = frame_time_derivative(history)
    N, B2 = F[..., 1, :], F[..., 3, :]
    dB1, dB2 = dF[..., 2, :], dF[..., 3, :]
    return -pg_dot(dB1, N), pg_dot(dB2, N), pg_dot(dB1, B2)


def extended_coeffs(history: History) -> ExtendedCoeffs:
    _require_levels(len(history))
    kappa, tau, sigma = history.stack("kappa"), history.stack("tau"), history.stack("sigma")
    u = history.u
    xs = [xi_coeffs(kappa[j], tau[j], sigma[j], history.eps, history.flow, u, t) for j, t in enumerate(history.times)]
    xi1, xi2, xi3 = (np.stack(c) for c in zip(*xs))
    g1, g2, g3 = gamma_coeffs_numeric(history)
    return ExtendedCoeffs(xi1, xi2, xi3, g1, g2, g3)


def extended_frenet_matrix(coeffs: ExtendedCoeffs, eps) -> np.ndarray:
    """Coefficient matrix M with d/dt [T, N, B1, B2] = M [T, N, B1, B2].

    Rows are T, N, B1, B2; the result has shape ``(..., 4, 4)``.
    """
    e1, e2, e3 = eps
    x1, x2, x3, g1, g2, g3 = np.broadcast_arrays(
        *(np.asarray(getattr(coeffs, k), float) for k in ("xi1", "xi2", "xi3", "gamma1", "gamma2", "gamma3"))
    )
    M = np.zeros(x1.shape + (4, 4))
    M[..., 0, 1], M[..., 0, 2], M[..., 0, 3] = x1, x2, x3
    M[..., 1, 0], M[..., 1, 2], M[..., 1, 3] = -e1 * x1, g1 * e2, g2 * e3
    M[..., 2, 0], M[..., 2, 1], M[..., 2, 3] = -e2 * x2, -g1 * e1, g3 * e3
    M[..., 3, 0], M[..., 3, 1], M[..., 3, 2] = -e3 * x3, -g2 * e1, -g3 * e2
    return M


def skew_defect(M, eps) -> float:
    """max |M G + (M G)^T| with G = diag(1, e1, e2, e3)."""
    G = np.diag([1.0, *eps])
    MG = np.asarray(M) @ G
    return float(np.max(np.abs(MG + np.swapaxes(MG, -1, -2))))


def induced_gram(F, F0, eps) -> np.ndarray:
    """Gram matrix of frames ``F`` in the bilinear form that makes ``F0``
    have Gram ``diag(1, e1, e2, e3)``.

    For frames whose first row is non-isotropic and the rest isotropic this
    coincides with the pg scalar products; it stays well defined when a
    transported normal picks up a tangential component.
    """
    G = np.diag([1.0, *eps])
    F0inv = np.linalg.inv(F0)
    eta = F0inv @ G @ F0inv.T
    return F @ eta @ np.swapaxes(F, -1, -2)


def frame_evolve(
    F0,
    coeffs: Callable[[float], ExtendedCoeffs],
    eps,
    dt: float,
    steps: int,
    t0: float = 0.0,
    gram_bound: float = 1e-6,
) -> np.ndarray:
    """Integrate d/dt F = M(t) F with RK4, F holding rows T, N, B1, B2.

    ``coeffs`` maps a time to the coefficients at that time. Every assembled
    matrix is checked for the eps-weighted skew symmetry, and the Gram
    matrix is monitored after each step; exceeding ``gram_bound`` raises
    ``GramDrift``. Returns the frame series, shape (steps + 1, 4, 4).
    """
    F0 = np.asarray(F0, dtype=float)
    G = np.diag([1.0, *eps])
    out = np.empty((steps + 1, 4, 4))
    out[0] = F0
    F = F0

    def mat(t):
        M = extended_frenet_matrix(coeffs(t), eps)
        d = skew_defect(M, eps)
        if d > 0.0:
            raise AssertionError(f"coefficient matrix is not eps-skew at t={t} (defect {d:.3g})")
        return M

    for k in range(1, steps + 1):
        t = t0 + (k - 1) * dt
        Mh = mat(t + 0.5 * dt)
        k1 = mat(t) @ F
        k2 = Mh @ (F + 0.5 * dt * k1)
        k3 = Mh @ (F + 0.5 * dt * k2)
        k4 = mat(t + dt) @ (F + dt * k3)
        F = F + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k] = F
        drift = float(np.max(np.abs(induced_gram(F, F0, eps) - G)))
        if drift > gram_bound:
            raise GramDrift(f"Gram drift {drift:.3g} exceeds {gram_bound:g} at step {k}", step=k, drift=drift)
    return out
