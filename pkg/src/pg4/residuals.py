"""
Residuals of the compatibility conditions of a curve flow.

Each frame vector V gives one system by equating the mixed derivatives
d/ds(dV/dt) and d/dt(dV/ds); the suites are named after that vector
(``tangent``, ``normal``, ``binormal1``, ``binormal2``). Every residual is
written so that it vanishes when the identity holds. The identities are
necessary conditions, not facts about arbitrary flows, so a report
quantifies a violation rather than asserting one away.

Derivatives: s-derivatives of sampled fields use 4th-order stencils,
t-derivatives use 3-level (2nd-order) differences, derivatives of the
flow components are analytic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import numerics
from .errors import DegenerateFit, InsufficientHistory
from .flow import FlowField, History, evolve, extended_coeffs

__all__ = [
    "SUITES",
    "POLE_TOL",
    "ResidualEntry",
    "ResidualReport",
    "HistoryFields",
    "residuals_tangent",
    "residuals_normal",
    "residuals_binormal1",
    "residuals_binormal2",
    "all_residuals",
    "ConvergenceResult",
    "convergence_study",
]

SUITES = ("tangent", "normal", "binormal1", "binormal2")
POLE_TOL = 1e-6
# Residuals involving sigma or Gamma differentiate 4th-derivative data once
# more in s and once in t, which amplifies rounding to roughly
# eps / (h^5 dt); differences below this level carry no order information.
CONVERGENCE_FLOOR = 1e-10


@dataclass
class ResidualEntry:
    """One identity's residual field and its summary.

    ``layout`` names the axes of ``values``: ``"ts"`` (time, grid),
    ``"s"`` (grid, after integrating over time) or ``"t"`` (time, after
    integrating over the grid). Points excluded from the summary (poles,
    inapplicable sign cases) are NaN in ``values`` and counted in
    ``skipped``.
    """

    identity: str
    values: np.ndarray = field(repr=False)
    h: float
    dt: float
    layout: str = "ts"
    skipped: int = 0

    @property
    def suite(self) -> str:
        return self.identity.split(".", 1)[0]

    @property
    def max_abs(self) -> Optional[float]:
        v = np.abs(self.values[np.isfinite(self.values)])
        return float(v.max()) if v.size else None

    @property
    def mean_abs(self) -> Optional[float]:
        v = np.abs(self.values[np.isfinite(self.values)])
        return float(v.mean()) if v.size else None

    def to_dict(self) -> dict:
        d = {"identity": self.identity, "max_abs": self.max_abs, "mean_abs": self.mean_abs, "h": self.h, "dt": self.dt}
        if self.skipped:
            d["skipped"] = self.skipped
        return d


@dataclass
class ResidualReport:
    entries: List[ResidualEntry]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, name: str) -> ResidualEntry:
        for e in self.entries:
            if e.identity == name:
                return e
        raise KeyError(name)

    @property
    def names(self) -> List[str]:
        return [e.identity for e in self.entries]

    def worst(self) -> float:
        vals = [e.max_abs for e in self.entries if e.max_abs is not None]
        return max(vals) if vals else 0.0

    def to_list(self) -> list:
        return [e.to_dict() for e in self.entries]

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_list(), **kw)


class HistoryFields:
    """Curvatures, flow components, coefficients and their derivatives over
    a stored history, each of shape (m, n)."""

    def __init__(self, history: History):
        if len(history) < 3:
            raise InsufficientHistory(f"need at least 3 time levels, have {len(history)}")
        self.history = history
        self.h = history.h
        self.dt = history.dt
        self.times = history.times
        self.u = history.u
        self.eps = history.eps
        self.kappa = history.stack("kappa")
        self.tau = history.stack("tau")
        self.sigma = history.stack("sigma")
        flow = history.flow
        self.f = np.stack([flow.evaluate(self.u, t) for t in self.times], axis=1)
        self.df = np.stack([flow.evaluate(self.u, t, 1) for t in self.times], axis=1)
        self.ddf = np.stack([flow.evaluate(self.u, t, 2) for t in self.times], axis=1)
        self.coeffs = extended_coeffs(history)

    def ds(self, a, order: int = 1) -> np.ndarray:
        """s-derivative along the grid axis, 4th order."""
        return np.swapaxes(numerics.diff(np.swapaxes(a, 0, 1), self.h, order, 4), 0, 1)

    def dt_(self, a) -> np.ndarray:
        """t-derivative along the time axis, 2nd order."""
        return numerics.diff(a, self.dt, 1, 2)

    def t_integral(self, a) -> np.ndarray:
        """Integral over the stored time span, per grid point."""
        return numerics.simpson(a, self.dt)

    def s_integral(self, a) -> np.ndarray:
        """Integral over the grid, per time level."""
        return numerics.simpson(np.swapaxes(a, 0, 1), self.h)

    def entry(self, name, values, layout="ts", skipped=0) -> ResidualEntry:
        return ResidualEntry(name, np.asarray(values, dtype=float), self.h, self.dt, layout, skipped)


def _fields(history_or_fields) -> HistoryFields:
    if isinstance(history_or_fields, HistoryFields):
        return history_or_fields
    return HistoryFields(history_or_fields)


def residuals_tangent(history) -> List[ResidualEntry]:
    """Compatibility of d/ds(dT/dt) with d/dt(dT/ds)."""
    F = _fields(history)
    e1, e2, e3 = F.eps
    k, tau, sig = F.kappa, F.tau, F.sigma
    f1, f2, f3, f4 = F.f
    _, df2, df3, df4 = F.df
    ddf3, ddf4 = F.ddf[2], F.ddf[3]
    c = F.coeffs
    x1, x2, x3 = c.xi1, c.xi2, c.xi3
    dx1, dx2, dx3 = F.ds(x1), F.ds(x2), F.ds(x3)
    g1, g2 = c.gamma1, c.gamma2
    dtau, dsig = F.ds(tau), F.ds(sig)

    out = [
        F.entry("tangent.curvature_rate", e1 * F.dt_(k) - (dx1 - e1 * x2 * tau)),
        F.entry("tangent.tangent_component", k * (-k * f1 - e1 * df2 + tau * f3)),
        F.entry("tangent.binormal1_component", e1 * e2 * k * g1 - (dx2 + e2 * x1 * tau - e2 * x3 * sig)),
        F.entry(
            "tangent.binormal2_component",
            dsig * f3 + (e2 * tau * f2 + 2 * df3) * sig - (e1 * k * g2 + e1 * sig**2 * f4 - e3 * ddf4),
        ),
        F.entry("tangent.gamma1_compact", g1 - (e1 * e2 * dx2 + e1 * x1 * tau - e1 * x3 * sig) / k),
    ]
    expanded = (
        e1 * dtau * f2
        + k * tau * f1
        + e1 * df2 * tau * (1 + e2)
        - e1 * f3 * (tau**2 * e2 + sig**2 * e3)
        - e1 * sig * df4 * (e2 * e3 + 1)
        + e2 * e1 * (ddf3 - e3 * dsig * f4)
    ) / k
    out.append(F.entry("tangent.gamma1_expanded", g1 - expanded))
    out.append(F.entry("tangent.gamma2_closed_form", g2 - (e1 * e3 * dx3 + e1 * x2 * sig) / k))
    rate = e1 * dx1 - x2 * tau
    out.append(F.entry("tangent.curvature_integral", k[-1] - k[0] - F.t_integral(rate), layout="s"))
    return out


def residuals_normal(history) -> List[ResidualEntry]:
    """Compatibility of d/ds(dN/dt) with d/dt(dN/ds).

    This system's own tangential coefficient ``k f1 + e1 f2' - tau f3``
    is used (it equals e1 times the tangent-system xi1).
    """
    F = _fields(history)
    e1, e2, e3 = F.eps
    k, tau, sig = F.kappa, F.tau, F.sigma
    f1, f2, f3, f4 = F.f
    df1, df2, df3, _ = F.df
    ddf2 = F.ddf[1]
    c = F.coeffs
    g1, g2, g3 = c.gamma1, c.gamma2, c.gamma3
    dg1, dg2 = F.ds(g1), F.ds(g2)
    tau_t = F.dt_(tau)
    xi1 = k * f1 + e1 * df2 - tau * f3

    out = [
        F.entry("normal.tangent_component", -F.ds(xi1) - e2 * tau * (-tau * f2 - e2 * df3 + sig * f4)),
        F.entry("normal.normal_component", -e1 * g1 - (xi1 * e1 * k - e2 * e1 * tau * g1)),
        F.entry("normal.binormal1_component", dg1 * e2 - e3 * e2 * g2 * sig - e2 * tau_t),
        F.entry("normal.binormal2_component", g1 * e3 * e2 * sig + dg2 * e3 - e3 * g3),
        F.entry("normal.sigma_quotient", g1 * e2 * sig + dg2 + g3),
        F.entry(
            "normal.flow_constraint",
            e1 * ddf2 - k * df1 + 2 * tau * df3 - F.ds(k) * f1 + F.ds(tau) * f3 + e2 * tau**2 * f2 + sig * tau * e2 * f4,
        ),
    ]
    near = np.abs(tau - e1) < POLE_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        pole = np.where(near, np.nan, g1 + e1 * k * xi1 / (tau - e1))
    out.append(F.entry("normal.gamma1_pole_form", pole, skipped=int(near.sum())))
    sq = g1**2 + g2**2
    rhs = 2 * F.s_integral(tau_t * g1) - (e3 / e2) * F.s_integral(g2 * g3)
    out.append(F.entry("normal.gamma_square_integral", sq[:, -1] - sq[:, 0] - rhs, layout="t"))
    out.append(F.entry("normal.torsion_integral", tau[-1] - tau[0] - F.t_integral(dg1 - e3 * g2 * sig), layout="s"))
    return out


def _theta(F: HistoryFields):
    e2 = F.eps[1]
    return -F.tau * F.f[1] - e2 * F.df[2] + F.sigma * F.f[3]


def residuals_binormal1(history) -> List[ResidualEntry]:
    """Compatibility of d/ds(dB1/dt) with d/dt(dB1/ds)."""
    F = _fields(history)
    e1, e2, e3 = F.eps
    k, tau, sig = F.kappa, F.tau, F.sigma
    f1, f2, f3, f4 = F.f
    c = F.coeffs
    g1, g2, g3 = c.gamma1, c.gamma2, c.gamma3
    dg1 = F.ds(g1)
    theta = _theta(F)
    phi = -k * f1 - e1 * F.df[1] + tau * f3

    out = [
        F.entry("binormal1.tangent_component", F.ds(theta) - (e3 * sig * theta - e2 * tau * phi)),
        F.entry("binormal1.normal_component", dg1 * e1 + e1 * k * theta + e1 * F.dt_(tau) + e3 * e1 * g1 * sig),
        F.entry(
            "binormal1.binormal1_component",
            e3 * F.dt_(sig) - (-e3 * e2 * sig * g3 + (1 - e1 * e2) * tau * g1),
        ),
        F.entry("binormal1.binormal2_component", e3 * F.ds(g3) - (e3**2 * sig * g3 - e3 * e2 * tau * g2)),
    ]
    if e1 * e2 == 1:
        expo = sig[-1] - sig[0] * np.exp(-e2 * F.t_integral(g3))
        out.append(F.entry("binormal1.sigma_exponential", expo, layout="s"))
    else:
        out.append(F.entry("binormal1.sigma_exponential", np.full(sig.shape[1], np.nan), layout="s", skipped=sig.shape[1]))
    out.append(
        F.entry("binormal1.torsion_integral", tau[-1] - tau[0] + F.t_integral(dg1 + k * theta + e3 * sig * g1), layout="s")
    )
    return out


def residuals_binormal2(history) -> List[ResidualEntry]:
    """Compatibility of d/ds(dB2/dt) with d/dt(dB2/ds)."""
    F = _fields(history)
    e1, e2, e3 = F.eps
    k, tau, sig = F.kappa, F.tau, F.sigma
    c = F.coeffs
    g1, g2, g3 = c.gamma1, c.gamma2, c.gamma3
    dg3 = F.ds(g3)
    theta = _theta(F)
    m = -e3 * F.df[3] + sig * F.f[2]

    return [
        F.entry("binormal2.tangent_component", F.ds(m) + e2 * sig * theta),
        F.entry("binormal2.normal_component", m * k - F.ds(g2) + e2 * tau * g3 - e2 * g1 * sig),
        F.entry("binormal2.binormal1_component", F.dt_(sig) - (dg3 + e1 * tau * g2)),
        F.entry("binormal2.binormal2_component", g3 * sig),
        F.entry("binormal2.sigma_integral", sig[-1] - sig[0] - F.t_integral(dg3 + e1 * tau * g2), layout="s"),
        F.entry("binormal2.m_integral", m[:, -1] - m[:, 0] + e2 * F.s_integral(sig * theta), layout="t"),
    ]


_SUITE_FUNCS = {
    "tangent": residuals_tangent,
    "normal": residuals_normal,
    "binormal1": residuals_binormal1,
    "binormal2": residuals_binormal2,
}


def all_residuals(history: History, suites: Iterable[str] = SUITES) -> ResidualReport:
    F = HistoryFields(history)
    entries: List[ResidualEntry] = []
    for name in suites:
        if name not in _SUITE_FUNCS:
            raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
        entries.extend(_SUITE_FUNCS[name](F))
    return ResidualReport(entries)


# ---------------------------------------------------------------------------
# refinement
# ---------------------------------------------------------------------------


@dataclass
class ConvergenceResult:
    """Self-convergence of one identity under simultaneous (h, dt) halving.

    ``differences[l]`` is max |R_l - R_{l+1}| over the points common to
    both levels; its decay with ``h`` estimates the order at which the
    discrete residual converges to its continuum value.
    """

    identity: str
    h: List[float]
    differences: List[float]
    order: Optional[float]
    saturated: bool

    def passes(self, min_order: float = 1.9) -> bool:
        return self.saturated or (self.order is not None and self.order >= min_order)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "h": self.h,
            "differences": self.differences,
            "order": self.order,
            "saturated": self.saturated,
        }


def _coarse(values, layout, stride):
    if layout == "ts":
        return values[::stride, ::stride]
    return values[::stride]


def convergence_study(
    curve,
    flow: FlowField,
    n0: int = 65,
    dt0: float = 0.02,
    levels0: int = 5,
    refinements: int = 3,
    suites: Iterable[str] = SUITES,
    floor: float = CONVERGENCE_FLOOR,
) -> List[ConvergenceResult]:
    """Run ``refinements + 1`` evolutions with n_l = (n0 - 1) 2^l + 1 grid
    points, time step dt0 / 2^l and (levels0 - 1) 2^l + 1 stored levels, and
    fit the observed order of each identity's successive differences.

    Differences at or below ``floor`` are treated as rounding noise; an
    identity with fewer than two differences above it is reported as
    saturated.
    """
    if refinements < 2:
        raise ValueError("need at least 2 refinements for an order fit")
    reports = []
    hs = []
    for lev in range(refinements + 1):
        n = (n0 - 1) * 2**lev + 1
        dt = dt0 / 2**lev
        steps = (levels0 - 1) * 2**lev
        hist = evolve(curve, flow, dt, steps, n=n)
        reports.append(all_residuals(hist, suites))
        hs.append(hist.h)
    out = []
    for name in reports[0].names:
        diffs = []
        for lev in range(refinements):
            a, b = reports[lev][name], reports[lev + 1][name]
            va = _coarse(a.values, a.layout, 1)
            vb = _coarse(b.values, b.layout, 2)
            d = np.abs(va - vb)
            d = d[np.isfinite(d)]
            diffs.append(float(d.max()) if d.size else 0.0)
        try:
            order = numerics.observed_order(list(zip(hs[:-1], diffs)), floor=floor)
            saturated = False
        except DegenerateFit:
            order, saturated = None, True
        out.append(ConvergenceResult(name, hs[:-1], diffs, order, saturated))
    return out
