"""
Sasaki-metric energies and pseudo-angles of the frame fields along s-lines
(fixed time, varying arc length) and t-lines (fixed material point,
varying time).

Energies are definite integrals over the requested range (the additive
constants are taken as zero) evaluated by composite Simpson on the stored
samples. Integrands are the reduced closed forms in the curvatures, flow
components and time coefficients; no Riemannian machinery is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import numerics
from .errors import DomainOutOfRange, InsufficientHistory
from .flow import FlowField, History, gamma_coeffs_numeric, xi_coeffs
from .frenet import FrenetApparatus

__all__ = [
    "FIELDS",
    "EnergyReport",
    "PseudoAngleReport",
    "LineSeries",
    "energy_s",
    "energy_t",
    "pseudo_angle_s",
    "pseudo_angle_t",
]

FIELDS = ("T", "N", "B1", "B2")


def _check_field(name):
    if name not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}, got {name!r}")


@dataclass
class EnergyReport:
    """Energy of one frame field along one family of lines.

    ``value`` is the Simpson quadrature of ``integrand`` sampled at
    ``param``; ``alternate`` holds a second reading of the integrand where
    two readings of the coefficients disagree (B1 along s-lines).
    """

    field: str
    direction: str
    param: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)
    value: float
    domain: Tuple[float, float]
    quadrature_error: float
    alternate: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "field": self.field,
            "direction": self.direction,
            "domain": list(self.domain),
            "value": self.value,
            "branch_flag": False,
            "quadrature_error": self.quadrature_error,
        }
        if self.alternate is not None:
            d["alternate_value"] = self.alternate
        return d


@dataclass
class PseudoAngleReport:
    """Pseudo-angle as a complex number.

    ``branch_flag`` is set when a square root met a negative argument (a
    timelike sign or a negative radicand); ``value`` is then the modulus of
    the complex result, otherwise its real part.
    """

    field: str
    direction: str
    param: np.ndarray = field(repr=False)
    integrand: np.ndarray = field(repr=False)
    complex_value: complex
    domain: Tuple[float, float]
    quadrature_error: float
    branch_flag: bool

    @property
    def value(self) -> float:
        z = self.complex_value
        return abs(z) if self.branch_flag else z.real

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "direction": self.direction,
            "domain": list(self.domain),
            "value": self.value,
            "real": self.complex_value.real,
            "imag": self.complex_value.imag,
            "branch_flag": self.branch_flag,
            "quadrature_error": self.quadrature_error,
        }


def _window(param, domain):
    """Indices of ``param`` inside ``domain`` (grid-aligned, inclusive)."""
    p = np.asarray(param, dtype=float)
    if domain is None:
        return slice(0, p.size)
    a, b = float(domain[0]), float(domain[1])
    if b <= a:
        raise ValueError("domain must satisfy a < b")
    h = float(p[1] - p[0])
    slack = 1e-9 * abs(h)
    if a < p[0] - slack or b > p[-1] + slack:
        raise DomainOutOfRange(f"[{a}, {b}] is outside the sampled range [{p[0]}, {p[-1]}]")
    lo = int(np.searchsorted(p, a - slack))
    hi = int(np.searchsorted(p, b + slack, side="right"))
    if hi - lo < 3:
        raise DomainOutOfRange(f"[{a}, {b}] covers fewer than 3 samples")
    return slice(lo, hi)


def _quad(param, samples):
    h = float(param[1] - param[0])
    return numerics.simpson(samples, h), numerics.simpson_error(samples, h)


def _energy(fieldname, direction, param, integrand, alternate=None):
    value, err = _quad(param, integrand)
    alt = None
    if alternate is not None:
        alt = float(numerics.simpson(alternate, float(param[1] - param[0])))
    return EnergyReport(
        fieldname, direction, param, integrand, float(value), (float(param[0]), float(param[-1])), float(err), alt
    )


def _angle(fieldname, direction, param, radicand_or_values, sqrt_eps=None):
    """Pseudo-angle ½∫ sqrt(radicand), or ½ sqrt(eps) ∫ values."""
    if sqrt_eps is None:
        r = np.asarray(radicand_or_values, dtype=float)
        integrand = 0.5 * np.sqrt(r.astype(complex))
        branch = bool(np.any(r < 0))
    else:
        integrand = 0.5 * np.sqrt(complex(sqrt_eps)) * np.asarray(radicand_or_values, dtype=complex)
        branch = sqrt_eps < 0
    h = float(param[1] - param[0])
    z = complex(numerics.simpson(integrand, h))
    err = max(numerics.simpson_error(integrand.real, h), numerics.simpson_error(integrand.imag, h))
    return PseudoAngleReport(fieldname, direction, param, integrand, z, (float(param[0]), float(param[-1])), float(err), branch)


# ---------------------------------------------------------------------------
# s-lines
# ---------------------------------------------------------------------------


def energy_s(app: FrenetApparatus, fieldname: str, domain=None) -> EnergyReport:
    """Energy of a frame field along the s-line of one curve.

    Integrands: T ``(1 + e1 k^2)/2``, N ``(e1 + e2 tau^2)/2``,
    B1 ``(e2 + e1 tau^2 + e1 sigma^2)/2`` (``alternate`` uses e3 on the
    sigma term), B2 ``(e3 + e3 sigma^2)/2``.
    """
    _check_field(fieldname)
    w = _window(app.s, domain)
    e1, e2, e3 = app.eps
    s, k, tau, sig = app.s[w], app.kappa[w], app.tau[w], app.sigma[w]
    alt = None
    if fieldname == "T":
        g = 0.5 * (1 + e1 * k**2)
    elif fieldname == "N":
        g = 0.5 * (e1 + e2 * tau**2)
    elif fieldname == "B1":
        g = 0.5 * (e2 + e1 * tau**2 + e1 * sig**2)
        alt = 0.5 * (e2 + e1 * tau**2 + e3 * sig**2)
    else:
        g = 0.5 * (e3 + e3 * sig**2)
    return _energy(fieldname, "s", s, g, alt)


def pseudo_angle_s(app: FrenetApparatus, fieldname: str, domain=None) -> PseudoAngleReport:
    """Pseudo-angle ½∫‖dV/ds‖ ds in its reduced form.

    T ``½ sqrt(e1) ∫k``, N ``½ sqrt(e2) ∫tau``,
    B1 ``½ ∫ sqrt(e1 tau^2 + e3 sigma^2)``, B2 ``½ sqrt(e2) ∫sigma``.
    """
    _check_field(fieldname)
    w = _window(app.s, domain)
    e1, e2, e3 = app.eps
    s, k, tau, sig = app.s[w], app.kappa[w], app.tau[w], app.sigma[w]
    if fieldname == "T":
        return _angle(fieldname, "s", s, k, sqrt_eps=e1)
    if fieldname == "N":
        return _angle(fieldname, "s", s, tau, sqrt_eps=e2)
    if fieldname == "B1":
        return _angle(fieldname, "s", s, e1 * tau**2 + e3 * sig**2)
    return _angle(fieldname, "s", s, sig, sqrt_eps=e2)


# ---------------------------------------------------------------------------
# t-lines
# ---------------------------------------------------------------------------


@dataclass
class LineSeries:
    """Time series of the quantities along one t-line.

    ``f`` and ``df`` hold the flow components and their s-derivatives,
    shape (4, m); the other arrays have shape (m,).
    """

    t: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    sigma: np.ndarray
    f: np.ndarray
    df: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray
    eps: tuple

    @classmethod
    def from_history(cls, history: History, index: Optional[int] = None) -> "LineSeries":
        """Series at grid ``index`` (default: the middle of the grid)."""
        if len(history) < 3:
            raise InsufficientHistory(f"need at least 3 time levels, have {len(history)}")
        n = history.u.size
        i = n // 2 if index is None else int(index)
        if not -n <= i < n:
            raise IndexError(f"grid index {i} out of range for {n} points")
        u = history.u[i : i + 1] if i >= 0 else history.u[i:][:1]
        t = history.times
        g1, g2, g3 = gamma_coeffs_numeric(history)
        f = np.stack([history.flow.evaluate(u, tj)[:, 0] for tj in t], axis=1)
        df = np.stack([history.flow.evaluate(u, tj, 1)[:, 0] for tj in t], axis=1)
        return cls(
            t=t,
            kappa=history.stack("kappa")[:, i],
            tau=history.stack("tau")[:, i],
            sigma=history.stack("sigma")[:, i],
            f=f,
            df=df,
            gamma1=g1[:, i],
            gamma2=g2[:, i],
            gamma3=g3[:, i],
            eps=history.eps,
        )

    def window(self, t_range) -> "LineSeries":
        w = _window(self.t, t_range)
        pick = lambda a: a[..., w]
        return LineSeries(
            pick(self.t), pick(self.kappa), pick(self.tau), pick(self.sigma), pick(self.f), pick(self.df),
            pick(self.gamma1), pick(self.gamma2), pick(self.gamma3), self.eps,
        )

    def brackets(self):
        """The squared combinations entering the t-line energies and angles."""
        e1, e2, e3 = self.eps
        k, tau, sig = self.kappa, self.tau, self.sigma
        f1, f2, f3, f4 = self.f
        _, df2, df3, df4 = self.df
        x1 = e1 * k * f1 + df2 - e1 * tau * f3
        x2 = e2 * tau * f2 + df3 - e2 * sig * f4
        x3 = e3 * sig * f3 + df4
        g1, g2, g3 = self.gamma1, self.gamma2, self.gamma3
        return {
            "T_energy": e1 * (x1**2 + e2 * x2**2 + e3 * x3**2),
            "T_angle": e1 * x1**2 + e2 * x2**2 + e3 * x3**2,
            "N": (tau * f3 - k * f1 - e1 * df2) ** 2 + e2 * g1**2 + e3 * g2**2,
            "B1": (sig * f4 - tau * f2 - e2 * df3) ** 2 + e1 * g1**2 + e3 * g3**2,
            "B2": (sig * f3 - e3 * df4) ** 2 + e1 * g2**2 + e2 * g3**2,
        }


def _series(source, index=None) -> LineSeries:
    if isinstance(source, LineSeries):
        return source
    if isinstance(source, History):
        return LineSeries.from_history(source, index)
    raise TypeError("expected a History or a LineSeries")


def energy_t(source, fieldname: str, t_range=None, index: Optional[int] = None) -> EnergyReport:
    """Energy of a frame field along a t-line.

    ``source`` is a stored ``History`` (the t-line through grid ``index``)
    or a prepared ``LineSeries``. The integrand is the leading sign
    (1, e1, e2, e3 for T, N, B1, B2) plus the bracket, halved.
    """
    _check_field(fieldname)
    ser = _series(source, index)
    if ser.t.size < 3:
        raise InsufficientHistory("a t-line needs at least 3 time levels")
    if t_range is not None:
        ser = ser.window(t_range)
    b = ser.brackets()
    e1, e2, e3 = ser.eps
    lead = {"T": 1.0, "N": e1, "B1": e2, "B2": e3}[fieldname]
    bracket = b["T_energy"] if fieldname == "T" else b[fieldname]
    return _energy(fieldname, "t", ser.t, 0.5 * (lead + bracket))


def pseudo_angle_t(source, fieldname: str, t_range=None, index: Optional[int] = None) -> PseudoAngleReport:
    """Pseudo-angle ½∫ sqrt(bracket) dt along a t-line."""
    _check_field(fieldname)
    ser = _series(source, index)
    if ser.t.size < 3:
        raise InsufficientHistory("a t-line needs at least 3 time levels")
    if t_range is not None:
        ser = ser.window(t_range)
    b = ser.brackets()
    return _angle(fieldname, "t", ser.t, b["T_angle"] if fieldname == "T" else b[fieldname])
