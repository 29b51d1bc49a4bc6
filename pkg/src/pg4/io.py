"""Reading curve and flow definitions, writing CSV and JSON results.

Curve files::

    {"family": "helix", "params": {"a": 1, "b": 1, "k": 2},
     "domain": [0, 6.283185307179586], "n": 512}

``polynomial`` takes ``{"y": [...], "z": [...], "w": [...]}`` coefficient
lists in increasing degree; ``sampled`` takes ``{"rows": [[s, x, y, z, w],
...]}`` or ``{"csv": path}`` with header ``s,x,y,z,w``.

Flow files map ``f1``..``f4`` to one of ``{"const": c}``,
``{"poly_s": [c0, c1, ...]}``, ``{"sin": {"amp": a, "freq": w, "phase": p}}``
(optionally ``"var": "t"``) or ``{"table": path}`` with header ``s,f``.
Relative paths are resolved against the directory of the file naming them.
Missing components default to zero.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError
from .flow import Const, FlowField, PolyS, Sinusoid, Table
from .frenet import AdmissibleCurve, Helix, PolynomialCurve, SampledCurve

__all__ = [
    "fmt",
    "load_curve",
    "load_flow",
    "curve_from_dict",
    "flow_from_dict",
    "read_table",
    "write_csv",
    "write_json",
    "to_jsonable",
]

DIGITS = 17


def fmt(x) -> str:
    """Round-trip text for a float (17 significant digits)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{DIGITS}g}"


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object")
    return data


def read_table(path, columns: Sequence[str]) -> np.ndarray:
    """Read a numeric CSV whose header starts with ``columns``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty table")
    header = [c.strip() for c in rows[0]]
    if header[: len(columns)] != list(columns):
        raise InputError(f"{path}: header must be {','.join(columns)}, got {','.join(header)}")
    try:
        data = np.array([[float(v) for v in r[: len(columns)]] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] == 0:
        raise InputError(f"{path}: no data rows")
    return data


def _floats(values, what):
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise InputError(f"{what} must be a list of numbers") from exc
    return out


def curve_from_dict(d: dict, base: Path = Path(".")) -> AdmissibleCurve:
    """Build a curve provider from a parsed curve definition."""
    family = d.get("family")
    params = d.get("params", {}) or {}
    if not isinstance(params, dict):
        raise InputError("params must be an object")
    try:
        n = int(d.get("n", 512))
        domain = tuple(_floats(d.get("domain", (0.0, 2 * math.pi)), "domain"))
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad n or domain: {exc}") from exc
    if len(domain) != 2 or not domain[0] < domain[1]:
        raise InputError("domain must be [s0, s1] with s0 < s1")
    if n < 16:
        raise InputError("n must be at least 16")
    try:
        if family == "helix":
            unknown = set(params) - {"a", "b", "k"}
            if unknown:
                raise InputError(f"unknown helix parameters: {sorted(unknown)}")
            return Helix(float(params.get("a", 1.0)), float(params.get("b", 1.0)), float(params.get("k", 1.0)), domain, n)
        if family == "polynomial":
            return PolynomialCurve(
                _floats(params.get("y", []), "y"),
                _floats(params.get("z", []), "z"),
                _floats(params.get("w", []), "w"),
                domain,
                n,
            )
        if family == "sampled":
            if "rows" in params:
                rows = np.asarray(params["rows"], dtype=float)
            elif "csv" in params:
                rows = read_table(base / params["csv"], ("s", "x", "y", "z", "w"))
            else:
                raise InputError("sampled curves need params.rows or params.csv")
            if rows.ndim != 2 or rows.shape[1] != 5:
                raise InputError("sampled rows must be [s, x, y, z, w]")
            return SampledCurve(rows[:, 0], rows[:, 1:])
    except InputError:
        raise
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad {family} curve: {exc}") from exc
    raise InputError(f"unknown curve family {family!r}; expected helix, polynomial or sampled")


def load_curve(path, n=None, domain=None) -> AdmissibleCurve:
    """Read a curve file; ``n`` and ``domain`` override the file's values."""
    d = _read_json(path)
    if n is not None:
        d["n"] = n
    if domain is not None:
        d["domain"] = list(domain)
    return curve_from_dict(d, Path(path).parent)


def _component(spec, base: Path):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise InputError(f"flow component must be a one-key object, got {spec!r}")
    (kind, val), = spec.items()
    try:
        if kind == "const":
            return Const(float(val))
        if kind == "poly_s":
            return PolyS(tuple(_floats(val, "poly_s")))
        if kind == "sin":
            return Sinusoid(float(val["amp"]), float(val["freq"]), float(val.get("phase", 0.0)), str(val.get("var", "s")))
        if kind == "table":
            data = read_table(base / val, ("s", "f"))
            return Table(data[:, 0], data[:, 1], source=str(val))
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad {kind} component: {exc}") from exc
    raise InputError(f"unknown flow component {kind!r}; expected const, poly_s, sin or table")


def flow_from_dict(d: dict, base: Path = Path(".")) -> FlowField:
    unknown = set(d) - {"f1", "f2", "f3", "f4"}
    if unknown:
        raise InputError(f"unknown flow keys: {sorted(unknown)}")
    comps = [_component(d.get(f"f{i}", {"const": 0.0}), base) for i in range(1, 5)]
    return FlowField(*comps)


def load_flow(path) -> FlowField:
    return flow_from_dict(_read_json(path), Path(path).parent)


def write_csv(path_or_file, header: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()):
    """Write rows with 17-digit floats; ``comments`` go first as ``# ...`` lines."""
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        for c in comments:
            fh.write(f"# {c}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    finally:
        if own:
            fh.close()


class _Encoder(json.JSONEncoder):
    def default(self, o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, complex):
            return [o.real, o.imag]
        return super().default(o)


def to_jsonable(obj):
    """Replace non-finite floats by strings so the output stays valid JSON."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (float, np.floating)) and not math.isfinite(float(obj)):
        return fmt(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path_or_file, obj):
    """Write JSON; Python's float repr is already round-trip exact."""
    text = json.dumps(to_jsonable(obj), indent=2, cls=_Encoder)
    if isinstance(path_or_file, (str, Path)):
        Path(path_or_file).write_text(text + "\n")
    else:
        path_or_file.write(text + "\n")
