"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 geometric degeneracy (or a rejected
step), 3 a residual that must vanish did not. Data goes to ``--out`` (or
stdout); progress and summaries go to stderr. ``PG4_LOG`` selects the log
level: quiet, info or debug.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import os
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import io as pgio
from .energy import FIELDS, LineSeries, energy_s, energy_t, pseudo_angle_s, pseudo_angle_t
from .errors import FrenetDegenerate, InputError, InsufficientHistory, StepRejected
from .example import run_example
from .flow import FlowField, evolve, extended_coeffs, extended_frenet_matrix, is_inextensible, skew_defect
from .frenet import SampledCurve, frenet_apparatus, pg_gram
from .residuals import all_residuals, convergence_study

log = logging.getLogger("pg4")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_RESIDUAL = 0, 1, 2, 3
DRIFT_TOL = 1e-6
RESIDUAL_TOL = 1e-10
MIN_ORDER = 1.9


def _domain(text: str):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected A,B") from exc
    if not a < b:
        raise argparse.ArgumentTypeError("need A < B")
    return a, b


def _grid_n(text: str) -> int:
    n = int(text)
    if n < 16:
        raise argparse.ArgumentTypeError("n must be at least 16")
    return n


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pg4", description="Curves, flows and frame energies in pseudo-Galilean 4-space.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, flow=False, evolution=False, fmt="csv"):
        sp.add_argument("--curve", required=True, help="curve definition (JSON)")
        if flow:
            sp.add_argument("--flow", help="flow definition (JSON); default: static")
        sp.add_argument("--n", type=_grid_n, help="grid points (overrides the curve file)")
        sp.add_argument("--domain", type=_domain, help="s-range A,B (overrides the curve file)")
        if evolution:
            sp.add_argument("--dt", type=_positive, default=0.01)
            sp.add_argument("--steps", type=_count, default=100)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)

    sp = sub.add_parser("apparatus", help="frame and curvatures on a grid")
    common(sp)

    sp = sub.add_parser("evolve", help="evolve a curve under a flow")
    common(sp, flow=True, evolution=True)
    sp.add_argument("--tol", type=_positive, default=DRIFT_TOL, help="relative arc-length drift bound")

    sp = sub.add_parser("verify", help="compatibility residuals of a flow")
    common(sp, flow=True, evolution=True, fmt="json")
    sp.set_defaults(steps=8)
    sp.add_argument("--tol", type=_positive, default=RESIDUAL_TOL, help="bound for residuals that must vanish")
    sp.add_argument("--refine", type=int, default=0, help="refinement levels for an order study (0: off)")

    for name, what in (("energy", "frame-field energies"), ("angles", "frame-field pseudo-angles")):
        sp = sub.add_parser(name, help=what + " along s- and t-lines")
        common(sp, flow=True, evolution=True, fmt="json")

    sp = sub.add_parser("example", help="the helix example, stated against computed values")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=1.0)
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--T", type=_positive, default=1.0, help="time window for t-line quantities")
    sp.add_argument("--n", type=_grid_n, default=512)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("PG4_LOG", "quiet").lower(), logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _open_out(path):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


def _load(args, need_flow=False):
    curve = pgio.load_curve(args.curve, n=args.n, domain=args.domain)
    flow = None
    if need_flow:
        flow = pgio.load_flow(args.flow) if getattr(args, "flow", None) else FlowField.constant()
    return curve, flow


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_apparatus(args) -> int:
    curve, _ = _load(args)
    app = frenet_apparatus(curve)
    axes = ("x", "y", "z", "w")
    header = ["s", "kappa", "tau", "sigma"] + [f"{v}{a}" for v in ("T", "N", "B1", "B2") for a in axes]
    signs = {"eps1": app.eps1, "eps2": app.eps2, "eps3": app.eps3, "mu": app.mu}
    cols = [app.s, app.kappa, app.tau, app.sigma] + [getattr(app, v)[:, j] for v in ("T", "N", "B1", "B2") for j in range(4)]
    rows = np.column_stack(cols)
    with _open_out(args.out) as fh:
        if args.format == "csv":
            pgio.write_csv(fh, header, rows, comments=[" ".join(f"{k}={v:+d}" for k, v in signs.items())])
        else:
            pgio.write_json(fh, {**signs, "columns": {h: rows[:, i] for i, h in enumerate(header)}})
    return EXIT_OK


def _arclength_summary(hist):
    L = hist.arclengths
    drift = float(np.max(np.abs(L - L[0])) / abs(L[0]))
    for t, l in zip(hist.times, L):
        log.info("t=%s arclength=%s", pgio.fmt(t), pgio.fmt(l))
    return L, drift


def cmd_evolve(args) -> int:
    curve, flow = _load(args, need_flow=True)
    t_end = args.dt * args.steps
    inext = is_inextensible(flow, curve.domain, times=np.linspace(0.0, t_end, 5))
    if not inext:
        _note("flow not inextensible: f1 varies along the curve, so arc length is not conserved")
    hist = evolve(curve, flow, args.dt, args.steps, n=args.n)
    L, drift = _arclength_summary(hist)
    header = ["t", "s", "x", "y", "z", "w", "kappa", "tau", "sigma", "arclength"]

    def rows():
        for st in hist.states:
            a = st.apparatus
            for i in range(st.u.size):
                yield (st.t, st.u[i], *st.positions[i], a.kappa[i], a.tau[i], a.sigma[i], st.arclength)

    with _open_out(args.out) as fh:
        if args.format == "csv":
            pgio.write_csv(fh, header, rows())
        else:
            pgio.write_json(fh, {"columns": header, "rows": list(rows())})
    _note(f"arclength: t={pgio.fmt(hist.times[0])} L={pgio.fmt(L[0])}  t={pgio.fmt(hist.times[-1])} L={pgio.fmt(L[-1])}")
    if inext:
        verdict = "PASS" if drift < args.tol else "FAIL"
        _note(f"inextensibility drift {drift:.3e} (bound {args.tol:g}): {verdict}")
    else:
        _note(f"arc-length drift {drift:.3e}")
    return EXIT_OK


def _frame_checks(hist, tol) -> List[dict]:
    """Skew symmetry of the time matrix and the Gram matrix of stored frames."""
    eps = hist.eps
    G = np.diag([1.0, *eps])
    gram = max(float(np.max(np.abs(pg_gram(st.apparatus.T, st.apparatus.N, st.apparatus.B1, st.apparatus.B2) - G))) for st in hist.states)
    skew = skew_defect(extended_frenet_matrix(extended_coeffs(hist), eps), eps)
    out = []
    for name, val in (("frame.time_matrix_skew", skew), ("frame.gram", gram)):
        out.append({"identity": name, "max_abs": val, "mean_abs": val, "h": hist.h, "dt": hist.dt, "forced_zero": True, "pass": val <= tol})
    return out


def cmd_verify(args) -> int:
    curve, flow = _load(args, need_flow=True)
    static = flow.is_static()
    if args.refine:
        if isinstance(curve, SampledCurve):
            raise InputError("refinement needs an analytic curve (helix or polynomial)")
        results = convergence_study(
            curve, flow, n0=args.n or 65, dt0=args.dt, levels0=args.steps + 1, refinements=args.refine
        )
        failed = [r for r in results if not r.passes(MIN_ORDER)]
        for r in results:
            order = "saturated" if r.saturated else f"{r.order:.3f}"
            _note(f"{r.identity:<36} order {order:>9}  {'PASS' if r.passes(MIN_ORDER) else 'FAIL'}")
        payload = [dict(r.to_dict(), **{"pass": r.passes(MIN_ORDER)}) for r in results]
        with _open_out(args.out) as fh:
            pgio.write_json(fh, payload)
        return EXIT_RESIDUAL if failed else EXIT_OK

    hist = evolve(curve, flow, args.dt, args.steps, n=args.n)
    report = all_residuals(hist)
    payload = []
    failed = []
    for e in report:
        d = e.to_dict()
        d["forced_zero"] = static
        if static:
            d["pass"] = e.max_abs is None or e.max_abs <= args.tol
            if not d["pass"]:
                failed.append(e.identity)
        payload.append(d)
    for d in _frame_checks(hist, args.tol):
        if not d["pass"]:
            failed.append(d["identity"])
        payload.append(d)
    with _open_out(args.out) as fh:
        pgio.write_json(fh, payload)
    worst = report.worst()
    _note(f"{len(payload)} identities, largest residual {worst:.3e}; {len(failed)} forced-zero failures")
    for name in failed:
        _note(f"FAIL {name}")
    return EXIT_RESIDUAL if failed else EXIT_OK


def _line_reports(args, kind):
    curve, flow = _load(args, need_flow=True)
    app = frenet_apparatus(curve)
    hist = evolve(curve, flow, args.dt, args.steps, n=args.n)
    ser = LineSeries.from_history(hist)
    fs, ft = (energy_s, energy_t) if kind == "energy" else (pseudo_angle_s, pseudo_angle_t)
    return [fs(app, f) for f in FIELDS] + [ft(ser, f) for f in FIELDS]


def _write_line_reports(args, reports, angles):
    with _open_out(args.out) as fh:
        if args.format == "json":
            pgio.write_json(fh, [r.to_dict() for r in reports])
            return
        header = ["field", "direction", "param", "integrand"] + (["integrand_imag"] if angles else [])

        def rows():
            for r in reports:
                for p, g in zip(r.param, r.integrand):
                    yield (r.field, r.direction, p, g.real, g.imag) if angles else (r.field, r.direction, p, g)

        fh_rows = ([a, b, *map(pgio.fmt, rest)] for a, b, *rest in rows())
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(fh_rows)


def cmd_energy(args) -> int:
    reports = _line_reports(args, "energy")
    for r in reports:
        alt = f"  (alternate {r.alternate:.12g})" if r.alternate is not None else ""
        _note(f"E_{r.field},{r.direction} = {r.value:.15g} +/- {r.quadrature_error:.1e}{alt}")
    _write_line_reports(args, reports, angles=False)
    return EXIT_OK


def cmd_angles(args) -> int:
    reports = _line_reports(args, "angles")
    for r in reports:
        flag = "  [complex branch]" if r.branch_flag else ""
        _note(f"A_{r.field},{r.direction} = {r.value:.15g} +/- {r.quadrature_error:.1e}{flag}")
    _write_line_reports(args, reports, angles=True)
    return EXIT_OK


def cmd_example(args) -> int:
    rep = run_example(args.a, args.b, args.k, T=args.T, n=args.n)
    with _open_out(args.out) as fh:
        if args.format == "json":
            pgio.write_json(fh, rep.to_dict())
        else:
            fh.write(rep.format() + "\n")
    return EXIT_OK


COMMANDS = {
    "apparatus": cmd_apparatus,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "energy": cmd_energy,
    "angles": cmd_angles,
    "example": cmd_example,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on bad usage; that is an input error here
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](args)
    except FrenetDegenerate as exc:
        where = f" at grid index {exc.index}" if exc.index is not None else ""
        step = getattr(exc, "step", None)
        when = f" during step {step}" if step is not None else ""
        _note(f"degenerate frame ({exc.quantity or 'frame'}){where}{when}: {exc}")
        return EXIT_DEGENERATE
    except StepRejected as exc:
        _note(f"step rejected: {exc}")
        return EXIT_DEGENERATE
    except BrokenPipeError:
        # the reader went away (e.g. piped into head); nothing left to report
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (InputError, InsufficientHistory) as exc:
        _note(f"input error: {exc}")
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        _note(f"input error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
