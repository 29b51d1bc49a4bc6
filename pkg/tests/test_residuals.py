import json
import math

import numpy as np
import pytest

from pg4.flow import Const, FlowField, Sinusoid, evolve
from pg4.frenet import Helix
from pg4.residuals import SUITES, all_residuals, convergence_study


@pytest.fixture(scope="module")
def static_report():
    return all_residuals(evolve(Helix(1, 1, 1.5, n=65), FlowField.constant(), 0.05, 6))


def test_suites_cover_all_frame_vectors(static_report):
    prefixes = {name.split(".")[0] for name in static_report.names}
    assert prefixes == set(SUITES)


def test_static_flow_residuals_vanish(static_report):
    for e in static_report:
        assert e.max_abs is None or e.max_abs <= 1e-10, e.identity


def test_sigma_gamma3_constraint_is_exactly_zero_on_static_helix(static_report):
    assert static_report["binormal2.binormal2_component"].max_abs == 0.0


def test_pole_form_skips_points_at_the_pole():
    # tau = k = 1 = eps1 everywhere: every point sits on the pole
    rep = all_residuals(evolve(Helix(1, 1, 1, n=513), FlowField.constant(), 0.05, 2))
    e = rep["normal.gamma1_pole_form"]
    assert e.skipped == e.values.size
    assert e.max_abs is None


def test_report_serializes(static_report):
    data = json.loads(static_report.to_json())
    assert {"identity", "max_abs", "mean_abs", "h", "dt"} <= set(data[0])
    with pytest.raises(KeyError):
        static_report["no.such.identity"]


def test_unknown_suite():
    hist = evolve(Helix(n=32), FlowField.constant(), 0.05, 3)
    with pytest.raises(ValueError):
        all_residuals(hist, suites=["torsion"])


def test_transport_satisfies_curvature_rate():
    # pure transport keeps kappa constant in time and xi1 constant in s
    rep = all_residuals(evolve(Helix(1, 1, 1.5, n=129), FlowField.constant(1.0), 0.01, 6))
    assert rep["tangent.curvature_rate"].max_abs < 1e-9
    assert rep["tangent.curvature_integral"].max_abs < 1e-9


def test_refinement_orders_on_smooth_flow():
    flow = FlowField(Sinusoid(0.1, 1.0, 0.5), Const(0.05), Const(0.0), Const(0.0))
    results = convergence_study(Helix(1, 1, 1.5), flow, n0=33, dt0=0.04, levels0=5, refinements=3)
    assert len(results) > 20
    for r in results:
        assert r.passes(1.9), (r.identity, r.order, r.differences)


def test_refinement_needs_two_levels():
    with pytest.raises(ValueError):
        convergence_study(Helix(), FlowField.constant(), refinements=1)
