import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pg4 import numerics
from pg4.errors import DegenerateFit, GridTooSmall, NormTooLarge


# --- stencils -------------------------------------------------------------


@pytest.mark.parametrize("order", [1, 2, 3, 4])
@pytest.mark.parametrize("accuracy", [2, 4])
def test_central_stencil_moments(order, accuracy):
    st_ = numerics.central_stencil(order, accuracy)
    st_.check_moments(tol=1e-12)
    m = st_.moments(order + accuracy - 1)
    want = np.zeros_like(m)
    want[order] = math.factorial(order)
    np.testing.assert_allclose(m, want, atol=1e-12)


def test_five_point_first_derivative_weights():
    st_ = numerics.central_stencil(1, 4)
    assert st_.offsets == (-2, -1, 0, 1, 2)
    np.testing.assert_allclose(st_.weights, [1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], rtol=0, atol=1e-15)


@pytest.mark.parametrize("offsets", [(0, 1, 2, 3, 4), (-1, 0, 1, 2, 3), (-4, -3, -2, -1, 0, 1)])
def test_one_sided_stencils_pass_moments(offsets):
    for order in range(1, len(offsets) - 1):
        numerics.make_stencil(order, offsets).check_moments(tol=1e-10)


def test_stencil_rejects_bad_offsets():
    with pytest.raises(ValueError):
        numerics.make_stencil(2, (0, 1))
    with pytest.raises(ValueError):
        numerics.make_stencil(1, (0, 1, 1))


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_diff_kills_constants_exactly(m):
    f = np.full(40, 3.7)
    assert np.all(numerics.diff(f, 0.1, m, 4) == 0.0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_diff_exact_on_low_degree_polynomials(m):
    x = np.linspace(-1, 2, 31)
    h = x[1] - x[0]
    p = np.polynomial.Polynomial([0.3, -1.0, 0.5, 0.25, -0.125])
    got = numerics.diff(p(x), h, m, 4)
    np.testing.assert_allclose(got, p.deriv(m)(x), atol=5e-9 * 10**m)


def test_diff_fourth_order_convergence():
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0, 2, n)
        h = x[1] - x[0]
        errs.append((h, np.max(np.abs(numerics.diff(np.sin(x), h, 1, 4) - np.cos(x)))))
    assert numerics.observed_order(errs) == pytest.approx(4.0, abs=0.3)


# --- quadrature -----------------------------------------------------------


@pytest.mark.parametrize("n", [3, 4, 7, 10, 101])
def test_simpson_exact_for_cubics(n):
    x = np.linspace(-1.0, 2.0, n)
    f = 2 * x**3 - x**2 + 0.5 * x - 3
    exact = (2 * 16 / 4 - 8 / 3 + 0.5 * 4 / 2 - 6) - (2 / 4 + 1 / 3 + 0.5 / 2 + 3)
    assert numerics.simpson(f, x[1] - x[0]) == pytest.approx(exact, abs=1e-12)


def test_simpson_needs_three_points():
    with pytest.raises(GridTooSmall):
        numerics.simpson([1.0, 2.0], 0.1)


def test_simpson_keeps_complex_samples():
    x = np.linspace(0, 1, 11)
    z = numerics.simpson(1j * np.ones_like(x), x[1] - x[0])
    assert z == pytest.approx(1j)


def test_simpson_along_axis0():
    x = np.linspace(0, 1, 21)
    f = np.stack([x**2, x**3], axis=1)
    np.testing.assert_allclose(numerics.simpson(f, x[1] - x[0]), [1 / 3, 1 / 4], atol=1e-14)


@pytest.mark.parametrize("n", [21, 41, 101, 201])
@pytest.mark.parametrize("k", [1.0, 2.0, 3.0])
def test_simpson_error_bounds_actual_error(n, k):
    x = np.linspace(0.0, 1.0, n)
    h = x[1] - x[0]
    f = np.cos(k * x)
    err = abs(numerics.simpson(f, h) - math.sin(k) / k)
    assert err <= numerics.simpson_error(f, h)


def test_simpson_error_nan_on_tiny_grid():
    assert math.isnan(numerics.simpson_error(np.ones(3), 0.5))


# --- small dense linear algebra -------------------------------------------


def test_det4_matches_numpy():
    rng = np.random.default_rng(7)
    M = rng.normal(size=(20, 4, 4))
    np.testing.assert_allclose(numerics.det4(M), np.linalg.det(M), rtol=1e-12, atol=1e-12)


@given(st.lists(st.floats(-10, 10), min_size=16, max_size=16), st.floats(-3, 3), st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=100, deadline=None)
def test_det4_multilinear_and_alternating(vals, c, i, j):
    M = np.array(vals).reshape(4, 4)
    scaled = M.copy()
    scaled[i] *= c
    assert numerics.det4(scaled) == pytest.approx(c * numerics.det4(M), abs=1e-7 * (1 + np.abs(M).max() ** 4))
    if i != j:
        swapped = M.copy()
        swapped[[i, j]] = swapped[[j, i]]
        assert numerics.det4(swapped) == pytest.approx(-numerics.det4(M), abs=1e-7 * (1 + np.abs(M).max() ** 4))


def test_expm4_rotation():
    th = 0.7
    M = np.zeros((4, 4))
    M[1, 2], M[2, 1] = -1.0, 1.0
    E = numerics.expm4(M, th)
    assert E[1, 1] == pytest.approx(math.cos(th), abs=1e-15)
    assert E[2, 1] == pytest.approx(math.sin(th), abs=1e-15)
    assert E[0, 0] == 1.0


def test_expm4_matches_scipy():
    from scipy.linalg import expm

    rng = np.random.default_rng(3)
    for _ in range(10):
        M = rng.normal(size=(4, 4))
        np.testing.assert_allclose(numerics.expm4(M), expm(M), rtol=1e-12, atol=1e-12)


def test_expm4_norm_guard():
    with pytest.raises(NormTooLarge):
        numerics.expm4(np.eye(4) * 20.0)


# --- order estimation -----------------------------------------------------


@pytest.mark.parametrize("p", [2.0, 4.0])
def test_observed_order_recovers_slope(p):
    hs = [0.1, 0.05, 0.025, 0.0125]
    assert numerics.observed_order([(h, 3.0 * h**p) for h in hs]) == pytest.approx(p, abs=1e-12)


def test_observed_order_saturated():
    with pytest.raises(DegenerateFit) as info:
        numerics.observed_order([(0.1, 1e-16), (0.05, 1e-17), (0.025, 2e-3)])
    assert info.value.saturated


def test_observed_order_rejects_bad_input():
    with pytest.raises(ValueError):
        numerics.observed_order([(0.1, 1.0)])
    with pytest.raises(ValueError):
        numerics.observed_order([(0.0, 1.0), (0.1, 2.0)])
