import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pg4.linalg import CausalCharacter, PGVec4, classify, pg_cross, pg_distance, pg_dot, pg_norm
from pg4.numerics import det4

finite = st.floats(-100, 100, allow_nan=False)
vec = st.lists(finite, min_size=4, max_size=4).map(np.array)
iso = st.lists(finite, min_size=3, max_size=3).map(lambda v: np.array([0.0, *v]))


def test_non_isotropic_product_uses_first_component():
    assert pg_dot([2, 5, 7, 1], [3, -1, 4, 9]) == 6.0


def test_isotropic_product_has_minus_plus_plus_signature():
    assert pg_dot([0, 1, 2, 3], [0, 4, 5, 6]) == -4 + 10 + 18


def test_mixed_pair_is_orthogonal():
    assert pg_dot([1, 9, 9, 9], [0, 1, 2, 3]) == 0.0


@pytest.mark.parametrize(
    "v, want",
    [
        ([1, 0, 0, 0], CausalCharacter.NonIsotropic),
        ([0, 0, 1, 0], CausalCharacter.SpacelikeIsotropic),
        ([0, 1, 0, 0], CausalCharacter.TimelikeIsotropic),
        ([0, 1, 1, 0], CausalCharacter.Lightlike),
    ],
)
def test_classify(v, want):
    assert classify(v) is want


def test_norm_and_distance():
    assert pg_norm([0, 1, 0, 0]) == 1.0
    assert pg_norm([-3, 1, 0, 0]) == 3.0
    assert pg_distance([1, 0, 0, 0], [4, 7, 7, 7]) == 3.0
    assert pg_distance([1, 0, 0, 0], [1, 0, 3, 4]) == 5.0


def test_pgvec4_rejects_nan():
    with pytest.raises(ValueError):
        PGVec4(0.0, float("nan"), 0.0, 0.0)


@given(vec, vec)
def test_symmetry(u, v):
    assert pg_dot(u, v) == pg_dot(v, u)


@given(iso, iso, iso, st.floats(-10, 10))
def test_bilinear_on_isotropic_vectors(u, v, w, c):
    lhs = pg_dot(c * u + v, w)
    rhs = c * pg_dot(u, w) + pg_dot(v, w)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(c)) * 1e4)


@given(vec, vec, vec)
@settings(max_examples=200)
def test_cross_is_alternating(u, v, w):
    a = pg_cross(u, v, w)
    np.testing.assert_allclose(pg_cross(v, u, w), -a, atol=1e-6 * (1 + np.abs(a).max()))
    np.testing.assert_allclose(pg_cross(u, u, w), 0.0, atol=1e-6 * (1 + np.abs(u).max() ** 3))


def test_cross_of_standard_frame():
    T, N, B1 = np.eye(4)[0], np.eye(4)[2], np.eye(4)[3]
    B2 = pg_cross(T, N, B1)
    assert pg_dot(B2, N) == 0.0 and pg_dot(B2, B1) == 0.0
    assert abs(det4(np.stack([T, N, B1, B2]))) == 1.0
