import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from currentext import algebra as alg


@pytest.mark.parametrize("n", [2, 3, 4])
def test_basis_is_orthonormal_in_trace_form(n):
    e = alg.su_basis(n)
    assert e.shape == (n * n - 1, n, n)
    gram = -np.einsum("aij,bji->ab", e, e).real
    np.testing.assert_allclose(gram, 2 * np.eye(n * n - 1), atol=1e-14)
    assert alg.is_algebra(e)


def test_su2_basis_satisfies_quaternion_relations():
    e1, e2, e3 = alg.su_basis(2)
    one = np.eye(2)
    for e in (e1, e2, e3):
        np.testing.assert_allclose(e @ e, -one, atol=1e-15)
    np.testing.assert_allclose(e1 @ e2, -e3, atol=1e-15)


def test_bad_rank_is_rejected():
    with pytest.raises(alg.AlgebraError):
        alg.su_basis(1)


coeffs3 = arrays(np.float64, 8, elements=st.floats(-3, 3, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(coeffs3)
def test_coefficient_round_trip(c):
    x = alg.from_coefficients(c, 3)
    np.testing.assert_allclose(alg.coefficients(x), c, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(coeffs3, coeffs3, coeffs3)
def test_bracket_is_antisymmetric_and_satisfies_jacobi(a, b, c):
    x, y, z = (alg.from_coefficients(v, 3) for v in (a, b, c))
    np.testing.assert_allclose(alg.bracket(x, y), -alg.bracket(y, x), atol=1e-12)
    jac = alg.bracket(alg.bracket(x, y), z) + alg.bracket(alg.bracket(y, z), x) + alg.bracket(alg.bracket(z, x), y)
    assert np.max(np.abs(jac)) <= 1e-11 * max(1.0, np.max(np.abs(x)) * np.max(np.abs(y)) * np.max(np.abs(z)))
    assert alg.is_algebra(alg.bracket(x, y), tol=1e-11)


@settings(max_examples=60, deadline=None)
@given(coeffs3)
def test_exponential_lands_in_the_group(c):
    u = alg.matrix_exp(alg.from_coefficients(c, 3))
    assert alg.is_group(u, tol=1e-10)


def test_exponential_matches_scipy_and_inverts():
    rng = np.random.default_rng(0)
    x = alg.random_algebra(rng, 3, scale=2.0, size=16)
    u = alg.matrix_exp(x)
    import scipy.linalg
    ref = np.array([scipy.linalg.expm(m) for m in x])
    np.testing.assert_allclose(u, ref, atol=1e-12)
    np.testing.assert_allclose(u @ alg.matrix_exp(-x), np.broadcast_to(np.eye(3), u.shape), atol=1e-10)


def test_exponential_of_2pi_generator_is_identity():
    e3 = alg.su_basis(2)[2]
    np.testing.assert_allclose(alg.matrix_exp(2 * np.pi * e3), np.eye(2), atol=1e-12)


def test_exponential_rejects_non_finite_input():
    with pytest.raises(alg.AlgebraError):
        alg.matrix_exp(np.full((2, 2), np.nan))


def test_right_derivative_of_exponential_matches_finite_difference():
    rng = np.random.default_rng(1)
    eta, deta = alg.random_algebra(rng, 3), alg.random_algebra(rng, 3)
    u, r = alg.exp_right_derivative(eta, deta)
    h = 1e-6
    du = (alg.matrix_exp(eta + h * deta) - alg.matrix_exp(eta - h * deta)) / (2 * h)
    np.testing.assert_allclose(r, du @ alg.dagger(u), atol=1e-8)
    assert alg.is_algebra(r, tol=1e-10)


def test_embedding_preserves_products_and_traces():
    rng = np.random.default_rng(2)
    a, b = alg.random_group(rng, 2), alg.random_group(rng, 2)
    np.testing.assert_allclose(alg.embed_group(a @ b), alg.embed_group(a) @ alg.embed_group(b), atol=1e-14)
    x = alg.random_algebra(rng, 2)
    assert alg.is_algebra(alg.embed_algebra(x))
    assert np.trace(alg.embed_algebra(x) @ alg.embed_algebra(x)) == pytest.approx(np.trace(x @ x))


def test_projection_onto_the_algebra():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    p = alg.project_algebra(m)
    assert alg.is_algebra(p)
    np.testing.assert_allclose(alg.project_algebra(p), p, atol=1e-15)
