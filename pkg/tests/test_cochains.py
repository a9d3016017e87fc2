import numpy as np
import pytest

from currentext.cochains import (
    BETA_NORM, K_DOUBLE, OMEGA_NORM, beta, c20, c21, c30, c5, c5_raw, descent_residual,
    distance_mod1, epsilon, gamma, mod1, omega, omega_closedness,
)
from currentext.extension import exp_path, random_connection
from currentext.fields import (
    BulkWitness, FieldError, Inverse, bulk_witness, Product, embed, exp_field, exp_loop, identity_field,
    instanton, path_from_target, random_bump, random_chart_connection, random_polynomial_field,
    rotation_bulk, rotation_loop,
)
from currentext.geometry import make_domain

S = make_domain("S3", s3=(8, 8, 16))
T = make_domain("S3xI", s3=(8, 8, 16), nt=8)
Q = make_domain("S3xD2", s3=(8, 8, 16), disk=(8, 32))


def _max_comp(form):
    return max((np.max(np.abs(v)) for v in form.comps.values()), default=0.0)


def test_normalization_constants():
    assert BETA_NORM == pytest.approx(1j / (48 * np.pi ** 3))
    assert K_DOUBLE == pytest.approx(2 * BETA_NORM)
    assert OMEGA_NORM == pytest.approx(-1 / (48 * np.pi ** 3))


def test_mod1_representative_and_distance():
    assert mod1(2.25) == pytest.approx(0.25)
    assert mod1(-0.5) == 0.5 and mod1(0.5) == 0.5
    assert distance_mod1(0.98, -0.01) == pytest.approx(0.01)


def test_omega_is_antisymmetric_and_vanishes_at_zero():
    rng = np.random.default_rng(0)
    xi, eta = random_polynomial_field(rng, 3, 2), random_polynomial_field(rng, 3, 2)
    A = random_connection(rng, S, 3)
    assert omega(xi, eta, A) == pytest.approx(-omega(eta, xi, A), abs=1e-14)
    assert abs(omega(xi, xi, A)) < 1e-14
    zero = random_connection(rng, S, 3, scale=0.0)
    assert abs(omega(xi, eta, zero)) < 1e-14
    assert abs(omega(xi, eta, A).real) < 1e-14


def test_omega_closedness_vanishes_for_zero_direction_and_converges():
    rng = np.random.default_rng(1)
    xi, eta = random_polynomial_field(rng, 3, 2), random_polynomial_field(rng, 3, 2)
    zero = random_polynomial_field(rng, 3, 2, 0.0)
    f = exp_field(random_polynomial_field(rng, 3, 2))
    assert omega_closedness(xi, eta, zero, f, S)[0] < 1e-15
    zeta = random_polynomial_field(rng, 3, 2)
    r_id, _ = omega_closedness(xi, eta, zeta, identity_field(3), make_domain("S3", s3=(16, 16, 32)))
    assert r_id < 1e-3
    res = [omega_closedness(xi, eta, zeta, f, make_domain("S3", s3=(n, n, 2 * n)))[0] for n in (8, 16, 32)]
    # midpoint quadrature is second order, so the ratio tends to 4 from either side
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders > 1.9)


def test_su2_cochains_vanish_pointwise():
    rng = np.random.default_rng(2)
    f = path_from_target(1, random_polynomial_field(rng, 2, 2), 2)
    g = path_from_target(-1, random_polynomial_field(rng, 2, 2), 2)
    h = path_from_target(0, random_polynomial_field(rng, 2, 2), 2)
    assert _max_comp(c21(f, g, T)) < 1e-10
    assert _max_comp(c30(f, g, h, T)) < 1e-10
    A = random_chart_connection(rng, "S3xI", 2).form(T, {})
    assert _max_comp(c20(f, g, A)) < 1e-10


def test_beta_vanishes_against_the_identity_and_needs_a_path_domain():
    rng = np.random.default_rng(3)
    f = path_from_target(1, random_polynomial_field(rng, 3, 2), 3)
    assert abs(beta(f, identity_field(3), T)) < 1e-14
    with pytest.raises(FieldError):
        beta(f, f, S)


def test_beta_of_a_path_and_its_inverse_vanishes():
    rng = np.random.default_rng(4)
    f = path_from_target(0, random_polynomial_field(rng, 3, 2), 3)
    assert abs(beta(f, Inverse(f), T)) < 1e-12


def test_gamma_of_a_path_and_its_inverse_vanishes():
    rng = np.random.default_rng(5)
    f = exp_path(random_polynomial_field(rng, 3, 2))
    A = random_connection(rng, S, 3)
    assert abs(gamma(f, Inverse(f), A, T)) < 1e-12


def test_descent_cubic_identity_is_exact_on_the_sphere():
    rng = np.random.default_rng(6)
    f, g, h = (Product(instanton(k, 3), exp_field(random_polynomial_field(rng, 3, 2))) for k in (1, 0, -1))
    conn = random_chart_connection(rng, "S3", 3)
    rep = descent_residual(0, S, (f, g, h), conn)
    assert rep["max_pointwise"] < 1e-10


def test_descent_top_identity_converges_on_the_path_domain():
    rng = np.random.default_rng(7)
    f, g, h = (path_from_target(k, random_polynomial_field(rng, 3, 2), 3) for k in (1, 0, 0))
    reps = [descent_residual(3, make_domain("S3xI", s3=(n, n, 2 * n), nt=n), (f, g, h)) for n in (8, 16)]
    assert reps[1]["integrated_relative"] <= 1e-3
    assert reps[0]["relative"] / reps[1]["relative"] > 3


def test_descent_rejects_unknown_levels():
    with pytest.raises(ValueError):
        descent_residual(4, S, ())


def test_c5_of_the_rotated_instanton_is_one_half():
    w = BulkWitness(rotation_bulk(instanton(1)), rotation_loop(instanton(1)))
    assert distance_mod1(c5(rotation_loop(instanton(1)), w, Q), 0.5) < 2e-2
    sign, err = epsilon(rotation_loop(instanton(1)), w, Q)
    assert sign == -1 and err < 0.15


def test_c5_of_a_single_exp_loop_vanishes():
    rng = np.random.default_rng(8)
    j = exp_loop(random_polynomial_field(rng, 3, 2), profile=random_bump(rng))
    assert abs(c5_raw(bulk_witness(j), Q)) < 1e-10


def test_rotation_loops_are_built_from_su2_maps_and_land_in_su3():
    assert rotation_loop(instanton(1)).rank == 3
    with pytest.raises(FieldError):
        rotation_loop(embed(instanton(1), 3))
