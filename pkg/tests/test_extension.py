import numpy as np
import pytest

from currentext.duals import AffineDual, zero_dual
from currentext.extension import (
    ADJOINT_NORMALIZATIONS, ExtAlgebraElement, ExtElement, Grids, alpha, bracket_ext,
    commutator_target, dual_act, equivalent, exp_path, identity_element, inverse, multiply,
    probe_connections, random_connection,
)
from currentext.fields import (
    Inverse, Product, exp_field, exp_loop, identity_field, instanton, path_from_target,
    random_bump, random_polynomial_field,
)
from currentext.forms import wedge


@pytest.fixture(scope="module")
def grids():
    return Grids((8, 8, 16), 8, (8, 16))


def _dual(rng, grids, rank=3):
    sd = grids.sphere
    kernel = wedge(random_connection(rng, sd, rank), random_connection(rng, sd, rank))
    return AffineDual(rng.normal(), kernel)


def test_affine_dual_is_affine(grids):
    rng = np.random.default_rng(0)
    phi = _dual(rng, grids)
    A, B = random_connection(rng, grids.sphere, 3), random_connection(rng, grids.sphere, 3)
    mid = (A + B).scale(0.5)
    assert phi(mid) == pytest.approx(0.5 * (phi(A) + phi(B)), abs=1e-12)
    assert (phi - phi)(A) == 0.0
    assert zero_dual()(A) == 0.0


def test_dual_action_composes_in_the_gauge_order(grids):
    rng = np.random.default_rng(1)
    phi = _dual(rng, grids)
    f = exp_field(random_polynomial_field(rng, 3, 2))
    g = Product(instanton(1, 3), exp_field(random_polynomial_field(rng, 3, 1)))
    lhs = dual_act(Product(f, g), phi, grids.sphere)
    rhs = dual_act(f, dual_act(g, phi, grids.sphere), grids.sphere)
    for A in probe_connections(grids.sphere, 3, count=3):
        assert lhs(A) == pytest.approx(rhs(A), abs=1e-10)


def test_identity_and_inverse_are_equivalent_to_the_neutral_element(grids):
    rng = np.random.default_rng(2)
    a = ExtElement(path_from_target(1, random_polynomial_field(rng, 3, 2), 3), _dual(rng, grids))
    e = identity_element(3)
    probes = probe_connections(grids.sphere, 3, count=3)
    assert equivalent(multiply(a, e, grids), a, grids, probes).equivalent
    assert equivalent(multiply(e, a, grids), a, grids, probes).equivalent
    assert equivalent(multiply(a, inverse(a, grids), grids), e, grids, probes).distance < 5e-3


def test_integer_shifts_are_invisible_and_fractional_shifts_are_not(grids):
    rng = np.random.default_rng(3)
    a = ExtElement(exp_path(random_polynomial_field(rng, 3, 2)), _dual(rng, grids))
    probes = probe_connections(grids.sphere, 3, count=3)
    assert equivalent(a, ExtElement(a.path, a.dual.shift(1.0)), grids, probes).equivalent
    assert not equivalent(a, ExtElement(a.path, a.dual.shift(0.25)), grids, probes).equivalent


def test_elements_with_different_end_values_are_not_equivalent(grids):
    rng = np.random.default_rng(4)
    a = ExtElement(exp_path(random_polynomial_field(rng, 3, 2)), zero_dual())
    b = ExtElement(exp_path(random_polynomial_field(rng, 3, 2)), zero_dual())
    res = equivalent(a, b, grids)
    assert not res.equivalent and res.boundary_gap > 1e-6


def test_alpha_of_a_trivial_loop_vanishes(grids):
    rng = np.random.default_rng(5)
    f = path_from_target(0, random_polynomial_field(rng, 3, 2), 3)
    assert alpha(f, identity_field(3), grids) == 0.0


def test_alpha_of_a_single_exp_loop_is_beta_only(grids):
    rng = np.random.default_rng(6)
    f = path_from_target(0, random_polynomial_field(rng, 3, 2), 3)
    j = exp_loop(random_polynomial_field(rng, 3, 2), profile=random_bump(rng))
    from currentext.cochains import beta
    assert alpha(f, j, grids) == pytest.approx(beta(f, j, grids.path), abs=1e-10)


def test_extended_bracket_is_exactly_antisymmetric(grids):
    rng = np.random.default_rng(7)
    sd = grids.sphere
    x = ExtAlgebraElement(random_polynomial_field(rng, 3, 2), _dual(rng, grids))
    y = ExtAlgebraElement(random_polynomial_field(rng, 3, 2), _dual(rng, grids))
    s = bracket_ext(x, y, sd).dual + bracket_ext(y, x, sd).dual
    for A in probe_connections(sd, 3, count=3):
        assert abs(s(A)) <= 1e-12 * max(1.0, abs(bracket_ext(x, y, sd).dual(A)))


def test_commutator_target_is_antisymmetric(grids):
    rng = np.random.default_rng(8)
    xi, eta = random_polynomial_field(rng, 3, 2), random_polynomial_field(rng, 3, 2)
    A = random_connection(rng, grids.sphere, 3)
    assert commutator_target(xi, eta, A) == -commutator_target(eta, xi, A)


def test_adjoint_normalization_candidates():
    assert set(ADJOINT_NORMALIZATIONS) == {"pi3-derived", "pi3-i", "pi3-real", "pi2"}
    c1, c2 = ADJOINT_NORMALIZATIONS["pi3-derived"]
    assert c2 == pytest.approx(c1 / 2)
