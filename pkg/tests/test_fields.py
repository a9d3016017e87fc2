import numpy as np
import pytest

from currentext import algebra as alg
from currentext.fields import (
    BulkWitness, FieldError, Inverse, Product, WitnessError, bulk_witness, conjugation_path,
    embed, exp_field, exp_loop, gauge_transform, identity_field, instanton, is_based,
    mapping_degree, maurer_cartan, path_from_target, random_bump, random_chart_connection,
    random_polynomial_field, rotation_bulk, rotation_loop, sup_distance,
)
from currentext.forms import exterior_d
from currentext.geometry import make_domain

S = make_domain("S3", s3=(16, 16, 32))
T = make_domain("S3xI", s3=(8, 8, 16), nt=8)
Q = make_domain("S3xD2", s3=(8, 8, 16), disk=(8, 16))


def _mc_gap(f, dom, side):
    a = maurer_cartan(f, dom, side)
    b = maurer_cartan(f, dom, side, method="fd")
    return max(np.max(np.abs(a.component((k,)) - b.component((k,)))) for k in range(dom.dim))


def test_instanton_values_are_unitary_and_based():
    v = instanton(1).sample(S)
    assert alg.is_group(v, tol=1e-12)
    assert is_based(instanton(1)) and is_based(instanton(-2))


@pytest.mark.parametrize("k", [-2, -1, 0, 1, 2])
def test_instanton_degree(k):
    assert mapping_degree(instanton(k), S) == pytest.approx(k, abs=0.02)


def test_degree_of_embedding_and_exp_fields():
    rng = np.random.default_rng(0)
    assert mapping_degree(instanton(1, 3), S) == pytest.approx(1, abs=0.02)
    assert abs(mapping_degree(exp_field(random_polynomial_field(rng, 3, 2)), S)) < 0.02


def test_degree_is_defined_on_the_sphere_only():
    with pytest.raises(FieldError):
        mapping_degree(instanton(1), T)


def test_analytic_maurer_cartan_of_the_instanton_matches_finite_differences():
    f = instanton(1)
    assert _mc_gap(f, S, "left") < 5e-3
    assert _mc_gap(f, S, "right") < 5e-3


@pytest.mark.parametrize("field_factory", [
    lambda rng: exp_field(random_polynomial_field(rng, 3, 2)),
    lambda rng: Product(instanton(2, 3), Inverse(exp_field(random_polynomial_field(rng, 3, 2)))),
])
def test_finite_difference_gap_shrinks_at_fourth_order(field_factory):
    f = field_factory(np.random.default_rng(1))
    fine = make_domain("S3", s3=(32, 32, 64))
    for side in ("left", "right"):
        coarse_gap, fine_gap = _mc_gap(f, S, side), _mc_gap(f, fine, side)
        assert coarse_gap / fine_gap > 10
        assert fine_gap < 2e-2


def test_path_and_bulk_maurer_cartan_match_finite_differences():
    rng = np.random.default_rng(2)
    path = path_from_target(1, random_polynomial_field(rng, 2, 2), 2)
    coarse = _mc_gap(path, make_domain("S3xI", s3=(8, 8, 16), nt=8), "right")
    fine = _mc_gap(path, make_domain("S3xI", s3=(16, 16, 32), nt=16), "right")
    assert coarse / fine > 10


def test_bulk_maurer_cartan_disk_components_converge():
    f = rotation_bulk(instanton(1))
    gaps = []
    for disk in ((8, 16), (16, 32)):
        dom = make_domain("S3xD2", s3=(8, 8, 16), disk=disk)
        a, b = maurer_cartan(f, dom, "right"), maurer_cartan(f, dom, "right", method="fd")
        gaps.append(max(np.max(np.abs(a.component((k,)) - b.component((k,)))) for k in (3, 4)))
    assert gaps[0] / gaps[1] > 10


def test_product_and_inverse_identities():
    rng = np.random.default_rng(3)
    f = path_from_target(1, random_polynomial_field(rng, 2, 2), 2)
    ff = Product(f, Inverse(f))
    assert sup_distance(ff, identity_field(2), T) < 1e-12
    a = maurer_cartan(ff, T, "right")
    assert all(np.max(np.abs(v)) < 1e-12 for v in a.comps.values())


def test_path_from_target_endpoints():
    rng = np.random.default_rng(4)
    xi = random_polynomial_field(rng, 2, 2)
    v = path_from_target(1, xi, 2)
    assert sup_distance(v.at_time(0.0), instanton(1), S) < 1e-12
    assert sup_distance(v.at_time(1.0), Product(instanton(1), exp_field(xi)), S) < 1e-12


def test_exp_loop_is_a_based_loop():
    rng = np.random.default_rng(5)
    j = exp_loop(random_polynomial_field(rng, 3, 2), profile=random_bump(rng))
    assert sup_distance(j.at_time(0.0), identity_field(3), S) < 1e-12
    assert sup_distance(j.at_time(1.0), identity_field(3), S) < 1e-12
    assert is_based(j)


def test_rotation_loop_and_its_witness():
    loop = rotation_loop(instanton(1))
    w = BulkWitness(rotation_bulk(instanton(1)), loop)
    assert w.boundary_mismatch() < 1e-12
    assert w.center_spread() < 1e-12
    built = bulk_witness(loop)
    assert built.boundary_mismatch() < 1e-12


def test_conjugation_path_closes_up():
    g1 = instanton(1)
    rho = Product(conjugation_path(g1), Inverse(g1))
    assert sup_distance(rho.at_time(0.0), identity_field(2), S) < 1e-12
    assert sup_distance(rho.at_time(1.0), identity_field(2), S) < 1e-12
    w = bulk_witness(rho)
    assert w.boundary_mismatch() < 1e-10


def test_witness_for_products_of_exp_loops():
    rng = np.random.default_rng(6)
    j1 = exp_loop(random_polynomial_field(rng, 3, 2), profile=random_bump(rng))
    j2 = exp_loop(random_polynomial_field(rng, 3, 2), profile=random_bump(rng))
    w = bulk_witness(Product(Inverse(j1), j2))
    assert w.boundary_mismatch() < 1e-10
    assert w.center_spread() < 1e-10


def test_witness_is_refused_for_open_paths():
    rng = np.random.default_rng(7)
    with pytest.raises(WitnessError):
        bulk_witness(path_from_target(0, random_polynomial_field(rng, 3, 2), 3))


def test_gauge_transform_composes_in_the_stated_order():
    rng = np.random.default_rng(8)
    f = exp_field(random_polynomial_field(rng, 3, 2))
    g = Product(instanton(1, 3), exp_field(random_polynomial_field(rng, 3, 1)))
    A = random_chart_connection(rng, "S3", 3).form(S, {})
    lhs = gauge_transform(Product(f, g), A)
    rhs = gauge_transform(g, gauge_transform(f, A))
    for k in range(3):
        np.testing.assert_allclose(lhs.component((k,)), rhs.component((k,)), atol=1e-12)


def test_chart_connection_curvature_is_consistent():
    rng = np.random.default_rng(9)
    dom = make_domain("S3xI", s3=(16, 16, 32), nt=16)
    conn = random_chart_connection(rng, "S3xI", 3, scale=0.3, degree=1)
    A, F = conn.form(dom, {}), conn.curvature(dom, {})
    from currentext.forms import curvature
    Fn = curvature(A)
    gap = max(np.max(np.abs(F.component(k) - Fn.component(k))) for k in F.comps)
    assert gap < 2e-2


def test_embedding_preserves_degree_and_rank_checks():
    f = embed(instanton(1), 3)
    assert f.rank == 3
    with pytest.raises(FieldError):
        Product(instanton(1), instanton(1, 3))
