import json
import itertools

import numpy as np
import pytest

from currentext.algebra import random_algebra
from currentext.fields import instanton, maurer_cartan
from currentext.forms import (
    Form, commutator_form, curvature, exterior_d, integrate, one_form, power, top_trace_power,
    trace_form, trace_wedge, wedge, zero_form,
)
from currentext.geometry import integrate_top, make_domain


@pytest.fixture(scope="module")
def sdom():
    return make_domain("S3", s3=(8, 8, 16))


def _random_one_form(rng, dom, rank=3):
    return one_form([random_algebra(rng, rank, size=dom.shape) for _ in range(dom.dim)], dom, rank)


def _random_two_form(rng, dom, rank=3):
    return wedge(_random_one_form(rng, dom, rank), _random_one_form(rng, dom, rank))


def test_wedge_of_one_forms_is_graded():
    dom = make_domain("S3xI", s3=(8, 8, 8), nt=8)
    rng = np.random.default_rng(0)
    a, b = _random_one_form(rng, dom), _random_one_form(rng, dom)
    # graded trace cyclicity for degrees (1, 1): tr(a^b) = -tr(b^a)
    lhs = trace_form(wedge(a, b))
    rhs = trace_form(wedge(b, a))
    for k in lhs.comps:
        np.testing.assert_allclose(lhs.comps[k], -rhs.comps[k], atol=1e-12)


def test_trace_cyclicity_for_one_and_two_forms(sdom):
    rng = np.random.default_rng(1)
    a, b = _random_one_form(rng, sdom), _random_two_form(rng, sdom)
    x = integrate(trace_wedge(a, b))
    y = integrate(trace_wedge(b, a))
    assert abs(x - y) <= 1e-10 * max(1.0, abs(x))


def test_trace_wedge_matches_trace_of_wedge(sdom):
    rng = np.random.default_rng(2)
    a, b = _random_one_form(rng, sdom), _random_two_form(rng, sdom)
    np.testing.assert_allclose(trace_wedge(a, b).top(), trace_form(wedge(a, b)).top(), atol=1e-12)


def test_wedge_is_associative(sdom):
    rng = np.random.default_rng(3)
    a, b, c = (_random_one_form(rng, sdom) for _ in range(3))
    np.testing.assert_allclose(wedge(wedge(a, b), c).top(), wedge(a, wedge(b, c)).top(), atol=1e-12)


def test_top_trace_power_matches_permutation_sum():
    rng = np.random.default_rng(4)
    from currentext.forms import _perm_sign
    for dim in (3, 5):
        comps = [rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(dim)]
        ref = 0
        for p in itertools.permutations(range(dim)):
            m = np.eye(3)
            for k in p:
                m = m @ comps[k]
            ref += _perm_sign(p) * np.trace(m)
        assert top_trace_power(comps, dim) == pytest.approx(ref, rel=1e-12)


def test_top_trace_power_agrees_with_repeated_wedge(sdom):
    rng = np.random.default_rng(5)
    a = _random_one_form(rng, sdom)
    np.testing.assert_allclose(top_trace_power(list(a.comps[(k,)] for k in range(3)), 3),
                               trace_form(power(a, 3)).top(), atol=1e-11)


def test_exterior_derivative_squares_to_zero():
    dom = make_domain("S3xI", s3=(16, 16, 16), nt=16)
    psi, theta, phi, t = (dom.coord(n) for n in ("psi", "theta", "phi", "t"))
    f = zero_form(np.broadcast_to(np.sin(psi) ** 2 * np.cos(theta) * np.cos(phi) * t ** 2, dom.shape), dom)
    ddf = exterior_d(exterior_d(f))
    assert max(np.max(np.abs(v)) for v in ddf.comps.values()) < 1e-2
    # and is exact on functions of a single periodic variable at machine level
    g = zero_form(np.broadcast_to(np.sin(phi), dom.shape), dom)
    assert not exterior_d(exterior_d(g)).comps or max(np.max(np.abs(v)) for v in exterior_d(exterior_d(g)).comps.values()) < 1e-12


def test_pure_gauge_connection_is_flat(sdom):
    A = maurer_cartan(instanton(1), make_domain("S3", s3=(16, 16, 32)))
    F = curvature(A)
    assert max(np.max(np.abs(v)) for v in F.comps.values()) < 5e-3


def test_stokes_on_the_interval():
    dom = make_domain("S3xI", s3=(16, 16, 32), nt=32)
    psi, theta, phi, t = (dom.coord(n) for n in ("psi", "theta", "phi", "t"))
    # omega = t^2 sin^2 psi sin theta dpsi dtheta dphi; d omega = 2 t dt ^ vol
    comps = {(0, 1, 2): np.broadcast_to(t ** 2 * np.sin(psi) ** 2 * np.sin(theta), dom.shape)}
    d = exterior_d(Form(dom, 3, comps))
    total = integrate(d)
    # orientation dt ^ vol with the negatively oriented chart: integral of d omega = omega(1) - omega(0)
    sphere = make_domain("S3", s3=(16, 16, 32))
    end = integrate_top(sphere, sphere.coord("psi") * 0 + np.sin(sphere.coord("psi")) ** 2 * np.sin(sphere.coord("theta")))
    assert total == pytest.approx(end, rel=2e-3)


def test_commutator_form_is_the_ungraded_difference(sdom):
    rng = np.random.default_rng(6)
    a, b = _random_one_form(rng, sdom), _random_one_form(rng, sdom)
    c = commutator_form(a, b)
    ref = wedge(a, b) - wedge(b, a)
    for k in ref.comps:
        np.testing.assert_allclose(c.comps[k], ref.comps[k], atol=1e-12)
    assert all(np.max(np.abs(v)) < 1e-12 for v in commutator_form(a, a).comps.values())


def test_dump_record_round_trip_and_layout(sdom):
    A = maurer_cartan(instanton(1), sdom)
    rec = json.loads(json.dumps(A.to_record()))
    assert rec["index_order"] == ["psi", "theta", "phi", "form_index", "row", "col"]
    assert rec["shape"] == [8, 8, 16, 3, 2, 2]
    assert len(rec["values"][0]) == 2
    # node-major: the first entries belong to the first node and first form index
    first = A.component((0,))[0, 0, 0, 0, 0]
    assert rec["values"][0] == pytest.approx([first.real, first.imag])
    back = Form.from_record(rec, sdom)
    np.testing.assert_array_equal(back.dense(), A.dense())


def test_forms_of_different_degree_do_not_add(sdom):
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError):
        _random_one_form(rng, sdom) + _random_two_form(rng, sdom)
