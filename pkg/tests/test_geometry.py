import numpy as np
import pytest

from currentext.geometry import (
    GridError, chart_derivative, extrapolate_boundary, integrate_top, make_domain, refine,
)


def _volume_density(dom):
    """Pull-back of the standard volume form of S^3 (outward normal first) to the chart."""
    x = dom.ambient()
    d = dom.ambient_derivatives()
    m = np.stack(np.broadcast_arrays(x, *d), axis=-2)
    return np.linalg.det(m)


def test_chart_is_negatively_oriented():
    dom = make_domain("S3", s3=(16, 16, 32))
    dens = _volume_density(dom)
    assert np.all(dens <= 1e-14)
    # the chart density integrates to -2 pi^2 before the orientation sign
    raw = dom.cell_volume * np.sum(dens)
    assert raw == pytest.approx(-2 * np.pi ** 2, rel=5e-3)
    assert integrate_top(dom, dens) == pytest.approx(2 * np.pi ** 2, rel=5e-3)


@pytest.mark.parametrize("kind,sign", [("S3", -1), ("S3xI", 1), ("S3xS1", 1), ("S3xD2", -1)])
def test_orientation_signs(kind, sign):
    assert make_domain(kind, s3=(8, 8, 8), nt=8, disk=(8, 8), ntau=8).orientation == sign


def test_volume_of_s3_converges_quadratically():
    errs = []
    for n in (8, 16, 32):
        dom = make_domain("S3", s3=(n, n, 2 * n))
        psi, theta = dom.coord("psi"), dom.coord("theta")
        dens = -np.sin(psi) ** 2 * np.sin(theta)  # chart density of the volume, negative orientation
        errs.append(abs(integrate_top(dom, dens) - 2 * np.pi ** 2))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_resolutions_below_eight_are_rejected():
    with pytest.raises(GridError):
        make_domain("S3", s3=(4, 8, 8))
    with pytest.raises(GridError):
        make_domain("S3xD2", disk=(8, 6))
    with pytest.raises(GridError):
        make_domain("torus")


def test_refine_doubles_every_axis():
    dom = make_domain("S3xD2", s3=(8, 8, 16), disk=(8, 16))
    assert refine(dom).shape == (16, 16, 32, 16, 32)


def test_chart_derivative_is_fourth_order():
    errs = []
    for n in (16, 32):
        dom = make_domain("S3xI", s3=(8, 8, 8), nt=n)
        t = dom.coord("t")
        f = np.broadcast_to(np.sin(3 * t), dom.shape)
        df = chart_derivative(f, dom, 3)
        errs.append(np.max(np.abs(df - 3 * np.cos(3 * t))))
    assert errs[0] / errs[1] > 12


def test_periodic_derivative_is_spectrally_accurate_on_trig():
    dom = make_domain("S3", s3=(8, 8, 32))
    phi = dom.coord("phi")
    f = np.broadcast_to(np.cos(phi), dom.shape)
    np.testing.assert_allclose(chart_derivative(f, dom, 2), np.broadcast_to(-np.sin(phi), dom.shape), atol=2e-4)


def test_boundary_extrapolation_is_exact_on_cubics():
    dom = make_domain("S3xI", s3=(8, 8, 8), nt=10)
    t = dom.axes[3]
    f = 1 + t - 2 * t ** 2 + 0.5 * t ** 3
    assert extrapolate_boundary(f, 0, "lower") == pytest.approx(1.0, abs=1e-12)
    assert extrapolate_boundary(f, 0, "upper") == pytest.approx(0.5, abs=1e-12)


def test_integration_is_deterministic():
    dom = make_domain("S3xI", s3=(8, 8, 16), nt=8)
    rng = np.random.default_rng(0)
    dens = rng.normal(size=dom.shape)
    assert integrate_top(dom, dens) == integrate_top(dom, dens.copy())
