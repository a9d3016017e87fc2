"""Descent cochains and the integrated quantities built from them.

Pointwise cochains return scalar :class:`~currentext.forms.Form` objects;
``beta``, ``gamma``, ``c5`` integrate them.  Normalizations:

    beta(f, g)     = K int c21(f, g)
    gamma(f, g; A) = K [int_{boundary} c20(f, g; A) + int c21(f, g)]
    C5(u)          = K int_Q c12(u) = (K / 10) int_Q tr(du u^-1)^5     (mod 1)
    omega(xi, eta; A) = (K / i) (-int_{S^3} tr[(dxi deta - deta dxi) A])

with ``K = i / 48 pi^3``.  This is the normalization for which C5 is
integer-valued on closed 5-manifolds (so that exp(2 pi i C5) is the Witten
sign); the alternative ``i / 24 pi^3`` is kept as ``K_DOUBLE`` for audits.
"""

import numpy as np

from .algebra import dagger
from .duals import AffineDual
from .fields import (
    GroupField, FieldError, bulk_witness, BulkWitness, embed, maurer_cartan, gauge_transform,
)
from .forms import (
    Form, wedge, trace_wedge, trace_form, power, curvature, exterior_d, integrate,
    top_trace_power, one_form, commutator_form,
)
from .geometry import make_domain, integrate_top
from ._kernels import top_trace5

BETA_NORM = 1j / (48.0 * np.pi ** 3)
K_DOUBLE = 1j / (24.0 * np.pi ** 3)
C5_NORM = BETA_NORM / 10.0
OMEGA_NORM = -BETA_NORM / 1j


def _right(f, dom, cache=None):
    v, rmc = f.evaluate(dom, cache)
    return one_form(rmc, dom, f.rank)


def _left(f, dom, cache=None):
    v, rmc = f.evaluate(dom, cache)
    vi = dagger(v)
    return one_form([None if x is None else vi @ x @ v for x in rmc], dom, f.rank)


def _conj_inv(f, A, cache=None):
    """``f^-1 A f`` for a matrix form on the field's grid."""
    v, _ = f.evaluate(A.domain, cache)
    vi = dagger(v)
    return A.map(lambda x: vi @ x @ v)


# -- pointwise cochains --------------------------------------------------


def c02(A, F=None):
    """Chern-Simons 5-form ``tr(A F^2 - 1/2 A^3 F + 1/10 A^5)``."""
    F = curvature(A) if F is None else F
    a3 = power(A, 3)
    out = trace_wedge(A, wedge(F, F)) - trace_wedge(a3, F).scale(0.5)
    top5 = trace_wedge(wedge(a3, A), A).scale(0.1)
    return out + top5


def c12(g, dom, cache=None):
    """``1/10 tr(dg g^-1)^5`` (nonzero only on 5-dimensional domains)."""
    _, rmc = g.evaluate(dom, cache)
    if dom.dim != 5:
        return Form(dom, 5, {})
    return Form(dom, 5, {tuple(range(5)): 0.1 * top_trace_power(list(rmc), 5)})


def c11(g, A, F=None, cache=None):
    """``tr[-1/2 V (AF + FA - A^3) + 1/4 (VA)^2 + 1/2 V^3 A]`` with ``V = dg g^-1``."""
    dom = A.domain
    V = _right(g, dom, cache)
    va = wedge(V, A)
    out = trace_wedge(va, va).scale(0.25) + trace_wedge(power(V, 3), A).scale(0.5)
    inner = -power(A, 3)
    if F is not None:
        inner = wedge(A, F) + wedge(F, A) + inner
    return out - trace_wedge(V, inner).scale(0.5)


def c21_forms(A, V):
    """``tr[1/2 V A^3 + 1/4 (VA)^2 + 1/2 V^3 A]`` from given 1-forms."""
    va = wedge(V, A)
    return (trace_wedge(V, power(A, 3)).scale(0.5) + trace_wedge(va, va).scale(0.25)
            + trace_wedge(power(V, 3), A).scale(0.5))


def c21(f, g, dom, cache=None):
    """``c11(g; f^-1 df)`` for a flat connection: the 2-cocycle density."""
    return c21_forms(_left(f, dom, cache), _right(g, dom, cache))


def c20_forms(alpha, V, B):
    """``1/2 tr[(alpha V - V alpha) B]``."""
    return trace_wedge(commutator_form(alpha, V), B).scale(0.5)


def c20(f, g, A, cache=None):
    """``1/2 tr[(f^-1 df dg g^-1 - dg g^-1 f^-1 df) f^-1 A f]``."""
    dom = A.domain
    return c20_forms(_left(f, dom, cache), _right(g, dom, cache), _conj_inv(f, A, cache))


def c30(f, g, h, dom, cache=None):
    """``c20(g, h; f^-1 df)``."""
    return c20(g, h, _left(f, dom, cache), cache)


# -- integrated quantities -----------------------------------------------


def _real(value, what, tol=1e-8):
    if abs(np.imag(value)) > tol * max(1.0, abs(value)):
        raise FloatingPointError(f"{what} has a large imaginary part: {value}")
    return float(np.real(value))


def beta(f, g, dom, cache=None, norm=BETA_NORM):
    """``K int c21(f, g)`` over S3xI or S3xS1."""
    if dom.kind not in ("S3xI", "S3xS1"):
        raise FieldError("beta integrates over S3xI or S3xS1")
    return _real(norm * integrate(c21(f, g, dom, cache)), "beta")


def _sphere_of(dom):
    return make_domain("S3", s3=dom.shape[:3])


def boundary_kernel(f, g, s3dom, t):
    """Kernel ``K`` with ``int tr(K ^ A) = int c20(f_t, g_t; A)`` on the sphere at time t."""
    ft, gt = f.at_time(t), g.at_time(t)
    v, rf = ft.evaluate(s3dom)
    _, rg = gt.evaluate(s3dom)
    R = one_form(rf, s3dom, f.rank)
    W = one_form(rg, s3dom, f.rank).map(lambda x: v @ x @ dagger(v))
    # f (alpha V - V alpha) f^-1 = R W - W R with W = f V f^-1
    return commutator_form(R, W).scale(0.5)


def gamma_dual(f, g, dom, s3dom=None, include_start=False):
    """Affine functional ``A -> gamma(f, g; A)`` for paths on S3xI.

    By default only the end sphere ``t = 1`` carries the ``c20`` term; the
    start sphere is included when ``include_start`` is set.  The start term
    is paired with a connection that the group law twists by the end value
    of the first path, which breaks the cocycle identity unless the paths
    start at the identity.
    """
    if dom.kind != "S3xI":
        raise FieldError("gamma is defined for paths on S3xI")
    s3dom = _sphere_of(dom) if s3dom is None else s3dom
    kern = boundary_kernel(f, g, s3dom, 1.0)
    if include_start:
        kern = kern - boundary_kernel(f, g, s3dom, 0.0)
    return AffineDual(beta(f, g, dom), kern.scale(BETA_NORM))


def gamma(f, g, A, dom, include_start=False):
    """``gamma(f, g; A)`` evaluated directly from ``c20`` on the boundary spheres."""
    ends = integrate(c20(f.at_time(1.0), g.at_time(1.0), A))
    if include_start:
        ends -= integrate(c20(f.at_time(0.0), g.at_time(0.0), A))
    return _real(BETA_NORM * ends, "gamma boundary") + beta(f, g, dom)


def _chunks(n, size):
    return [(s, min(n, s + size)) for s in range(0, n, size)]


def c5_raw(witness, dom=None, chunk=4, norm=C5_NORM):
    """Unreduced ``(i / 240 pi^3) int_Q tr(du u^-1)^5`` for a bulk field.

    The disk angle is processed in chunks of ``chunk`` nodes to bound memory.
    """
    dom = make_domain("S3xD2") if dom is None else dom
    field = witness.field if isinstance(witness, BulkWitness) else witness
    ax = dom.axis_index("tau")
    nodes = dom.axes[ax]
    total = 0.0
    for s, e in _chunks(len(nodes), chunk):
        view = dom.with_axis("tau", nodes[s:e])
        _, rmc = field.evaluate(view)
        total += integrate_top(view, top_trace5(list(rmc), view.shape))
    return _real(norm * total, "C5", tol=1e-6)


def mod1(x):
    """Representative of ``x`` mod 1 in (-1/2, 1/2]."""
    r = x - np.round(x)
    return 0.5 if np.isclose(r, -0.5, atol=0.0, rtol=0.0) else r


def distance_mod1(x, y):
    return abs(mod1(x - y))


def c5(loop, witness=None, dom=None, chunk=4):
    """``C5`` of a loop, reduced mod 1; builds a witness when none is given."""
    witness = bulk_witness(loop) if witness is None else witness
    return mod1(c5_raw(witness, dom, chunk))


def epsilon(loop, witness=None, dom=None, chunk=4):
    """Sign ``exp(2 pi i C5)`` of an SU(2) loop embedded in SU(3).

    Returns ``(sign, phase_error)`` where ``phase_error`` is the distance of
    the phase from the returned sign.
    """
    witness = bulk_witness(loop) if witness is None else witness
    phase = np.exp(2j * np.pi * c5_raw(witness, dom, chunk))
    sign = 1 if phase.real >= 0 else -1
    return sign, float(abs(phase - sign))


# -- Lie algebra cochains ------------------------------------------------


def e11(xi, A, F=None):
    """``tr[1/2 (AF + FA - A^3) dxi]``."""
    dxi = xi.differential(A.domain)
    inner = -power(A, 3)
    if F is not None:
        inner = wedge(A, F) + wedge(F, A) + inner
    return trace_wedge(inner, dxi).scale(0.5)


def e20(xi, eta, A):
    """``1/2 tr[(dxi deta - deta dxi) A]``."""
    dom = A.domain
    return trace_wedge(commutator_form(xi.differential(dom), eta.differential(dom)), A).scale(0.5)


def omega(xi, eta, A):
    """``-(1 / 48 pi^3) int_{S^3} tr[(dxi deta - deta dxi) A]`` (purely imaginary)."""
    return complex(OMEGA_NORM * 2.0 * integrate(e20(xi, eta, A)))


def covariant_derivative(xi, A):
    """``d_A xi = dxi + [A, xi]`` as a matrix 1-form."""
    dom = A.domain
    v, d = xi.evaluate(dom)
    comps = []
    for k in range(dom.dim):
        terms = [] if d[k] is None else [d[k]]
        a = A.comps.get((k,))
        if a is not None:
            terms.append(a @ v - v @ a)
        comps.append(sum(terms) if terms else None)
    return one_form(comps, dom, xi.rank)


def omega_closedness(xi, eta, zeta, f, dom=None):
    """Lie-algebra coboundary of ``omega`` at the pure gauge ``A = f^-1 df``.

    Derivatives along left-invariant directions are exact because omega is
    affine in ``A`` and ``d/dt (f e^{t zeta})^-1 d(f e^{t zeta}) = d_A zeta``.
    Returns ``(residual, scale)``.
    """
    from .fields import AlgebraBracket

    dom = make_domain("S3") if dom is None else dom
    A = maurer_cartan(f, dom, "left")

    def om(a, b, conn):
        return omega(a, b, conn)

    def lin(a, b, direction):
        # omega is affine with zero constant part, so its derivative is itself
        return omega(a, b, direction)

    terms = [
        lin(eta, zeta, covariant_derivative(xi, A)),
        -lin(xi, zeta, covariant_derivative(eta, A)),
        lin(xi, eta, covariant_derivative(zeta, A)),
        -om(AlgebraBracket(xi, eta), zeta, A),
        om(AlgebraBracket(xi, zeta), eta, A),
        -om(AlgebraBracket(eta, zeta), xi, A),
    ]
    return abs(sum(terms)), max(abs(t) for t in terms)


# -- descent equations -----------------------------------------------------


def _chunked(dom, axis_name, chunk, fn):
    """Evaluate ``fn(view) -> {index: scalar array}`` chunk-wise and reassemble."""
    ax = dom.axis_index(axis_name)
    nodes = dom.axes[ax]
    parts = {}
    for s, e in _chunks(len(nodes), chunk):
        view = dom.with_axis(axis_name, nodes[s:e])
        for k, v in fn(view).items():
            parts.setdefault(k, []).append(np.broadcast_to(v, view.shape))
    return {k: np.concatenate(v, axis=ax) for k, v in parts.items()}


def _top(form):
    return form.comps.get(tuple(range(form.domain.dim)), 0.0)


def _d_top(comps, dom):
    """Top component of ``d`` of a scalar (dim-1)-form given by its components."""
    return _top(exterior_d(Form(dom, dom.dim - 1, comps)))


def _residual_report(dom, residual, terms):
    """Integrated, L1 and relative measures of a top-degree residual density."""
    l1 = abs(integrate_top(dom, np.abs(residual)))
    size = sum(abs(integrate_top(dom, np.abs(t))) for t in terms)
    return {
        "integrated": float(abs(integrate_top(dom, residual))),
        "integrated_relative": float(abs(integrate_top(dom, residual)) / size) if size > 0 else 0.0,
        "l1": float(l1),
        "relative": float(l1 / size) if size > 0 else 0.0,
        "max_pointwise": float(np.max(np.abs(residual))),
        "nodes": int(np.prod(dom.shape)),
    }


def descent_residual(p, dom, fields, conn=None, chunk=2):
    """Residual density of the descent identity of level ``p`` on ``dom``.

    Identities (verified signs):

        p = 1 (on S3xD2):  c02(g.A) - c02(A) = d c11(g, A) + c12(g)
        p = 2 (on S3xI):   delta c11(f, g; A) = d c20(f, g; A) + c21(f, g)
        p = 3 (on S3xI):   delta c21(f, g, h) = -d c30(f, g, h)
        p = 0 (on S3):     delta c20(f, g, h; A) = c30(f, g, h)

    where ``delta c11(f, g; A) = c11(g; f.A) - c11(fg; A) + c11(f; A)``.
    ``fields`` holds one (p=1), two (p=2) or three (p=0, 3) group fields and
    ``conn`` a :class:`~currentext.fields.ChartConnection`.  Returns the
    report of :func:`_residual_report`.
    """
    from .fields import Product

    axis = {"S3xD2": "tau", "S3xI": "t", "S3": "phi"}[dom.kind]

    def fa_and_curv(f, view, cache):
        A = conn.form(view, cache)
        F = conn.curvature(view, cache)
        v, _ = f.evaluate(view, cache)
        vi = dagger(v)
        return A, F, gauge_transform(f, A), F.map(lambda x: vi @ x @ v)

    if p == 1:
        (g,) = fields

        def pointwise(view):
            cache = {}
            A, F, gA, gF = fa_and_curv(g, view, cache)
            out = {"a": _top(c02(gA, gF)), "b": -_top(c02(A, F)), "c": -_top(c12(g, view, cache))}
            for k, v in c11(g, A, F, cache).comps.items():
                out[k] = -v
            return out
    elif p == 2:
        f, g = fields
        fg = Product(f, g)

        def pointwise(view):
            cache = {}
            A, F, fA, fF = fa_and_curv(f, view, cache)
            dc = c11(g, fA, fF, cache) - c11(fg, A, F, cache) + c11(f, A, F, cache)
            out = {"a": _top(dc), "b": -_top(c21(f, g, view, cache))}
            for k, v in c20(f, g, A, cache).comps.items():
                out[k] = -v
            return out
    elif p == 3:
        f, g, h = fields
        fg, gh = Product(f, g), Product(g, h)

        def pointwise(view):
            cache = {}
            out = {"a": _top(c21(g, h, view, cache)), "b": -_top(c21(fg, h, view, cache)),
                   "c": _top(c21(f, gh, view, cache)), "d": -_top(c21(f, g, view, cache))}
            for k, v in c30(f, g, h, view, cache).comps.items():
                out[k] = v
            return out
    elif p == 0:
        f, g, h = fields
        fg, gh = Product(f, g), Product(g, h)

        def pointwise(view):
            cache = {}
            A = conn.form(view, cache)
            fA = gauge_transform(f, A)
            out = {"a": _top(c20(g, h, fA, cache)), "b": -_top(c20(fg, h, A, cache)),
                   "c": _top(c20(f, gh, A, cache)), "d": -_top(c20(f, g, A, cache)),
                   "e": -_top(c30(f, g, h, view, cache))}
            return out
    else:
        raise ValueError("descent level p must be 0, 1, 2 or 3")

    parts = _chunked(dom, axis, chunk, pointwise)
    terms = [v for k, v in parts.items() if isinstance(k, str)]
    forms = {k: v for k, v in parts.items() if not isinstance(k, str)}
    if forms:
        terms.append(_d_top(forms, dom))
    residual = sum(terms)
    return _residual_report(dom, residual, terms)
