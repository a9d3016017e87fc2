"""The extended group of paths with affine-dual phases, and its Lie algebra.

Elements are pairs ``(f, l)`` where ``f`` is a path on S3xI starting at an
instanton ``g_k`` and ``l`` is an :class:`AffineDual` standing for the
phase ``exp(2 pi i l(A))``.  Phases are kept additively; ``exp`` is applied
only when two elements are compared.

Conventions (all fixed by numerical oracles, see the test-suite):

* gauge action ``f . A = f^-1 A f + f^-1 df``, composed as
  ``(fg) . A = g . (f . A)``;
* the dual action is ``(f . l)(A) = l(f_1 . A)`` with ``f_1 = f(., 1)``;
* product ``(f, l) * (g, m) = (fg, l + f . m + gamma(f, g))``;
* ``(f, l) ~ (g, m)`` iff ``f_1 = g_1`` and
  ``m - l - alpha(f, f^-1 g)`` is an integer for every connection;
* Lie bracket ``[(xi, l), (eta, m)] =
  ([xi, eta], Dm(d_A xi) - Dl(d_A eta) - i omega(xi, eta; A))``.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .algebra import dagger
from .cochains import (
    BETA_NORM, beta, c5_raw, gamma_dual, covariant_derivative, omega,
)
from .duals import AffineDual, zero_dual
from .fields import (
    FieldError, WitnessError, AlgebraBracket, LinearCombination, ExpField, TimeProfiled,
    Conjugated, Inverse, Product, SMOOTHSTEP, bulk_witness, identity_field, instanton,
    random_polynomial_field, reduce_word, sup_distance, embed,
)
from .forms import Form, one_form, commutator_form, trace_wedge, integrate, wedge
from .geometry import make_domain

__all__ = [
    "AffineDual", "Grids", "dual_eval", "dual_derivative", "dual_act", "random_connection",
    "probe_connections", "alpha", "chi", "ExtElement", "identity_element", "multiply",
    "inverse", "equivalent", "exp_path", "ExtAlgebraElement", "bracket_ext",
    "adjoint_Ad", "adjoint_oracle", "ADJOINT_NORMALIZATIONS", "adjoint_audit",
    "commutator_cocycle_check", "commutator_target", "jacobi_residual",
]


@dataclass
class Grids:
    """The three grids used by the extension: S^3, T = S3xI and Q = S3xD2."""

    s3: tuple = (16, 16, 32)
    nt: int = 16
    disk: tuple = (12, 48)
    sphere: object = dc_field(init=False, repr=False)
    path: object = dc_field(init=False, repr=False)
    bulk: object = dc_field(init=False, repr=False)

    def __post_init__(self):
        self.s3 = tuple(self.s3)
        self.disk = tuple(self.disk)
        self.sphere = make_domain("S3", s3=self.s3)
        self.path = make_domain("S3xI", s3=self.s3, nt=self.nt)
        self.bulk = make_domain("S3xD2", s3=self.s3, disk=self.disk)
        self._c5 = {}

    def c5_of(self, loop):
        """Unreduced C5 of a loop's constructed witness, memoized by reduced word.

        The cache holds references to the atoms so that their ids stay valid.
        """
        word = reduce_word(loop.word())
        key = tuple((id(a), e) for a, e in word)
        if key not in self._c5:
            self._c5[key] = (word, c5_raw(bulk_witness(loop), self.bulk))
        return self._c5[key][1]


# -- affine duals ------------------------------------------------------------


def dual_eval(phi, A):
    """``base + int tr(kernel ^ A)``."""
    return phi(A)


def dual_derivative(phi, a):
    """Derivative of ``phi`` in the direction of the 1-form ``a`` (independent of ``A``)."""
    return phi.linear_part(a)


def dual_act(f, phi, sdom):
    """The dual ``A -> phi(f_1 . A)`` for a sphere field or the end value of a path."""
    f1 = f.at_time(1.0) if f.kind == "path" else f
    if phi.kernel is None:
        return AffineDual(phi.base, None)
    v, rmc = f1.evaluate(sdom)
    vi = dagger(v)
    left = one_form([None if x is None else vi @ x @ v for x in rmc], sdom, f1.rank)
    base = phi.base + phi.linear_part(left)
    return AffineDual(base, phi.kernel.map(lambda k: v @ k @ vi))


def random_connection(rng, sdom, rank, degree=1, scale=1.0):
    """A smooth su(n)-valued 1-form ``sum_i xi_i(p) dp_i`` pulled back from R^4."""
    dp = sdom.ambient_derivatives()
    comps = [0.0, 0.0, 0.0]
    for i in range(4):
        xi = random_polynomial_field(rng, rank, degree, scale)
        v, _ = xi.evaluate(sdom)
        for k in range(3):
            comps[k] = comps[k] + v * dp[k][..., i, None, None]
    return one_form(comps, sdom, rank)


def probe_connections(sdom, rank, seed=0, count=8, scale=1.0):
    """The zero connection plus ``count`` seeded random connections."""
    rng = np.random.default_rng(seed)
    zero = one_form([None, None, None], sdom, rank)
    return [zero] + [random_connection(rng, sdom, rank, scale=scale) for _ in range(count)]


# -- the transition cocycle ----------------------------------------------------


def _is_trivial(j):
    return not reduce_word(j.word())


def alpha(f, j, grids, witness=None):
    """``beta_T(f, j) + C5(j)`` for a path ``f`` and a based loop ``j``."""
    if _is_trivial(j):
        return 0.0
    b = beta(f, j, grids.path)
    if witness is None:
        # witnesses are built in SU(3); beta of su(2) fields vanishes identically
        return b + grids.c5_of(j)
    if witness.rank != j.rank:
        b = beta(embed(f, witness.rank), embed(j, witness.rank), grids.path)
    return b + c5_raw(witness, grids.bulk)


def _boundary_gap(f, g, grids):
    return sup_distance(f.at_time(1.0), g.at_time(1.0), grids.sphere)


def chi(f, g, grids, tol=1e-6):
    """``exp(2 pi i alpha(f, f^-1 g))`` for paths with the same end value."""
    gap = _boundary_gap(f, g, grids)
    if gap > tol:
        raise FieldError(f"paths end at different maps (gap {gap:.2e})")
    return complex(np.exp(2j * np.pi * alpha(f, Product(Inverse(f), g), grids)))


# -- the extended group ------------------------------------------------------


@dataclass
class ExtElement:
    """A path together with the additive exponent of its phase."""

    path: object
    dual: AffineDual

    @property
    def rank(self):
        return self.path.rank


def identity_element(rank=3):
    return ExtElement(identity_field(rank), zero_dual())


def exp_path(xi, profile=SMOOTHSTEP, label="e"):
    """The path ``t -> exp(s(t) xi)`` from the identity to ``exp(xi)``."""
    return ExpField(TimeProfiled(xi, profile), label)


def _gamma(f, g, grids):
    if _is_trivial(f) or _is_trivial(g):
        return zero_dual()
    return gamma_dual(f, g, grids.path, grids.sphere)


def _product(f, g):
    if _is_trivial(f):
        return g
    if _is_trivial(g):
        return f
    return Product(f, g)


def multiply(a, b, grids):
    """``(f, l) * (g, m) = (fg, l + f . m + gamma(f, g))``."""
    f, g = a.path, b.path
    dual = a.dual + dual_act(f, b.dual, grids.sphere) + _gamma(f, g, grids)
    return ExtElement(_product(f, g), dual)


def inverse(a, grids):
    """``(f^-1, f^-1 . (-l))``; ``gamma(f, f^-1)`` vanishes identically."""
    fi = Inverse(a.path) if not _is_trivial(a.path) else a.path
    return ExtElement(fi, dual_act(fi, -a.dual, grids.sphere))


@dataclass
class Equivalence:
    """Outcome of :func:`equivalent`."""

    equivalent: bool
    distance: float
    boundary_gap: float
    alpha: float


def equivalent(a, b, grids, probes=None, tol=5e-3, boundary_tol=1e-6):
    """Compare two elements up to the transition cocycle.

    ``distance`` is the largest ``|exp(2 pi i (m - l - alpha)(A)) - 1|`` over
    the probe connections.
    """
    gap = _boundary_gap(a.path, b.path, grids)
    if gap > boundary_tol:
        return Equivalence(False, float("inf"), gap, float("nan"))
    probes = probe_connections(grids.sphere, a.rank) if probes is None else probes
    al = alpha(a.path, Product(Inverse(a.path), b.path), grids)
    diff = b.dual - a.dual
    dist = max(abs(np.exp(2j * np.pi * (diff(A) - al)) - 1.0) for A in probes)
    return Equivalence(bool(dist <= tol), float(dist), gap, float(al))


# -- the extended Lie algebra --------------------------------------------------


@dataclass
class ExtAlgebraElement:
    """``(xi, l)``: a based su(n)-valued function on S^3 and an affine dual."""

    xi: object
    dual: AffineDual


def _d_cov_dual(phi, xi, sdom):
    """The affine dual ``A -> D phi(d_A xi)``."""
    if phi.kernel is None:
        return zero_dual()
    v, _ = xi.evaluate(sdom)
    base = phi.linear_part(xi.differential(sdom))
    # tr(k ^ [A, xi]) = tr([xi, k] ^ A)
    return AffineDual(base, phi.kernel.map(lambda k: v @ k - k @ v))


def _omega_kernel(xi, eta, sdom):
    """Kernel ``w`` with ``omega(xi, eta; A) = int tr(w ^ A)`` (before the factor i)."""
    from .cochains import OMEGA_NORM
    return commutator_form(xi.differential(sdom), eta.differential(sdom)).scale(OMEGA_NORM)


def bracket_ext(x, y, sdom, omega_sign=-1.0):
    """Bracket of the extended Lie algebra.

    ``omega_sign`` selects the sign of the ``i omega`` term; ``-1`` is the
    value forced by the group law (see :func:`commutator_cocycle_check`).
    """
    first = AlgebraBracket(x.xi, y.xi)
    dual = _d_cov_dual(y.dual, x.xi, sdom) - _d_cov_dual(x.dual, y.xi, sdom)
    dual = dual + AffineDual(0.0, _omega_kernel(x.xi, y.xi, sdom).scale(1j * omega_sign))
    return ExtAlgebraElement(first, dual)


def jacobi_residual(x, y, z, sdom, probes):
    """Largest ``|[[x,y],z] + [[y,z],x] + [[z,x],y]|`` over probes (dual and function parts)."""
    terms = [bracket_ext(bracket_ext(a, b, sdom), c, sdom) for a, b, c in ((x, y, z), (y, z, x), (z, x, y))]
    dual = terms[0].dual + terms[1].dual + terms[2].dual
    dual_res = max(abs(dual(A)) for A in probes)
    scale = max(max(abs(t.dual(A)) for A in probes) for t in terms)
    fn = LinearCombination([(1.0, t.xi) for t in terms])
    fn_res = float(np.max(np.abs(fn.values(sdom))))
    return dual_res, fn_res, scale


# -- group commutator and the cocycle omega ------------------------------------


def _scaled(xi, s):
    return LinearCombination([(s, xi)])


def _psi(xi, eta, s, t, grids):
    """Dual exponent of the group commutator ``e^{s xi} e^{t eta} e^{-s xi} e^{-t eta}``."""
    a, b = exp_path(_scaled(xi, s), label="a"), exp_path(_scaled(eta, t), label="b")
    ai, bi = exp_path(_scaled(xi, -s), label="ai"), exp_path(_scaled(eta, -t), label="bi")
    p1 = Product(a, b)
    p2 = Product(p1, ai)
    return _gamma(a, b, grids) + _gamma(p1, ai, grids) + _gamma(p2, bi, grids)


def commutator_target(xi, eta, A):
    """Mixed derivative forced by the group law: ``-i omega(xi, eta; A)``."""
    return float(np.real(-1j * omega(xi, eta, A)))


def commutator_cocycle_check(xi, eta, A, grids, steps=(1e-2, 5e-3)):
    """Compare the mixed second difference of ``psi(s, t; A)`` with ``-i omega``.

    Central differences at two steps are combined by Richardson
    extrapolation.  ``A`` is one connection or a list of probes; the
    commutator duals are built once and evaluated on every probe.  Returns
    ``(relative_residual, measured, target)``.  For a list the residual is
    the largest error divided by the largest target, so a probe with a
    vanishing target (``A = 0``) is judged against the scale of the cocycle,
    and the other two entries are arrays.
    """
    probes = A if isinstance(A, (list, tuple)) else [A]

    def mixed(h):
        duals = {(ss, tt): _psi(xi, eta, ss * h, tt * h, grids) for ss in (1, -1) for tt in (1, -1)}
        combo = duals[1, 1] - duals[1, -1] - duals[-1, 1] + duals[-1, -1]
        return np.array([combo(B) for B in probes]) / (4 * h * h)

    h1, h2 = steps
    m1, m2 = mixed(h1), mixed(h2)
    r = (h1 / h2) ** 2
    measured = (r * m2 - m1) / (r - 1.0)
    target = np.array([commutator_target(xi, eta, B) for B in probes])
    err = np.abs(measured - target)
    if isinstance(A, (list, tuple)):
        return float(np.max(err) / max(np.max(np.abs(target)), 1e-300)), measured, target
    return float(err[0] / max(abs(target[0]), 1e-9)), float(measured[0]), float(target[0])


# -- adjoint action -------------------------------------------------------------

# prefactors (c1, c2) of the two correction integrals in the adjoint formula
ADJOINT_NORMALIZATIONS = {
    "pi3-derived": (BETA_NORM, BETA_NORM / 2.0),
    "pi3-i": (1j / (12 * np.pi ** 3), 1j / (24 * np.pi ** 3)),
    "pi3-real": (1.0 / (12 * np.pi ** 3), 1.0 / (24 * np.pi ** 3)),
    "pi2": (1.0 / (12 * np.pi ** 2), 1.0 / (24 * np.pi ** 2)),
}


def adjoint_Ad(g, nu, x, sdom, normalization="pi3-derived"):
    """``Ad_{(g, nu)} (xi, l)`` for a path ``g`` starting at the identity.

    Returns ``(Ad_g xi, O)`` with ``O`` an affine dual:

        O(A) = l(g . A) - Dnu(d_A (g xi g^-1))
               + c1 [int tr(xi a^3) + int tr((a dxi - dxi a) g^-1 A g)]
               + c2 int tr((a [a, xi] - [a, xi] a) g^-1 A g)

    where ``g`` is the end value of the path and ``a = g^-1 dg``.  The
    ``a^3`` term is the boundary form of the bulk integral over the path.
    """
    c1, c2 = ADJOINT_NORMALIZATIONS[normalization]
    g1 = g.at_time(1.0) if g.kind == "path" else g
    ad_xi = Conjugated(x.xi, Inverse(g1))  # g xi g^-1
    l_g = dual_act(g1, x.dual, sdom)
    m_term = _d_cov_dual(nu, ad_xi, sdom)
    v, rmc = g1.evaluate(sdom)
    vi = dagger(v)
    a = one_form([None if r is None else vi @ r @ v for r in rmc], sdom, g1.rank)
    xv, _ = x.xi.evaluate(sdom)
    dxi = x.xi.differential(sdom)
    axi = a.map(lambda c: c @ xv - xv @ c)
    bulk = integrate(trace_wedge(Form(sdom, 0, {(): xv}, g1.rank), wedge(wedge(a, a), a)))
    # tr(K ^ g^-1 A g) = tr(g K g^-1 ^ A)
    kern = commutator_form(a, dxi).scale(c1) + commutator_form(a, axi).scale(c2)
    kern = kern.map(lambda k: v @ k @ vi)
    corr = AffineDual(np.real(c1 * bulk), kern)
    return ExtAlgebraElement(ad_xi, l_g - m_term + corr)


def adjoint_oracle(g, nu, x, A, grids, steps=(1e-2, 5e-3)):
    """``d/ds`` of the dual of ``(g, nu)(e^{s xi}, s l)(g, nu)^-1`` at ``A``.

    The conjugated path is compared with ``exp(s g xi g^-1)`` through the
    transition cocycle, which is of second order in ``s`` and drops out.
    ``A`` is one connection or a list of probes (then an array is returned).
    """
    G = ExtElement(g, nu)
    Gi = inverse(G, grids)
    probes = A if isinstance(A, (list, tuple)) else [A]

    def dual(s):
        e = ExtElement(exp_path(_scaled(x.xi, s), label="es"), x.dual.scale(s))
        return multiply(multiply(G, e, grids), Gi, grids).dual

    def central(h):
        diff = dual(h) - dual(-h)
        return np.array([diff(B) for B in probes]) / (2 * h)

    h1, h2 = steps
    d1, d2 = central(h1), central(h2)
    r = (h1 / h2) ** 2
    out = (r * d2 - d1) / (r - 1.0)
    return out if isinstance(A, (list, tuple)) else float(out[0])


def adjoint_audit(g, nu, x, probes, grids):
    """Relative mismatch of each candidate normalization against the oracle.

    Residuals are measured relative to the size of the correction terms
    (the oracle minus the normalization-independent ``l`` and ``nu`` parts),
    so that every candidate is distinguishable.  Returns
    ``(best_name, {name: relative_residual}, full_scale_residual_of_best)``.
    """
    oracle = adjoint_oracle(g, nu, x, list(probes), grids)
    g1 = g.at_time(1.0) if g.kind == "path" else g
    plain = dual_act(g1, x.dual, grids.sphere) - _d_cov_dual(nu, Conjugated(x.xi, Inverse(g1)), grids.sphere)
    corr = oracle - np.array([plain(A) for A in probes])
    scale = max(np.max(np.abs(corr)), 1e-300)
    full = max(np.max(np.abs(oracle)), 1e-300)
    out = {}
    for name in ADJOINT_NORMALIZATIONS:
        ad = adjoint_Ad(g, nu, x, grids.sphere, name)
        vals = np.array([ad.dual(A) for A in probes])
        out[name] = float(np.max(np.abs(vals - oracle)) / scale)
    best = min(out, key=out.get)
    return best, out, out[best] * scale / full
