"""Group- and algebra-valued fields on the product domains.

Fields are small expression trees.  Every node knows how to produce, on
any grid (or grid view), its values together with the chart components of
its right Maurer-Cartan form ``dg g^-1``.  Generators supply these
analytically; products and inverses propagate them algebraically:

    R(fg)   = R(f) + f R(g) f^-1
    R(f^-1) = -f^-1 R(f) f

so identities that hold pointwise in exact arithmetic also hold to rounding
error on the grid.  A finite-difference route (``method="fd"``) is kept
for validation.

Fields come in three kinds, by the coordinates they depend on:

``sphere``  x only; evaluates on every domain as a constant extension;
``path``    (x, t) with parameter time t in [0, 1];
``disk``    (x, r, t) on S^3 x D^2, with the loop recovered at r = 1.
"""

import numpy as np

from . import algebra
from .algebra import dagger, ExpDecomposition
from .forms import Form, one_form, top_trace_power, wedge, trace_form, power
from .geometry import chart_derivative, integrate_top, BASE_POINT, TWO_PI, make_domain

_KIND_ORDER = {"sphere": 0, "path": 1, "disk": 2}


class FieldError(ValueError):
    """Raised when a field is used on an incompatible domain."""


class WitnessError(ValueError):
    """Raised when no bulk extension can be constructed for a loop."""


def _join_kind(*kinds):
    return max(kinds, key=_KIND_ORDER.__getitem__)


def _check_domain(kind, dom):
    if kind == "disk" and dom.kind != "S3xD2":
        raise FieldError("disk fields only live on S3xD2")
    if kind == "path" and dom.kind == "S3":
        raise FieldError("path fields need a time coordinate")


def _grid_shape(dom):
    return (1,) * dom.dim


def _const(m, dom):
    return np.broadcast_to(m, _grid_shape(dom) + m.shape[-2:])


# ---------------------------------------------------------------------------
# scalar profiles in parameter time or radius
# ---------------------------------------------------------------------------


class Profile:
    """A scalar function on [0, 1] with its derivative."""

    def __init__(self, name, fn, dfn):
        self.name = name
        self.fn = fn
        self.dfn = dfn

    def __call__(self, t):
        return self.fn(t)

    def derivative(self, t):
        return self.dfn(t)


SMOOTHSTEP = Profile(
    "smoothstep",
    lambda t: t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t),
    lambda t: 30.0 * t * t * (1.0 - t) ** 2,
)
# periodic bump vanishing with its first derivative at both ends
BUMP = Profile("bump", lambda t: np.sin(np.pi * t) ** 2, lambda t: np.pi * np.sin(2.0 * np.pi * t))
LINEAR = Profile("linear", lambda t: t, lambda t: np.ones_like(t))


def random_bump(rng, amplitude=0.6):
    """``sin^2(pi t) (1 + a cos 2 pi t + b sin 2 pi t)``: a seeded bump with flat ends.

    Distinct bumps matter: two exponential loops sharing one time profile
    commute with the radial scaling and give degenerate (zero) C5 and beta.
    """
    a, b = rng.uniform(-amplitude, amplitude, size=2)

    def fn(t):
        return np.sin(np.pi * t) ** 2 * (1.0 + a * np.cos(TWO_PI * t) + b * np.sin(TWO_PI * t))

    def dfn(t):
        w = 1.0 + a * np.cos(TWO_PI * t) + b * np.sin(TWO_PI * t)
        dw = TWO_PI * (-a * np.sin(TWO_PI * t) + b * np.cos(TWO_PI * t))
        return np.pi * np.sin(TWO_PI * t) * w + np.sin(np.pi * t) ** 2 * dw

    return Profile(f"bump({a:.3f},{b:.3f})", fn, dfn)
# radial profiles u(r) for the rotation extension: a(sin u, t)
SINE_RADIUS = Profile("sine", lambda r: 0.5 * np.pi * r, lambda r: 0.5 * np.pi * np.ones_like(r))
ARCSIN_RADIUS = Profile("arcsin", np.arcsin, lambda r: 1.0 / np.sqrt(1.0 - r * r))


# ---------------------------------------------------------------------------
# algebra-valued fields
# ---------------------------------------------------------------------------


class AlgebraField:
    """Base class: su(n)-valued function with analytic chart derivatives."""

    kind = "sphere"
    rank = 2
    vanishes_at_ends = False

    def evaluate(self, dom, cache=None):
        """Return ``(values, derivs)``; ``derivs`` has one entry per axis (or None)."""
        _check_domain(self.kind, dom)
        cache = {} if cache is None else cache
        key = ("alg", id(self), id(dom))
        if key not in cache:
            cache[key] = self._evaluate(dom, cache)
        return cache[key]

    def values(self, dom):
        return self.evaluate(dom)[0]

    def differential(self, dom):
        """Exact differential as a matrix 1-form."""
        _, d = self.evaluate(dom)
        return one_form(d, dom, self.rank)

    def at_time(self, t):
        raise NotImplementedError

    def at_boundary(self):
        raise NotImplementedError

    # arithmetic helpers
    def __add__(self, other):
        return LinearCombination([(1.0, self), (1.0, other)])

    def __sub__(self, other):
        return LinearCombination([(1.0, self), (-1.0, other)])

    def __mul__(self, c):
        return LinearCombination([(float(c), self)])

    __rmul__ = __mul__


def _monomials(degree):
    exps = []
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            for c in range(degree + 1 - a - b):
                for d in range(degree + 1 - a - b - c):
                    if a + b + c + d > 0:
                        exps.append((a, b, c, d))
    return np.array(exps)


class PolynomialAlgebraField(AlgebraField):
    """``xi(x) = sum_a P_a(p(x)) e_a`` with polynomials in the ambient coordinates.

    The constant term is removed so that ``xi`` vanishes at the base point.
    """

    kind = "sphere"

    def __init__(self, coeffs, rank, degree):
        self.coeffs = np.asarray(coeffs, dtype=float)  # (n_monomials, n*n-1)
        self.rank = rank
        self.degree = degree
        self.exps = _monomials(degree)
        if self.coeffs.shape != (len(self.exps), rank * rank - 1):
            raise FieldError("coefficient array does not match the monomial basis")
        self._basis = algebra.su_basis(rank)
        self._at_base = self._poly(BASE_POINT)[0]

    def _poly(self, p):
        powers = [np.stack([p[..., k] ** j for j in range(self.degree + 1)]) for k in range(4)]
        mono = np.prod([powers[k][self.exps[:, k]] for k in range(4)], axis=0)  # (M, ...)
        grads = []
        for k in range(4):
            e = self.exps[:, k]
            lower = powers[k][np.maximum(e - 1, 0)] * e.reshape((-1,) + (1,) * (p.ndim - 1))
            others = np.prod([powers[j][self.exps[:, j]] for j in range(4) if j != k], axis=0)
            grads.append(lower * others)
        val = np.tensordot(self.coeffs, mono, axes=([0], [0]))  # (n2, ...)
        gr = [np.tensordot(self.coeffs, g, axes=([0], [0])) for g in grads]
        return val, gr

    def _to_matrix(self, c):
        return np.tensordot(np.moveaxis(c, 0, -1), self._basis, axes=([-1], [0]))

    def _evaluate(self, dom, cache):
        p = dom.ambient()
        val, grads = self._poly(p)
        dp = dom.ambient_derivatives()
        derivs = [None] * dom.dim
        for j in range(3):
            dc = sum(grads[k] * dp[j][..., k] for k in range(4))
            derivs[j] = self._to_matrix(dc)
        return self._to_matrix(val - self._at_base[:, None].reshape((-1,) + (1,) * (val.ndim - 1))), derivs

    def at_time(self, t):
        return self


def random_polynomial_field(rng, rank=2, degree=2, scale=1.0):
    """Random smooth based su(rank)-valued field on S^3."""
    m = len(_monomials(degree))
    coeffs = rng.normal(size=(m, rank * rank - 1)) * scale / np.sqrt(m)
    return PolynomialAlgebraField(coeffs, rank, degree)


class LinearCombination(AlgebraField):
    def __init__(self, terms):
        self.terms = [(float(c), f) for c, f in terms]
        self.rank = self.terms[0][1].rank
        self.kind = _join_kind(*(f.kind for _, f in self.terms))
        self.vanishes_at_ends = all(f.vanishes_at_ends for _, f in self.terms)

    def _evaluate(self, dom, cache):
        val, der = None, [None] * dom.dim
        for c, f in self.terms:
            v, d = f.evaluate(dom, cache)
            val = c * v if val is None else val + c * v
            for k in range(dom.dim):
                if d[k] is not None:
                    der[k] = c * d[k] if der[k] is None else der[k] + c * d[k]
        return val, der

    def at_time(self, t):
        return LinearCombination([(c, f.at_time(t)) for c, f in self.terms])

    def at_boundary(self):
        return LinearCombination([(c, f.at_boundary()) for c, f in self.terms])


class AlgebraBracket(AlgebraField):
    """Pointwise commutator ``[a, b]``."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.rank = a.rank
        self.kind = _join_kind(a.kind, b.kind)
        self.vanishes_at_ends = a.vanishes_at_ends or b.vanishes_at_ends

    def _evaluate(self, dom, cache):
        va, da = self.a.evaluate(dom, cache)
        vb, db = self.b.evaluate(dom, cache)
        der = []
        for x, y in zip(da, db):
            terms = []
            if x is not None:
                terms.append(x @ vb - vb @ x)
            if y is not None:
                terms.append(va @ y - y @ va)
            der.append(sum(terms) if terms else None)
        return va @ vb - vb @ va, der

    def at_time(self, t):
        return AlgebraBracket(self.a.at_time(t), self.b.at_time(t))

    def at_boundary(self):
        return AlgebraBracket(self.a.at_boundary(), self.b.at_boundary())


class TimeProfiled(AlgebraField):
    """``rho(t) * xi(x)``: a sphere field switched on along parameter time."""

    kind = "path"

    def __init__(self, xi, profile):
        if xi.kind != "sphere":
            raise FieldError("time profiles apply to sphere fields")
        self.xi, self.profile = xi, profile
        self.rank = xi.rank
        ends = np.array([0.0, 1.0])
        self.vanishes_at_ends = bool(np.allclose(profile(ends), 0.0) and np.allclose(profile.derivative(ends), 0.0))

    def _evaluate(self, dom, cache):
        v, d = self.xi.evaluate(dom, cache)
        t = dom.time()[..., None, None]
        rho, drho = self.profile(t), self.profile.derivative(t)
        der = [None if x is None else rho * x for x in d]
        der[dom.time_axis] = dom.time_scale * drho * v
        return rho * v, der

    def at_time(self, t):
        return LinearCombination([(float(self.profile(t)), self.xi)])


class RadialScaled(AlgebraField):
    """``r * eta(x, t)``: cone extension of a path field over the disk."""

    kind = "disk"

    def __init__(self, eta):
        if eta.kind == "disk":
            raise FieldError("already a disk field")
        self.eta = eta
        self.rank = eta.rank

    def _evaluate(self, dom, cache):
        v, d = self.eta.evaluate(dom, cache)
        r = dom.radius()[..., None, None]
        der = [None if x is None else r * x for x in d]
        der[dom.axis_index("r")] = v
        return r * v, der

    def at_boundary(self):
        return self.eta


class Conjugated(AlgebraField):
    """``h^-1 eta h`` for a group field ``h``."""

    def __init__(self, eta, h):
        self.eta, self.h = eta, h
        self.rank = eta.rank
        self.kind = _join_kind(eta.kind, h.kind)
        self.vanishes_at_ends = eta.vanishes_at_ends

    def _evaluate(self, dom, cache):
        v, d = self.eta.evaluate(dom, cache)
        g, rmc = self.h.evaluate(dom, cache)
        gi = dagger(g)
        w = gi @ v @ g
        der = []
        for k in range(dom.dim):
            terms = []
            if d[k] is not None:
                terms.append(gi @ d[k] @ g)
            if rmc[k] is not None:
                left = gi @ rmc[k] @ g
                terms.append(w @ left - left @ w)
            der.append(sum(terms) if terms else None)
        return w, der

    def at_time(self, t):
        return Conjugated(self.eta.at_time(t), self.h.at_time(t))

    def at_boundary(self):
        return Conjugated(self.eta.at_boundary(), self.h.at_boundary())


class EmbeddedAlgebra(AlgebraField):
    def __init__(self, eta, n_target=3):
        self.eta = eta
        self.rank = n_target
        self.kind = eta.kind
        self.vanishes_at_ends = eta.vanishes_at_ends

    def _evaluate(self, dom, cache):
        v, d = self.eta.evaluate(dom, cache)
        emb = algebra.embed_algebra
        return emb(v, self.rank), [None if x is None else emb(x, self.rank) for x in d]

    def at_time(self, t):
        return EmbeddedAlgebra(self.eta.at_time(t), self.rank)

    def at_boundary(self):
        return EmbeddedAlgebra(self.eta.at_boundary(), self.rank)


# ---------------------------------------------------------------------------
# group-valued fields
# ---------------------------------------------------------------------------


class GroupField:
    """Base class for SU(n)-valued fields.

    Subclasses implement ``_evaluate(dom, cache) -> (values, rmc)`` where
    ``rmc`` lists the chart components of ``dg g^-1`` (None for zero).
    """

    kind = "sphere"
    rank = 2
    label = "field"

    def evaluate(self, dom, cache=None):
        _check_domain(self.kind, dom)
        cache = {} if cache is None else cache
        key = ("grp", id(self), id(dom))
        if key not in cache:
            cache[key] = self._evaluate(dom, cache)
        return cache[key]

    def sample(self, dom):
        """Values on the grid, broadcast to the full shape."""
        v, _ = self.evaluate(dom)
        return np.broadcast_to(v, dom.shape + v.shape[-2:])

    # word structure, used to build bulk extensions of loops
    def word(self):
        return [(self, 1)]

    def disk_extension(self):
        """Disk field restricting to this loop at r = 1, or None."""
        if self.kind == "sphere":
            return self
        return None

    def conjugated_extension(self, c):
        """Disk extension of ``c self c^-1`` for a path field ``c``, or None."""
        return None

    @property
    def is_based_loop_generator(self):
        return False

    def at_time(self, t):
        if self.kind == "sphere":
            return self
        raise NotImplementedError

    def at_boundary(self):
        if self.kind != "disk":
            return self
        raise NotImplementedError

    def __mul__(self, other):
        return Product(self, other)

    def inv(self):
        return Inverse(self)


class ConstantField(GroupField):
    kind = "sphere"

    def __init__(self, matrix, label="const"):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.rank = self.matrix.shape[-1]
        self.label = label

    def _evaluate(self, dom, cache):
        return _const(self.matrix, dom), [None] * dom.dim


def identity_field(rank=2):
    return ConstantField(np.eye(rank), "identity")


def _quaternion(p):
    """``p3 + p0 e1 + p1 e2 + p2 e3`` as a 2x2 matrix (linear in p)."""
    e = algebra.su_basis(2)
    return p[..., 3, None, None] * np.eye(2) + np.tensordot(p[..., :3], e, axes=([-1], [0]))


class UnitInstanton(GroupField):
    """Degree-one map S^3 -> SU(2) identifying the sphere with unit quaternions."""

    kind = "sphere"
    rank = 2
    label = "g1"

    def _evaluate(self, dom, cache):
        p = dom.ambient()
        g = _quaternion(p)
        gi = dagger(g)
        rmc = [None] * dom.dim
        for j, dp in enumerate(dom.ambient_derivatives()):
            rmc[j] = _quaternion(dp) @ gi
        return g, rmc


_UNIT = UnitInstanton()


def instanton(k, rank=2):
    """The map ``g_k = g_1^k`` (degree ``k``), embedded when ``rank`` is 3."""
    k = int(k)
    if k == 0:
        base = identity_field(2)
    else:
        base = _UNIT if k > 0 else Inverse(_UNIT)
        for _ in range(abs(k) - 1):
            base = Product(base, _UNIT if k > 0 else Inverse(_UNIT))
    if rank == 2:
        return base
    if rank == 3:
        return Embedded(base)
    raise FieldError("instantons are provided for rank 2 and 3")


class ExpField(GroupField):
    """``exp(eta)`` for an algebra field; derivatives via the exponential's divided differences."""

    def __init__(self, eta, label="exp"):
        self.eta = eta
        self.rank = eta.rank
        self.kind = eta.kind
        self.label = label

    def _evaluate(self, dom, cache):
        if isinstance(self.eta, RadialScaled):
            # exp(r eta): decompose eta once and rescale per radius
            v, d = self.eta.eta.evaluate(dom, cache)
            r = dom.radius()
            dec = ExpDecomposition(v)
            rr = r[..., None, None]
            phi = dec.divided_differences(r)
            rmc = [None if x is None else dec.right_derivative(rr * dec.rotate(x), phi=phi) for x in d]
            rmc[dom.axis_index("r")] = v
            return dec.exp(s=r), rmc
        v, d = self.eta.evaluate(dom, cache)
        dec = ExpDecomposition(v)
        phi = dec.divided_differences()
        rmc = [None if x is None else dec.right_derivative(dec.rotate(x), phi=phi) for x in d]
        return dec.exp(), rmc

    @property
    def is_based_loop_generator(self):
        return self.kind == "path" and self.eta.vanishes_at_ends

    def disk_extension(self):
        if self.kind == "sphere":
            return self
        if self.is_based_loop_generator:
            return ExpField(RadialScaled(self.eta), self.label + "~")
        return None

    def conjugated_extension(self, c):
        if not self.is_based_loop_generator:
            return None
        return ExpField(RadialScaled(Conjugated(self.eta, Inverse(c))), self.label + "^c~")

    def at_time(self, t):
        return ExpField(self.eta.at_time(t), self.label)

    def at_boundary(self):
        return ExpField(self.eta.at_boundary(), self.label) if self.kind == "disk" else self


def _rotation_matrix(u, theta):
    """``a = [[1,0,0],[0, sin u e^{-i theta}, cos u],[0, -cos u, sin u e^{i theta}]]``."""
    s, c = np.sin(u), np.cos(u)
    e = np.exp(-1j * theta)
    shape = np.broadcast(u, theta).shape
    a = np.zeros(shape + (3, 3), dtype=complex)
    a[..., 0, 0] = 1.0
    a[..., 1, 1] = s * e
    a[..., 1, 2] = c
    a[..., 2, 1] = -c
    a[..., 2, 2] = s * np.conj(e)
    return a


class DiskRotation(GroupField):
    """The x-independent SU(3)-valued disk map ``a(sin u(r), s(t))``.

    On the boundary circle it is ``diag(1, e^{-2 pi i s}, e^{2 pi i s})``; at
    the centre it is a constant matrix.  ``radial`` chooses ``u(r)``: the
    default ``u = pi r / 2`` keeps the integrands smooth at ``r = 1``.
    """

    kind = "disk"
    rank = 3

    def __init__(self, time_profile=LINEAR, radial=SINE_RADIUS):
        self.time_profile = time_profile
        self.radial = radial
        self.label = "a"

    def _evaluate(self, dom, cache):
        r, t = dom.radius(), dom.time()
        u, du = self.radial(r), self.radial.derivative(r)
        theta = 2.0 * np.pi * self.time_profile(t)
        dtheta = 2.0 * np.pi * self.time_profile.derivative(t) * dom.time_scale
        a = _rotation_matrix(u, theta)
        ai = dagger(a)
        s, c = np.sin(u), np.cos(u)
        e = np.exp(-1j * theta)
        shape = np.broadcast(u, theta).shape
        da_u = np.zeros(shape + (3, 3), dtype=complex)
        da_u[..., 1, 1] = c * e
        da_u[..., 1, 2] = -s
        da_u[..., 2, 1] = s
        da_u[..., 2, 2] = c * np.conj(e)
        da_t = np.zeros(shape + (3, 3), dtype=complex)
        da_t[..., 1, 1] = -1j * s * e
        da_t[..., 2, 2] = 1j * s * np.conj(e)
        rmc = [None] * dom.dim
        rmc[dom.axis_index("r")] = (du[..., None, None] * da_u) @ ai
        rmc[dom.axis_index("tau")] = (dtheta[..., None, None] * da_t) @ ai
        return a, rmc

    def at_boundary(self):
        return CircleRotation(self.time_profile)


class CircleRotation(GroupField):
    """``D(t) = diag(1, e^{-2 pi i s(t)}, e^{2 pi i s(t)})``: a loop in SU(3)."""

    kind = "path"
    rank = 3

    def __init__(self, time_profile=LINEAR):
        self.time_profile = time_profile
        self.label = "D"

    def _matrix(self, t):
        th = 2.0 * np.pi * self.time_profile(t)
        shape = np.shape(th)
        m = np.zeros(shape + (3, 3), dtype=complex)
        m[..., 0, 0] = 1.0
        m[..., 1, 1] = np.exp(-1j * th)
        m[..., 2, 2] = np.exp(1j * th)
        return m

    def _evaluate(self, dom, cache):
        t = dom.time()
        rate = 2.0 * np.pi * self.time_profile.derivative(t) * dom.time_scale
        gen = np.zeros(t.shape + (3, 3), dtype=complex)
        gen[..., 1, 1] = -1j * rate
        gen[..., 2, 2] = 1j * rate
        rmc = [None] * dom.dim
        rmc[dom.time_axis] = gen
        return self._matrix(t), rmc

    def disk_extension(self):
        return DiskRotation(self.time_profile)

    def at_time(self, t):
        return ConstantField(self._matrix(np.asarray(float(t))), "D(t)")


class HalfTurn(GroupField):
    """``d(t) = diag(e^{i pi s(t)}, e^{-i pi s(t)})``, a path in SU(2) from 1 to -1."""

    kind = "path"
    rank = 2

    def __init__(self, time_profile=LINEAR):
        self.time_profile = time_profile
        self.label = "d"

    def _matrix(self, t):
        th = np.pi * self.time_profile(t)
        m = np.zeros(np.shape(th) + (2, 2), dtype=complex)
        m[..., 0, 0] = np.exp(1j * th)
        m[..., 1, 1] = np.exp(-1j * th)
        return m

    def _evaluate(self, dom, cache):
        t = dom.time()
        rate = np.pi * self.time_profile.derivative(t) * dom.time_scale
        gen = np.zeros(t.shape + (2, 2), dtype=complex)
        gen[..., 0, 0] = 1j * rate
        gen[..., 1, 1] = -1j * rate
        rmc = [None] * dom.dim
        rmc[dom.time_axis] = gen
        return self._matrix(t), rmc

    def at_time(self, t):
        return ConstantField(self._matrix(np.asarray(float(t))), "d(t)")


class Rotated(GroupField):
    """``d(t) f(x) d(t)^-1``: conjugation of a sphere map by the half turn.

    A closed loop in SU(2) whose block embedding coincides with
    ``D(t) f~ D(t)^-1``, so it extends over the disk inside SU(3).
    """

    kind = "path"
    rank = 2

    def __init__(self, f, time_profile=LINEAR):
        if f.kind != "sphere" or f.rank != 2:
            raise FieldError("rotation takes a rank-2 sphere field")
        self.f = f
        self.time_profile = time_profile
        d = HalfTurn(time_profile)
        self._expr = Product(Product(d, f), Inverse(d))
        self.label = f"rot({f.label})"

    def _evaluate(self, dom, cache):
        return self._expr.evaluate(dom, cache)

    def at_time(self, t):
        return self._expr.at_time(t)

    def embedded_disk_extension(self):
        a = DiskRotation(self.time_profile)
        return Product(Product(a, Embedded(self.f)), Inverse(a))


class Product(GroupField):
    def __init__(self, f, g):
        if f.rank != g.rank:
            raise FieldError("rank mismatch in product")
        self.f, self.g = f, g
        self.rank = f.rank
        self.kind = _join_kind(f.kind, g.kind)
        self.label = f"({f.label}*{g.label})"

    def _evaluate(self, dom, cache):
        vf, rf = self.f.evaluate(dom, cache)
        vg, rg = self.g.evaluate(dom, cache)
        vfi = dagger(vf)
        rmc = []
        for a, b in zip(rf, rg):
            if b is None:
                rmc.append(a)
            else:
                c = vf @ b @ vfi
                rmc.append(c if a is None else a + c)
        return vf @ vg, rmc

    def word(self):
        return self.f.word() + self.g.word()

    def at_time(self, t):
        return Product(self.f.at_time(t), self.g.at_time(t))

    def at_boundary(self):
        return Product(self.f.at_boundary(), self.g.at_boundary())


class Inverse(GroupField):
    def __init__(self, f):
        self.f = f
        self.rank = f.rank
        self.kind = f.kind
        self.label = f"{f.label}^-1"

    def _evaluate(self, dom, cache):
        v, r = self.f.evaluate(dom, cache)
        vi = dagger(v)
        return vi, [None if x is None else -(vi @ x @ v) for x in r]

    def word(self):
        return [(atom, -e) for atom, e in reversed(self.f.word())]

    def at_time(self, t):
        return Inverse(self.f.at_time(t))

    def at_boundary(self):
        return Inverse(self.f.at_boundary())


class Embedded(GroupField):
    """Block embedding SU(2) -> SU(3) of a rank-2 field."""

    def __init__(self, f, n_target=3):
        if f.rank != 2:
            raise FieldError("only rank-2 fields are embedded")
        self.f = f
        self.rank = n_target
        self.kind = f.kind
        self.label = f"emb({f.label})"

    def _evaluate(self, dom, cache):
        v, r = self.f.evaluate(dom, cache)
        return algebra.embed_group(v, self.rank), [None if x is None else algebra.embed_algebra(x, self.rank) for x in r]

    def word(self):
        return [(_embedded_atom(atom), e) for atom, e in self.f.word()]

    def disk_extension(self):
        if isinstance(self.f, Rotated):
            return self.f.embedded_disk_extension()
        ext = self.f.disk_extension()
        return None if ext is None else Embedded(ext, self.rank)

    def conjugated_extension(self, c):
        f = self.f
        if isinstance(f, ExpField) and f.is_based_loop_generator:
            return ExpField(RadialScaled(Conjugated(EmbeddedAlgebra(f.eta, self.rank), Inverse(c))))
        return None

    @property
    def is_based_loop_generator(self):
        return self.f.is_based_loop_generator

    def at_time(self, t):
        return Embedded(self.f.at_time(t), self.rank)

    def at_boundary(self):
        return Embedded(self.f.at_boundary(), self.rank)


def _embedded_atom(atom):
    # a stable wrapper per atom so that free reduction can cancel letters
    cached = getattr(atom, "_embedded_wrapper", None)
    if cached is None:
        cached = Embedded(atom)
        atom._embedded_wrapper = cached
    return cached


def embed(f, n_target=3):
    """Block embedding of a rank-2 field (identity on rank ``n_target`` input)."""
    if f.rank == n_target:
        return f
    return Embedded(f, n_target)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def constant_field(matrix):
    return ConstantField(matrix)


def exp_field(xi, label="exp"):
    """``exp(xi(x))`` on S^3 (degree zero)."""
    return ExpField(xi, label)


def exp_loop(xi, profile=BUMP, label="j"):
    """The based loop ``t -> exp(rho(t) xi(x))`` with ``rho`` vanishing at both ends."""
    return ExpField(TimeProfiled(xi, profile), label)


def path_from_target(k, xi, rank=2, profile=SMOOTHSTEP, label="v"):
    """Path ``v(x, t) = g_k(x) exp(s(t) xi(x))`` from ``g_k`` to ``g_k exp(xi)``."""
    if xi.rank != rank:
        raise FieldError("xi rank does not match")
    return Product(instanton(k, rank), ExpField(TimeProfiled(xi, profile), label))


def rotation_loop(f, profile=LINEAR):
    """The loop ``D(t) f~(x) D(t)^-1`` in SU(3) for a rank-2 sphere map ``f``."""
    return Embedded(Rotated(f, profile))


def rotation_bulk(f, profile=LINEAR, radial=SINE_RADIUS):
    """Disk extension ``a(r, t) f~(x) a(r, t)^-1`` of :func:`rotation_loop`."""
    a = DiskRotation(profile, radial)
    return Product(Product(a, Embedded(f)), Inverse(a))


def conjugation_path(f, profile=SMOOTHSTEP):
    """Path ``d(s(t)) f d(s(t))^-1`` from ``f`` back to ``f`` with flat ends."""
    return Rotated(f, profile)


# ---------------------------------------------------------------------------
# derived quantities
# ---------------------------------------------------------------------------


def maurer_cartan(f, dom, side="left", method="exact"):
    """Maurer-Cartan form as a matrix 1-form.

    ``side="left"`` gives ``f^-1 df``, ``"right"`` gives ``df f^-1``.
    ``method="fd"`` differentiates sampled values with fourth-order
    differences and projects back onto the algebra.
    """
    if method == "exact":
        v, rmc = f.evaluate(dom)
        if side == "right":
            comps = rmc
        else:
            vi = dagger(v)
            comps = [None if x is None else vi @ x @ v for x in rmc]
        return one_form(comps, dom, f.rank)
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    v = f.sample(dom)
    vi = dagger(v)
    comps = []
    for k in range(dom.dim):
        dv = chart_derivative(v, dom, k)
        comps.append(algebra.project_algebra(vi @ dv if side == "left" else dv @ vi))
    return one_form(comps, dom, f.rank)


def mapping_degree(f, dom=None):
    """Degree of a map S^3 -> SU(n), ``(1/24 pi^2) int tr((dg g^-1)^3)``.

    The sign of the constant is fixed so that the unit instanton has degree
    +1 in the orientation of :mod:`geometry`.
    """
    dom = make_domain("S3") if dom is None else dom
    if dom.kind != "S3":
        raise FieldError("degree is defined on S3")
    _, rmc = f.evaluate(dom)
    dens = top_trace_power(list(rmc), 3)
    return float(np.real(DEGREE_SIGN * integrate_top(dom, dens) / (24.0 * np.pi ** 2)))


# tr(V^3) integrates to -24 pi^2 on the unit instanton with the orientation used here
DEGREE_SIGN = -1.0


def gauge_transform(g, A, dom=None):
    """``g^-1 A g + g^-1 dg`` for a connection 1-form ``A`` (a matrix Form)."""
    dom = A.domain if dom is None else dom
    v, rmc = g.evaluate(dom)
    vi = dagger(v)
    comps = []
    for k in range(dom.dim):
        terms = []
        a = A.comps.get((k,))
        if a is not None:
            terms.append(vi @ a @ v)
        if rmc[k] is not None:
            terms.append(vi @ rmc[k] @ v)
        comps.append(sum(terms) if terms else None)
    return one_form(comps, dom, A.rank)


def sup_distance(f, g, dom):
    return float(np.max(np.abs(f.sample(dom) - g.sample(dom))))


def is_based(f, tol=1e-10, dom=None):
    """Check ``f(p0, .) = 1`` on the circle ``psi = 0`` (and along extra axes)."""
    if dom is None:
        from .geometry import base_point_domain
        kind = {"sphere": "S3", "path": "S3xI", "disk": "S3xD2"}[f.kind]
        dom = base_point_domain(kind)
    return float(np.max(np.abs(f.sample(dom) - np.eye(f.rank)))) <= tol


# ---------------------------------------------------------------------------
# bulk extensions of loops
# ---------------------------------------------------------------------------


def reduce_word(word):
    """Free reduction of a word of (atom, exponent) letters, atoms compared by identity.

    Constant identity letters are dropped.
    """
    out = []
    for atom, e in word:
        if isinstance(atom, ConstantField) and np.array_equal(atom.matrix, np.eye(atom.rank)):
            continue
        if out and out[-1][0] is atom and out[-1][1] == -e:
            out.pop()
        else:
            out.append((atom, e))
    return out


def _letter_field(atom, e):
    return atom if e > 0 else Inverse(atom)


def word_product(word, rank):
    if not word:
        return identity_field(rank)
    out = _letter_field(*word[0])
    for atom, e in word[1:]:
        out = Product(out, _letter_field(atom, e))
    return out


class BulkWitness:
    """A disk field together with the loop it extends."""

    def __init__(self, field, loop):
        if field.kind not in ("disk", "sphere"):
            raise WitnessError("a witness must be defined on S3xD2")
        self.field = field
        self.loop = loop

    @property
    def rank(self):
        return self.field.rank

    def boundary_mismatch(self, dom=None):
        """Sup distance between the witness at r = 1 and the loop on S3xS1."""
        dom = make_domain("S3xS1", s3=(8, 8, 16), ntau=16) if dom is None else dom
        return sup_distance(self.field.at_boundary(), embed(self.loop, self.rank), dom)

    def center_spread(self, dom=None):
        """Variation of the witness along the circle at r -> 0 (0 for a well-defined center)."""
        dom = make_domain("S3xD2", s3=(8, 8, 16), disk=(8, 16)) if dom is None else dom
        center = dom.with_axis("r", [0.0])
        v = self.field.sample(center)
        return float(np.max(np.abs(v - v[..., :1, :, :])))


def bulk_witness(loop):
    """Construct a disk extension of a loop from its word structure.

    The loop is embedded in SU(3) when it is rank 2.  Letters that are
    loops with a known extension (t-independent maps, exponential loops
    vanishing at the ends, rotations) are extended directly when no path
    letter precedes them.  Every other letter is collected into a
    conjugating prefix that must cancel freely by the end of the word;
    exponential loops met while the prefix is nontrivial are conjugated by
    it.  Raises :class:`WitnessError` when the
    word is not of this form.
    """
    loop3 = embed(loop, 3) if loop.rank == 2 else loop
    rank = loop3.rank
    letters = reduce_word(loop3.word())
    prefix, factors = [], []
    for atom, e in letters:
        ext = atom.disk_extension()
        pre = reduce_word(prefix)
        if not pre and ext is not None:
            factors.append(ext if e > 0 else Inverse(ext))
        elif pre and atom.is_based_loop_generator:
            ce = atom.conjugated_extension(word_product(pre, rank))
            factors.append(ce if e > 0 else Inverse(ce))
        else:
            # part of a conjugating path; it has to cancel later in the word
            prefix.append((atom, e))
    if reduce_word(prefix):
        raise WitnessError("path letters do not cancel: the loop has no constructible extension")
    field = identity_field(rank)
    for fac in factors:
        field = fac if field.label == "identity" else Product(field, fac)
    return BulkWitness(field, loop3)


# ---------------------------------------------------------------------------
# connections with analytic curvature
# ---------------------------------------------------------------------------


# sin(2 pi t): a smooth periodic profile for fields on the circle
SINE_PERIODIC = Profile("sin", lambda t: np.sin(TWO_PI * t), lambda t: TWO_PI * np.cos(TWO_PI * t))


def _trig_profile(m, phase):
    w = TWO_PI * m
    return Profile(f"trig{m}", lambda t: np.cos(w * t + phase), lambda t: -w * np.sin(w * t + phase))


class ChartConnection:
    """A matrix 1-form ``sum_k a_k dx^k`` whose chart components are algebra fields.

    Because every component carries exact chart derivatives, the curvature
    ``F = dA + A ^ A`` is exact at the nodes.
    """

    def __init__(self, components):
        self.components = list(components)
        self.rank = self.components[0].rank

    def form(self, dom, cache=None):
        comps = [None] * dom.dim
        for k, a in enumerate(self.components):
            if a is not None:
                comps[k] = a.evaluate(dom, cache)[0]
        return one_form(comps, dom, self.rank)

    def curvature(self, dom, cache=None):
        vals, ders = [], []
        for k in range(dom.dim):
            a = self.components[k] if k < len(self.components) else None
            if a is None:
                vals.append(None)
                ders.append([None] * dom.dim)
            else:
                v, d = a.evaluate(dom, cache)
                vals.append(v)
                ders.append(d)
        comps = {}
        for i in range(dom.dim):
            for j in range(i + 1, dom.dim):
                terms = []
                if ders[j][i] is not None:
                    terms.append(ders[j][i])
                if ders[i][j] is not None:
                    terms.append(-ders[i][j])
                if vals[i] is not None and vals[j] is not None:
                    terms.append(vals[i] @ vals[j] - vals[j] @ vals[i])
                if terms:
                    comps[(i, j)] = sum(terms)
        return Form(dom, 2, comps, self.rank)


def random_chart_connection(rng, kind, rank=3, scale=0.5, degree=2):
    """Random connection on S3, S3xI, S3xS1 or S3xD2 with analytic curvature.

    Each chart component is a sum of based polynomial fields on S^3 times
    trigonometric factors in the time coordinate (and a factor ``r`` on the
    disk).  The components are smooth in chart coordinates, which is all
    the pointwise identities tested with them require.
    """
    dim = {"S3": 3, "S3xI": 4, "S3xS1": 4, "S3xD2": 5}[kind]
    comps = []
    for _ in range(dim):
        xi = random_polynomial_field(rng, rank, degree, scale)
        if kind == "S3":
            comps.append(xi)
            continue
        terms = [(1.0, TimeProfiled(xi, _trig_profile(m, rng.uniform(0, TWO_PI)))) for m in (0, 1)]
        field = LinearCombination(terms)
        if kind == "S3xD2":
            field = LinearCombination([(1.0, TimeProfiled(random_polynomial_field(rng, rank, degree, scale), SINE_PERIODIC)),
                                       (1.0, RadialScaled(field))])
        comps.append(field)
    return ChartConnection(comps)

