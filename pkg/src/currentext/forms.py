"""Differential forms on the chart grids.

A form is stored as a dict mapping an increasing tuple of chart axes to a
component array.  Missing keys are zero, which lets structurally sparse
forms (e.g. a field constant along the disk) skip work.  Component arrays
may be broadcast-shaped against the grid: a field that does not depend on
``tau`` can carry a size-1 ``tau`` axis.

Matrix-valued forms carry two trailing ``(n, n)`` axes; scalar forms none.
"""

from functools import lru_cache
from itertools import combinations

import numpy as np

from .geometry import chart_derivative, integrate_top


@lru_cache(maxsize=None)
def multi_indices(dim, p):
    return tuple(combinations(range(dim), p))


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _wedge_table(dim, p, q):
    """For each (p+q)-index, the list of (sign, J, K) splits with J of size p."""
    table = []
    for idx in multi_indices(dim, p + q):
        splits = []
        for J in combinations(idx, p):
            K = tuple(i for i in idx if i not in J)
            splits.append((_perm_sign(J + K), J, K))
        table.append((idx, splits))
    return table


def _accumulate(terms):
    out = None
    for sign, val in terms:
        out = (val if sign > 0 else -val) if out is None else (out + val if sign > 0 else out - val)
    return out


class Form:
    """A differential form on a domain, matrix-valued when ``rank`` is set."""

    def __init__(self, domain, degree, comps, rank=None):
        self.domain = domain
        self.degree = degree
        self.rank = rank
        self.comps = {k: v for k, v in comps.items() if v is not None}

    # -- bookkeeping ------------------------------------------------------
    @property
    def is_matrix(self):
        return self.rank is not None

    def component(self, idx):
        """Component array (broadcast to full shape) for an index tuple."""
        tail = (self.rank, self.rank) if self.is_matrix else ()
        if idx in self.comps:
            return np.broadcast_to(self.comps[idx], self.domain.shape + tail)
        return np.zeros(self.domain.shape + tail, dtype=complex)

    def dense(self):
        """All ``C(dim, p)`` components stacked in lexicographic index order."""
        return np.stack([self.component(i) for i in multi_indices(self.domain.dim, self.degree)])

    def _like(self, comps, degree=None, rank="same"):
        return Form(self.domain, self.degree if degree is None else degree, comps,
                    self.rank if rank == "same" else rank)

    def __add__(self, other):
        if other.degree != self.degree:
            raise ValueError("cannot add forms of different degree")
        keys = set(self.comps) | set(other.comps)
        out = {}
        for k in keys:
            a, b = self.comps.get(k), other.comps.get(k)
            out[k] = a if b is None else (b if a is None else a + b)
        return self._like(out)

    def __neg__(self):
        return self._like({k: -v for k, v in self.comps.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return self._like({k: c * v for k, v in self.comps.items()})

    def map(self, fn):
        """Apply ``fn`` to every stored component (e.g. a conjugation)."""
        return self._like({k: fn(v) for k, v in self.comps.items()})

    def top(self):
        """Top component (zero array if absent)."""
        if self.degree != self.domain.dim:
            raise ValueError("form is not of top degree")
        return self.comps.get(tuple(range(self.domain.dim)), 0.0)

    # -- serialization ---------------------------------------------------
    def to_record(self):
        """Self-describing dump: node-major, then form index, then matrix row and column.

        Complex numbers are stored as ``[re, im]`` pairs.
        """
        dense = np.moveaxis(self.dense(), 0, self.domain.dim)  # grid..., form index, [row, col]
        flat = dense.reshape(-1)
        return {
            "domain": self.domain.describe(),
            "degree": self.degree,
            "rank": self.rank,
            "index_order": list(self.domain.names) + ["form_index"] + (["row", "col"] if self.is_matrix else []),
            "form_indices": [list(i) for i in multi_indices(self.domain.dim, self.degree)],
            "shape": list(dense.shape),
            "values": np.stack([flat.real, flat.imag], axis=-1).tolist(),
        }

    @classmethod
    def from_record(cls, record, domain):
        vals = np.asarray(record["values"], dtype=float)
        dense = (vals[:, 0] + 1j * vals[:, 1]).reshape(tuple(record["shape"]))
        dense = np.moveaxis(dense, domain.dim, 0)
        idx = multi_indices(domain.dim, record["degree"])
        return cls(domain, record["degree"], dict(zip(idx, dense)), record["rank"])


def zero_form(values, domain, rank=None):
    """Wrap a 0-form (function) sampled on the grid."""
    return Form(domain, 0, {(): values}, rank)


def one_form(components, domain, rank=None):
    """Build a 1-form from a list of per-axis components (None means zero)."""
    return Form(domain, 1, {(k,): c for k, c in enumerate(components)}, rank)


def _product(a, b):
    if a.is_matrix and b.is_matrix:
        return np.matmul
    return np.multiply


def wedge(a, b):
    """Wedge product; matrix components are multiplied in order."""
    if a.domain is not b.domain and a.domain.shape != b.domain.shape:
        raise ValueError("forms live on different domains")
    dim = a.domain.dim
    if a.degree + b.degree > dim:
        return Form(a.domain, a.degree + b.degree, {}, a.rank or b.rank)
    mul = _product(a, b)
    if a.is_matrix != b.is_matrix:
        # scalar times matrix: add trailing axes to the scalar side
        def mul(x, y, sa=a.is_matrix):
            return x * y[..., None, None] if sa else x[..., None, None] * y
    out = {}
    for idx, splits in _wedge_table(dim, a.degree, b.degree):
        terms = [(s, mul(a.comps[J], b.comps[K])) for s, J, K in splits if J in a.comps and K in b.comps]
        if terms:
            out[idx] = _accumulate(terms)
    return Form(a.domain, a.degree + b.degree, out, a.rank or b.rank)


def _tr_prod(x, y):
    return np.einsum("...ij,...ji->...", x, y)


def trace_wedge(a, b):
    """``tr(a ^ b)`` as a scalar form, without forming the matrix product."""
    dim = a.domain.dim
    out = {}
    if a.degree + b.degree <= dim:
        for idx, splits in _wedge_table(dim, a.degree, b.degree):
            terms = [(s, _tr_prod(a.comps[J], b.comps[K])) for s, J, K in splits if J in a.comps and K in b.comps]
            if terms:
                out[idx] = _accumulate(terms)
    return Form(a.domain, a.degree + b.degree, out)


def trace_form(a):
    return Form(a.domain, a.degree, {k: np.trace(v, axis1=-2, axis2=-1) for k, v in a.comps.items()})


def power(a, k):
    """``a ^ a ^ ... ^ a`` (k factors) by repeated binary wedge."""
    out = a
    for _ in range(k - 1):
        out = wedge(out, a)
    return out


def exterior_d(a):
    """Exterior derivative via fourth-order chart differences."""
    dom = a.domain
    dim = dom.dim
    out = {}
    tail = (a.rank, a.rank) if a.is_matrix else ()
    for idx in multi_indices(dim, a.degree + 1):
        terms = []
        for pos, axis in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1:]
            if rest in a.comps:
                c = a.comps[rest]
                if np.ndim(c) == 0 or np.shape(c)[axis] == 1:
                    continue
                c = np.broadcast_to(c, dom.shape + tail) if np.ndim(c) else c
                terms.append((1 if pos % 2 == 0 else -1, chart_derivative(c, dom, axis)))
        if terms:
            out[idx] = _accumulate(terms)
    return Form(dom, a.degree + 1, out, a.rank)


def curvature(conn):
    """``F = dA + A ^ A`` for a matrix-valued connection 1-form."""
    return exterior_d(conn) + wedge(conn, conn)


def conjugate(form, g, ginv=None):
    """Pointwise ``g X g^-1`` of a matrix form by a group-valued function."""
    ginv = np.conj(np.swapaxes(g, -1, -2)) if ginv is None else ginv
    return form.map(lambda v: g @ v @ ginv)


def integrate(form):
    """Integral of a top-degree scalar form over its (oriented) domain."""
    if form.is_matrix:
        raise ValueError("integrate a scalar form (take a trace first)")
    top = form.comps.get(tuple(range(form.domain.dim)))
    if top is None:
        return 0.0
    return integrate_top(form.domain, top)


def commutator_form(a, b):
    """Ordinary matrix commutator ``a ^ b - b ^ a`` of two forms."""
    return wedge(a, b) - wedge(b, a)


def top_trace_power(comps, dim):
    """Top component of ``tr(V^dim)`` for a 1-form with ``dim`` odd.

    Uses cyclic invariance of the trace: with ``V_0`` pulled to the front,
    ``tr(V^dim)_{0..dim-1} = dim * tr(V_0 W)`` where ``W`` is the top
    component of the ``(dim - 1)``-th power of ``V`` restricted to the
    remaining axes.  ``comps`` is a list with None for zero components.
    """
    if dim % 2 == 0:
        raise ValueError("trace of an even power of a 1-form vanishes; use odd dim")
    if dim == 1:
        return 0.0 if comps[0] is None else np.trace(comps[0], axis1=-2, axis2=-1)
    # pick the axis to pull out: the first nonzero one, with the sign of the shuffle
    lead = next((k for k, c in enumerate(comps) if c is not None), None)
    if lead is None:
        return 0.0
    rest = [k for k in range(dim) if k != lead]
    sq = {}
    for i, j in combinations(range(dim - 1), 2):
        a, b = comps[rest[i]], comps[rest[j]]
        if a is not None and b is not None:
            sq[(i, j)] = a @ b - b @ a
    if dim == 3:
        w = sq.get((0, 1))
    else:
        # fourth power as a wedge of two squares over the four remaining axes
        terms = []
        for idx, splits in _wedge_table(4, 2, 2):
            for s, J, K in splits:
                if J in sq and K in sq:
                    terms.append((s, sq[J] @ sq[K]))
        w = _accumulate(terms)
        if dim != 5:
            raise ValueError("only dimensions 3 and 5 are supported")
    if w is None:
        return 0.0
    sign = -1 if lead % 2 else 1
    return sign * dim * _tr_prod(comps[lead], w)
