"""Compiled per-node kernels for the hot loops (numpy fallback if numba is absent)."""

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _top_trace5_py(c):
    from .forms import top_trace_power
    return top_trace_power([c[k] for k in range(5)], 5)


if numba is not None:

    @numba.njit(cache=True, inline="always")
    def _comm_into(a, b, out, n):
        # out = a b - b a
        for r in range(n):
            for s in range(n):
                acc = 0j
                for m in range(n):
                    acc += a[r, m] * b[m, s] - b[r, m] * a[m, s]
                out[r, s] = acc

    @numba.njit(cache=True, inline="always")
    def _mm_acc(a, b, out, sign, n):
        # out += sign * a b
        for r in range(n):
            for s in range(n):
                acc = 0j
                for m in range(n):
                    acc += a[r, m] * b[m, s]
                out[r, s] += sign * acc

    @numba.njit(cache=True)
    def _top_trace5_nb(c0, c1, c2, c3, c4):
        npts, n = c0.shape[0], c0.shape[1]
        out = np.empty(npts, dtype=np.complex128)
        sq = np.empty((6, n, n), dtype=np.complex128)
        w = np.empty((n, n), dtype=np.complex128)
        for p in range(npts):
            # squares over the four trailing axes: 01 02 03 12 13 23
            _comm_into(c1[p], c2[p], sq[0], n)
            _comm_into(c1[p], c3[p], sq[1], n)
            _comm_into(c1[p], c4[p], sq[2], n)
            _comm_into(c2[p], c3[p], sq[3], n)
            _comm_into(c2[p], c4[p], sq[4], n)
            _comm_into(c3[p], c4[p], sq[5], n)
            w[:, :] = 0.0
            _mm_acc(sq[0], sq[5], w, 1.0, n)
            _mm_acc(sq[1], sq[4], w, -1.0, n)
            _mm_acc(sq[2], sq[3], w, 1.0, n)
            _mm_acc(sq[3], sq[2], w, 1.0, n)
            _mm_acc(sq[4], sq[1], w, -1.0, n)
            _mm_acc(sq[5], sq[0], w, 1.0, n)
            acc = 0j
            a = c0[p]
            for r in range(n):
                for s in range(n):
                    acc += a[r, s] * w[s, r]
            out[p] = 5.0 * acc
        return out


def top_trace5(comps, shape):
    """Top component of ``tr(V^5)`` for five component arrays (None = zero)."""
    if numba is None or any(c is None for c in comps):
        return _top_trace5_py(comps)
    n = comps[0].shape[-1]
    flat = [np.ascontiguousarray(np.broadcast_to(c, shape + (n, n))).reshape(-1, n, n) for c in comps]
    return _top_trace5_nb(*flat).reshape(shape)
