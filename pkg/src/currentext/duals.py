"""Affine functionals on connections over S^3."""

import numpy as np

from .forms import Form, trace_wedge, integrate


class AffineDual:
    """``l(A) = base + int_{S^3} tr(kernel ^ A)``.

    ``kernel`` is a matrix 2-form on the S3 grid (or None for a constant).
    Evaluation returns the real part; the discarded imaginary part is kept
    on :attr:`last_imag` as a consistency diagnostic.
    """

    def __init__(self, base=0.0, kernel=None):
        self.base = float(np.real(base))
        if kernel is not None and kernel.degree != 2:
            raise ValueError("the kernel of an affine dual is a 2-form")
        self.kernel = kernel
        self.last_imag = 0.0

    def linear_part(self, a):
        """``D l(a) = int tr(kernel ^ a)`` for a matrix 1-form ``a``."""
        if self.kernel is None:
            return 0.0
        val = integrate(trace_wedge(self.kernel, a))
        self.last_imag = float(np.imag(val))
        return float(np.real(val))

    def __call__(self, A):
        return self.base + self.linear_part(A)

    evaluate = __call__

    def _combine(self, other, sign):
        if self.kernel is None:
            k = None if other.kernel is None else (other.kernel if sign > 0 else -other.kernel)
        elif other.kernel is None:
            k = self.kernel
        else:
            k = self.kernel + other.kernel if sign > 0 else self.kernel - other.kernel
        return AffineDual(self.base + sign * other.base, k)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return AffineDual(-self.base, None if self.kernel is None else -self.kernel)

    def scale(self, c):
        return AffineDual(c * self.base, None if self.kernel is None else self.kernel.scale(c))

    def shift(self, c):
        return AffineDual(self.base + c, self.kernel)


def zero_dual():
    return AffineDual(0.0, None)
