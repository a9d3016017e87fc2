"""Matrix Lie algebra su(n) and group SU(n).

Everything here works on batched arrays: an element is an ``(..., n, n)``
complex array and all operations broadcast over the leading axes.
"""

import numpy as np
import scipy.linalg

DEFAULT_TOL = 1e-12


class AlgebraError(ValueError):
    """Raised for invalid algebra input (bad rank, non-finite entries)."""


def dagger(x):
    return np.conj(np.swapaxes(x, -1, -2))


def su_basis(n):
    """Orthogonal basis of su(n) as an ``(n*n - 1, n, n)`` array.

    Elements are ``i`` times the generalized Gell-Mann matrices, normalized
    so that ``-tr(e_a e_b) = 2 delta_ab``.  For ``n = 2`` this is ``i sigma_a``
    and satisfies the quaternion relations ``e_a^2 = -1``, ``e_1 e_2 = -e_3``.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise AlgebraError(f"rank must be an integer >= 2, got {n!r}")
    mats = []
    # symmetric and antisymmetric off-diagonal generators
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), complex)
            s[j, k] = s[k, j] = 1.0
            a = np.zeros((n, n), complex)
            a[j, k], a[k, j] = -1j, 1j
            mats.append((j, k, s, a))
    basis = []
    if n == 2:
        basis = [mats[0][2], mats[0][3], np.diag([1.0, -1.0]).astype(complex)]
    else:
        for _, _, s, a in mats:
            basis += [s, a]
        for m in range(1, n):
            d = np.zeros(n)
            d[:m] = 1.0
            d[m] = -m
            basis.append(np.diag(d * np.sqrt(2.0 / (m * (m + 1)))).astype(complex))
    return 1j * np.array(basis)


def from_coefficients(coeffs, n):
    """Combine real coefficients ``(..., n*n-1)`` with :func:`su_basis`."""
    coeffs = np.asarray(coeffs, dtype=float)
    return np.tensordot(coeffs, su_basis(n), axes=([-1], [0]))


def coefficients(x):
    """Inverse of :func:`from_coefficients` for anti-Hermitian traceless input."""
    n = x.shape[-1]
    basis = su_basis(n)
    return -np.einsum("...ij,aji->...a", x, basis).real / 2.0


def bracket(x, y):
    return x @ y - y @ x


def project_algebra(m):
    """Nearest su(n) element: anti-Hermitian part with the trace removed."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[-1]
    a = (m - dagger(m)) / 2.0
    tr = np.trace(a, axis1=-2, axis2=-1)
    return a - tr[..., None, None] / n * np.eye(n)


def is_algebra(x, tol=DEFAULT_TOL):
    x = np.asarray(x)
    n = x.shape[-1]
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    herm = np.max(np.abs(x + dagger(x)), initial=0.0)
    tr = np.max(np.abs(np.trace(x, axis1=-2, axis2=-1)), initial=0.0)
    return bool(herm <= tol * scale and tr <= tol * scale * n)


def is_group(u, tol=1e-10):
    u = np.asarray(u)
    n = u.shape[-1]
    unit = np.max(np.abs(u @ dagger(u) - np.eye(n)), initial=0.0)
    det = np.max(np.abs(np.linalg.det(u) - 1.0), initial=0.0)
    return bool(unit <= tol and det <= tol)


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise AlgebraError("non-finite entries in matrix input")


def eigh_algebra(x):
    """Eigen-decomposition ``x = U diag(i lam) U^dagger`` of anti-Hermitian ``x``.

    Returns ``(lam, U)`` with real ``lam``.
    """
    h = 1j * x
    h = (h + dagger(h)) / 2.0
    lam, u = np.linalg.eigh(h)
    return -lam, u


def _phi_imag(y):
    """``(exp(iy) - 1) / (iy)`` for real ``y``, written as ``e^{iy/2} sinc``."""
    return np.exp(0.5j * y) * np.sinc(y / (2.0 * np.pi))


def matrix_exp(x):
    """Exponential of an su(n) element (batched).

    Anti-Hermitian input goes through a unitary eigen-decomposition, which
    keeps the result exactly unitary up to rounding.  Other square input
    falls back to ``scipy.linalg.expm``.
    """
    x = np.asarray(x, dtype=complex)
    _check_finite(x)
    if x.shape[-1] < 1 or x.shape[-1] != x.shape[-2]:
        raise AlgebraError(f"expected square matrices, got shape {x.shape}")
    n = x.shape[-1]
    if np.max(np.abs(x + dagger(x)), initial=0.0) <= 1e-10 * max(1.0, np.max(np.abs(x), initial=0.0)):
        lam, u = eigh_algebra(x)
        return (u * np.exp(1j * lam)[..., None, :]) @ dagger(u)
    flat = x.reshape(-1, n, n)
    return np.array([scipy.linalg.expm(m) for m in flat]).reshape(x.shape)


class ExpDecomposition:
    """Cached spectral data of an anti-Hermitian field ``eta``.

    Lets one evaluate ``exp(s * eta)`` and the right Maurer-Cartan components
    ``d(exp(s eta)) exp(-s eta)`` for many scalings ``s`` without repeating
    the eigen-decomposition.
    """

    def __init__(self, eta):
        eta = np.asarray(eta, dtype=complex)
        _check_finite(eta)
        self.lam, self.u = eigh_algebra(eta)
        self.udag = dagger(self.u)

    def rotate(self, m):
        """Express ``m`` in the eigenbasis: ``U^dagger m U``."""
        return self.udag @ m @ self.u

    def exp(self, s=1.0):
        s = np.asarray(s)[..., None]
        phase = np.exp(1j * s * self.lam)
        return (self.u * phase[..., None, :]) @ self.udag

    def divided_differences(self, s=1.0):
        """Matrix of ``(e^{a_i} - e^{a_j}) e^{-a_j} / (a_i - a_j)`` with ``a = i s lam``."""
        s = np.asarray(s)[..., None]
        a = s * self.lam
        return _phi_imag(a[..., :, None] - a[..., None, :])

    def right_derivative(self, dm_rot, s=1.0, phi=None):
        """Right-invariant derivative of ``exp(s eta)`` along a direction.

        ``dm_rot`` is ``U^dagger d(s eta) U``; the result is
        ``d(exp(s eta)) exp(-s eta)``, obtained from the divided-difference
        form of the derivative of the exponential.  ``phi`` may carry a
        precomputed :meth:`divided_differences` matrix.
        """
        phi = self.divided_differences(s) if phi is None else phi
        return self.u @ (dm_rot * phi) @ self.udag


def exp_right_derivative(eta, deta):
    """Return ``exp(eta)`` and ``d(exp eta) exp(-eta)`` for a derivative ``deta``."""
    dec = ExpDecomposition(eta)
    return dec.exp(), dec.right_derivative(dec.rotate(deta))


def random_algebra(rng, n, scale=1.0, size=()):
    size = (size,) if np.isscalar(size) else tuple(size)
    return scale * from_coefficients(rng.normal(size=size + (n * n - 1,)), n)


def random_group(rng, n, scale=1.0):
    return matrix_exp(random_algebra(rng, n, scale))


def embed(x, n_target=3):
    """Embed rank-2 matrices as the upper-left block of rank ``n_target``.

    Group elements get a 1 in the lower-right diagonal, algebra elements a 0;
    the caller chooses via :func:`embed_group` / :func:`embed_algebra`.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-2] + (n_target, n_target), dtype=complex)
    out[..., :n, :n] = x
    return out


def embed_algebra(x, n_target=3):
    return embed(x, n_target)


def embed_group(u, n_target=3):
    out = embed(u, n_target)
    n = np.shape(u)[-1]
    for k in range(n, n_target):
        out[..., k, k] = 1.0
    return out
