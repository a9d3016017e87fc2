"""Product domains built on the three-sphere and midpoint grids on them.

Chart on S^3: ``(psi, theta, phi) -> (sin psi sin theta cos phi,
sin psi sin theta sin phi, sin psi cos theta, cos psi)``.  The base point
``p0 = (0, 0, 0, 1)`` sits at ``psi = 0``.

Four domain kinds are supported:

``S3``     the sphere itself;
``S3xI``   sphere times the unit interval, coordinate ``t`` in [0, 1];
``S3xS1``  sphere times a circle, coordinate ``tau`` in [0, 2 pi);
``S3xD2``  sphere times the unit disk in polar coordinates ``(r, tau)``.

Every extra coordinate is tied to a "parameter time" ``t`` in [0, 1] used
by time-dependent fields: on the circle and on the disk ``t = tau / 2 pi``.

Orientation.  The chart above is negatively oriented with respect to the
standard orientation of S^3 (outward normal first in ``R^4``).  Products
are oriented so that Stokes' theorem is consistent with the disk bounding
the circle: ``S3xI`` and ``S3xS1`` carry ``dt ^ vol_S3`` and ``S3xD2``
carries ``vol_S3 ^ dr ^ dtau``.  Hence the boundary of ``S3xI`` is
``{t=1} - {t=0}`` and the boundary of ``S3xD2`` is ``S3xS1``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * np.pi
BASE_POINT = np.array([0.0, 0.0, 0.0, 1.0])

KINDS = ("S3", "S3xI", "S3xS1", "S3xD2")

# sign of chart orientation (coordinate order) relative to the standard one
_ORIENTATION = {"S3": -1, "S3xI": 1, "S3xS1": 1, "S3xD2": -1}


class GridError(ValueError):
    """Raised for invalid grid configuration."""


@dataclass(frozen=True, eq=False)
class Domain:
    """A midpoint grid on one of the product domains.

    ``axes`` holds the node coordinates per chart axis.  Full domains use
    uniform midpoint nodes; views (``is_view``) may carry arbitrary nodes,
    e.g. a chunk of the circle or a single boundary slice, and are only
    meant for pointwise evaluation.
    """

    kind: str
    axes: tuple
    spacing: tuple
    periodic: tuple
    names: tuple
    is_view: bool = False
    shape_full: tuple = field(default=())

    @property
    def dim(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def orientation(self):
        return _ORIENTATION[self.kind]

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis_index(self, name):
        return self.names.index(name)

    def has(self, name):
        return name in self.names

    def coord(self, name):
        """Node coordinates of one axis, shaped to broadcast over the grid."""
        k = self.axis_index(name)
        shape = [1] * self.dim
        shape[k] = len(self.axes[k])
        return self.axes[k].reshape(shape)

    def time(self):
        """Parameter time ``t`` in [0, 1] broadcast over the grid, or None."""
        if self.kind == "S3xI":
            return self.coord("t")
        if self.kind in ("S3xS1", "S3xD2"):
            return self.coord("tau") / TWO_PI
        return None

    @property
    def time_axis(self):
        if self.kind == "S3xI":
            return self.axis_index("t")
        if self.kind in ("S3xS1", "S3xD2"):
            return self.axis_index("tau")
        return None

    @property
    def time_scale(self):
        """Derivative of parameter time with respect to the chart coordinate."""
        return 1.0 if self.kind == "S3xI" else 1.0 / TWO_PI

    def radius(self):
        return self.coord("r") if self.kind == "S3xD2" else None

    def ambient(self):
        """Embedding of the nodes into R^4, shape ``(Npsi, Ntheta, Nphi, 1.., 4)``."""
        psi, theta, phi = (self.coord(n) for n in ("psi", "theta", "phi"))
        sp, cp = np.sin(psi), np.cos(psi)
        st, ct = np.sin(theta), np.cos(theta)
        sf, cf = np.sin(phi), np.cos(phi)
        return np.stack(np.broadcast_arrays(sp * st * cf, sp * st * sf, sp * ct, cp), axis=-1)

    def ambient_derivatives(self):
        """Chart derivatives of the embedding: a list of three ``(..., 4)`` arrays."""
        psi, theta, phi = (self.coord(n) for n in ("psi", "theta", "phi"))
        sp, cp = np.sin(psi), np.cos(psi)
        st, ct = np.sin(theta), np.cos(theta)
        sf, cf = np.sin(phi), np.cos(phi)
        d_psi = np.broadcast_arrays(cp * st * cf, cp * st * sf, cp * ct, -sp)
        d_theta = np.broadcast_arrays(sp * ct * cf, sp * ct * sf, -sp * st, 0.0 * sp)
        d_phi = np.broadcast_arrays(-sp * st * sf, sp * st * cf, 0.0 * sp, 0.0 * sp)
        return [np.stack(d, axis=-1) for d in (d_psi, d_theta, d_phi)]

    def with_axis(self, name, nodes):
        """View with the nodes of one axis replaced (for slices and chunks)."""
        k = self.axis_index(name)
        axes = list(self.axes)
        axes[k] = np.atleast_1d(np.asarray(nodes, dtype=float))
        return replace(self, axes=tuple(axes), is_view=True, shape_full=self.shape_full or self.shape)

    def sphere(self):
        """The S^3 factor with the same sphere grid."""
        return make_domain("S3", s3=self.shape[:3]) if not self.is_view else Domain(
            "S3", self.axes[:3], self.spacing[:3], self.periodic[:3], self.names[:3], True)

    def describe(self):
        return {"kind": self.kind, "shape": list(self.shape), "orientation": self.orientation}


def _midpoints(n, length):
    h = length / n
    return (np.arange(n) + 0.5) * h, h


def _check_res(values):
    for v in values:
        if not isinstance(v, (int, np.integer)) or v < 8:
            raise GridError(f"every grid resolution must be an integer >= 8, got {v!r}")


def make_domain(kind, s3=(16, 16, 32), nt=16, disk=(12, 48), ntau=48):
    """Construct a full midpoint grid.

    ``s3`` gives ``(Npsi, Ntheta, Nphi)``; ``nt`` the interval resolution;
    ``ntau`` the circle resolution; ``disk`` the ``(Nr, Ntau)`` pair.
    """
    if kind not in KINDS:
        raise GridError(f"unknown domain kind {kind!r}")
    s3 = tuple(int(v) for v in s3)
    _check_res(s3)
    axes, spacing, periodic, names = [], [], [], []
    for name, n, length, per in zip(("psi", "theta", "phi"), s3, (np.pi, np.pi, TWO_PI), (False, False, True)):
        nodes, h = _midpoints(n, length)
        axes.append(nodes)
        spacing.append(h)
        periodic.append(per)
        names.append(name)
    extra = []
    if kind == "S3xI":
        _check_res([nt])
        extra = [("t", nt, 1.0, False)]
    elif kind == "S3xS1":
        _check_res([ntau])
        extra = [("tau", ntau, TWO_PI, True)]
    elif kind == "S3xD2":
        disk = tuple(int(v) for v in disk)
        _check_res(disk)
        extra = [("r", disk[0], 1.0, False), ("tau", disk[1], TWO_PI, True)]
    for name, n, length, per in extra:
        nodes, h = _midpoints(n, length)
        axes.append(nodes)
        spacing.append(h)
        periodic.append(per)
        names.append(name)
    return Domain(kind, tuple(axes), tuple(spacing), tuple(periodic), tuple(names))


def refine(dom, factor=2):
    """Same domain with every resolution multiplied by ``factor``."""
    s = [n * factor for n in dom.shape]
    if dom.kind == "S3":
        return make_domain("S3", s3=s[:3])
    if dom.kind == "S3xI":
        return make_domain("S3xI", s3=s[:3], nt=s[3])
    if dom.kind == "S3xS1":
        return make_domain("S3xS1", s3=s[:3], ntau=s[3])
    return make_domain("S3xD2", s3=s[:3], disk=s[3:])


def full_shape(a, dom, tail=0):
    """Broadcast ``a`` to the full grid shape (keeping ``tail`` trailing axes)."""
    tail_shape = a.shape[a.ndim - tail:] if tail else ()
    return np.broadcast_to(a, dom.shape + tail_shape)


def integrate_top(dom, density):
    """Integrate the top chart component of a form over the domain.

    ``density`` may be broadcast-shaped.  The midpoint sum is reduced with
    numpy's pairwise summation over a contiguous copy, so the result is
    deterministic for a given grid.
    """
    dens = np.ascontiguousarray(np.broadcast_to(density, dom.shape)).reshape(-1)
    return dom.orientation * dom.cell_volume * np.sum(dens)


_STENCIL_C = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_STENCIL_F0 = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
_STENCIL_F1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0


def chart_derivative(samples, dom, axis, order=4):
    """Fourth-order finite-difference derivative along one chart axis.

    Periodic axes use the centred stencil with wrap-around; other axes use
    one-sided fourth-order stencils in the two edge layers.  ``samples`` has
    the grid axes first and may carry trailing matrix axes; size-1
    (broadcast) grid axes differentiate to zero.
    """
    if order != 4:
        raise GridError("only fourth-order differences are implemented")
    samples = np.asarray(samples)
    if samples.shape[axis] == 1:
        return np.zeros_like(samples)
    if dom.is_view:
        raise GridError("finite differences need a full uniform grid, not a view")
    n = samples.shape[axis]
    if n < 5:
        raise GridError("need at least five nodes along a differentiated axis")
    h = dom.spacing[axis]
    f = np.moveaxis(samples, axis, 0)
    if dom.periodic[axis]:
        out = sum(c * np.roll(f, -(k - 2), axis=0) for k, c in enumerate(_STENCIL_C) if c != 0)
    else:
        out = np.empty_like(f)
        out[2:-2] = sum(c * f[k:n - 4 + k] for k, c in enumerate(_STENCIL_C) if c != 0)
        out[0] = np.tensordot(_STENCIL_F0, f[:5], axes=1)
        out[1] = np.tensordot(_STENCIL_F1, f[:5], axes=1)
        out[-1] = -np.tensordot(_STENCIL_F0, f[::-1][:5], axes=1)
        out[-2] = -np.tensordot(_STENCIL_F1, f[::-1][:5], axes=1)
    return np.moveaxis(out / h, 0, axis)


# cubic extrapolation from the four nodes nearest to an edge of a midpoint grid
_EXTRAP = np.array([35.0, -35.0, 21.0, -5.0]) / 16.0


def extrapolate_boundary(samples, axis, side):
    """Estimate the boundary value of sampled data on a midpoint axis.

    ``side`` is ``"lower"`` or ``"upper"``.  Used for data that only exists
    as samples; analytic fields are evaluated at the boundary directly.
    """
    f = np.moveaxis(np.asarray(samples), axis, 0)
    if f.shape[0] < 4:
        raise GridError("need at least four nodes to extrapolate")
    edge = f[:4] if side == "lower" else f[::-1][:4]
    return np.tensordot(_EXTRAP, edge, axes=1)


def point_domain(psi, theta, phi, kind="S3", extra=None):
    """A one-node view at given chart coordinates (for pointwise evaluation)."""
    dom = make_domain(kind, s3=(8, 8, 8), nt=8, disk=(8, 8), ntau=8)
    dom = dom.with_axis("psi", [psi]).with_axis("theta", [theta]).with_axis("phi", [phi])
    for name, value in (extra or {}).items():
        dom = dom.with_axis(name, [value])
    return dom


def base_point_domain(kind="S3", extra=None, n=8):
    """Views on the circle ``psi = 0`` (the base point, any theta and phi)."""
    dom = make_domain(kind, s3=(8, n, n), nt=8, disk=(8, 8), ntau=8)
    dom = dom.with_axis("psi", [0.0])
    for name, value in (extra or {}).items():
        dom = dom.with_axis(name, np.atleast_1d(value))
    return dom
