""" Grid functions on [c - L, c + L]^2 with homogeneous Dirichlet data.

The operator pair is chosen so summation by parts holds exactly: the
5-point Laplacian on interior nodes, forward differences over every grid
edge for the kinetic energy and trapezoidal quadrature on the nodes.
"""
import collections
import math

import numpy as np
from scipy.fft import dstn, idstn
from scipy.interpolate import RegularGridInterpolator

from gpcollapse import logger
from gpcollapse.errors import (FieldError, GridMismatchError,
                               InvalidParameter, NormalizationError,
                               WindowError)


MIN_NODES = 16
MIN_POINTS_PER_WIDTH = 4
NORMALIZATION_TOL = 1e-10
BOUNDARY_TOL = 1e-6


class Grid2D(object):
    """n x n nodes x_i = center + (i - (n - 1) / 2) * spacing.

    With n even no node sits on the centre.
    """
    def __init__(self, half_width, n, center=(0., 0.)):
        n = int(n)
        half_width = float(half_width)
        if n < MIN_NODES:
            raise InvalidParameter('a grid needs at least %d nodes per side'
                                   % MIN_NODES)
        if not half_width > 0:
            raise InvalidParameter('half_width must be positive')
        self.half_width = half_width
        self.n = n
        self.center = (float(center[0]), float(center[1]))
        self.spacing = 2. * half_width / (n - 1)
        offsets = (np.arange(n) - (n - 1) / 2.) * self.spacing
        self.x = self.center[0] + offsets
        self.y = self.center[1] + offsets
        self.x.flags.writeable = False
        self.y.flags.writeable = False

    def __eq__(self, other):
        return (isinstance(other, Grid2D) and
                self.half_width == other.half_width and
                self.n == other.n and self.center == other.center)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.half_width, self.n, self.center))

    def __repr__(self):
        return '<Grid2D L=%g n=%d center=%r>' % (self.half_width, self.n,
                                                 self.center)

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def bounds(self):
        return (self.x[0], self.x[-1], self.y[0], self.y[-1])

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing='ij')

    def radius(self, point=(0., 0.)):
        xx, yy = self.mesh()
        return np.hypot(xx - point[0], yy - point[1])

    def contains(self, point, margin=0.):
        x0, x1, y0, y1 = self.bounds
        return (x0 + margin <= point[0] <= x1 - margin and
                y0 + margin <= point[1] <= y1 - margin)

    def translated(self, shift):
        return Grid2D(self.half_width, self.n,
                      (self.center[0] + shift[0], self.center[1] + shift[1]))

    @property
    def weights(self):
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return np.outer(w, w)

    def describe(self):
        return {'half_width': self.half_width, 'n': self.n,
                'center': list(self.center)}


class Field2D(object):
    """Nonnegative grid function. The data is read-only.

    Dirichlet fields have their boundary nodes pinned to zero.
    """
    def __init__(self, grid, data, normalized=False, dirichlet=True):
        data = np.array(data, dtype=float)
        if data.shape != grid.shape:
            raise FieldError('data of shape %r on a %r grid'
                             % (data.shape, grid.shape))
        if not np.all(np.isfinite(data)):
            raise FieldError('field has non-finite values')
        if data.min() < 0:
            raise FieldError('field has negative values (min %g)'
                             % data.min())
        if dirichlet:
            _pin(data)
        data.flags.writeable = False
        self.grid = grid
        self.data = data
        self.dirichlet = dirichlet
        if normalized:
            mass = integrate(grid, data ** 2)
            if abs(mass - 1.) > NORMALIZATION_TOL:
                raise NormalizationError('field has mass %r, not 1' % mass)
        self.normalized = normalized

    def __repr__(self):
        return '<Field2D on %r%s>' % (self.grid,
                                      ' normalized' if self.normalized
                                      else '')

    @property
    def mass(self):
        return integrate(self.grid, self.data ** 2)


_EnergyBreakdown = collections.namedtuple(
    'EnergyBreakdown', ['kinetic', 'potential', 'interaction', 'total',
                        'boundary_mass', 'warning'])


class EnergyBreakdown(_EnergyBreakdown):
    """total = kinetic + potential - interaction; `warning` is raised when
    more than BOUNDARY_TOL of the mass sits on the boundary ring."""
    __slots__ = ()

    @property
    def scale(self):
        return abs(self.kinetic) + abs(self.potential) + \
            abs(self.interaction)


def _pin(data):
    data[0, :] = data[-1, :] = 0.
    data[:, 0] = data[:, -1] = 0.
    return data


def _check_same_grid(u, v):
    if u.grid != v.grid:
        raise GridMismatchError('%r and %r live on different grids'
                                % (u.grid, v.grid))


def integrate(grid, values):
    """Trapezoidal rule on the nodes; exact for constants."""
    return float(np.sum(grid.weights * values))


def inner(grid, u, v):
    return integrate(grid, u * v)


def norm(grid, u):
    return math.sqrt(inner(grid, u, u))


def laplacian(grid, u):
    """5-point Laplacian on interior nodes, zero on the boundary."""
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] +
                       u[1:-1, :-2] - 4. * u[1:-1, 1:-1])
    out /= grid.spacing ** 2
    return out


def forward_gradient(grid, u):
    """Forward differences over every edge: shapes (n-1, n), (n, n-1)."""
    return (np.diff(u, axis=0) / grid.spacing,
            np.diff(u, axis=1) / grid.spacing)


def dirichlet_energy(grid, u):
    """int |grad u|^2 as h^2 times the sum over edges; equals
    <-laplacian(u), u> for u vanishing on the boundary."""
    gx, gy = forward_gradient(grid, u)
    return float(grid.spacing ** 2 * (np.sum(gx ** 2) + np.sum(gy ** 2)))


def boundary_ring(grid):
    width = max(2, grid.n // 32)
    mask = np.ones(grid.shape, dtype=bool)
    mask[width:-width, width:-width] = False
    return mask


def boundary_mass(grid, data):
    return integrate(grid, np.where(boundary_ring(grid), data ** 2, 0.))


def project(grid, v):
    """|v| / ||v|| with the boundary pinned, as a bare array."""
    data = _pin(np.abs(v))
    size = norm(grid, data)
    if size == 0:
        raise FieldError('cannot normalize the zero field')
    return data / size


def normalize(u):
    """|u| / ||u|| as a normalized field."""
    return Field2D(u.grid, project(u.grid, np.array(u.data)),
                   normalized=True)


def sample(grid, func):
    """Field2D of func(x, y) on the nodes."""
    xx, yy = grid.mesh()
    return Field2D(grid, func(xx, yy))


def gaussian(grid, center=(0., 0.), width=1.):
    """Normalized exp(-|x - center|^2 / (2 width^2))."""
    return normalize(sample(grid, lambda x, y: np.exp(
        -((x - center[0]) ** 2 + (y - center[1]) ** 2) / (2. * width ** 2))))


def townes_field(grid, profile, center=(0., 0.), scale=1.):
    """Normalized scale * Q0(scale * |x - center|)."""
    r = grid.radius(center)
    return normalize(Field2D(grid, scale * profile.normalized(scale * r)))


def interpolate(u, grid):
    """Bilinear resampling of u onto `grid`, zero outside u's domain."""
    if grid == u.grid:
        return u
    interp = RegularGridInterpolator((u.grid.x, u.grid.y), u.data,
                                     method='linear', bounds_error=False,
                                     fill_value=0.)
    xx, yy = grid.mesh()
    data = interp(np.stack([xx.ravel(), yy.ravel()], axis=-1))
    return Field2D(grid, np.maximum(data.reshape(grid.shape), 0.))


def energy_breakdown(u, spec, a, potential=None):
    """Kinetic, potential and interaction parts of the GP energy of the
    normalized field u. `potential` may carry precomputed V values."""
    if not u.normalized:
        raise NormalizationError('energy_breakdown needs a normalized field')
    if a < 0:
        raise InvalidParameter('a must be nonnegative, got %r' % a)
    if potential is None:
        from gpcollapse.potential import evaluate_grid
        potential, _ = evaluate_grid(spec, u.grid)
    return breakdown_arrays(u.grid, u.data, potential, a)


def breakdown_arrays(grid, data, potential, a):
    u2 = data ** 2
    kinetic = dirichlet_energy(grid, data)
    pot = integrate(grid, potential * u2)
    interaction = 0.5 * a * integrate(grid, u2 ** 2)
    ring = boundary_mass(grid, data)
    return EnergyBreakdown(kinetic, pot, interaction,
                           kinetic + pot - interaction, ring,
                           ring > BOUNDARY_TOL)


def gn_ratio(u):
    """int |grad u|^2 / (1/2 int u^4) for normalized u."""
    data = u.data
    quartic = integrate(u.grid, data ** 4)
    if quartic == 0:
        raise FieldError('gn_ratio of the zero field')
    if abs(u.mass - 1.) > NORMALIZATION_TOL:
        raise NormalizationError('gn_ratio needs a normalized field')
    return dirichlet_energy(u.grid, data) / (0.5 * quartic)


def centroid(u):
    """Centre of mass of u^2."""
    xx, yy = u.grid.mesh()
    mass = u.mass
    return (integrate(u.grid, xx * u.data ** 2) / mass,
            integrate(u.grid, yy * u.data ** 2) / mass)


def spread(u, center):
    """(int |x - center|^2 u^2 / int u^2)^(1/2); 1 for gaussian(width=1).
    """
    r2 = u.grid.radius(center) ** 2
    return math.sqrt(integrate(u.grid, r2 * u.data ** 2) / u.mass)


def rescale_extract(u, center, eps, out_grid):
    """w(x) = eps * u(center + eps * x) sampled on out_grid, renormalized.
    """
    if not eps > 0:
        raise InvalidParameter('eps must be positive, got %r' % eps)
    xx, yy = out_grid.mesh()
    px = center[0] + eps * xx
    py = center[1] + eps * yy
    x0, x1, y0, y1 = u.grid.bounds
    slack = 1e-12 * u.grid.half_width
    if (px.min() < x0 - slack or px.max() > x1 + slack or
            py.min() < y0 - slack or py.max() > y1 + slack):
        raise WindowError('window [%g, %g] x [%g, %g] leaves the source '
                          'domain' % (px.min(), px.max(), py.min(),
                                      py.max()))
    px = np.clip(px, x0, x1)
    py = np.clip(py, y0, y1)
    interp = RegularGridInterpolator((u.grid.x, u.grid.y), u.data,
                                     method='linear')
    data = interp(np.stack([px.ravel(), py.ravel()], axis=-1))
    data = eps * np.maximum(data.reshape(out_grid.shape), 0.)
    return normalize(Field2D(out_grid, data))


def h1_l2_distance(u, v):
    _check_same_grid(u, v)
    diff = u.data - v.data
    l2sq = integrate(u.grid, diff ** 2)
    return (math.sqrt(l2sq), math.sqrt(l2sq + dirichlet_energy(u.grid, diff)))


class DirichletPreconditioner(object):
    """Applies (shift - laplacian)^-1 exactly on the interior nodes via
    the type-I discrete sine transform."""

    def __init__(self, grid, shift=1.):
        if not shift > 0:
            raise InvalidParameter('shift must be positive')
        self.grid = grid
        self.shift = float(shift)
        m = grid.n - 2
        k = np.arange(1, m + 1)
        eig = (4. / grid.spacing ** 2 *
               np.sin(k * math.pi / (2. * (m + 1))) ** 2)
        self._eig = eig[:, None] + eig[None, :]
        self._denom = self.shift + self._eig

    def reshift(self, shift):
        if shift != self.shift:
            logger.debug('preconditioner shift %g -> %g' % (self.shift, shift))
            self.shift = float(shift)
            self._denom = self.shift + self._eig

    def __call__(self, r):
        out = np.zeros_like(r)
        coeffs = dstn(r[1:-1, 1:-1], type=1)
        out[1:-1, 1:-1] = idstn(coeffs / self._denom, type=1)
        return out
