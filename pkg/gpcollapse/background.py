""" Smooth nonnegative backgrounds g of the potential.
"""
import numpy as np
from scipy.interpolate import RegularGridInterpolator
from zope.interface import Interface, implementer

from gpcollapse.errors import ConfigError, InvalidParameter
from gpcollapse.util import resolve_name


class IBackground(Interface):
    """Interface definition for the bounded part g >= 0 of a potential.

    Backgrounds are immutable and evaluated on whole arrays of
    coordinates at once.
    """

    def evaluate(x, y):
        """Return g at the points (x, y), arrays of equal shape."""

    def infimum():
        """Return inf g over the plane (or over the tabulated domain)."""

    def shifted(shift):
        """Return the background translated by `shift`: g(x - shift)."""

    def describe():
        """Return a JSON-serialisable description."""


@implementer(IBackground)
class ZeroBackground(object):

    def evaluate(self, x, y):
        return np.zeros(np.broadcast(x, y).shape)

    def infimum(self):
        return 0.

    def shifted(self, shift):
        return self

    def describe(self):
        return {'kind': 'zero'}


@implementer(IBackground)
class HarmonicBackground(object):
    """g(x) = omega^2 |x - origin|^2."""

    def __init__(self, omega=1., origin=(0., 0.)):
        if not omega > 0:
            raise InvalidParameter('omega must be positive, got %r' % omega)
        self.omega = float(omega)
        self.origin = (float(origin[0]), float(origin[1]))

    def evaluate(self, x, y):
        dx = np.asarray(x) - self.origin[0]
        dy = np.asarray(y) - self.origin[1]
        return self.omega ** 2 * (dx ** 2 + dy ** 2)

    def infimum(self):
        return 0.

    def shifted(self, shift):
        return HarmonicBackground(self.omega, (self.origin[0] + shift[0],
                                               self.origin[1] + shift[1]))

    def describe(self):
        return {'kind': 'harmonic', 'omega': self.omega,
                'origin': list(self.origin)}


@implementer(IBackground)
class TabulatedBackground(object):
    """Bilinear interpolation of values tabulated on a Grid2D, extended
    by its edge values outside the table."""

    def __init__(self, grid, values, source=None):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n, grid.n):
            raise InvalidParameter('table shape %r does not match the grid'
                                   % (values.shape,))
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise InvalidParameter('tabulated background must be finite '
                                   'and nonnegative')
        self.grid = grid
        self.values = values
        self.source = source
        self._interp = RegularGridInterpolator((grid.x, grid.y), values,
                                               method='linear')

    def evaluate(self, x, y):
        x0, x1 = self.grid.x[0], self.grid.x[-1]
        y0, y1 = self.grid.y[0], self.grid.y[-1]
        x, y = np.broadcast_arrays(np.clip(x, x0, x1), np.clip(y, y0, y1))
        points = np.stack([x.ravel(), y.ravel()], axis=-1)
        return self._interp(points).reshape(x.shape)

    def infimum(self):
        return float(self.values.min())

    def shifted(self, shift):
        grid = self.grid.translated(shift)
        return TabulatedBackground(grid, self.values, self.source)

    def describe(self):
        return {'kind': 'tabulated', 'file': self.source,
                'grid': self.grid.describe()}


def get_background(settings):
    """Builds the background from the flattened `background.*` options."""
    kind = settings.get('background.kind', 'zero').strip()
    if kind == 'zero':
        return ZeroBackground()
    if kind == 'harmonic':
        try:
            omega = float(settings.get('background.omega', 1.))
        except ValueError:
            raise ConfigError('invalid number', field='background.omega')
        return HarmonicBackground(omega)
    if kind == 'tabulated':
        filename = settings.get('background.file')
        if filename is None:
            raise ConfigError('tabulated background needs a file',
                              field='background.file')
        from gpcollapse.storage import get_storage
        backend = get_storage(settings.get('storage.backend', 'csv'))
        field, _ = backend.load(filename)
        return TabulatedBackground(field.grid, field.data, source=filename)

    klass = resolve_name(kind)
    background = klass(**dict((key[len('background.'):], value)
                              for key, value in settings.items()
                              if key.startswith('background.') and
                              key != 'background.kind'))
    if not IBackground.providedBy(background):
        raise ConfigError('%r does not provide IBackground' % kind,
                          field='background.kind')
    return background
