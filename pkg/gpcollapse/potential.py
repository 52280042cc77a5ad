""" Potentials V = g + sum_j h_j |x - x_j|^(-p_j).

On grids the singular terms are floored at a distance reg_delta, half
the grid spacing unless told otherwise.
"""
import collections
import math

import numpy as np

from gpcollapse import logger
from gpcollapse.background import ZeroBackground, get_background
from gpcollapse.errors import (ConfigError, InvalidParameter,
                               NoNegativeWellError, SingularPointError)


TIE_TOL = 1e-12

SingularPoint = collections.namedtuple('SingularPoint', ['x', 'p', 'h'])

SelectionData = collections.namedtuple('SelectionData',
                                       ['p', 'h0', 'candidates'])


class PotentialSpec(object):
    """Immutable description of a potential.

    `reg_delta` is the distance floor; None means "reg_factor times the
    spacing of whatever grid the potential is put on" and exact
    evaluation off the grid.
    """
    def __init__(self, points, background=None, reg_delta=None,
                 reg_factor=0.5):
        clean = []
        for point in points:
            x, p, h = point
            x = (float(x[0]), float(x[1]))
            p, h = float(p), float(h)
            if not 0 < p < 2:
                raise InvalidParameter('p must lie in (0, 2), got %r' % p)
            if not math.isfinite(h):
                raise InvalidParameter('h must be finite, got %r' % h)
            clean.append(SingularPoint(x, p, h))
        seen = set()
        for point in clean:
            if point.x in seen:
                raise InvalidParameter('duplicate singular point %r'
                                       % (point.x,))
            seen.add(point.x)
        if reg_delta is not None:
            reg_delta = float(reg_delta)
            if reg_delta < 0:
                raise InvalidParameter('reg_delta must be nonnegative')
        self.points = tuple(clean)
        self.background = background if background is not None \
            else ZeroBackground()
        if not reg_factor > 0:
            raise InvalidParameter('reg_factor must be positive')
        self.reg_delta = reg_delta
        self.reg_factor = float(reg_factor)

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return '<PotentialSpec %d points, reg_delta=%r>' % (
            len(self.points), self.reg_delta)

    @property
    def negative_wells(self):
        return [j for j, point in enumerate(self.points) if point.h < 0]

    def resolve_delta(self, spacing):
        if self.reg_delta is None:
            return self.reg_factor * spacing
        return self.reg_delta

    def with_reg_delta(self, reg_delta):
        return PotentialSpec(self.points, self.background, reg_delta,
                             self.reg_factor)

    def with_reg_factor(self, reg_factor):
        return PotentialSpec(self.points, self.background, self.reg_delta,
                             reg_factor)

    def permuted(self, order):
        if sorted(order) != list(range(len(self.points))):
            raise InvalidParameter('%r is not a permutation' % (order,))
        return PotentialSpec([self.points[j] for j in order],
                             self.background, self.reg_delta, self.reg_factor)

    def translated(self, shift):
        points = [((pt.x[0] + shift[0], pt.x[1] + shift[1]), pt.p, pt.h)
                  for pt in self.points]
        return PotentialSpec(points, self.background.shifted(shift),
                             self.reg_delta, self.reg_factor)

    def min_separation(self):
        """Smallest distance between two singular points (inf if fewer
        than two)."""
        best = float('inf')
        for i, a in enumerate(self.points):
            for b in self.points[i + 1:]:
                best = min(best, math.hypot(a.x[0] - b.x[0],
                                            a.x[1] - b.x[1]))
        return best

    def describe(self):
        return {'background': self.background.describe(),
                'points': [{'x': list(pt.x), 'p': pt.p, 'h': pt.h}
                           for pt in self.points],
                'reg_delta': self.reg_delta,
                'reg_factor': self.reg_factor}


def _singular_sum(spec, x, y, delta, skip=()):
    total = np.zeros(np.broadcast(x, y).shape)
    for j, point in enumerate(spec.points):
        if j in skip:
            continue
        dist = np.hypot(x - point.x[0], y - point.x[1])
        if delta > 0:
            dist = np.maximum(dist, delta)
        elif np.any(dist == 0):
            raise SingularPointError(point.x)
        total += point.h * dist ** -point.p
    return total


def evaluate_arrays(spec, x, y, delta=None, skip=()):
    """V at arrays of coordinates. `delta` defaults to spec.reg_delta
    (exact when that is None); points listed in `skip` are left out."""
    if delta is None:
        delta = spec.reg_delta or 0.
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return spec.background.evaluate(x, y) + \
        _singular_sum(spec, x, y, delta, skip)


def evaluate(spec, x):
    """V at a single point x = (x1, x2)."""
    return float(evaluate_arrays(spec, x[0], x[1]))


def evaluate_grid(spec, grid):
    """Fills V on the nodes of `grid`. Returns (values, reg_delta)."""
    delta = spec.resolve_delta(grid.spacing)
    xx, yy = grid.mesh()
    values = evaluate_arrays(spec, xx, yy, delta)
    if delta > 0:
        for point in spec.points:
            nearest = np.min(np.hypot(xx - point.x[0], yy - point.x[1]))
            if nearest < delta:
                logger.debug('node within reg_delta=%g of %r'
                             % (delta, point.x))
    return values, delta


def classify(spec):
    """Singularity selection: the largest power among the negative wells,
    then the deepest well with that power. Ties are all kept."""
    wells = spec.negative_wells
    if not wells:
        raise NoNegativeWellError('no singular point has h < 0')
    p = max(spec.points[j].p for j in wells)
    same_power = [j for j in wells if abs(spec.points[j].p - p) <= TIE_TOL]
    h0 = -min(spec.points[j].h for j in same_power)
    candidates = [j for j in same_power
                  if abs(spec.points[j].h + h0) <= TIE_TOL * max(1., h0)]
    return SelectionData(p, h0, tuple(candidates))


def essential_infimum(spec):
    """inf V: -inf as soon as one well is negative."""
    if spec.negative_wells:
        return float('-inf')
    return spec.background.infimum()


def selection_report(spec):
    """The `potential-check` payload."""
    selection = classify(spec)
    return {'p': selection.p, 'h0': selection.h0,
            'candidates': list(selection.candidates),
            'candidate_points': [list(spec.points[j].x)
                                 for j in selection.candidates],
            'negative_wells': spec.negative_wells,
            'essential_infimum': essential_infimum(spec),
            'potential': spec.describe()}


def _parse_delta(value):
    value = value.strip().lower()
    if value in ('auto', ''):
        return None
    try:
        return float(value)
    except ValueError:
        raise ConfigError('invalid reg_delta %r' % value,
                          field='potential.reg_delta')


def load_potential(settings):
    """Builds a PotentialSpec from flattened settings: one
    [point:<name>] section per singularity, in file order."""
    names = []
    for key in settings:
        if key.startswith('point:'):
            name = key.split('.', 1)[0]
            if name not in names:
                names.append(name)

    points = []
    for name in names:
        for option in ('x', 'p', 'h'):
            if '%s.%s' % (name, option) not in settings:
                raise ConfigError('missing option', field='%s.%s'
                                  % (name, option))
        try:
            x = [float(v) for v in
                 settings[name + '.x'].replace(',', ' ').split()]
            if len(x) != 2:
                raise ValueError()
        except ValueError:
            raise ConfigError('expected two coordinates', field=name + '.x')
        try:
            p = float(settings[name + '.p'])
            h = float(settings[name + '.h'])
        except ValueError:
            raise ConfigError('invalid number', field=name)
        points.append((x, p, h))

    delta = _parse_delta(str(settings.get('potential.reg_delta', 'auto')))
    try:
        factor = float(settings.get('potential.reg_factor', 0.5))
    except ValueError:
        raise ConfigError('invalid number', field='potential.reg_factor')
    try:
        return PotentialSpec(points, get_background(settings), delta, factor)
    except InvalidParameter as e:
        raise ConfigError(str(e), field='potential')
