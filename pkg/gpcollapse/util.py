import os

import numpy as np
import simplejson as json
from numpy.polynomial.legendre import leggauss
from zope.dottedname.resolve import resolve

from gpcollapse.errors import ConfigError


_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0', '')


def resolve_name(name):
    """Resolves a dotted name ('package.module.Class' or
    'package.module:Class') to the object it names.
    """
    try:
        return resolve(name.replace(':', '.'))
    except (ImportError, AttributeError, ValueError) as e:
        raise ConfigError('cannot resolve %r: %s' % (name, e))


def asbool(value):
    if isinstance(value, bool):
        return value
    value = str(value).strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError('%r is not a boolean' % value)


def parse_floats(value, count=None):
    """Parses '1.0, 2.0' (or '1.0 2.0') into a tuple of floats."""
    if isinstance(value, (tuple, list, np.ndarray)):
        items = [float(v) for v in value]
    else:
        items = [float(v) for v in value.replace(',', ' ').split()]
    if count is not None and len(items) != count:
        raise ValueError('expected %d numbers, got %r' % (count, value))
    return tuple(items)


def parse_schedule(value):
    """Parses an interaction schedule given as fractions of a*.

    Either an explicit list ('0.90, 0.95, 0.98') or a geometric
    approach to one, 'geometric:<start>:<stop>:<count>', in which the
    gaps 1 - a/a* shrink geometrically from 1 - start to 1 - stop.
    """
    value = value.strip()
    if value.startswith('geometric:'):
        parts = value.split(':')[1:]
        if len(parts) != 3:
            raise ValueError('geometric schedule needs start:stop:count')
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError('geometric schedule needs a positive count')
        gaps = np.geomspace(1. - start, 1. - stop, count)
        fractions = tuple(1. - gaps)
    else:
        fractions = parse_floats(value)
    if not fractions:
        raise ValueError('empty schedule')
    if any(f <= 0 or f >= 1 for f in fractions):
        raise ValueError('schedule fractions must lie in (0, 1)')
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise ValueError('schedule must be strictly increasing')
    return fractions


def panel_quadrature(breaks, func, order=10):
    """Composite Gauss-Legendre rule over the panels given by `breaks`.

    `func` is called once with every quadrature node and must be
    vectorised.
    """
    breaks = np.asarray(breaks, dtype=float)
    nodes, weights = leggauss(order)
    left, right = breaks[:-1], breaks[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return float(np.sum(w * func(x)))


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, '_asdict'):
        return obj._asdict()
    raise TypeError('%r is not JSON serializable' % obj)


def dumps(data, indent=2):
    return json.dumps(data, default=_jsonable, indent=indent,
                      sort_keys=True, ignore_nan=True)


def dump_json(data, path):
    dirname = os.path.dirname(path)
    if dirname and not os.path.exists(dirname):
        os.makedirs(dirname)
    with open(path, 'w') as f:
        f.write(dumps(data))
        f.write('\n')
