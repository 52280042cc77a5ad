""" Radial Townes profile.

The ground state Q of -Q'' - Q'/r + Q - Q^3 = 0 is computed by shooting
on Q(0): bisection separates the initial values whose solution crosses
zero from those whose solution turns back up, then the forward solution
is matched at an interior radius to a backward solution started on the
decaying Bessel mode K0, which gives the exterior of the profile.
"""
import collections
import functools
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly, make_interp_spline
from scipy.optimize import root
from scipy.special import k0, k1

from gpcollapse import logger
from gpcollapse.errors import (BracketError, ConvergenceError,
                               InvalidParameter, QuadratureInconsistency)
from gpcollapse.util import panel_quadrature


UNDERSHOOT = 'undershoot'     # Q crosses zero
OVERSHOOT = 'overshoot'       # Q' turns positive while Q > 0

DEFAULT_BRACKET = (2.0, 2.5)
DEFAULT_RMAX = 30.
DEFAULT_TOL = 1e-12
DEFAULT_SPACING = 0.01
MATCH_RADIUS = 6.
MATCH_TOL = 1e-9
MAX_BISECTIONS = 200
IDENTITY_TOL = 1e-5
DECAY_FLOOR = 1e-10

_RTOL = 1e-12
_START = 1e-4
_GEOMETRIC_PANELS = 40


CriticalConstants = collections.namedtuple(
    'CriticalConstants', ['astar', 'mass', 'kinetic', 'quartic'])


def _rhs(r, y):
    q, dq = y
    return [dq, -dq / r + q - q ** 3]


def _crossing(r, y):
    return y[0]

_crossing.terminal = True
_crossing.direction = -1


def _turning(r, y):
    return y[1]

_turning.terminal = True
_turning.direction = 1


def _series_start(q0, r=_START):
    """Steps off the removable singularity at r = 0 with
    Q = q0 + (q0 - q0^3) r^2 / 4 + O(r^4)."""
    c = (q0 - q0 ** 3) / 4.
    return [q0 + c * r ** 2, 2. * c * r]


def _second_derivs(nodes, values, derivs):
    d2 = np.empty_like(values)
    d2[0] = (values[0] - values[0] ** 3) / 2.
    r = nodes[1:]
    d2[1:] = -derivs[1:] / r + values[1:] - values[1:] ** 3
    return d2


class RadialProfile(object):
    """Sampled Townes soliton Q(r) with its derivative.

    Off-mesh values come from the quintic Hermite interpolant built on
    (Q, Q', Q'') at the nodes; Q is taken as zero beyond rmax.
    """
    def __init__(self, nodes, values, derivs, q0, rmax):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        derivs = np.asarray(derivs, dtype=float)
        if not (nodes.shape == values.shape == derivs.shape):
            raise InvalidParameter('nodes, values and derivs differ in shape')
        if nodes[0] != 0 or np.any(np.diff(nodes) <= 0):
            raise InvalidParameter('nodes must increase strictly from 0')
        if q0 <= 0 or values[0] != q0 or derivs[0] != 0:
            raise InvalidParameter('profile is not regular at the origin')
        if np.any(np.diff(values) >= 0):
            raise InvalidParameter('profile is not strictly decreasing')
        if values[-1] >= DECAY_FLOOR * q0:
            raise InvalidParameter('profile has not decayed at rmax')
        self.nodes = nodes
        self.values = values
        self.derivs = derivs
        self.q0 = float(q0)
        self.rmax = float(rmax)
        self._poly = None
        self._mass = None

    def __len__(self):
        return len(self.nodes)

    @property
    def interpolant(self):
        if self._poly is None:
            d2 = _second_derivs(self.nodes, self.values, self.derivs)
            data = np.column_stack([self.values, self.derivs, d2])
            self._poly = BPoly.from_derivatives(self.nodes, data,
                                                extrapolate=False)
        return self._poly

    def _evaluate(self, r, nu):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.zeros_like(r)
        inside = r <= self.nodes[-1]
        if np.any(inside):
            out[inside] = self.interpolant(r[inside], nu)
        return out

    def __call__(self, r):
        return self._evaluate(r, 0)

    def derivative(self, r):
        return self._evaluate(r, 1)

    @property
    def mass(self):
        if self._mass is None:
            self._mass = 2 * math.pi * panel_quadrature(
                self.nodes, lambda r: self(r) ** 2 * r)
        return self._mass

    def normalized(self, r):
        """Q0 = Q / ||Q||."""
        return self(r) / math.sqrt(self.mass)

    def normalized_derivative(self, r):
        return self.derivative(r) / math.sqrt(self.mass)

    def scaled(self, factor):
        """Returns the profile of factor * Q (no longer a solution)."""
        return RadialProfile(self.nodes, factor * self.values,
                             factor * self.derivs, factor * self.q0,
                             self.rmax)


def _shoot(q0, rmax, events=True, dense=False):
    sol = solve_ivp(_rhs, (_START, rmax), _series_start(q0),
                    method='DOP853', rtol=_RTOL, atol=1e-14,
                    events=(_crossing, _turning) if events else None,
                    dense_output=dense)
    if not sol.success:
        raise ConvergenceError('radial integration failed at q0=%r: %s'
                               % (q0, sol.message))
    return sol


def classify_shot(q0, rmax=DEFAULT_RMAX):
    """Tells whether the solution started at Q(0) = q0 crosses zero
    (UNDERSHOOT) or turns back up at positive Q (OVERSHOOT)."""
    sol = _shoot(q0, rmax)
    if sol.t_events[0].size:
        return UNDERSHOOT
    if sol.t_events[1].size:
        return OVERSHOOT
    q, dq = sol.y[:, -1]
    # the growing mode has Q' + Q > 0
    return OVERSHOOT if q + dq > 0 else UNDERSHOOT


def _backward(amplitude, r_match, rmax, dense=False):
    y0 = [amplitude * k0(rmax), -amplitude * k1(rmax)]
    atol = 1e-3 * _RTOL * abs(y0[0])
    sol = solve_ivp(_rhs, (rmax, r_match), y0, method='DOP853',
                    rtol=_RTOL, atol=atol, dense_output=dense)
    if not sol.success:
        raise ConvergenceError('exterior integration failed: %s'
                               % sol.message)
    return sol


def _match(q0, r_match, rmax):
    """Adjusts (q0, A) so that the forward solution and the backward
    decaying solution agree in value and slope at r_match."""
    forward = _shoot(q0, r_match, events=False)
    qm = forward.y[0, -1]
    scale = abs(qm)

    def mismatch(x):
        fwd = _shoot(x[0], r_match, events=False).y[:, -1]
        bwd = _backward(x[1], r_match, rmax).y[:, -1]
        return (fwd - bwd) / scale

    guess = [q0, qm / k0(r_match)]
    sol = root(mismatch, guess, method='hybr', options={'xtol': 1e-14})
    # hybr reports lack of progress once it sits at roundoff
    if not sol.success and np.max(np.abs(sol.fun)) > MATCH_TOL:
        raise ConvergenceError('matching at r=%r failed: %s'
                               % (r_match, sol.message))
    return sol.x


def _mesh(r_match, rmax, spacing):
    inner = np.arange(0., r_match, spacing)
    inner = inner[inner < r_match - 0.5 * spacing]
    outer = np.arange(r_match, rmax, 2 * spacing)
    outer = outer[outer < rmax - spacing]
    return inner, np.append(outer, rmax)


def solve_townes(q0_bracket=DEFAULT_BRACKET, rmax=DEFAULT_RMAX,
                 tol=DEFAULT_TOL, spacing=DEFAULT_SPACING,
                 r_match=MATCH_RADIUS):
    """Computes the positive radial solution of
    Q'' + Q'/r - Q + Q^3 = 0, Q'(0) = 0, decaying at infinity.
    """
    lo, hi = (float(v) for v in q0_bracket)
    if not 0 < lo < hi:
        raise InvalidParameter('invalid bracket %r' % (q0_bracket,))
    if rmax < 20:
        raise InvalidParameter('rmax must be at least 20')
    if tol <= 0:
        raise InvalidParameter('tol must be positive')
    if not 0 < spacing < 1:
        raise InvalidParameter('spacing must lie in (0, 1)')

    kind_lo = classify_shot(lo, rmax)
    kind_hi = classify_shot(hi, rmax)
    if kind_lo == kind_hi:
        raise BracketError(lo, hi, kind_lo)

    steps = 0
    while hi - lo >= tol:
        if steps >= MAX_BISECTIONS:
            raise ConvergenceError('bisection did not converge in %d steps'
                                   % MAX_BISECTIONS)
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if classify_shot(mid, rmax) == kind_lo:
            lo = mid
        else:
            hi = mid
        steps += 1

    q0 = 0.5 * (lo + hi)
    logger.debug('townes bisection: q0=%.15f after %d steps' % (q0, steps))

    while True:
        q0, amplitude = _match(q0, r_match, rmax)
        inner, outer = _mesh(r_match, rmax, spacing)
        forward = _shoot(q0, r_match, events=False, dense=True)
        backward = _backward(amplitude, r_match, rmax, dense=True)
        y_in = forward.sol(inner[1:])
        y_out = backward.sol(outer)
        if y_out[0, -1] < DECAY_FLOOR * q0:
            break
        rmax += 10.
        logger.info('townes tail not decayed, extending rmax to %r' % rmax)

    nodes = np.concatenate([inner, outer])
    values = np.concatenate([[q0], y_in[0], y_out[0]])
    derivs = np.concatenate([[0.], y_in[1], y_out[1]])
    profile = RadialProfile(nodes, values, derivs, q0, rmax)
    logger.info('townes profile: q0=%.12f, %d nodes, rmax=%r'
                % (q0, len(nodes), rmax))
    return profile


@functools.lru_cache(maxsize=4)
def default_profile(spacing=DEFAULT_SPACING):
    """The profile every command shares unless told otherwise."""
    return solve_townes(spacing=spacing)


def ode_residual(profile):
    """Max-norm residual of the radial equation at interior nodes, with
    Q'' taken from an independent quintic spline through Q'."""
    nodes, values, derivs = profile.nodes, profile.values, profile.derivs
    spline = make_interp_spline(nodes, derivs, k=5)
    d2 = spline.derivative()(nodes)
    inner = slice(3, -3)
    res = (d2[inner] + derivs[inner] / nodes[inner] - values[inner]
           + values[inner] ** 3)
    return float(np.max(np.abs(res)))


def critical_constants(profile, identity_tol=IDENTITY_TOL):
    """Computes a* together with the three Townes integrals, which must
    agree: mass = kinetic = quartic / 2."""
    two_pi = 2 * math.pi
    mass = two_pi * panel_quadrature(
        profile.nodes, lambda r: profile(r) ** 2 * r)
    kinetic = two_pi * panel_quadrature(
        profile.nodes, lambda r: profile.derivative(r) ** 2 * r)
    quartic = two_pi * panel_quadrature(
        profile.nodes, lambda r: profile(r) ** 4 * r)

    if (abs(mass - kinetic) > identity_tol * mass or
            abs(mass - quartic / 2.) > identity_tol * mass):
        raise QuadratureInconsistency(mass, kinetic, quartic)

    return CriticalConstants(astar=mass, mass=mass, kinetic=kinetic,
                             quartic=quartic)


def square_expansion(q0):
    """(a, b) with Q(r)^2 = a + b r^2 + O(r^4) for Q(0) = q0."""
    return q0 ** 2, 0.5 * q0 * (q0 - q0 ** 3)


def singular_moment(profile, p):
    """I_p = int |Q0(x)|^2 / |x|^p dx for 0 < p < 2.

    Near the origin the integrand behaves like Q0(0)^2 r^(1-p); the
    first mesh cell is split geometrically and the innermost piece is
    integrated exactly against the two-term expansion of Q^2.
    """
    p = float(p)
    if not 0 < p < 2:
        raise InvalidParameter('p must lie in (0, 2), got %r' % p)

    first = profile.nodes[1]
    innermost = first * 2. ** -_GEOMETRIC_PANELS
    breaks = np.concatenate([
        first * 2. ** -np.arange(_GEOMETRIC_PANELS, 0, -1),
        profile.nodes[1:]])

    a, b = square_expansion(profile.q0)
    local = (a * innermost ** (2 - p) / (2 - p) +
             b * innermost ** (4 - p) / (4 - p))
    rest = panel_quadrature(breaks, lambda r: profile(r) ** 2 * r ** (1 - p))
    return 2 * math.pi * (local + rest) / profile.mass


def singular_moment_table(profile, powers):
    return dict((p, singular_moment(profile, p)) for p in powers)


def positive_moment(profile, p):
    """int |x|^p |Q(x)|^2 dx, the weight of trapping potentials."""
    if p <= 0:
        raise InvalidParameter('p must be positive, got %r' % p)
    return 2 * math.pi * panel_quadrature(
        profile.nodes, lambda r: profile(r) ** 2 * r ** (1 + p))


def write_profile(path, profile):
    """CSV with columns r, Q, Qprime (17 significant digits)."""
    rows = np.column_stack([profile.nodes, profile.values, profile.derivs])
    np.savetxt(path, rows, fmt='%.17g', delimiter=',',
               header='r,Q,Qprime', comments='')


def read_profile(path):
    try:
        rows = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    except (IOError, OSError, ValueError) as e:
        raise InvalidParameter('cannot read profile %r: %s' % (path, e))
    if rows.shape[1] != 3:
        raise InvalidParameter('%r does not hold r,Q,Qprime rows' % path)
    nodes, values, derivs = rows.T
    return RadialProfile(nodes, values, derivs, values[0], nodes[-1])
