""" Closed-form collapse constants.

For a dominant singularity of power p and depth h0 the rescaled
minimizers converge to beta * Q0(beta * x) with

    beta = (a* h0 p I_p / 2) ** (1 / (2 - p))

and E(a) (a* - a) ** (p / (2 - p)) tends to the minimum over lambda of
lambda^2 / a* - lambda^p h0 I_p. The minimum is evaluated both by the
formula and by a numerical search, which keeps the two honest.
"""
import collections
import math

from scipy.optimize import brentq, golden

from gpcollapse.errors import ConvergenceError, InvalidParameter


_CollapseConstants = collections.namedtuple(
    'CollapseConstants', ['p', 'h0', 'astar', 'Ip'])


class CollapseConstants(_CollapseConstants):
    __slots__ = ()

    def __new__(cls, p, h0, astar, Ip):
        p, h0, astar, Ip = float(p), float(h0), float(astar), float(Ip)
        if not 0 < p < 2:
            raise InvalidParameter('p must lie in (0, 2), got %r' % p)
        for name, value in (('h0', h0), ('astar', astar), ('Ip', Ip)):
            if not value > 0 or math.isinf(value):
                raise InvalidParameter('%s must be positive, got %r'
                                       % (name, value))
        return _CollapseConstants.__new__(cls, p, h0, astar, Ip)

    @property
    def gap(self):
        return 2. - self.p

    @property
    def depth(self):
        """h0 * I_p, the only way h0 and I_p enter the formulas."""
        return self.h0 * self.Ip


LambdaMinimum = collections.namedtuple('LambdaMinimum',
                                       ['lambda_star', 'value'])


def beta_value(c):
    return (c.astar * c.depth * c.p / 2.) ** (1. / c.gap)


def lambda_objective(lam, c):
    if not lam > 0:
        raise InvalidParameter('lambda must be positive, got %r' % lam)
    return lam ** 2 / c.astar - lam ** c.p * c.depth


def _stationarity(lam, c):
    return 2. * lam / c.astar - c.p * c.depth * lam ** (c.p - 1.)


def minimize_lambda(c, tol=1e-10):
    """Minimizes lambda_objective numerically.

    Golden-section search on [beta/10, 10 beta], then a root polish on
    the stationarity condition 2 lambda / a* = p h0 I_p lambda^(p-1).
    """
    if not tol > 0:
        raise InvalidParameter('tol must be positive, got %r' % tol)
    guess = beta_value(c)
    lo, hi = guess / 10., guess * 10.

    lam = golden(lambda x: lambda_objective(x, c), brack=(lo, guess, hi),
                 tol=min(tol, 1e-8))
    if not lo <= lam <= hi:
        raise ConvergenceError('golden section left [%r, %r]' % (lo, hi))

    left, right = lam / 1.01, lam * 1.01
    if _stationarity(left, c) * _stationarity(right, c) > 0:
        left, right = lo, hi
    try:
        lam, info = brentq(_stationarity, left, right, args=(c,),
                           xtol=left * 1e-14, full_output=True)
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError('stationarity polish failed: %s' % e)
    if not info.converged:
        raise ConvergenceError('stationarity polish did not converge')
    return LambdaMinimum(lam, lambda_objective(lam, c))


def energy_limit(c):
    e = c.gap
    half = c.p / 2.
    return (c.depth ** (2. / e) * c.astar ** (c.p / e) *
            (half ** (2. / e) - half ** (c.p / e)))


def eps_a(astar, a, p):
    """Blow-up length scale (a* - a) ** (1 / (2 - p))."""
    if not a < astar:
        raise InvalidParameter('a=%r is not below a*=%r' % (a, astar))
    if not 0 < p < 2:
        raise InvalidParameter('p must lie in (0, 2), got %r' % p)
    return (astar - a) ** (1. / (2. - p))


def scaled_energy(energy, eps, p):
    return energy * eps ** p


def kinetic_scale(eps, beta):
    """Expected size of the kinetic energy, (beta / eps)^2."""
    return (beta / eps) ** 2


def trapped_beta(p, h, moment):
    """Limiting dilation for V = h |x - x0|^p with p > 0 (trapping
    case), where moment = int |x|^p |Q|^2."""
    if not p > 0 or not h > 0 or not moment > 0:
        raise InvalidParameter('trapping constants must be positive')
    return (p * h * moment / 2.) ** (1. / (p + 2.))


def trapped_eps(astar, a, p):
    if not a < astar:
        raise InvalidParameter('a=%r is not below a*=%r' % (a, astar))
    return (astar - a) ** (1. / (p + 2.))


def collapse_constants(profile, selection):
    """CollapseConstants of a classified potential, with a* and I_p
    computed from `profile`."""
    # late import, radial pulls in the ODE machinery
    from gpcollapse.radial import critical_constants, singular_moment
    astar = critical_constants(profile).astar
    return CollapseConstants(selection.p, selection.h0, astar,
                             singular_moment(profile, selection.p))


def summary(c):
    """The `constants` command payload."""
    beta = beta_value(c)
    found = minimize_lambda(c)
    return {'p': c.p, 'h0': c.h0, 'astar': c.astar, 'Ip': c.Ip,
            'beta': beta,
            'energy_limit': energy_limit(c),
            'lambda_star': found.lambda_star,
            'objective_at_beta': lambda_objective(beta, c)}
