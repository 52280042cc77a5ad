""" Constrained minimization on the unit L2 sphere.

Objectives are minimized by a normalized gradient flow: a descent step
followed by the projection u <- |v| / ||v||. Steps that raise the
objective are rejected and the step size halved.

Two schemes are available. `explicit` is the plain flow
v = u - tau H(u), stable for tau of order spacing^2. `preconditioned`
measures the gradient in the metric of (c - laplacian), projected onto
the tangent space of the sphere, and accelerates it with momentum that
restarts whenever it points uphill.
"""
import collections
import math

import numpy as np
from zope.interface import Attribute, Interface, implementer

from gpcollapse import logger
from gpcollapse.errors import InvalidParameter
from gpcollapse.field import (MIN_POINTS_PER_WIDTH, DirichletPreconditioner,
                              EnergyBreakdown, Field2D, breakdown_arrays,
                              centroid, dirichlet_energy, gaussian,
                              integrate, inner, interpolate, laplacian,
                              norm, normalize, project, spread,
                              townes_field)
from gpcollapse.potential import evaluate_arrays, evaluate_grid
from gpcollapse.util import panel_quadrature


EXPLICIT = 'explicit'
PRECONDITIONED = 'preconditioned'
SCHEMES = (EXPLICIT, PRECONDITIONED)

RECOVERY_STREAK = 10
MIN_STEP_RATIO = 1e-10
ROUNDOFF = 8 * np.finfo(float).eps

History = collections.namedtuple('History', ['energies', 'residuals',
                                             'taus', 'norm_defect'])

MinimizationResult = collections.namedtuple(
    'MinimizationResult', ['u', 'energy', 'mu', 'residual', 'iters',
                           'converged', 'history', 'reg_delta',
                           'warnings'])


class SolveOptions(object):
    """Options of one minimization.

    `init` is 'gaussian' (width init_scale), 'townes' (dilation
    init_scale) or a Field2D, resampled onto the grid when needed.
    `tau` defaults to 0.25 spacing^2 (explicit) or 0.5 (preconditioned).
    """
    def __init__(self, scheme=PRECONDITIONED, tau=None, max_iters=20000,
                 residual_tol=1e-6, momentum=True, init='gaussian',
                 init_center=(0., 0.), init_scale=1., log_every=500):
        if scheme not in SCHEMES:
            raise InvalidParameter('unknown scheme %r' % scheme)
        if tau is not None and not tau > 0:
            raise InvalidParameter('tau must be positive')
        if not residual_tol > 0:
            raise InvalidParameter('residual_tol must be positive')
        if int(max_iters) < 1:
            raise InvalidParameter('max_iters must be positive')
        if not isinstance(init, Field2D) and init not in ('gaussian',
                                                          'townes'):
            raise InvalidParameter('unknown init %r' % (init,))
        if not init_scale > 0:
            raise InvalidParameter('init_scale must be positive')
        self.scheme = scheme
        self.tau = tau
        self.max_iters = int(max_iters)
        self.residual_tol = float(residual_tol)
        self.momentum = momentum
        self.init = init
        self.init_center = tuple(float(c) for c in init_center)
        self.init_scale = float(init_scale)
        self.log_every = log_every

    def replace(self, **changes):
        options = dict(self.__dict__)
        options.update(changes)
        return SolveOptions(**options)

    def initial_tau(self, grid):
        if self.tau is not None:
            return self.tau
        if self.scheme == EXPLICIT:
            return 0.25 * grid.spacing ** 2
        return 0.5


class IObjective(Interface):
    """A functional minimized over normalized nonnegative fields."""

    grid = Attribute("The Grid2D the objective is discretized on")

    def breakdown(data):
        """Return a record with at least `total` and `scale` (the size
        of the terms that cancel in total)."""

    def gradient(data):
        """Return G with dObjective(u)[d] proportional to <G, d>; the
        Lagrange multiplier is <G, u>."""

    def constraints(data):
        """Gradients of the constraints held besides the mass, as a
        sequence of arrays; every step is taken orthogonal to them."""


@implementer(IObjective)
class GPEnergy(object):
    """int |grad u|^2 + int V u^2 - (a / 2) int u^4."""

    def __init__(self, grid, spec, a):
        if a < 0:
            raise InvalidParameter('a must be nonnegative, got %r' % a)
        self.grid = grid
        self.spec = spec
        self.a = float(a)
        self.potential, self.reg_delta = evaluate_grid(spec, grid)

    def breakdown(self, data):
        return breakdown_arrays(self.grid, data, self.potential, self.a)

    def value(self, data):
        return self.breakdown(data).total

    def gradient(self, data):
        return (-laplacian(self.grid, data) + self.potential * data -
                self.a * data ** 3)

    def constraints(self, data):
        return ()


_GNBreakdown = collections.namedtuple('GNBreakdown',
                                      ['kinetic', 'quartic', 'total'])


class GNBreakdown(_GNBreakdown):
    __slots__ = ()

    @property
    def scale(self):
        return abs(self.total)


@implementer(IObjective)
class GNQuotient(object):
    """int |grad u|^2 / (1/2 int u^4) on normalized fields, whose
    infimum is a*.

    The quotient is dilation invariant in the continuum but not on the
    grid, where shrinking the state lowers it down to 8 at a single
    node. With an `anchor` the second moment about it is held fixed to
    first order in every step.
    """

    def __init__(self, grid, anchor=None):
        self.grid = grid
        self.anchor = anchor
        self._r2 = None
        if anchor is not None:
            self._r2 = grid.radius(anchor) ** 2

    def breakdown(self, data):
        kinetic = dirichlet_energy(self.grid, data)
        quartic = integrate(self.grid, data ** 4)
        return GNBreakdown(kinetic, quartic, kinetic / (0.5 * quartic))

    def value(self, data):
        return self.breakdown(data).total

    def gradient(self, data):
        state = self.breakdown(data)
        return -laplacian(self.grid, data) - state.total * data ** 3

    def constraints(self, data):
        if self._r2 is None:
            return ()
        return (self._r2 * data,)


def _orthogonal(grid, target, images, normals):
    """target - sum_i c_i images[i], orthogonal to every normal."""
    gram = np.array([[inner(grid, image, normal) for image in images]
                     for normal in normals])
    rhs = np.array([inner(grid, target, normal) for normal in normals])
    coefficients = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    out = np.array(target)
    for c, image in zip(coefficients, images):
        out -= c * image
    return out


def _multiplier(grid, grad, normals):
    """Rayleigh multiplier <grad, u> and the norm of grad off the span of
    the constraint gradients (u first)."""
    mu = inner(grid, grad, normals[0])
    if len(normals) == 1:
        return mu, norm(grid, grad - mu * normals[0])
    return mu, norm(grid, _orthogonal(grid, grad, normals, normals))


def _normals(objective, u):
    return (u,) + tuple(objective.constraints(u))


def flow(objective, u0, opts):
    """Runs the normalized gradient flow of `objective` from u0.

    Returns (u, state, mu, residual, iters, converged, history) with u a
    bare array; accepted states never increase the objective.
    """
    grid = objective.grid
    tau0 = tau = opts.initial_tau(grid)
    u = project(grid, np.array(u0.data))
    defect = abs(norm(grid, u) - 1.)
    state = objective.breakdown(u)
    grad = objective.gradient(u)
    normals = _normals(objective, u)
    mu, residual = _multiplier(grid, grad, normals)

    precond = None
    if opts.scheme == PRECONDITIONED:
        precond = DirichletPreconditioner(grid, max(1., abs(mu)))

    energies, residuals, taus = [state.total], [residual], []
    previous = u
    streak = momentum_age = iters = 0
    converged = residual <= opts.residual_tol

    while not converged and iters < opts.max_iters:
        iters += 1
        if precond is None:
            if len(normals) == 1:
                direction = grad
            else:
                direction = _orthogonal(grid, grad, normals, normals)
        else:
            shift = max(1., abs(mu))
            if not 0.5 * precond.shift <= shift <= 2. * precond.shift:
                precond.reshift(shift)
            images = [precond(normal) for normal in normals]
            direction = _orthogonal(grid, precond(grad), images, normals)

        v = u - tau * direction
        if opts.momentum and precond is not None and momentum_age > 0:
            step = u - previous
            if inner(grid, direction, step) > 0:
                momentum_age = 0
            else:
                v += (momentum_age - 1.) / (momentum_age + 2.) * step
        momentum_age += 1

        candidate = project(grid, v)
        trial = objective.breakdown(candidate)
        allowance = ROUNDOFF * max(state.scale, trial.scale)
        if trial.total > state.total + allowance:
            tau *= 0.5
            streak = momentum_age = 0
            previous = u
            if tau < MIN_STEP_RATIO * tau0:
                logger.warning('step size collapsed after %d iterations'
                               % iters)
                break
            continue

        previous, u, state = u, candidate, trial
        defect = max(defect, abs(norm(grid, u) - 1.))
        grad = objective.gradient(u)
        normals = _normals(objective, u)
        mu, residual = _multiplier(grid, grad, normals)
        energies.append(state.total)
        residuals.append(residual)
        taus.append(tau)
        converged = residual <= opts.residual_tol

        streak += 1
        if streak >= RECOVERY_STREAK and tau < tau0:
            tau = min(2. * tau, tau0)
            streak = 0

        if opts.log_every and iters % opts.log_every == 0:
            logger.debug('iteration %d: objective=%.12g residual=%.3e '
                         'tau=%.3g' % (iters, state.total, residual, tau))

    history = History(energies, residuals, taus, defect)
    return u, state, mu, residual, iters, converged, history


def initial_field(grid, opts, profile=None):
    if isinstance(opts.init, Field2D):
        return normalize(interpolate(opts.init, grid))
    if opts.init == 'townes':
        if profile is None:
            from gpcollapse.radial import default_profile
            profile = default_profile()
        return townes_field(grid, profile, opts.init_center,
                            opts.init_scale)
    return gaussian(grid, opts.init_center, opts.init_scale)


def _astar(profile, astar):
    if astar is not None:
        return astar
    from gpcollapse.radial import critical_constants, default_profile
    return critical_constants(profile or default_profile()).astar


def minimize(grid, spec, a, opts=None, profile=None, astar=None):
    """Ground state of the GP energy at interaction a on `grid`.

    a must stay below the computed a*, where the energy is unbounded
    below. Non-convergence is reported, never raised.
    """
    opts = opts or SolveOptions()
    astar = _astar(profile, astar)
    if a < 0:
        raise InvalidParameter('a must be nonnegative, got %r' % a)
    if a >= astar:
        raise InvalidParameter('a=%r is not below a*=%r: the energy is '
                               'unbounded below' % (a, astar))

    objective = GPEnergy(grid, spec, a)
    u0 = initial_field(grid, opts, profile)
    start = objective.value(u0.data)
    u, state, mu, residual, iters, converged, history = flow(objective, u0,
                                                             opts)
    warnings = []
    if not converged:
        warnings.append('not converged: residual %.3e > %.3e after %d '
                        'iterations' % (residual, opts.residual_tol, iters))
        logger.warning('minimize a=%r: %s' % (a, warnings[-1]))
    if state.warning:
        warnings.append('boundary ring holds mass %.3e' % state.boundary_mass)
        logger.warning('minimize a=%r: %s' % (a, warnings[-1]))
    logger.info('minimize a=%r: E=%.10g (start %.6g) mu=%.6g residual=%.2e '
                'in %d iterations' % (a, state.total, start, mu, residual,
                                      iters))
    return MinimizationResult(Field2D(grid, u, normalized=True), state, mu,
                              residual, iters, converged, history,
                              objective.reg_delta, warnings)


def gn_minimize(grid, opts=None):
    """Minimizes the discrete GN quotient; the minimum estimates a*.

    The second moment of the initial field about its centroid is held,
    so the state keeps its starting width. A state that still ends
    narrower than MIN_POINTS_PER_WIDTH spacings is reported unconverged.
    """
    opts = opts or SolveOptions(residual_tol=1e-5)
    u0 = initial_field(grid, opts)
    objective = GNQuotient(grid, centroid(u0))
    u, state, mu, residual, iters, converged, history = flow(objective, u0,
                                                             opts)
    field = Field2D(grid, u, normalized=True)
    warnings = []
    if not converged:
        warnings.append('not converged: residual %.3e after %d iterations'
                        % (residual, iters))
        logger.warning('gn_minimize: %s' % warnings[-1])
    width = spread(field, objective.anchor)
    if width < MIN_POINTS_PER_WIDTH * grid.spacing:
        converged = False
        warnings.append('state width %.3g is below %d spacings'
                        % (width, MIN_POINTS_PER_WIDTH))
        logger.warning('gn_minimize: %s' % warnings[-1])
    logger.info('gn_minimize: ratio=%.10g width=%.4g in %d iterations'
                % (state.total, width, iters))
    return MinimizationResult(field, state, mu, residual, iters, converged,
                              history, None, warnings)


# trial functions

def cutoff(r, eta):
    """1 on r <= eta, 0 on r >= 2 eta, quintic smoothstep between."""
    s = np.clip((np.asarray(r, dtype=float) - eta) / eta, 0., 1.)
    return 1. - s ** 3 * (10. - 15. * s + 6. * s ** 2)


def cutoff_derivative(r, eta):
    s = np.clip((np.asarray(r, dtype=float) - eta) / eta, 0., 1.)
    return -30. * s ** 2 * (1. - s) ** 2 / eta


def default_cutoff(spec, x0):
    """eta = 1, shrunk to keep the trial support clear of other points."""
    others = [math.hypot(pt.x[0] - x0[0], pt.x[1] - x0[1])
              for pt in spec.points if tuple(pt.x) != tuple(x0)]
    return min([1.] + [d / 4. for d in others])


_THETA_NODES = 64


def trial_energy(ell, x0, spec, a, profile, cutoff_eta=None):
    """GP energy of u(x) = A phi(x - x0) ell Q0(ell (x - x0)).

    All integrals are radial in t = ell |x - x0|. A singular point at x0
    is integrated exactly in t; the rest of the potential is averaged
    over a polar grid around x0.
    """
    if not ell > 0:
        raise InvalidParameter('ell must be positive, got %r' % ell)
    x0 = (float(x0[0]), float(x0[1]))
    eta = cutoff_eta if cutoff_eta is not None else default_cutoff(spec, x0)
    if not eta > 0:
        raise InvalidParameter('cutoff_eta must be positive')

    top = min(2. * eta * ell, profile.rmax)
    delta = spec.reg_delta or 0.
    breaks = [profile.nodes[profile.nodes < top], np.linspace(0., top, 65),
              [eta * ell]]
    if 0 < delta * ell < top:
        breaks.append([delta * ell])
    breaks = np.unique(np.concatenate(breaks))
    breaks = breaks[breaks <= top]

    def phi(t):
        return cutoff(t / ell, eta)

    mass = 2 * math.pi * panel_quadrature(
        breaks, lambda t: phi(t) ** 2 * profile.normalized(t) ** 2 * t)
    kinetic = 2 * math.pi * panel_quadrature(
        breaks, lambda t: (cutoff_derivative(t / ell, eta) *
                           profile.normalized(t) +
                           ell * phi(t) *
                           profile.normalized_derivative(t)) ** 2 * t) / mass
    quartic = 2 * math.pi * ell ** 2 * panel_quadrature(
        breaks, lambda t: phi(t) ** 4 * profile.normalized(t) ** 4 * t) \
        / mass ** 2

    centred = [j for j, pt in enumerate(spec.points) if pt.x == x0]
    radial = 0.
    for j in centred:
        pt = spec.points[j]
        radial += pt.h * panel_quadrature(
            breaks, lambda t: np.maximum(t / ell, delta) ** -pt.p *
            phi(t) ** 2 * profile.normalized(t) ** 2 * t)
    radial *= 2 * math.pi / mass

    theta = 2 * math.pi * np.arange(_THETA_NODES) / _THETA_NODES

    def polar(t):
        r = t[:, None] / ell
        xs = x0[0] + r * np.cos(theta)[None, :]
        ys = x0[1] + r * np.sin(theta)[None, :]
        v = evaluate_arrays(spec, xs, ys, delta=delta, skip=centred)
        return v.mean(axis=1) * phi(t) ** 2 * profile.normalized(t) ** 2 * t

    rest = 2 * math.pi * panel_quadrature(breaks, polar) / mass
    return kinetic + radial + rest - 0.5 * a * quartic


def trial_field(grid, ell, x0, profile, cutoff_eta=1.):
    """The trial function sampled on `grid`, normalized discretely."""
    r = grid.radius(x0)
    data = cutoff(r, cutoff_eta) * ell * profile.normalized(ell * r)
    return normalize(Field2D(grid, data))


def trial_schedule(beta, eps, count=9):
    """ell = lambda / eps for lambda geometric in [beta / 2, 2 beta]."""
    return beta * 2. ** np.linspace(-1., 1., count) / eps


def optimal_trial(ells, x0, spec, a, profile, cutoff_eta=None):
    """(ell, value) minimizing trial_energy over `ells`."""
    values = [trial_energy(ell, x0, spec, a, profile, cutoff_eta)
              for ell in ells]
    best = int(np.argmin(values))
    return ells[best], values[best]


def discrete_trial_bound(grid, ells, x0, spec, a, profile, cutoff_eta=None):
    """Lowest discrete energy of the sampled trial functions on `grid`."""
    eta = cutoff_eta if cutoff_eta is not None else default_cutoff(spec, x0)
    potential, _ = evaluate_grid(spec, grid)
    best = None
    for ell in ells:
        u = trial_field(grid, ell, x0, profile, eta)
        total = breakdown_arrays(grid, u.data, potential, a).total
        if best is None or total < best[1]:
            best = (ell, total)
    return best


__all__ = ['EnergyBreakdown', 'GNBreakdown', 'GNQuotient', 'GPEnergy',
           'IObjective', 'MinimizationResult', 'SolveOptions', 'flow',
           'gn_minimize', 'minimize', 'optimal_trial', 'trial_energy',
           'trial_field', 'trial_schedule']
