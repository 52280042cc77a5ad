""" Collapse sweeps as a approaches a*.

Each interaction strength is solved once per negative well, starting
from the Townes profile at the expected scale or from the previous
solution dilated to it, and the lowest energy is kept. The winner is
rescaled about its concentration point and compared with
beta * Q0(beta * x).
"""
import collections
import csv
import math

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.optimize import minimize_scalar

from gpcollapse import logger
from gpcollapse.closedform import (beta_value, collapse_constants,
                                   energy_limit, eps_a, kinetic_scale,
                                   scaled_energy)
from gpcollapse.errors import (InvalidParameter, NumericError,
                               ResolutionError)
from gpcollapse.field import (MIN_POINTS_PER_WIDTH, Field2D, Grid2D,
                              h1_l2_distance, integrate, normalize,
                              rescale_extract, spread, townes_field)
from gpcollapse.minimizer import (SolveOptions, discrete_trial_bound,
                                  minimize, optimal_trial, trial_schedule)
from gpcollapse.potential import classify


DEFAULT_FRACTIONS = (0.90, 0.95, 0.98, 0.99, 0.995)
COLLAPSED_FRACTION = 0.5
OUT_MARGIN = 0.9
OUT_NODES = 513
# relative kinetic deficit of the 5-point stencil on a Townes state,
# per (spacing / width)^2
STENCIL_DEFICIT = 0.19
# states narrower than this share of the Townes spread have left the
# Townes scale for the grid scale
GRID_COLLAPSE_RATIO = 0.25
SELECTION_CHECK_FRACTION = 0.6

RECORD_FIELDS = ['a', 'fraction', 'eps_a', 'energy', 'scaled_energy',
                 'chosen_point', 'mass_fraction', 'collapsed', 'l2_err',
                 'h1_err', 'fitted_beta', 'kinetic_scaled', 'width',
                 'trial_bound', 'trial_energy', 'residual', 'converged',
                 'resolved', 'reg_delta', 'runs']

SweepRecord = collections.namedtuple('SweepRecord', RECORD_FIELDS)

Concentration = collections.namedtuple('Concentration',
                                       ['index', 'mass_fraction',
                                        'collapsed'])

PowerLawFit = collections.namedtuple('PowerLawFit',
                                     ['exponent', 'prefactor', 'r2',
                                      'window'])


class GridPolicy(object):
    """Chooses the grid a state of a given width is solved on.

    The base grid is used while it puts enough nodes across the state:
    `points_per_width`, and near a* as many as keep the stencil's
    dilation bias of the state below `dilation_tol`. Otherwise a window
    of half-width window_factor * width centred on the well, with an odd
    node count (at most max_n) so the well is a node. A state narrower
    than MIN_POINTS_PER_WIDTH spacings of its grid is refused.
    """
    def __init__(self, half_width=8., n=256, window_factor=6.,
                 points_per_width=8., center=(0., 0.), window_points=32.,
                 dilation_tol=0.005, max_n=1537):
        if not window_factor > 1:
            raise InvalidParameter('window_factor must exceed 1')
        if not points_per_width >= MIN_POINTS_PER_WIDTH:
            raise InvalidParameter('points_per_width must be at least %d'
                                   % MIN_POINTS_PER_WIDTH)
        if not window_points >= MIN_POINTS_PER_WIDTH:
            raise InvalidParameter('window_points must be at least %d'
                                   % MIN_POINTS_PER_WIDTH)
        if not dilation_tol > 0:
            raise InvalidParameter('dilation_tol must be positive')
        self.base = Grid2D(half_width, n, center)
        self.window_factor = float(window_factor)
        self.points_per_width = float(points_per_width)
        self.window_points = float(window_points)
        self.dilation_tol = float(dilation_tol)
        self.max_n = int(max_n)

    def points_for(self, gap=None):
        """Nodes per width needed at relative distance gap = 1 - a/a*.

        The stencil lowers the kinetic energy of a state of width w by
        about STENCIL_DEFICIT (h / w)^2, which dilates the minimizer by
        twice that over gap.
        """
        if gap is None:
            return self.points_per_width
        return max(self.points_per_width, math.sqrt(
            2. * STENCIL_DEFICIT / (gap * self.dilation_tol)))

    def grid_for(self, width, well, gap=None):
        points = self.points_for(gap)
        grid = self.base
        if width < points * grid.spacing:
            half = min(self.window_factor * width, self.base.half_width)
            n = int(math.ceil(2. * half / width *
                              max(points, self.window_points))) + 1
            n = min(max(n, self.base.n), self.max_n)
            n -= 1 - n % 2
            grid = Grid2D(half, n, well)
        if width < MIN_POINTS_PER_WIDTH * grid.spacing:
            raise ResolutionError('state width %.3g is below %d spacings '
                                  '(%.3g)' % (width, MIN_POINTS_PER_WIDTH,
                                              grid.spacing))
        return grid


def _dilate(u, well, factor, grid):
    """Samples x -> u(well + factor * (x - well)) on `grid`, zero outside
    u's domain, normalized."""
    interp = RegularGridInterpolator((u.grid.x, u.grid.y), u.data,
                                     method='linear', bounds_error=False,
                                     fill_value=0.)
    xx, yy = grid.mesh()
    px = well[0] + factor * (xx - well[0])
    py = well[1] + factor * (yy - well[1])
    data = interp(np.stack([px.ravel(), py.ravel()], axis=-1))
    data = np.maximum(data.reshape(grid.shape), 0.)
    return normalize(Field2D(grid, data))


def locate_concentration(u, spec):
    """The negative well holding the most mass within half the minimal
    inter-point distance; index -1 when there is no negative well."""
    wells = spec.negative_wells
    if not wells:
        return Concentration(-1, 0., False)
    radius = 0.5 * spec.min_separation()
    best = None
    for j in wells:
        dist = u.grid.radius(spec.points[j].x)
        mass = integrate(u.grid, np.where(dist <= radius, u.data ** 2, 0.))
        if best is None or mass > best[1]:
            best = (j, mass)
    index, fraction = best
    return Concentration(index, fraction, fraction >= COLLAPSED_FRACTION)


def townes_spread(profile):
    """spread() of Q0 about its centre."""
    from gpcollapse.radial import positive_moment
    return math.sqrt(positive_moment(profile, 2.) / profile.mass)


def grid_collapse(u, well, width, profile):
    """Why u cannot be the Townes-scale state of `width` at `well`, or
    None."""
    measured = spread(u, well)
    if measured < MIN_POINTS_PER_WIDTH * u.grid.spacing:
        return 'state spread %.3g is below %d spacings (%.3g)' % (
            measured, MIN_POINTS_PER_WIDTH, u.grid.spacing)
    expected = width * townes_spread(profile)
    if measured < GRID_COLLAPSE_RATIO * expected:
        return 'state spread %.3g is below %g of the Townes spread %.3g' % (
            measured, GRID_COLLAPSE_RATIO, expected)
    return None


def _out_grid(grid, well, eps, n):
    if not grid.contains(well):
        raise ResolutionError('well %r lies outside the grid' % (well,))
    room = min(grid.x[-1] - well[0], well[0] - grid.x[0],
               grid.y[-1] - well[1], well[1] - grid.y[0])
    return Grid2D(OUT_MARGIN * room / eps, min(n, OUT_NODES))


def fitted_beta(w, profile, beta):
    """Dilation of Q0 closest to w in L2, searched on [beta/3, 3 beta]."""
    def error(lam):
        return h1_l2_distance(w, townes_field(w.grid, profile,
                                              scale=lam))[0]
    found = minimize_scalar(error, bounds=(beta / 3., 3. * beta),
                            method='bounded', options={'xatol': 1e-6 * beta})
    return float(found.x)


def _probe(spec, a, well, eps, scale, policy, opts, profile, astar,
           previous):
    grid = policy.grid_for(1. / scale, well, 1. - a / astar)
    if previous is not None:
        u_prev, eps_prev = previous
        init = _dilate(u_prev, well, eps_prev / eps, grid)
        run_opts = opts.replace(init=init)
    else:
        run_opts = opts.replace(init='townes', init_center=well,
                                init_scale=scale)
    return minimize(grid, spec, a, run_opts, profile, astar)


def sweep(spec, schedule, policy=None, opts=None, profile=None,
          probe_all=True, trial_lambdas=9, on_record=None):
    """Runs the collapse sweep over the interaction strengths `schedule`
    (absolute values of a, strictly increasing and below a*).

    A run whose state shrinks to the grid scale is not warm-started
    from; when it wins, its record is kept but marked unresolved.
    `on_record(record, minimizer, rescaled, reference)` is called for
    every resolved record.
    """
    if profile is None:
        from gpcollapse.radial import default_profile
        profile = default_profile()
    policy = policy or GridPolicy()
    opts = opts or SolveOptions()
    schedule = [float(a) for a in schedule]
    if not schedule:
        raise InvalidParameter('empty schedule')
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidParameter('schedule must be strictly increasing')

    selection = classify(spec)
    constants = collapse_constants(profile, selection)
    astar, p = constants.astar, constants.p
    if schedule[-1] >= astar:
        raise InvalidParameter('schedule reaches a*=%r' % astar)
    beta = beta_value(constants)
    wells = list(selection.candidates)
    if probe_all:
        wells += [j for j in spec.negative_wells if j not in wells]

    records = []
    warm = {}
    for a in schedule:
        eps = eps_a(astar, a, p)
        scale = beta / eps
        runs, collapsed = {}, {}
        for j in wells:
            well = spec.points[j].x
            try:
                result = _probe(spec, a, well, eps, scale, policy, opts,
                                profile, astar, warm.get(j))
            except ResolutionError as e:
                logger.warning('a=%r well %d unresolved: %s' % (a, j, e))
                continue
            runs[j] = result
            reason = grid_collapse(result.u, well, 1. / scale, profile)
            if reason is None:
                warm[j] = (result.u, eps)
            else:
                logger.warning('a=%r well %d: %s' % (a, j, reason))
                collapsed[j] = reason
                warm.pop(j, None)

        if not runs:
            records.append(_unresolved(a, astar, eps, p))
            continue

        best = min(runs, key=lambda j: runs[j].energy.total)
        result = runs[best]
        record, w, reference = _record(spec, a, astar, eps, p, beta, result,
                                       runs, profile, trial_lambdas,
                                       best not in collapsed)
        records.append(record)
        if on_record is not None and record.resolved:
            on_record(record, result.u, w, reference)
        logger.info('a/a*=%.4f: E=%.8g scaled=%.6g well=%d h1=%.3g'
                    % (a / astar, record.energy, record.scaled_energy,
                       record.chosen_point, record.h1_err))
    return records


def _unresolved(a, astar, eps, p):
    nan = float('nan')
    return SweepRecord(a, a / astar, eps, nan, nan, -1, nan, False, nan,
                       nan, nan, nan, nan, nan, nan, nan, False, False,
                       nan, {})


def _record(spec, a, astar, eps, p, beta, result, runs, profile,
            trial_lambdas, resolved=True):
    u = result.u
    spot = locate_concentration(u, spec)
    well = spec.points[spot.index].x
    out_grid = _out_grid(u.grid, well, eps, u.grid.n)
    w = rescale_extract(u, well, eps, out_grid)
    reference = townes_field(out_grid, profile, scale=beta)
    l2, h1 = h1_l2_distance(w, reference)

    ells = trial_schedule(beta, eps, trial_lambdas)
    bound = discrete_trial_bound(u.grid, ells, well, spec, a, profile)[1]
    trial = optimal_trial(ells, well, spec, a, profile)[1]

    energy = result.energy.total
    record = SweepRecord(
        a=a, fraction=a / astar, eps_a=eps, energy=energy,
        scaled_energy=scaled_energy(energy, eps, p),
        chosen_point=spot.index, mass_fraction=spot.mass_fraction,
        collapsed=spot.collapsed, l2_err=l2, h1_err=h1,
        fitted_beta=fitted_beta(w, profile, beta),
        kinetic_scaled=result.energy.kinetic / kinetic_scale(eps, beta),
        width=spread(u, well), trial_bound=bound, trial_energy=trial,
        residual=result.residual, converged=result.converged,
        resolved=resolved, reg_delta=result.reg_delta,
        runs=dict((j, r.energy.total) for j, r in runs.items()))
    return record, w, reference


def select_on_common_grid(spec, fraction=SELECTION_CHECK_FRACTION,
                          policy=None, opts=None, profile=None):
    """Point selection with every negative well solved on the base grid.

    One run per negative well, each started from the Townes profile at
    that well; the lowest energy wins and is located. Returns
    (Concentration, {well: energy}).
    """
    if profile is None:
        from gpcollapse.radial import default_profile
        profile = default_profile()
    policy = policy or GridPolicy()
    opts = opts or SolveOptions()
    selection = classify(spec)
    constants = collapse_constants(profile, selection)
    astar, p = constants.astar, constants.p
    a = fraction * astar
    eps = eps_a(astar, a, p)
    width = eps / beta_value(constants)
    grid = policy.base
    if width < MIN_POINTS_PER_WIDTH * grid.spacing:
        raise ResolutionError('state width %.3g is below %d spacings of '
                              'the base grid' % (width, MIN_POINTS_PER_WIDTH))
    margin = policy.window_factor * width
    runs = {}
    for j in spec.negative_wells:
        well = spec.points[j].x
        if not grid.contains(well, margin):
            raise ResolutionError('well %d at %r is within %.3g of the base '
                                  'grid edge' % (j, well, margin))
        run_opts = opts.replace(init='townes', init_center=well,
                                init_scale=1. / width)
        runs[j] = minimize(grid, spec, a, run_opts, profile, astar)
    best = min(runs, key=lambda j: runs[j].energy.total)
    spot = locate_concentration(runs[best].u, spec)
    logger.info('common grid selection at a/a*=%.3f: well %d with mass '
                '%.4f' % (fraction, spot.index, spot.mass_fraction))
    return spot, dict((j, r.energy.total) for j, r in runs.items())


def fit_power_law(records, astar):
    """Least squares of log(-E) against log(a* - a)."""
    usable = [r for r in records
              if r.resolved and not math.isnan(r.energy)]
    if len(usable) < 3:
        raise InvalidParameter('a power law fit needs at least 3 records')
    if any(r.energy >= 0 for r in usable):
        raise NumericError('the fit is undefined for nonnegative energies')
    x = np.log([astar - r.a for r in usable])
    y = np.log([-r.energy for r in usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r2 = 1. - np.sum(residual ** 2) / total if total > 0 else 1.
    r2 = float(min(1., max(0., r2)))
    window = (min(r.a for r in usable), max(r.a for r in usable))
    return PowerLawFit(float(slope), float(math.exp(intercept)), r2, window)


# verification

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'

ASYMPTOTIC_FRACTION = 0.9
SELECTION_FRACTION = 0.98


class VerificationReport(dict):
    """Machine-readable outcome of a collapse verification."""

    def __init__(self, **data):
        super(VerificationReport, self).__init__(**data)
        self.setdefault('checks', [])

    def add_check(self, name, status, value=None, bound=None):
        self['checks'].append({'name': name, 'status': status,
                               'value': value, 'bound': bound})
        logger.info('check %s: %s (value=%r, bound=%r)'
                    % (name, status, value, bound))

    def check(self, name):
        for entry in self['checks']:
            if entry['name'] == name:
                return entry
        raise KeyError(name)

    @property
    def passed(self):
        return all(c['status'] != FAIL for c in self['checks'])

    def finish(self):
        self['pass'] = self.passed
        return self


def _status(ok):
    return PASS if ok else FAIL


def verify_collapse(spec, schedule, profile=None, policy=None, opts=None,
                    probe_all=True, trial_lambdas=9, reg_sensitivity=False,
                    exponent_tol=0.10, prefactor_tol=0.15, h1_bound=0.15,
                    on_record=None, common_selection=True):
    """Runs a sweep and checks it against the closed-form asymptotics.

    `schedule` holds fractions of a*. Checks that need the asymptotic
    regime are inconclusive when the schedule stays below
    ASYMPTOTIC_FRACTION. With several negative wells and
    `common_selection`, point selection is also checked with all wells
    on the base grid at SELECTION_CHECK_FRACTION.
    """
    if profile is None:
        from gpcollapse.radial import default_profile
        profile = default_profile()
    selection = classify(spec)
    constants = collapse_constants(profile, selection)
    astar, p = constants.astar, constants.p
    beta = beta_value(constants)
    limit = energy_limit(constants)
    fractions = [float(f) for f in schedule]
    records = sweep(spec, [f * astar for f in fractions], policy, opts,
                    profile, probe_all, trial_lambdas, on_record)

    report = VerificationReport(
        constants=constants._asdict(), beta=beta, energy_limit=limit,
        expected_exponent=-p / (2. - p), selection=selection._asdict(),
        records=[r._asdict() for r in records])

    resolved = [r for r in records if r.resolved]
    report.add_check('resolved', _status(len(resolved) == len(records)),
                     len(resolved), len(records))
    report.add_check('converged',
                     _status(all(r.converged for r in resolved)))

    variational = all(r.energy <= r.trial_bound + 1e-10 * abs(r.energy)
                      for r in resolved)
    report.add_check('variational_bound', _status(variational))

    if common_selection and len(spec.negative_wells) > 1:
        try:
            spot, energies = select_on_common_grid(spec, policy=policy,
                                                   opts=opts,
                                                   profile=profile)
        except ResolutionError as e:
            logger.info('no common grid selection: %s' % e)
            report.add_check('common_grid_selection', INCONCLUSIVE)
        else:
            report['common_grid_runs'] = energies
            report.add_check('common_grid_selection', _status(
                spot.index in selection.candidates and
                spot.mass_fraction > 0.9), spot._asdict(),
                list(selection.candidates))

    asymptotic = max(fractions) >= ASYMPTOTIC_FRACTION
    tail = [r for r in resolved if r.fraction >= ASYMPTOTIC_FRACTION]

    fit = None
    try:
        fit = fit_power_law(tail, astar)
    except (InvalidParameter, NumericError) as e:
        logger.info('no power law fit: %s' % e)
    report['fit'] = fit._asdict() if fit is not None else None

    expected = -p / (2. - p)
    if fit is None or not asymptotic:
        report.add_check('exponent', INCONCLUSIVE, None, expected)
        report.add_check('prefactor', INCONCLUSIVE, None, abs(limit))
    else:
        report.add_check('exponent', _status(
            abs(fit.exponent - expected) <= exponent_tol * abs(expected)),
            fit.exponent, expected)
        report.add_check('prefactor', _status(
            abs(fit.prefactor - abs(limit)) <= prefactor_tol * abs(limit)),
            fit.prefactor, abs(limit))

    if not asymptotic or not tail:
        for name in ('energy_sandwich', 'kinetic_scaling', 'h1_decrease',
                     'h1_final', 'selection'):
            report.add_check(name, INCONCLUSIVE)
        return report.finish()

    sandwich = [-r.scaled_energy for r in tail]
    report.add_check('energy_sandwich', _status(
        all(0.1 * abs(limit) <= s <= 10. * abs(limit) for s in sandwich)),
        sandwich, [0.1 * abs(limit), 10. * abs(limit)])

    kinetic = [r.kinetic_scaled for r in tail]
    report.add_check('kinetic_scaling', _status(
        all(0.1 <= k <= 10. for k in kinetic)), kinetic, [0.1, 10.])

    h1 = [r.h1_err for r in resolved[-3:]]
    if len(h1) < 3:
        report.add_check('h1_decrease', INCONCLUSIVE, h1)
    else:
        report.add_check('h1_decrease', _status(
            all(b <= 1.05 * a for a, b in zip(h1, h1[1:]))), h1)
    report.add_check('h1_final', _status(resolved[-1].h1_err < h1_bound),
                     resolved[-1].h1_err, h1_bound)

    close = [r for r in resolved if r.fraction >= SELECTION_FRACTION]
    if close:
        chosen = [r.chosen_point for r in close]
        report.add_check('selection', _status(
            all(j in selection.candidates for j in chosen) and
            all(r.mass_fraction > 0.9 for r in close)), chosen,
            list(selection.candidates))
    else:
        report.add_check('selection', INCONCLUSIVE)

    if reg_sensitivity and fit is not None:
        coarse = sweep(spec.with_reg_factor(2 * spec.reg_factor),
                       [f * astar for f in fractions], policy, opts,
                       profile, probe_all, trial_lambdas)
        try:
            other = fit_power_law(
                [r for r in coarse if r.fraction >= ASYMPTOTIC_FRACTION],
                astar)
            report['reg_sensitivity'] = {
                'reg_factor': 2 * spec.reg_factor,
                'prefactor': other.prefactor,
                'ratio': other.prefactor / fit.prefactor}
        except (InvalidParameter, NumericError) as e:
            report['reg_sensitivity'] = {'error': str(e)}
    return report.finish()


def write_records(path, records):
    """records.csv: one row per SweepRecord, runs as j:E pairs."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(RECORD_FIELDS)
        for record in records:
            row = []
            for name, value in zip(RECORD_FIELDS, record):
                if name == 'runs':
                    value = ';'.join('%d:%r' % (j, e)
                                     for j, e in sorted(value.items()))
                elif isinstance(value, float):
                    value = repr(value)
                row.append(value)
            writer.writerow(row)
