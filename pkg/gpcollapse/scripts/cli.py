""" The gpcollapse command.

    gpcollapse [options] q-solve|constants|potential-check|minimize|
                         gn-minimize|sweep|verify

Every physical constant is computed from the Townes profile, solved on
the spot or read back from a q-solve output with --from-profile.
"""
import logging
import logging.config
import os
import sys
import traceback
from optparse import OptionParser

from gpcollapse import exitcodes, logger, __version__
from gpcollapse.closedform import (CollapseConstants, eps_a, summary,
                                   trapped_beta, trapped_eps)
from gpcollapse.collapse import (DEFAULT_FRACTIONS, SweepRecord,
                                 verify_collapse, write_records)
from gpcollapse.config import COMMANDS, RunConfig, has_logging
from gpcollapse.errors import (ConfigError, FieldError, HypothesisError,
                               InvalidParameter, NumericError)
from gpcollapse.minimizer import gn_minimize, minimize
from gpcollapse.potential import classify, selection_report
from gpcollapse.radial import (critical_constants, default_profile,
                               ode_residual, positive_moment, read_profile,
                               singular_moment, singular_moment_table,
                               write_profile)
from gpcollapse.storage import StorageError, guess_storage
from gpcollapse.util import dump_json, dumps


_FORMAT = '%(asctime)s %(levelname)-5.5s [%(name)s][%(threadName)s] ' \
          '%(message)s'

_MOMENTS = (0.5, 1., 1.5)


def _setup_logging(options):
    if options.config is not None and has_logging(options.config):
        logging.config.fileConfig(options.config,
                                  disable_existing_loggers=False)
        return
    level = logging.DEBUG if options.verbose else logging.INFO
    logging.basicConfig(level=level, format=_FORMAT)


def _profile(options):
    if options.from_profile:
        logger.info('reading the profile from %s' % options.from_profile)
        return read_profile(options.from_profile)
    return default_profile()


def _emit(payload, path=None):
    print(dumps(payload))
    if path is not None:
        dump_json(payload, path)


def _interaction(options, astar):
    if options.a is not None and options.fraction is not None:
        raise ConfigError('--a and --fraction are exclusive')
    if options.fraction is not None:
        return options.fraction * astar
    if options.a is not None:
        return options.a
    raise ConfigError('minimize needs --a or --fraction')


def q_solve(run, options):
    profile = default_profile()
    constants = critical_constants(profile)
    out = run.output or 'q.csv'
    directory = os.path.dirname(out)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)
    write_profile(out, profile)

    payload = constants._asdict()
    payload.update({
        'q0': profile.q0, 'rmax': profile.rmax,
        'ode_residual': ode_residual(profile),
        'moments': dict(('%g' % p, value) for p, value in
                        singular_moment_table(profile, _MOMENTS).items())})
    _emit(payload, os.path.join(directory, 'constants.json'))
    return exitcodes.OK


def _trapping(options, c, profile):
    """The same power as a trap h |x - x0|^p, with h = --trap-h or h0."""
    h = options.trap_h if options.trap_h is not None else c.h0
    moment = positive_moment(profile, c.p)
    block = {'h': h, 'moment': moment,
             'beta': trapped_beta(c.p, h, moment)}
    if options.a is not None or options.fraction is not None:
        a = _interaction(options, c.astar)
        block['eps'] = trapped_eps(c.astar, a, c.p)
        block['singular_eps'] = eps_a(c.astar, a, c.p)
    return block


def constants(run, options):
    given = {'p': options.p, 'h0': options.h0, 'astar': options.astar,
             'Ip': options.Ip}
    profile = None
    if None in given.values():
        if given['p'] is None or given['h0'] is None:
            selection = classify(run.potential())
            if given['p'] is None:
                given['p'] = selection.p
            if given['h0'] is None:
                given['h0'] = selection.h0
        profile = _profile(options)
        if given['astar'] is None:
            given['astar'] = critical_constants(profile).astar
        if given['Ip'] is None:
            given['Ip'] = singular_moment(profile, given['p'])
    c = CollapseConstants(**given)
    payload = summary(c)
    if profile is not None or options.trap_h is not None:
        payload['trapping'] = _trapping(options, c,
                                        profile or _profile(options))
    _emit(payload, run.output)
    return exitcodes.OK


def potential_check(run, options):
    _emit(selection_report(run.potential()), run.output)
    return exitcodes.OK


def minimize_command(run, options):
    profile = _profile(options)
    astar = critical_constants(profile).astar
    a = _interaction(options, astar)
    grid = run.grid()
    opts = run.solve_options()
    result = minimize(grid, run.potential(), a, opts, profile, astar)

    out = run.output or 'minimizer.csv'
    if 'storage.backend' in run.settings:
        storage = run.storage()
    else:
        storage = guess_storage(out)
    metadata = {'a': a, 'astar': astar, 'energy': result.energy.total}
    storage.save(result.u, out, metadata)

    payload = {'a': a, 'astar': astar, 'fraction': a / astar,
               'energy': result.energy._asdict(), 'mu': result.mu,
               'residual': result.residual, 'iters': result.iters,
               'converged': result.converged,
               'reg_delta': result.reg_delta, 'init': opts.init,
               'warnings': result.warnings, 'grid': grid.describe()}
    _emit(payload, out + '.json')
    if not result.converged:
        return exitcodes.NUMERIC_FAILURE
    return exitcodes.OK


def gn_minimize_command(run, options):
    profile = _profile(options)
    astar = critical_constants(profile).astar
    result = gn_minimize(run.grid(), run.solve_options())
    ratio = result.energy.total
    payload = {'gn_minimum': ratio, 'astar': astar,
               'relative_difference': (ratio - astar) / astar,
               'residual': result.residual, 'iters': result.iters,
               'converged': result.converged}
    _emit(payload, run.output)
    if not result.converged:
        return exitcodes.NUMERIC_FAILURE
    return exitcodes.OK


def _verify(run, options):
    out = run.output or '.'
    if not os.path.exists(out):
        os.makedirs(out)
    profile = _profile(options)
    last = {}

    def keep_last(record, minimizer, rescaled, reference):
        last['overlay'] = (rescaled, reference)

    report = verify_collapse(
        run.potential(), run.schedule or DEFAULT_FRACTIONS, profile,
        run.grid_policy(), run.solve_options(), run.probe_all,
        run.trial_lambdas, run.reg_sensitivity, on_record=keep_last)

    records = [SweepRecord(**r) for r in report['records']]
    write_records(os.path.join(out, 'records.csv'), records)
    fit = {'fit': report['fit'],
           'expected_exponent': report['expected_exponent'],
           'energy_limit': report['energy_limit']}
    dump_json(fit, os.path.join(out, 'fit.json'))
    dump_json(report, os.path.join(out, 'report.json'))

    if run.plot:
        from gpcollapse.collapse import PowerLawFit
        from gpcollapse.plots import write_plots
        power_law = PowerLawFit(**report['fit']) if report['fit'] else None
        write_plots(out, records, report['constants']['astar'], power_law,
                    report['energy_limit'], last.get('overlay'))
    logger.info('wrote %s' % out)
    return report


def sweep_command(run, options):
    _verify(run, options)
    return exitcodes.OK


def verify_command(run, options):
    report = _verify(run, options)
    print('verification %s' % ('passed' if report.passed else 'failed'))
    if not report.passed:
        return exitcodes.NUMERIC_FAILURE
    return exitcodes.OK


_COMMANDS = {'q-solve': q_solve,
             'constants': constants,
             'potential-check': potential_check,
             'minimize': minimize_command,
             'gn-minimize': gn_minimize_command,
             'sweep': sweep_command,
             'verify': verify_command}


def _parser():
    usage = "usage: %prog [options] " + '|'.join(COMMANDS)
    parser = OptionParser(usage=usage, version='%prog ' + __version__)
    parser.add_option("-c", "--config", dest="config",
                      help="INI configuration file")
    parser.add_option("-o", "--out", dest="out",
                      help="Output file (or directory for sweep/verify)")
    parser.add_option("--a", dest="a", type="float",
                      help="Interaction strength")
    parser.add_option("--fraction", dest="fraction", type="float",
                      help="Interaction strength as a fraction of a*")
    parser.add_option("--p", dest="p", type="float",
                      help="Dominant singular power")
    parser.add_option("--h0", dest="h0", type="float",
                      help="Dominant well depth")
    parser.add_option("--astar", dest="astar", type="float",
                      help="Critical strength (computed when omitted)")
    parser.add_option("--Ip", dest="Ip", type="float",
                      help="Singular moment (computed when omitted)")
    parser.add_option("--trap-h", dest="trap_h", type="float",
                      help="Depth of the trap compared by constants "
                           "(h0 when omitted)")
    parser.add_option("--from-profile", dest="from_profile",
                      help="Reuse a profile written by q-solve")
    parser.add_option("--schedule", dest="schedule",
                      help="Fractions of a*, or geometric:start:stop:count")
    parser.add_option("--plot", dest="plot", action="store_true",
                      default=None, help="Write SVG plots")
    parser.add_option("--n", dest="n", help="Grid nodes per axis")
    parser.add_option("--half-width", dest="half_width",
                      help="Grid half width")
    parser.add_option("--init", dest="init",
                      help="Initial field: gaussian or townes")
    parser.add_option("--backend", dest="backend",
                      help="Field storage backend")
    parser.add_option("-v", "--verbose", dest="verbose",
                      action="store_true", default=False,
                      help="Debug logging")
    return parser


def _overrides(options):
    return {'sweep.schedule': options.schedule,
            'grid.n': options.n,
            'grid.half_width': options.half_width,
            'solver.init': options.init,
            'storage.backend': options.backend}


def main(args=None):
    parser = _parser()
    options, args = parser.parse_args(args)

    if len(args) != 1 or args[0] not in COMMANDS:
        parser.print_help()
        return exitcodes.USAGE

    command = args[0]
    try:
        _setup_logging(options)
        run = RunConfig.from_file(command, options.config,
                                  output=options.out, plot=options.plot,
                                  overrides=_overrides(options))
        return _COMMANDS[command](run, options)
    except (ConfigError, InvalidParameter) as e:
        logger.error('%s: %s' % (command, e))
        return exitcodes.USAGE
    except HypothesisError as e:
        logger.error('%s: %s' % (command, e))
        return exitcodes.HYPOTHESIS_VIOLATION
    except (NumericError, FieldError, StorageError) as e:
        logger.error('%s: %s' % (command, e))
        return exitcodes.NUMERIC_FAILURE
    except Exception:
        logger.error(traceback.format_exc())
        return exitcodes.NUMERIC_FAILURE


if __name__ == '__main__':
    sys.exit(main())
