""" INI configuration.

Files are flattened into a settings dict keyed 'section.option'; values
may reference environment variables ($VAR or ${VAR}). The standard
logging sections are left to logging.config.fileConfig.
"""
import configparser
import os

from gpcollapse.errors import ConfigError, InvalidParameter
from gpcollapse.util import asbool, parse_floats, parse_schedule


_LOGGING_SECTIONS = ('loggers', 'handlers', 'formatters')
_LOGGING_PREFIXES = ('logger_', 'handler_', 'formatter_')

COMMANDS = ('q-solve', 'constants', 'potential-check', 'minimize',
            'gn-minimize', 'sweep', 'verify')


def _is_logging(section):
    return section in _LOGGING_SECTIONS or \
        section.startswith(_LOGGING_PREFIXES)


def load_into_settings(filename, settings=None):
    """Reads `filename` and adds its options to `settings`.

    Returns the settings dict. Raises ConfigError naming the line of any
    syntax error.
    """
    if settings is None:
        settings = {}
    if not os.path.exists(filename):
        raise ConfigError('no such configuration file: %r' % filename)
    parser = configparser.RawConfigParser()
    parser.optionxform = str
    try:
        with open(filename) as f:
            parser.read_file(f)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError('option outside any section', lineno=e.lineno)
    except configparser.ParsingError as e:
        lineno = e.errors[0][0] if e.errors else None
        raise ConfigError('cannot parse %r' % filename, lineno=lineno)
    except configparser.Error as e:
        lineno = getattr(e, 'lineno', None)
        raise ConfigError(str(e).splitlines()[0], lineno=lineno)

    sections = [s for s in parser.sections() if not _is_logging(s)]
    if not sections:
        raise ConfigError('%r holds no configuration sections' % filename)
    for section in sections:
        for option, value in parser.items(section):
            settings['%s.%s' % (section, option)] = os.path.expandvars(value)
    return settings


def has_logging(filename):
    parser = configparser.RawConfigParser()
    try:
        parser.read(filename)
    except configparser.Error:
        return False
    return parser.has_section('loggers')


def _get(settings, key, convert, default):
    if key not in settings:
        return default
    try:
        return convert(settings[key])
    except (ValueError, TypeError) as e:
        raise ConfigError('invalid value %r: %s' % (settings[key], e),
                          field=key)


class RunConfig(object):
    """Everything one command needs, built from flattened settings.

    `overrides` maps 'section.option' keys to command-line values,
    which win over the file; None values are ignored.
    """
    def __init__(self, command, settings=None, output=None, plot=None,
                 overrides=None):
        if command not in COMMANDS:
            raise ConfigError('unknown command %r' % command)
        settings = dict(settings or {})
        for key, value in (overrides or {}).items():
            if value is not None:
                settings[key] = value
        self.command = command
        self.settings = settings
        self.output = output
        self.plot = plot if plot is not None else \
            _get(settings, 'global.plot', asbool, False)

        self.half_width = _get(settings, 'grid.half_width', float, 8.)
        self.n = _get(settings, 'grid.n', int, 256)
        self.center = _get(settings, 'grid.center',
                           lambda v: parse_floats(v, 2), (0., 0.))

        self.schedule = _get(settings, 'sweep.schedule', parse_schedule,
                             None)
        self.window_factor = _get(settings, 'sweep.window_factor', float,
                                  6.)
        self.points_per_width = _get(settings, 'sweep.points_per_width',
                                     float, 8.)
        self.window_points = _get(settings, 'sweep.window_points', float,
                                  32.)
        self.dilation_tol = _get(settings, 'sweep.dilation_tol', float,
                                 0.005)
        self.max_n = _get(settings, 'sweep.max_n', int, 1537)
        self.probe_all = _get(settings, 'sweep.probe_all_wells', asbool,
                              True)
        self.reg_sensitivity = _get(settings, 'sweep.reg_sensitivity',
                                    asbool, False)
        self.trial_lambdas = _get(settings, 'sweep.trial_lambdas', int, 9)
        self.backend = settings.get('storage.backend', 'csv')

    def grid(self):
        from gpcollapse.field import Grid2D
        try:
            return Grid2D(self.half_width, self.n, self.center)
        except InvalidParameter as e:
            raise ConfigError(str(e), field='grid')

    def grid_policy(self):
        from gpcollapse.collapse import GridPolicy
        try:
            return GridPolicy(self.half_width, self.n, self.window_factor,
                              self.points_per_width, self.center,
                              self.window_points, self.dilation_tol,
                              self.max_n)
        except InvalidParameter as e:
            raise ConfigError(str(e), field='sweep')

    def potential(self):
        from gpcollapse.potential import load_potential
        return load_potential(self.settings)

    def solve_options(self, **changes):
        from gpcollapse.minimizer import SolveOptions
        s = self.settings
        options = {
            'scheme': s.get('solver.scheme', 'preconditioned'),
            'tau': _get(s, 'solver.tau', float, None),
            'max_iters': _get(s, 'solver.max_iters', int, 20000),
            'residual_tol': _get(s, 'solver.residual_tol', float, 1e-6),
            'momentum': _get(s, 'solver.momentum', asbool, True),
            'init': s.get('solver.init', 'gaussian'),
            'init_scale': _get(s, 'solver.init_scale', float, 1.),
            'init_center': _get(s, 'solver.init_center',
                                lambda v: parse_floats(v, 2), (0., 0.)),
        }
        options.update(changes)
        try:
            return SolveOptions(**options)
        except InvalidParameter as e:
            raise ConfigError(str(e), field='solver')

    def storage(self):
        from gpcollapse.storage import get_storage
        return get_storage(self.backend)

    @classmethod
    def from_file(cls, command, filename=None, **kw):
        settings = {}
        if filename is not None:
            load_into_settings(filename, settings)
        return cls(command, settings, **kw)
