import os
import tempfile
import unittest

from gpcollapse.collapse import GridPolicy
from gpcollapse.config import RunConfig, has_logging, load_into_settings
from gpcollapse.errors import ConfigError
from gpcollapse.minimizer import EXPLICIT
from gpcollapse.storage.binary import BinaryFieldStorage
from gpcollapse.tests.support import ini


class TestSettings(unittest.TestCase):

    def test_flatten(self):
        settings = load_into_settings(ini('tests.ini'))
        self.assertEqual(settings['grid.n'], '64')
        self.assertEqual(settings['point:origin.x'], '0, 0')
        self.assertEqual(settings['storage.backend'], 'csv')

    def test_logging_sections_skipped(self):
        settings = load_into_settings(ini('logging.ini'))
        self.assertFalse(any(k.startswith(('logger', 'handler',
                                           'formatter')) for k in settings))
        self.assertTrue(has_logging(ini('logging.ini')))
        self.assertFalse(has_logging(ini('tests.ini')))

    def test_environ(self):
        path = os.path.join(tempfile.mkdtemp(), 'env.ini')
        with open(path, 'w') as f:
            f.write('[grid]\nn = ${GPCOLLAPSE_TEST_N}\n')
        os.environ['GPCOLLAPSE_TEST_N'] = '96'
        try:
            settings = load_into_settings(path)
        finally:
            del os.environ['GPCOLLAPSE_TEST_N']
        self.assertEqual(settings['grid.n'], '96')

    def test_errors(self):
        self.assertRaises(ConfigError, load_into_settings, ini('empty.ini'))
        self.assertRaises(ConfigError, load_into_settings, ini('nope.ini'))
        try:
            load_into_settings(ini('broken.ini'))
        except ConfigError as e:
            self.assertEqual(e.lineno, 3)
        else:
            self.fail('broken.ini was accepted')


class TestRunConfig(unittest.TestCase):

    def test_defaults(self):
        run = RunConfig('minimize')
        self.assertEqual((run.half_width, run.n), (8., 256))
        self.assertEqual(run.center, (0., 0.))
        self.assertTrue(run.schedule is None)
        self.assertTrue(run.probe_all)
        self.assertFalse(run.plot)
        self.assertEqual(run.grid().n, 256)
        policy = run.grid_policy()
        self.assertTrue(isinstance(policy, GridPolicy))
        self.assertEqual((policy.window_factor, policy.window_points,
                          policy.dilation_tol, policy.max_n),
                         (6., 32., 0.005, 1537))
        self.assertEqual(run.solve_options().max_iters, 20000)

    def test_from_file(self):
        run = RunConfig.from_file('sweep', ini('tests.ini'))
        self.assertEqual(run.n, 64)
        self.assertEqual(run.schedule, (0.5, 0.6, 0.7))
        self.assertEqual(len(run.potential()), 1)
        self.assertEqual(run.solve_options().max_iters, 4000)

    def test_overrides(self):
        run = RunConfig.from_file('sweep', ini('tests.ini'), plot=True,
                                  overrides={'grid.n': '128',
                                             'sweep.schedule': '0.9, 0.95',
                                             'storage.backend': 'binary',
                                             'grid.half_width': None})
        self.assertEqual(run.n, 128)
        self.assertEqual(run.half_width, 8.)
        self.assertEqual(run.schedule, (0.9, 0.95))
        self.assertTrue(run.plot)
        self.assertTrue(isinstance(run.storage(), BinaryFieldStorage))
        opts = run.solve_options(scheme=EXPLICIT)
        self.assertEqual(opts.scheme, EXPLICIT)

    def test_bad_values(self):
        try:
            RunConfig('minimize', {'grid.n': 'many'})
        except ConfigError as e:
            self.assertEqual(e.field, 'grid.n')
        else:
            self.fail('grid.n was accepted')
        self.assertRaises(ConfigError, RunConfig('minimize',
                                                 {'grid.n': '8'}).grid)
        run = RunConfig('minimize', {'solver.scheme': 'newton'})
        self.assertRaises(ConfigError, run.solve_options)
        run = RunConfig('sweep', {'sweep.window_points': '2'})
        self.assertRaises(ConfigError, run.grid_policy)
        self.assertRaises(ConfigError, RunConfig, 'launch')
