import math
import unittest

import numpy as np

from gpcollapse.background import HarmonicBackground
from gpcollapse.closedform import beta_value, collapse_constants, eps_a
from gpcollapse.errors import InvalidParameter
from gpcollapse.field import (Field2D, Grid2D, gaussian, h1_l2_distance,
                              inner, integrate, norm, spread)
from gpcollapse.minimizer import (EXPLICIT, GNQuotient, GPEnergy,
                                  SolveOptions, cutoff, discrete_trial_bound,
                                  flow, gn_minimize, initial_field, minimize,
                                  optimal_trial, trial_energy, trial_field,
                                  trial_schedule)
from gpcollapse.potential import PotentialSpec, classify
from gpcollapse.radial import critical_constants
from gpcollapse.tests.support import profile


FREE = PotentialSpec([])
HARMONIC = PotentialSpec([], background=HarmonicBackground(1.))
COULOMB = PotentialSpec([((0., 0.), 1., -1.)])


def _descending(energies):
    return all(b <= a + 1e-12 * abs(a) for a, b in zip(energies,
                                                         energies[1:]))


class TestSolveOptions(unittest.TestCase):

    def test_validation(self):
        self.assertRaises(InvalidParameter, SolveOptions, scheme='newton')
        self.assertRaises(InvalidParameter, SolveOptions, tau=0.)
        self.assertRaises(InvalidParameter, SolveOptions, residual_tol=-1.)
        self.assertRaises(InvalidParameter, SolveOptions, max_iters=0)
        self.assertRaises(InvalidParameter, SolveOptions, init='random')

    def test_tau(self):
        grid = Grid2D(8., 65)
        self.assertEqual(SolveOptions().initial_tau(grid), 0.5)
        explicit = SolveOptions(scheme=EXPLICIT)
        self.assertAlmostEqual(explicit.initial_tau(grid), 0.25 * 0.0625)
        self.assertEqual(explicit.replace(tau=0.1).initial_tau(grid), 0.1)

    def test_initial_field(self):
        grid = Grid2D(6., 48)
        u = initial_field(grid, SolveOptions(init_scale=0.7))
        self.assertTrue(u.normalized)
        other = gaussian(Grid2D(5., 40), (0.5, 0.), 1.)
        v = initial_field(grid, SolveOptions(init=other))
        self.assertEqual(v.grid, grid)
        self.assertTrue(v.normalized)
        w = initial_field(grid, SolveOptions(init='townes'), profile())
        self.assertAlmostEqual(w.data.max(), w.data[23, 23], places=12)


class TestGradients(unittest.TestCase):

    def setUp(self):
        self.grid = Grid2D(6., 64)
        u = gaussian(self.grid, (0.2, -0.1), 1.1).data
        xx, yy = self.grid.mesh()
        d = np.sin(xx) * np.cos(0.5 * yy) * np.exp(-(xx ** 2 + yy ** 2) / 8.)
        d[0, :] = d[-1, :] = d[:, 0] = d[:, -1] = 0.
        self.u, self.d = u, d

    def _check(self, objective, factor):
        u, d, t = self.u, self.d, 1e-6
        numeric = (objective.value(u + t * d) -
                   objective.value(u - t * d)) / (2 * t)
        analytic = factor * inner(self.grid, objective.gradient(u), d)
        self.assertTrue(abs(numeric - analytic) < 1e-5 * abs(analytic))

    def test_energy(self):
        self._check(GPEnergy(self.grid, COULOMB, 4.), 2.)

    def test_quotient(self):
        objective = GNQuotient(self.grid)
        quartic = integrate(self.grid, self.u ** 4)
        self._check(objective, 4. / quartic)


class TestMinimize(unittest.TestCase):

    def test_harmonic_ground_state(self):
        grid = Grid2D(8., 256)
        result = minimize(grid, HARMONIC, 0., SolveOptions(init_scale=1.5),
                          profile())
        self.assertTrue(result.converged)
        self.assertTrue(abs(result.energy.total - 2.) < 1e-3)
        l2, _ = h1_l2_distance(result.u, gaussian(grid))
        self.assertTrue(l2 < 1e-2)
        self.assertTrue(_descending(result.history.energies))
        self.assertTrue(result.history.norm_defect < 1e-12)
        self.assertTrue(result.history.energies[-1] <=
                        result.history.energies[0])

    def test_schemes_agree(self):
        grid = Grid2D(6., 48)
        opts = SolveOptions(init_scale=1.3, max_iters=20000,
                            residual_tol=1e-7)
        fast = minimize(grid, HARMONIC, 1., opts, profile())
        slow = minimize(grid, HARMONIC, 1., opts.replace(scheme=EXPLICIT),
                        profile())
        self.assertTrue(fast.converged and slow.converged)
        self.assertTrue(fast.iters < slow.iters)
        self.assertTrue(abs(fast.energy.total - slow.energy.total) < 1e-8)
        self.assertTrue(abs(fast.mu - slow.mu) < 1e-5)

    def test_free_spreading(self):
        q = profile()
        astar = critical_constants(q).astar
        grid = Grid2D(8., 64)
        result = minimize(grid, FREE, 0.5 * astar,
                          SolveOptions(max_iters=3000), q, astar)
        start = 1. - 0.5 * astar / (4 * math.pi)
        self.assertTrue(0. < result.energy.total < start)
        self.assertTrue(result.energy.warning)
        self.assertTrue(any('boundary' in w for w in result.warnings))

    def test_coulomb(self):
        q = profile()
        astar = critical_constants(q).astar
        a = 0.5 * astar
        c = collapse_constants(q, classify(COULOMB))
        eps = eps_a(astar, a, 1.)
        scale = beta_value(c) / eps
        grid = Grid2D(8., 128)
        opts = SolveOptions(init='townes', init_scale=scale)
        result = minimize(grid, COULOMB, a, opts, q, astar)

        self.assertTrue(result.converged)
        self.assertTrue(result.energy.total < 0)
        self.assertEqual(result.reg_delta, 0.5 * grid.spacing)
        self.assertTrue(_descending(result.history.energies))

        # the residual is what it claims to be
        objective = GPEnergy(grid, COULOMB, a)
        grad = objective.gradient(result.u.data)
        mu = inner(grid, grad, result.u.data)
        residual = norm(grid, grad - mu * result.u.data)
        self.assertTrue(residual <= 1e-6)
        self.assertAlmostEqual(mu, result.mu, places=8)

        # radial potential, symmetric grid: symmetric state
        data = result.u.data
        asymmetry = np.max(np.abs(data - data[::-1, ::-1]))
        self.assertTrue(asymmetry <= 1e-6 * data.max())

        ells = trial_schedule(beta_value(c), eps, 7)
        bound = discrete_trial_bound(grid, ells, (0., 0.), COULOMB, a, q)[1]
        self.assertTrue(result.energy.total <= bound)

    def test_refuses_supercritical(self):
        q = profile()
        astar = critical_constants(q).astar
        grid = Grid2D(8., 32)
        self.assertRaises(InvalidParameter, minimize, grid, FREE, astar,
                          SolveOptions(), q, astar)
        self.assertRaises(InvalidParameter, minimize, grid, FREE, -1.,
                          SolveOptions(), q, astar)

    def test_gn_minimize(self):
        q = profile()
        astar = critical_constants(q).astar
        grid = Grid2D(12., 256)
        result = gn_minimize(grid)
        self.assertTrue(abs(result.energy.total / astar - 1.) < 1e-2)
        self.assertFalse(any('width' in w for w in result.warnings))
        self.assertTrue(_descending(result.history.energies))
        # the state keeps about the width it started with
        self.assertTrue(0.8 < spread(result.u, (0., 0.)) < 1.25)

    def test_gn_width_guard(self):
        grid = Grid2D(8., 64)
        result = gn_minimize(grid, SolveOptions(init_scale=0.4,
                                                max_iters=5))
        self.assertFalse(result.converged)
        self.assertTrue(any('width' in w for w in result.warnings))

    def test_held_moment(self):
        grid = Grid2D(6., 96)
        u = gaussian(grid, (0., 0.), 1.2)
        objective = GNQuotient(grid, (0., 0.))
        self.assertEqual(len(GNQuotient(grid).constraints(u.data)), 0)
        self.assertEqual(len(objective.constraints(u.data)), 1)
        opts = SolveOptions(max_iters=40, residual_tol=1e-12)
        out = flow(objective, u, opts)[0]
        moved = Field2D(grid, out, normalized=True)
        self.assertTrue(abs(spread(moved, (0., 0.)) - 1.2) < 5e-2)


class TestTrial(unittest.TestCase):

    def setUp(self):
        self.profile = profile()
        self.astar = critical_constants(self.profile).astar

    def test_cutoff(self):
        r = np.array([0., 0.5, 1., 1.5, 2., 3.])
        values = cutoff(r, 1.)
        np.testing.assert_allclose(values, [1., 1., 1., 0.5, 0., 0.])

    def test_free_limit(self):
        ell, a = 50., 0.9 * self.astar
        value = trial_energy(ell, (0., 0.), FREE, a, self.profile)
        expected = ell ** 2 * (self.astar - a) / self.astar
        self.assertTrue(abs(value - expected) < 1e-3 * expected)

    def test_potential_limit(self):
        ell, a, x0 = 100., 0.5 * self.astar, (1., 0.5)
        with_v = trial_energy(ell, x0, HARMONIC, a, self.profile)
        without = trial_energy(ell, x0, FREE, a, self.profile)
        self.assertTrue(abs(with_v - without - 1.25) < 1e-3)

    def test_singular_centre(self):
        spec = PotentialSpec([((0., 0.), 1., -1.)], reg_delta=0.)
        ell, a = 20., 0.9 * self.astar
        value = trial_energy(ell, (0., 0.), spec, a, self.profile)
        free = trial_energy(ell, (0., 0.), FREE, a, self.profile)
        # the well lowers the energy by about ell * I_1
        self.assertTrue(value < free)
        best = optimal_trial([5., 10., 20.], (0., 0.), spec, a, self.profile)
        self.assertTrue(best[1] <= value)
        self.assertRaises(InvalidParameter, trial_energy, 0., (0., 0.),
                          spec, a, self.profile)

    def test_trial_field(self):
        grid = Grid2D(4., 64)
        u = trial_field(grid, 3., (0.5, 0.), self.profile)
        self.assertTrue(u.normalized)
        self.assertTrue(isinstance(u, Field2D))
        xx, yy = grid.mesh()
        far = np.hypot(xx - 0.5, yy) >= 2.
        self.assertTrue(np.all(u.data[far] == 0.))
