import math
import unittest

import numpy as np

from gpcollapse.background import HarmonicBackground
from gpcollapse.errors import (FieldError, GridMismatchError,
                               InvalidParameter, NormalizationError,
                               WindowError)
from gpcollapse.field import (DirichletPreconditioner, Field2D, Grid2D,
                              boundary_mass, centroid, dirichlet_energy,
                              energy_breakdown, forward_gradient, gaussian,
                              gn_ratio, h1_l2_distance, inner, integrate,
                              interpolate, laplacian, normalize,
                              rescale_extract, sample, spread,
                              townes_field)
from gpcollapse.potential import PotentialSpec
from gpcollapse.radial import critical_constants
from gpcollapse.tests.support import profile


FREE = PotentialSpec([])
HARMONIC = PotentialSpec([], background=HarmonicBackground(1.))


class TestGrid(unittest.TestCase):

    def test_nodes(self):
        grid = Grid2D(8., 64)
        self.assertAlmostEqual(grid.spacing, 16. / 63)
        self.assertAlmostEqual(grid.x[0], -8., places=12)
        self.assertAlmostEqual(grid.x[-1], 8., places=12)
        np.testing.assert_array_equal(grid.x, -grid.x[::-1])
        # even n: no node on the centre
        self.assertTrue(np.min(np.abs(grid.x)) > 0)

        moved = Grid2D(2., 17, center=(1., -1.))
        self.assertEqual(moved.x[8], 1.)
        self.assertEqual(moved.y[8], -1.)
        self.assertEqual(moved, Grid2D(2., 17).translated((1., -1.)))
        self.assertNotEqual(moved, Grid2D(2., 17))
        self.assertTrue(moved.contains((2.5, -2.5)))
        self.assertFalse(moved.contains((3.5, 0.)))

    def test_validation(self):
        self.assertRaises(InvalidParameter, Grid2D, 8., 15)
        self.assertRaises(InvalidParameter, Grid2D, 0., 64)

    def test_quadrature(self):
        grid = Grid2D(3., 40)
        self.assertTrue(abs(integrate(grid, np.ones(grid.shape)) - 36.)
                        < 1e-12)


class TestField(unittest.TestCase):

    def setUp(self):
        self.grid = Grid2D(8., 256)

    def test_invariants(self):
        grid = self.grid
        self.assertRaises(FieldError, Field2D, grid, -np.ones(grid.shape))
        self.assertRaises(FieldError, Field2D, grid, np.ones((3, 3)))
        self.assertRaises(FieldError, Field2D, grid,
                          np.full(grid.shape, np.nan))
        self.assertRaises(NormalizationError, Field2D, grid,
                          np.ones(grid.shape), normalized=True)
        u = Field2D(grid, np.ones(grid.shape))
        self.assertEqual(u.data[0, 5], 0.)
        self.assertRaises(ValueError, u.data.__setitem__, (1, 1), 2.)
        zero = Field2D(grid, np.zeros(grid.shape))
        self.assertRaises(FieldError, normalize, zero)

    def test_integration_by_parts(self):
        u = gaussian(self.grid, (0.3, -0.2), 1.3)
        lhs = inner(self.grid, -laplacian(self.grid, u.data), u.data)
        rhs = dirichlet_energy(self.grid, u.data)
        self.assertTrue(abs(lhs - rhs) < 1e-10 * rhs)
        gx, gy = forward_gradient(self.grid, u.data)
        self.assertEqual(gx.shape, (255, 256))
        self.assertEqual(gy.shape, (256, 255))

    def test_gaussian_energy(self):
        u = gaussian(self.grid)
        for a in (0., 1., 5.):
            e = energy_breakdown(u, FREE, a)
            self.assertTrue(abs(e.total - (1. - a / (4 * math.pi))) < 1e-3)
            self.assertEqual(e.total,
                             e.kinetic + e.potential - e.interaction)
            self.assertFalse(e.warning)
        e = energy_breakdown(u, HARMONIC, 0.)
        self.assertTrue(abs(e.total - 2.) < 1e-3)

    def test_energy_errors(self):
        u = Field2D(self.grid, 2. * gaussian(self.grid).data)
        self.assertRaises(NormalizationError, energy_breakdown, u, FREE, 1.)
        self.assertRaises(InvalidParameter, energy_breakdown,
                          gaussian(self.grid), FREE, -1.)

    def test_boundary_warning(self):
        wide = gaussian(self.grid, width=4.)
        self.assertTrue(boundary_mass(wide.grid, wide.data) > 1e-6)
        self.assertTrue(energy_breakdown(wide, FREE, 0.).warning)

    def test_gn_ratio(self):
        ratio = gn_ratio(gaussian(self.grid))
        self.assertTrue(abs(ratio - 4 * math.pi) < 1e-3 * 4 * math.pi)
        self.assertRaises(FieldError, gn_ratio,
                          Field2D(self.grid, np.zeros(self.grid.shape)))

        q = profile()
        astar = critical_constants(q).astar
        grid = self.grid
        for beta in (1., 1.5):
            ratio = gn_ratio(townes_field(grid, q, scale=beta))
            self.assertTrue(abs(ratio - astar) < 1e-2 * astar)

        bump = normalize(sample(grid, lambda x, y: np.exp(
            -x ** 2 / 2. - y ** 2 / 3. - 0.3 * x * y) * (1 + 0.2 * x ** 2)))
        self.assertTrue(gn_ratio(bump) >= astar * (1 - 1e-2))

    def test_gn_ratio_random_fields(self):
        astar = critical_constants(profile()).astar
        grid = self.grid
        rng = np.random.RandomState(7)
        xx, yy = grid.mesh()
        for _ in range(100):
            data = np.zeros(grid.shape)
            for _ in range(rng.randint(1, 4)):
                cx, cy = rng.uniform(-3., 3., 2)
                width = rng.uniform(0.7, 2.)
                data += rng.uniform(0.2, 1.) * np.exp(
                    -((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * width ** 2))
            u = normalize(Field2D(grid, data))
            self.assertTrue(gn_ratio(u) >= astar * (1 - 1e-2))

    def test_gn_ratio_dilation_invariance(self):
        q = profile()
        grid = Grid2D(14., 1025)
        unit = gn_ratio(townes_field(grid, q, scale=1.))
        for beta in (0.5, 0.7, 1.4, 2.):
            ratio = gn_ratio(townes_field(grid, q, scale=beta))
            self.assertTrue(abs(ratio / unit - 1.) <= 1e-3)

    def test_moments(self):
        u = gaussian(self.grid, (1., -0.5), 0.8)
        cx, cy = centroid(u)
        self.assertAlmostEqual(cx, 1., places=10)
        self.assertAlmostEqual(cy, -0.5, places=10)
        self.assertTrue(abs(spread(u, (1., -0.5)) - 0.8) < 1e-6)
        self.assertTrue(spread(u, (0., 0.)) > 0.8)

    def test_distance(self):
        u = gaussian(self.grid)
        self.assertEqual(h1_l2_distance(u, u), (0., 0.))
        zero = Field2D(self.grid, np.zeros(self.grid.shape))
        l2, h1 = h1_l2_distance(u, zero)
        self.assertAlmostEqual(l2, 1., places=10)
        self.assertTrue(h1 > l2)

        v = gaussian(self.grid, (1., 0.))
        l2, _ = h1_l2_distance(u, v)
        self.assertTrue(abs(l2 ** 2 - (2. - 2. * math.exp(-0.25))) < 1e-3)
        self.assertRaises(GridMismatchError, h1_l2_distance, u,
                          gaussian(Grid2D(8., 64)))

    def test_rescale_identity(self):
        u = gaussian(self.grid, (0.5, 0.), 1.2)
        w = rescale_extract(u, (0., 0.), 1., self.grid)
        self.assertTrue(np.max(np.abs(w.data - u.data)) < 1e-12)

    def test_rescale_inverse(self):
        eps = 0.5
        center = (1., -0.5)
        source = Grid2D(8., 257)
        u = gaussian(source, center, eps)
        # nodes of out land on nodes of source
        out = Grid2D(4., 65)
        w = rescale_extract(u, center, eps, out)
        self.assertTrue(w.normalized)
        expected = gaussian(out)
        self.assertTrue(np.max(np.abs(w.data - expected.data)) < 1e-3)

        self.assertRaises(WindowError, rescale_extract, u, center, 2., out)
        self.assertRaises(InvalidParameter, rescale_extract, u, center, 0.,
                          out)

    def test_interpolate(self):
        u = gaussian(self.grid)
        self.assertTrue(interpolate(u, self.grid) is u)
        small = Grid2D(12., 64)
        v = interpolate(u, small)
        outside = np.abs(small.mesh()[0]) > 8.
        self.assertTrue(np.all(v.data[outside] == 0.))


class TestConvergenceOrder(unittest.TestCase):
    """Halving the spacing divides the error by about four."""

    sizes = (65, 129, 257)

    def _order(self, errors):
        return [math.log(a / b, 2.) for a, b in zip(errors, errors[1:])]

    def test_laplacian(self):
        errors = []
        for n in self.sizes:
            grid = Grid2D(6., n)
            xx, yy = grid.mesh()
            r2 = xx ** 2 + yy ** 2
            exact = (4. * r2 - 4.) * np.exp(-r2)
            inside = (slice(1, -1), slice(1, -1))
            approx = laplacian(grid, np.exp(-r2))
            errors.append(np.max(np.abs(approx[inside] - exact[inside])))
        for order in self._order(errors):
            self.assertTrue(order >= 1.9)

    def test_energy(self):
        a = 5.
        exact = 1. - a / (4 * math.pi)
        errors = []
        for n in self.sizes:
            u = gaussian(Grid2D(8., n))
            errors.append(abs(energy_breakdown(u, FREE, a).total - exact))
        for order in self._order(errors):
            self.assertTrue(order >= 1.9)


class TestPreconditioner(unittest.TestCase):

    def test_inverse(self):
        grid = Grid2D(4., 48)
        u = gaussian(grid, (0.2, 0.1), 0.8).data
        for shift in (1., 7.5):
            precond = DirichletPreconditioner(grid, shift)
            rhs = shift * u - laplacian(grid, u)
            np.testing.assert_allclose(precond(rhs), u, atol=1e-12)
        precond.reshift(2.)
        self.assertEqual(precond.shift, 2.)
        np.testing.assert_allclose(precond(2. * u - laplacian(grid, u)), u,
                                   atol=1e-12)
        self.assertRaises(InvalidParameter, DirichletPreconditioner, grid,
                          0.)
