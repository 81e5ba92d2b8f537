import math
import unittest
import numpy as np
from gfbmlab.covariance import cov_matrix, driver_cov
from gfbmlab.errors import DomainError, NumericalError
from gfbmlab.model import make_params, make_rl_params
from gfbmlab.models import FouParams, ShotNoiseParams
from gfbmlab.simulate import (factorize, fou_from_path, make_grid, normals, sample_bm, sample_bundle, sample_fou,
                              sample_gfbm, sample_mixed, sample_rl_gfbm, sample_shot_noise_prelimit,
                              shot_noise_variance, uniform_grid)

def cov_z(emp, ref, n, var_i, var_j):
    # standard error of an empirical covariance entry for Gaussian data
    return abs(emp - ref) / math.sqrt((var_i * var_j + ref ** 2) / n)

class GridTest(unittest.TestCase):
    def test_uniform(self):
        g = uniform_grid(2.0, 8)
        self.assertEqual(g.n, 8)
        self.assertEqual(g.points[-1], 2.0)
        self.assertTrue(g.uniform)
        self.assertAlmostEqual(g.mesh, 0.25)

    def test_make_grid_validation(self):
        self.assertFalse(make_grid([0.0, 0.1, 0.5]).uniform)
        for bad in ([0.0], [0.1, 0.5], [0.0, 0.5, 0.5]):
            with self.assertRaises(DomainError):
                make_grid(bad)

class FactorizeTest(unittest.TestCase):
    def test_positive_definite(self):
        cov = np.array([[2.0, 0.5], [0.5, 1.0]])
        f, delta = factorize(cov)
        self.assertEqual(delta, 0.0)
        np.testing.assert_allclose(f @ f.T, cov)

    def test_jitter_on_singular(self):
        f, delta = factorize(np.ones((3, 3)))
        self.assertEqual(delta, 1e-12)

    def test_indefinite_raises(self):
        with self.assertRaises(NumericalError) as cm:
            factorize(np.array([[1.0, 2.0], [2.0, 1.0]]))
        self.assertAlmostEqual(cm.exception.estimate, -1.0)

class DrawTest(unittest.TestCase):
    def test_seeded_rows_independent_of_batch_size(self):
        np.testing.assert_array_equal(normals(5, 3, 4), normals(5, 7, 4)[:3])
        self.assertFalse(np.array_equal(normals(5, 2, 4), normals(6, 2, 4)))

    def test_reproducible_paths(self):
        p = make_params(0.2, 0.3)
        g = uniform_grid(1.0, 8)
        a, b = sample_gfbm(p, g, 5, 11), sample_gfbm(p, g, 5, 11)
        np.testing.assert_array_equal(a.values, b.values)
        self.assertEqual(a.values.shape, (5, 9))
        np.testing.assert_array_equal(a.values[:, 0], 0.0)
        self.assertEqual(len(a), 5)
        self.assertEqual(a[2].index, 2)
        np.testing.assert_array_equal(a[2].values, a.values[2])

class ExactnessTest(unittest.TestCase):
    """Empirical covariances on a 16-point grid against the analytic matrix."""
    N = 10_000

    def check(self, batch, cov):
        v = batch.values[:, 1:]
        emp = v.T @ v / self.N
        c = cov[1:, 1:]
        d = np.diag(c)
        z = np.abs(emp - c) / np.sqrt((np.outer(d, d) + c ** 2) / self.N)
        self.assertLess(float(z.max()), 4.5)

    def test_gfbm(self):
        g = uniform_grid(1.0, 15)
        for ag in ((0.0, 0.0), (0.7, 0.5), (0.2, 0.3)):
            p = make_params(*ag)
            self.check(sample_gfbm(p, g, self.N, 2024), cov_matrix(p, g.points))

    def test_rl(self):
        g = uniform_grid(1.0, 15)
        p = make_rl_params(-0.2, 0.4)
        self.check(sample_rl_gfbm(p, g, self.N, 7), cov_matrix(p, g.points, kind="rl_gfbm"))

    def test_bm(self):
        g = make_grid([0.0, 0.1, 0.35, 0.5, 1.0])
        self.check(sample_bm(g, self.N, 3), np.minimum.outer(g.points, g.points))

class BundleTest(unittest.TestCase):
    def test_driver_correlation(self):
        p = make_params(0.2, 0.3)
        g = uniform_grid(1.0, 8)
        n = 4000
        bd = sample_bundle(p, g, n, 9, rho=0.3)
        b_T = bd.b_increments.sum(axis=1)
        x_T = bd.x.values[:, -1]
        ref = driver_cov(p.c, p.alpha, p.gamma, 1.0, 1.0)
        self.assertLess(cov_z(float(np.mean(x_T * b_T)), ref, n, 1.0, 1.0), 4.5)
        self.assertLess(cov_z(float(np.mean(x_T * bd.b_tilde.values[:, -1])), 0.0, n, 1.0, 1.0), 4.5)
        self.assertEqual(bd.y.label, "mixed")
        with self.assertRaises(DomainError):
            sample_bundle(p, g, 2, 0, rho=1.0)

    def test_mixed_variance(self):
        p = make_params(0.4, 0.3)
        n = 4000
        y = sample_mixed(p, uniform_grid(1.0, 8), n, 4)
        var = float(np.var(y.values[:, -1], ddof=1))
        self.assertLess(abs(var - 2.0) / (2.0 * math.sqrt(2 / n)), 4.5)

class FouTest(unittest.TestCase):
    def test_deterministic_part(self):
        g = uniform_grid(2.0, 20)
        x = np.random.default_rng(0).standard_normal(21)
        z = fou_from_path(FouParams(a=1.5, m=0.4, nu=0.0, z0=2.0), g, x)
        e = np.exp(-1.5 * g.points)
        np.testing.assert_allclose(z, 2.0 * e + 0.4 * (1 - e), rtol=1e-14)

    def test_small_rate_limit(self):
        g = uniform_grid(1.0, 16)
        x = np.random.default_rng(1).standard_normal((3, 17))
        z = fou_from_path(FouParams(a=1e-8, nu=2.0, z0=0.5), g, x)
        np.testing.assert_allclose(z, 0.5 + 2.0 * x, atol=1e-6)

    def test_trapezoid_refines(self):
        # same X on nested grids; differences shrink as the mesh halves
        p = make_params(0.2, 0.3)
        fine = uniform_grid(1.0, 64)
        x = sample_gfbm(p, fine, 20, 5).values
        fou = FouParams(a=2.0)
        ref = fou_from_path(fou, fine, x)[:, -1]
        errs = [np.mean(np.abs(fou_from_path(fou, uniform_grid(1.0, n), x[:, ::64 // n])[:, -1] - ref))
                for n in (8, 16, 32)]
        self.assertTrue(errs[0] > errs[1] > errs[2])

    def test_sample_fou_shape(self):
        b = sample_fou(make_params(0.2, 0.3), FouParams(a=1.0), uniform_grid(1.0, 8), 3, 0)
        self.assertEqual(b.values.shape, (3, 9))
        self.assertEqual(b.label, "fou")

class ShotNoiseTest(unittest.TestCase):
    def test_variance_matches_simulation(self):
        sn = ShotNoiseParams(rate=50.0, alpha=0.3, gamma=0.3, epsilon=0.1, window=200.0)
        n = 400
        b = sample_shot_noise_prelimit(sn, uniform_grid(1.0, 4), n, 17)
        ref = shot_noise_variance(sn, 1.0)
        var = float(np.var(b.values[:, -1], ddof=1))
        self.assertLess(abs(var - ref) / (ref * math.sqrt(2 / n)), 4.0)

    def test_scaling_invariance(self):
        # window proportional to 1/epsilon keeps Var(eps^H Z(1/eps)) fixed
        v = [shot_noise_variance(ShotNoiseParams(50.0, 0.3, 0.3, e, 4.0 / e), 1.0) for e in (1e-2, 5e-3, 2.5e-3)]
        np.testing.assert_allclose(v[1:], v[0], rtol=1e-6)

    def test_marks_off(self):
        sn = ShotNoiseParams(50.0, 0.3, 0.3, 0.1, 200.0, noise_scale=0.0)
        self.assertEqual(shot_noise_variance(sn, 1.0), 0.0)
        self.assertEqual(shot_noise_variance(sn, 0.0), 0.0)

    def test_window_too_short(self):
        sn = ShotNoiseParams(50.0, 0.3, 0.3, 0.1, 5.0)
        with self.assertRaises(DomainError):
            sample_shot_noise_prelimit(sn, uniform_grid(1.0, 4), 2, 0)

if __name__ == "__main__":
    unittest.main()
