import math
import unittest
import numpy as np
from scipy.integrate import dblquad, quad
from gfbmlab.covariance import (c_t, cov_matrix, driver_cov, ds_table, increment_cov, k_diag, k_matrix, k_second, kernel,
                                kernel_energy, mixed_fd, phi, psi, psi_ds)
from gfbmlab.errors import DomainError, NumericalError
from gfbmlab.model import make_params
from gfbmlab.models import QuadratureSpec
from gfbmlab.quadrature import integrate, pair_integral, pow_diff, power_product
from gfbmlab.specialfn import beta

GRID = ((-0.3, 0.2), (0.2, 0.3), (0.7, 0.5), (0.1, 0.5), (0.4, 0.9), (-0.45, 0.0))
TIGHT = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11)

class QuadratureTest(unittest.TestCase):
    def test_algebraic_weights(self):
        self.assertAlmostEqual(integrate(lambda u: 1.0, 0.0, 1.0, None, -0.5), 2.0, delta=1e-10)
        ts = QuadratureSpec(singular_endpoint_rule="tanh-sinh")
        self.assertAlmostEqual(integrate(lambda u: 1.0, 0.0, 1.0, ts, -0.5), 2.0, delta=1e-8)

    def test_power_product_is_beta(self):
        for a, g in ((0.3, 0.2), (-0.4, 0.7), (0.8, 0.0)):
            self.assertAlmostEqual(power_product(0.0, 1.0, 1.0, a, 1.0, 0.0, g), beta(1 - g, a + 1), delta=1e-9)

    def test_pow_diff_no_cancellation(self):
        x, u, a = 1e-6, 1e3, 0.3
        self.assertAlmostEqual(pow_diff(x, 0.0, u, a) / (a * u ** (a - 1) * x), 1.0, delta=1e-6)

    def test_empty_interval(self):
        self.assertEqual(integrate(math.exp, 1.0, 1.0), 0.0)
        self.assertEqual(pair_integral(1.0, 1.0, 1.0, 0.3, 0.2), 0.0)

    def test_non_finite_raises(self):
        with self.assertRaises(NumericalError):
            integrate(lambda u: float("nan"), 0.0, 1.0)

class CovarianceTest(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.params = {ag: make_params(*ag) for ag in GRID}

    def test_unit_variance(self):
        for ag, p in self.params.items():
            self.assertAlmostEqual(psi(p, 1.0, 1.0), 1.0, delta=1e-8, msg=str(ag))

    def test_self_similarity(self):
        for ag, p in self.params.items():
            for s, t, k in ((0.3, 0.8, 2.5), (0.5, 0.6, 0.2)):
                ref = k ** (2 * p.hurst) * psi(p, s, t)
                self.assertAlmostEqual(psi(p, k * s, k * t), ref, delta=1e-7 * max(1.0, abs(ref)), msg=str(ag))

    def test_fbm_reduction(self):
        rng = np.random.default_rng(3)
        for a in (-0.3, 0.2, 0.4):
            p = make_params(a, 0.0)
            for s, t in rng.uniform(0.05, 2.0, size=(6, 2)):
                self.assertAlmostEqual(phi(p, s, t), abs(t - s) ** (2 * p.hurst), delta=1e-7)

    def test_phi_psi_consistency(self):
        for ag in ((0.2, 0.3), (0.1, 0.5), (0.7, 0.5)):
            p = self.params[ag]
            s, t = 0.35, 0.9
            self.assertAlmostEqual(phi(p, s, t), psi(p, t, t) + psi(p, s, s) - 2 * psi(p, s, t), delta=1e-7)
            self.assertEqual(phi(p, s, t), phi(p, t, s))

    def test_origin(self):
        p = self.params[(0.2, 0.3)]
        self.assertEqual(psi(p, 0.0, 0.7), 0.0)
        self.assertEqual(phi(p, 0.4, 0.4), 0.0)
        with self.assertRaises(DomainError):
            psi(p, -0.1, 0.5)

    def test_increment_cov_diagonal(self):
        p = self.params[(0.2, 0.3)]
        self.assertEqual(increment_cov(p, 0.3, 0.3, 0.1), phi(p, 0.3, 0.3 + 0.1))

    def test_driver_cov_brownian(self):
        self.assertAlmostEqual(driver_cov(1.0, 0.0, 0.0, 0.4, 0.9), 0.4, delta=1e-12)
        self.assertEqual(driver_cov(1.0, 0.3, 0.2, 0.0, 0.5), 0.0)

class KernelTest(unittest.TestCase):
    def test_values(self):
        p = make_params(0.3, 0.2)
        self.assertEqual(kernel(p, 1.0, 2.0).value, 0.0)
        self.assertAlmostEqual(kernel(p, 1.0, -1.0).value, 2 ** 0.3 - 1, delta=1e-15)
        self.assertEqual(kernel(p, 1.0, 1.0).derivative, math.inf)
        self.assertTrue(kernel(p, 1.0, 0.0).singular)
        with self.assertRaises(DomainError):
            kernel(p, 0.0, 0.5)

    def test_c_t_region(self):
        self.assertTrue(math.isnan(c_t(make_params(0.3, 0.2), 1.0)))
        self.assertTrue(math.isinf(kernel_energy(make_params(0.3, 0.2), 1.0)))

    def test_c_t_normalizes_kernel_derivative(self):
        p = make_params(0.7, 0.5)
        for t in (1.0, 2.0, 0.3):
            self.assertAlmostEqual(kernel_energy(p, t) / c_t(p, t) ** 2, 1.0, delta=1e-7)

class SecondDerivativeTest(unittest.TestCase):
    def test_matches_finite_difference(self):
        for ag in ((0.7, 0.5), (0.4, 0.3)):
            p = make_params(*ag, TIGHT)
            k = k_second(p, 0.5, 1.0, TIGHT)
            fd = mixed_fd(p, 0.5, 1.0, 1e-3, TIGHT)
            self.assertAlmostEqual(fd / k, 1.0, delta=1e-3, msg=str(ag))

    def test_symmetric(self):
        p = make_params(0.7, 0.5)
        self.assertEqual(k_second(p, 0.3, 0.8), k_second(p, 0.8, 0.3))

    def test_diagonal(self):
        p = make_params(0.7, 0.5)
        self.assertEqual(k_second(p, 0.6, 0.6), k_diag(p, 0.6))
        with self.assertRaises(DomainError):
            k_second(make_params(0.4, 0.3), 0.6, 0.6)
        with self.assertRaises(DomainError):
            k_diag(make_params(0.4, 0.3), 0.6)

    def test_drift_covariance(self):
        # d/dr Psi(r, t) by central difference
        p = make_params(0.7, 0.5)
        h = 1e-4
        fd = (psi(p, 0.5 + h, 1.0) - psi(p, 0.5 - h, 1.0)) / (2 * h)
        self.assertAlmostEqual(psi_ds(p, 0.5, 1.0), fd, delta=1e-5)

    def test_k_matrix_symmetric(self):
        p = make_params(0.7, 0.5)
        m = k_matrix(p, [0.25, 0.5, 0.75])
        np.testing.assert_allclose(m, m.T)
        self.assertTrue(np.all(np.linalg.eigvalsh(m) > 0))

class PanelMomentTest(unittest.TestCase):
    """Integrals of K over panels, as the Wiener-Hopf solve uses them, against direct quadrature of K."""
    @classmethod
    def setUpClass(cls):
        cls.p = make_params(0.4, 0.3)

    def test_drift_covariance_region_two(self):
        h = 1e-4
        fd = (psi(self.p, 0.5 + h, 1.0) - psi(self.p, 0.5 - h, 1.0)) / (2 * h)
        self.assertAlmostEqual(psi_ds(self.p, 0.5, 1.0), fd, delta=1e-5)

    def test_single_panel(self):
        direct = quad(lambda s: k_second(self.p, s, 1.0), 0.25, 0.5, epsabs=1e-12, epsrel=1e-10)[0]
        self.assertAlmostEqual(psi_ds(self.p, 1.0, 0.5) - psi_ds(self.p, 1.0, 0.25), direct, delta=1e-7)

    def test_panel_pair(self):
        direct = dblquad(lambda v, u: k_second(self.p, u, v), 0.25, 0.5, 0.75, 1.0, epsabs=1e-10, epsrel=1e-8)[0]
        self.assertAlmostEqual(increment_cov(self.p, 0.25, 0.75, 0.25), direct, delta=1e-7)

    def test_ds_table(self):
        tab = ds_table(self.p, 4)
        self.assertEqual(tab.shape, (5, 5))
        np.testing.assert_array_equal(tab[0], 0.0)
        self.assertEqual(tab[3, 2], 0.0)
        self.assertAlmostEqual(tab[2, 4], psi_ds(self.p, 4.0, 2.0), delta=1e-7)
        self.assertAlmostEqual(tab[3, 3], psi_ds(self.p, 3.0, 3.0), delta=1e-7)

class MatrixTest(unittest.TestCase):
    def test_cov_matrix(self):
        p = make_params(0.2, 0.3)
        t = np.linspace(0.0, 1.0, 9)
        m = cov_matrix(p, t)
        np.testing.assert_allclose(m, m.T)
        np.testing.assert_array_equal(m[0], 0.0)
        np.testing.assert_allclose(np.diag(m)[1:], t[1:] ** (2 * p.hurst), rtol=1e-8)
        self.assertAlmostEqual(m[3, 7], psi(p, t[3], t[7]), delta=1e-8)
        with self.assertRaises(ValueError):
            m[1, 1] = 0.0
        self.assertIs(cov_matrix(p, t), m)

    def test_unknown_kind(self):
        with self.assertRaises(DomainError):
            cov_matrix(make_params(0.2, 0.3), [0.0, 0.5, 1.0], kind="other")

if __name__ == "__main__":
    unittest.main()
