import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

from expnls.nls import ContourConfig, phi, phi_values
from expnls.nls.phi import ContourRadiusError, contour_eval, phi_direct


class TestPhiFunctions(unittest.TestCase):
    def test_values_at_zero(self):
        """Test that phi_j(0) = 1/j!."""
        values = phi_direct(4, np.array([0.0]))[:, 0]
        assert_allclose(values, [1 / math.factorial(j) for j in range(5)])
        for j in range(5):
            with self.subTest(j=j):
                self.assertAlmostEqual(phi(j, 0.0).real, 1 / math.factorial(j), delta=1e-15)

    def test_closed_forms(self):
        for z in (2.0, -1.5, 0.3 + 2j, 7j):
            with self.subTest(z=z):
                self.assertAlmostEqual(phi(1, z), (np.exp(z) - 1) / z, delta=1e-13)
                self.assertAlmostEqual(phi(2, z), (np.exp(z) - 1 - z) / z**2, delta=1e-13)

    def test_small_arguments_keep_accuracy(self):
        """Test that the contour route avoids the cancellation of the recurrence."""
        z = 1e-8j
        taylor = 1 / 6 + z / 24 + z**2 / 120
        self.assertAlmostEqual(abs(phi(3, z) - taylor), 0.0, delta=1e-14)

    def test_contour_agrees_with_recurrence_on_annulus(self):
        """Test that both routes agree on 0.4 <= |z| <= 0.6."""
        radius = np.linspace(0.4, 0.6, 7)
        angle = np.linspace(0.0, 2 * np.pi, 11, endpoint=False)
        z = (radius[:, None] * np.exp(1j * angle[None, :])).reshape(-1)
        contour = phi_values(5, z, regime="contour")
        direct = phi_values(5, z, regime="direct")
        assert_allclose(contour, direct, rtol=0, atol=1e-11)

    def test_direct_route_inside_unit_disk(self):
        """Test high-index phi between the switching radius and |z| = 1 against a wider contour."""
        radius = np.linspace(0.26, 0.95, 6)
        angle = np.linspace(0.0, 2 * np.pi, 9, endpoint=False)
        z = (radius[:, None] * np.exp(1j * angle[None, :])).reshape(-1)
        wide = ContourConfig(points=128, radius=2.0, switch_radius=1.5)
        reference = phi_values(6, z, contour=wide, regime="contour")
        assert_allclose(phi_direct(6, z), reference, rtol=0, atol=1e-14)

    def test_direct_route_keeps_input_shape(self):
        z = np.array([[0.5j, 3.0], [0.0, -1.0j]])
        values = phi_direct(2, z)
        self.assertEqual(values.shape, (3, 2, 2))
        self.assertAlmostEqual(values[2, 0, 1], (np.exp(3.0) - 4.0) / 9.0, delta=1e-14)
        self.assertAlmostEqual(values[1, 0, 0], (np.exp(0.5j) - 1) / 0.5j, delta=1e-15)

    def test_auto_regime_shape(self):
        z = np.array([[0.0, 0.1j], [1.0j, 3.0]])
        values = phi_values(3, z)
        self.assertEqual(values.shape, (4, 2, 2))
        assert_allclose(values, phi_values(3, z, regime="direct"), atol=1e-12)

    def test_unknown_regime(self):
        with self.assertRaises(ValueError):
            phi_values(2, 0.1, regime="taylor")

    def test_negative_index(self):
        with self.assertRaises(ValueError):
            phi(-1, 0.5)


class TestContour(unittest.TestCase):
    def test_reproduces_exponential(self):
        value = contour_eval(np.exp, 0.2 + 0.1j)
        self.assertIsInstance(value, complex)
        self.assertAlmostEqual(value, np.exp(0.2 + 0.1j), delta=1e-15)

    def test_rejects_points_outside_circle(self):
        """Test that arguments on or outside the contour raise."""
        with self.assertRaises(ContourRadiusError) as context:
            contour_eval(np.exp, np.array([0.1, 1.0]))
        self.assertIn("|z| < 1.0", str(context.exception))

    def test_config_validation(self):
        with self.assertRaises(ValueError):
            ContourConfig(points=2)
        with self.assertRaises(ValueError):
            ContourConfig(radius=1.0, switch_radius=1.0)
        config = ContourConfig()
        self.assertEqual((config.points, config.radius, config.switch_radius), (64, 1.0, 0.25))
