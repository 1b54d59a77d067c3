from pathlib import Path
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_allclose

from expnls.nls import RadialProfile, ground_profile_2d
from expnls.nls.profile import Shot, ShootingError, classify, load_profile, save_profile

TOWNES_THETA0 = 2.2062008647


class TestShooting(unittest.TestCase):
    def test_classification_of_bracket(self):
        self.assertEqual(classify(1.0), Shot.UNDERSHOOT)
        self.assertEqual(classify(3.0), Shot.OVERSHOOT)

    def test_invalid_tolerance(self):
        with self.assertRaises(ValueError):
            ground_profile_2d(tolerance=0.0)


class TestGroundProfile(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.profile = ground_profile_2d()

    def test_central_value(self):
        self.assertAlmostEqual(self.profile.theta0, TOWNES_THETA0, delta=1e-8)

    def test_positive_and_decreasing(self):
        r = np.linspace(0.0, 15.0, 301)
        values = self.profile(r)
        self.assertTrue(np.all(values > 0))
        self.assertTrue(np.all(np.diff(values) < 0))

    def test_tail_is_continuous(self):
        r = self.profile.r_match
        below, above = self.profile(np.array([r - 1e-9, r + 1e-9]))
        self.assertAlmostEqual(below, above, delta=1e-9)

    def test_sample_2d_is_radial(self):
        x = np.array([3.0, 0.0, -3.0])
        y = np.array([4.0, 5.0, -4.0])
        values = self.profile.sample_2d(x, y)
        assert_allclose(values, values[0])

    def test_save_and_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "profile.txt"
            save_profile(path, self.profile)
            loaded = load_profile(path)
        assert_allclose(loaded.r, self.profile.r, rtol=0, atol=0)
        assert_allclose(loaded.theta, self.profile.theta, rtol=0, atol=0)


class TestRadialProfile(unittest.TestCase):
    def test_radii_must_start_at_zero(self):
        with self.assertRaises(ShootingError) as context:
            RadialProfile(r=[0.1, 0.2, 0.3], theta=[1.0, 0.9, 0.8])
        self.assertIn("start at 0", str(context.exception))

    def test_radii_must_increase(self):
        with self.assertRaises(ShootingError):
            RadialProfile(r=[0.0, 0.2, 0.2], theta=[1.0, 0.9, 0.8])
