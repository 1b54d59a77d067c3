import unittest

import numpy as np
from numpy.testing import assert_allclose

from expnls.nls import (
    PROBLEMS,
    ProblemError,
    RotatingTrap,
    abs_sine_1d,
    bec_2d,
    cubic_plane_2d,
    cubic_quintic_1d,
    cubic_soliton_1d,
    ground_profile_2d,
    make_grid,
    rotating_gpe_2d,
    thomas_fermi_initial,
)
from expnls.nls.problems import (
    CubicQuinticNonlinearity,
    PowerNonlinearity,
    Problem,
    soliton_profile,
)
from expnls.nls.spectral import laplacian_symbol, lp_values

# sixth-order central difference weights for d/dt
CENTRAL_WEIGHTS = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0


def pde_residual(problem: Problem, t: float, dt: float = 1e-3) -> np.ndarray:
    """d_t psi_ex - (i nu Laplacian psi_ex + N_w(t, psi_ex)) on the nodes."""
    samples = [problem.exact_at(t + j * dt) for j in range(-3, 4)]
    time_derivative = sum(w * s for w, s in zip(CENTRAL_WEIGHTS, samples)) / dt
    psi = problem.exact_at(t)
    grid = problem.grid
    laplacian = grid.ifft(laplacian_symbol(grid) * grid.fft(psi))
    return time_derivative - (1j * problem.nu * laplacian + problem.nonlinear_term(t, psi))


class TestNonlinearities(unittest.TestCase):
    def test_energy_density_is_antiderivative(self):
        rho = np.linspace(0.0, 2.0, 5)
        eps = 1e-6
        for law in (PowerNonlinearity(beta=-8.0), PowerNonlinearity(beta=2.0, kappa=2), CubicQuinticNonlinearity(-2.0, 0.5)):
            with self.subTest(law=law):
                derivative = (law.energy_density(rho + eps) - law.energy_density(rho - eps)) / (2 * eps)
                assert_allclose(derivative, law.phase(rho), atol=1e-7)
                self.assertEqual(law.energy_density(np.zeros(1))[0], 0.0)

    def test_kappa_validation(self):
        with self.assertRaises(ProblemError):
            PowerNonlinearity(beta=1.0, kappa=0)


class TestExactSolutions(unittest.TestCase):
    def test_cubic_soliton_solves_equation(self):
        problem = cubic_soliton_1d(make_grid(1, [(-15.0, 15.0, 9)]))
        for t in (0.0, 0.4):
            with self.subTest(t=t):
                self.assertLess(np.max(np.abs(pde_residual(problem, t))), 1e-5)

    def test_soliton_amplitude(self):
        """Test that the soliton peak is sqrt(2a/q), which equals 2a/q on a = q^2/16."""
        x = np.linspace(-1, 1, 3)
        self.assertAlmostEqual(abs(soliton_profile(0.0, x, 8.0, 4.0, 0.5, 0.0)[1]), 1.0, delta=1e-15)
        self.assertAlmostEqual(abs(soliton_profile(0.0, x, 4.0, 2.0, 0.0, 0.0)[1]), 1.0, delta=1e-15)
        self.assertAlmostEqual(abs(soliton_profile(0.0, x, 2.0, 4.0, 0.0, 0.0)[1]), 2.0, delta=1e-15)

    def test_cubic_quintic_solves_equation(self):
        problem = cubic_quintic_1d(make_grid(1, [(-16.0, 16.0, 9)]))
        for t in (0.0, 0.7, 2.0):
            with self.subTest(t=t):
                self.assertLess(np.max(np.abs(pde_residual(problem, t))), 1e-5)

    def test_cubic_quintic_validation(self):
        grid = make_grid(1, [(-16.0, 16.0, 6)])
        with self.assertRaises(ProblemError) as context:
            cubic_quintic_1d(grid, e_c=1.0)
        self.assertIn("E_c < 0", str(context.exception))
        with self.assertRaises(ProblemError) as context:
            cubic_quintic_1d(grid, g2=1.0)
        self.assertIn("1 - b > 0", str(context.exception))

    def test_dimension_checks(self):
        plane = make_grid(2, [(-4.0, 4.0, 4)])
        line = make_grid(1, [(-4.0, 4.0, 4)])
        for builder, grid in ((cubic_soliton_1d, plane), (abs_sine_1d, plane), (cubic_plane_2d, line)):
            with self.subTest(builder=builder.__name__):
                with self.assertRaises(ProblemError):
                    builder(grid)

    def test_abs_sine_has_no_exact_solution(self):
        problem = abs_sine_1d(make_grid(1, [(-np.pi, np.pi, 7)]))
        self.assertFalse(problem.has_exact)
        with self.assertRaises(ProblemError):
            problem.exact_at(1.0)
        assert_allclose(problem.initial.real, np.abs(np.sin(problem.grid.mesh()[0])))


class TestPlaneProblem(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.profile = ground_profile_2d()

    def test_stationary_state_solves_equation(self):
        problem = cubic_plane_2d(make_grid(2, [(-16.0, 16.0, 8)]), self.profile)
        x, y = problem.grid.mesh()
        inner = np.hypot(x, y) < 5.0
        residual = pde_residual(problem, 0.3)
        self.assertLess(np.max(np.abs(residual[inner])), 1e-4)

    def test_exact_solution_is_phase_rotation(self):
        problem = cubic_plane_2d(make_grid(2, [(-16.0, 16.0, 6)]), self.profile)
        assert_allclose(problem.exact_at(np.pi), -problem.initial, atol=1e-15)


class TestRotatingCondensate(unittest.TestCase):
    def setUp(self):
        self.trap = RotatingTrap(gamma_x=1.05, gamma_y=0.95, omega=0.9, delta=32.0)
        self.grid = make_grid(2, [(-16.0, 16.0, 7)])

    def test_thomas_fermi_profile(self):
        with self.assertLogs("expnls.nls.problems", level="INFO") as logs:
            field = thomas_fermi_initial(self.trap, 1000.0, self.grid)
        self.assertIn("chemical potential", logs.output[0])
        self.assertAlmostEqual(lp_values(self.grid, field.values), 1.0, delta=1e-13)
        self.assertTrue(np.all(field.values.real >= 0))
        self.assertEqual(np.abs(field.values[0, 0]), 0.0)

    def test_thomas_fermi_support_radius(self):
        """Test that psi_0 vanishes beyond sqrt(2 mu)/gamma_x on the x axis and not before."""
        beta = 1000.0
        field = thomas_fermi_initial(self.trap, beta, self.grid)
        x, y = self.grid.mesh()
        center = (x == 0.0) & (y == 0.0)
        # V_c vanishes at the center, so mu = beta psi_0(0)^2
        mu = beta * float(np.abs(field.values[center][0])) ** 2
        radius = np.sqrt(2.0 * mu) / self.trap.gamma_x
        on_axis = y == 0.0
        support = np.abs(x[on_axis & (np.abs(field.values) > 0)])
        dx = self.grid.axes[0].spacing
        self.assertLessEqual(np.max(support), radius + 1e-9)
        self.assertGreater(np.max(support), radius - dx)

    def test_isotropic_trap_gives_radial_profile(self):
        """Test that psi_0 is unchanged by a quarter turn of the grid for gamma_x = gamma_y."""
        trap = RotatingTrap(gamma_x=1.0, gamma_y=1.0, omega=0.9, delta=32.0)
        field = thomas_fermi_initial(trap, 1000.0, self.grid)
        # drop the x = -16 row and column so the remaining nodes are symmetric about 0
        inner = field.values[1:, 1:]
        assert_allclose(np.rot90(inner), inner, rtol=0, atol=1e-13)
        assert_allclose(inner.T, inner, rtol=0, atol=1e-13)

    def test_thomas_fermi_support_must_fit(self):
        trap = RotatingTrap(gamma_x=1.05, gamma_y=0.95, omega=0.9, delta=12.0)
        grid = make_grid(2, [(-6.0, 6.0, 6)])
        with self.assertRaises(ProblemError) as context:
            thomas_fermi_initial(trap, 1000.0, grid)
        self.assertIn("plateau", str(context.exception))

    def test_thomas_fermi_needs_repulsion(self):
        with self.assertRaises(ProblemError):
            thomas_fermi_initial(self.trap, -1.0, self.grid)

    def test_grid_must_match_trap(self):
        grid = make_grid(2, [(-8.0, 8.0, 6)])
        with self.assertRaises(ProblemError) as context:
            rotating_gpe_2d(self.trap, 1000.0, np.zeros(grid.shape), grid)
        self.assertIn("does not match trap size", str(context.exception))

    def test_bec_problem(self):
        problem = bec_2d(self.grid, self.trap)
        self.assertEqual(problem.nu, 0.5)
        self.assertEqual(problem.rotation, -0.9)
        self.assertFalse(problem.has_exact)
        self.assertEqual(problem.nonlinear_term(0.0, np.zeros(self.grid.shape)).shape, self.grid.shape)


class TestRegistry(unittest.TestCase):
    def test_entries(self):
        self.assertEqual(
            set(PROBLEMS),
            {"cubic_soliton_1d", "abs_sine_1d", "cubic_quintic_1d", "cubic_plane_2d", "bec_2d"},
        )
        self.assertEqual(PROBLEMS["bec_2d"].dims, 2)
        self.assertEqual(PROBLEMS["bec_2d"].nu, 0.5)

    def test_one_dimensional_builders(self):
        grid = make_grid(1, [(-15.0, 15.0, 6)])
        for name in ("cubic_soliton_1d", "abs_sine_1d", "cubic_quintic_1d"):
            entry = PROBLEMS[name]
            with self.subTest(name=name):
                problem = entry.builder(grid)
                self.assertEqual(problem.nu, entry.nu)
                self.assertEqual(problem.initial.shape, grid.shape)

    def test_problem_validation(self):
        grid = make_grid(1, [(-1.0, 1.0, 3)])
        with self.assertRaises(ProblemError) as context:
            Problem(name="bad", grid=grid, nu=1.0, nonlinearity=PowerNonlinearity(1.0), initial=np.zeros(4))
        self.assertIn("does not match", str(context.exception))
        with self.assertRaises(ProblemError):
            Problem(name="bad", grid=grid, nu=0.0, nonlinearity=PowerNonlinearity(1.0), initial=np.zeros(8))
        with self.assertRaises(ProblemError):
            Problem(name="bad", grid=grid, nu=1.0, nonlinearity=PowerNonlinearity(1.0), initial=np.full(8, np.nan))
