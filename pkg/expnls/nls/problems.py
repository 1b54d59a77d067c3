from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union
import logging

import numpy as np
from scipy.optimize import brentq

from expnls.nls.potential import (
    LinearOscillatingPotential,
    Potential,
    RotatingTrap,
    RotatingTrapPotential,
    cutoff_chi,
    periodized,
)
from expnls.nls.profile import RadialProfile, ground_profile_2d, load_profile
from expnls.nls.spectral import Grid, SpectralField, lp_values

logger = logging.getLogger(__name__)


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class PowerNonlinearity:
    """g(rho) = beta rho^kappa in N(psi) = -i (w + g(|psi|^2)) psi."""

    beta: float
    kappa: int = 1

    def __post_init__(self):
        if self.kappa < 1:
            raise ProblemError(f"kappa must be a positive integer, got {self.kappa}")

    def phase(self, rho: np.ndarray) -> np.ndarray:
        return self.beta * rho**self.kappa

    def energy_density(self, rho: np.ndarray) -> np.ndarray:
        return self.beta * rho ** (self.kappa + 1) / (self.kappa + 1)


@dataclass(frozen=True)
class CubicQuinticNonlinearity:
    """g(rho) = G1 rho + G2 rho^2."""

    g1: float
    g2: float

    def phase(self, rho: np.ndarray) -> np.ndarray:
        return self.g1 * rho + self.g2 * rho**2

    def energy_density(self, rho: np.ndarray) -> np.ndarray:
        return self.g1 * rho**2 / 2.0 + self.g2 * rho**3 / 3.0


Nonlinearity = Union[PowerNonlinearity, CubicQuinticNonlinearity]


@dataclass
class Problem:
    """
    Cauchy problem d_t psi = L psi + N_w(t, psi) on a periodic grid, with
    L = i nu Laplacian and N_w(t, psi) = -i (w(t, x) + g(|psi|^2)) psi.

    Parameters
        name: label used in reports
        grid: the periodic grid
        nu: Laplacian coefficient
        nonlinearity: g as a power or cubic-quintic law
        initial: psi_0 sampled on the grid nodes
        potential: w, absent means w = 0
        exact: optional exact solution, t -> values on the grid nodes
        rotation: Omega of the energy term -Omega <R>
    """

    name: str
    grid: Grid
    nu: float
    nonlinearity: Nonlinearity
    initial: np.ndarray = field(repr=False)
    potential: Optional[Potential] = field(default=None, repr=False)
    exact: Optional[Callable[[float], np.ndarray]] = field(default=None, repr=False)
    rotation: float = 0.0

    def __post_init__(self):
        self.initial = np.asarray(self.initial, dtype=np.complex128)
        self.validate_initial()
        if self.nu <= 0:
            raise ProblemError(f"Laplacian coefficient must be positive, got {self.nu}")

    def validate_initial(self):
        if self.initial.shape != self.grid.shape:
            raise ProblemError(
                f"Initial datum shape {self.initial.shape} does not match {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.initial)):
            raise ProblemError("Initial datum must be finite at every node")

    @property
    def has_exact(self) -> bool:
        return self.exact is not None

    def potential_at(self, t: float):
        if self.potential is None:
            return 0.0
        return self.potential.value(t)

    def potential_integral(self, t0: float, t1: float):
        if self.potential is None:
            return 0.0
        return self.potential.integral(t0, t1)

    def nonlinear_term(self, t: float, psi: np.ndarray) -> np.ndarray:
        rho = np.abs(psi) ** 2
        return -1j * (self.potential_at(t) + self.nonlinearity.phase(rho)) * psi

    def exact_at(self, t: float) -> np.ndarray:
        if self.exact is None:
            raise ProblemError(f"Problem {self.name} has no exact solution")
        return self.exact(t)

    def initial_field(self) -> SpectralField:
        return SpectralField(grid=self.grid, values=self.initial.copy())


def soliton_profile(t, x, q: float, a: float, c: float, x0: float) -> np.ndarray:
    """
    Bright soliton of d_t psi = i d_x^2 psi + i q |psi|^2 psi.

    The width is 1/sqrt(a) and the amplitude sqrt(2a/q); on a = q^2/16 the
    amplitude is 2a/q.
    """
    xi = (x - x0) - c * t
    amplitude = np.sqrt(2.0 * a / q)
    return (
        amplitude
        / np.cosh(np.sqrt(a) * xi)
        * np.exp(1j * c * xi / 2.0)
        * np.exp(1j * (a + c**2 / 4.0) * t)
    )


def cubic_soliton_1d(
    grid: Grid, q: float = 8.0, a: float = 4.0, c: float = 0.5, x0: float = 0.0
) -> Problem:
    if grid.dims != 1:
        raise ProblemError("The cubic soliton lives on a 1D grid")
    if q <= 0:
        raise ProblemError(f"A bright soliton needs q > 0, got {q}")
    if a <= 0:
        raise ProblemError(f"Soliton parameter a must be positive, got {a}")
    (x,) = grid.mesh()
    return Problem(
        name="cubic-soliton-1d",
        grid=grid,
        nu=1.0,
        nonlinearity=PowerNonlinearity(beta=-q, kappa=1),
        initial=soliton_profile(0.0, x, q, a, c, x0),
        exact=lambda t: soliton_profile(t, x, q, a, c, x0),
    )


def abs_sine_1d(grid: Grid, q: float = 8.0) -> Problem:
    """Long-time datum psi_0 = |sin x|, posed on [-pi, pi)."""
    if grid.dims != 1:
        raise ProblemError("The |sin x| datum lives on a 1D grid")
    (x,) = grid.mesh()
    return Problem(
        name="abs-sine-1d",
        grid=grid,
        nu=1.0,
        nonlinearity=PowerNonlinearity(beta=-q, kappa=1),
        initial=np.abs(np.sin(x)),
    )


def quintic_soliton(t, x, g1, g2, omega, e_c, beta0) -> np.ndarray:
    eta = np.sqrt(4.0 * e_c / g1)
    b = -16.0 * e_c * g2 / (3.0 * g1**2)
    phase = (
        -0.5 * omega * x * np.sin(omega * t + beta0)
        - omega**2 * t / 8.0
        + omega / 16.0 * np.sin(2.0 * omega * t + 2.0 * beta0)
        - e_c * t
    )
    width = 2.0 * np.sqrt(-e_c)
    denominator = np.sqrt(np.sqrt(1.0 - b) * np.cosh(width * (x - np.cos(omega * t))) + 1.0)
    return eta * np.exp(1j * phase) / denominator


def cubic_quintic_1d(
    grid: Grid,
    g1: float = -2.0,
    g2: float = 0.5,
    omega: float = 2.0,
    e_c: float = -1.0,
    beta0: float = 0.0,
) -> Problem:
    """
    i d_t psi = -d_x^2 psi + V psi + G1 |psi|^2 psi + G2 |psi|^4 psi with
    V(t, x) = (x/2) omega^2 cos(omega t), sampled on the grid without truncation.
    """
    if grid.dims != 1:
        raise ProblemError("The cubic-quintic problem lives on a 1D grid")
    if e_c >= 0 or g1 >= 0:
        raise ProblemError(f"Need E_c < 0 and G1 < 0, got E_c={e_c}, G1={g1}")
    b = -16.0 * e_c * g2 / (3.0 * g1**2)
    if 1.0 - b <= 0:
        raise ProblemError(f"Need 1 - b > 0, got b={b}")
    (x,) = grid.mesh()
    return Problem(
        name="cubic-quintic-1d",
        grid=grid,
        nu=1.0,
        nonlinearity=CubicQuinticNonlinearity(g1=g1, g2=g2),
        initial=quintic_soliton(0.0, x, g1, g2, omega, e_c, beta0),
        potential=LinearOscillatingPotential(grid, omega),
        exact=lambda t: quintic_soliton(t, x, g1, g2, omega, e_c, beta0),
    )


def cubic_plane_2d(grid: Grid, profile: Optional[RadialProfile] = None) -> Problem:
    """d_t psi = i Delta psi + i |psi|^2 psi with psi(t, x) = exp(it) Theta(x)."""
    if grid.dims != 2:
        raise ProblemError("The stationary-profile problem lives on a 2D grid")
    profile = profile or ground_profile_2d()
    x, y = grid.mesh()
    theta = profile.sample_2d(x, y)
    return Problem(
        name="cubic-plane-2d",
        grid=grid,
        nu=1.0,
        nonlinearity=PowerNonlinearity(beta=-1.0, kappa=1),
        initial=theta,
        exact=lambda t: np.exp(1j * t) * theta,
    )


def _check_trap_grid(trap: RotatingTrap, grid: Grid):
    if grid.dims != 2:
        raise ProblemError("The rotating condensate lives on a 2D grid")
    for axis in grid.axes:
        if abs(axis.period - trap.delta) > 1e-12 * trap.delta:
            raise ProblemError(
                f"Grid period {axis.period} does not match trap size {trap.delta}"
            )


def rotating_gpe_2d(
    trap: RotatingTrap, beta: float, psi0: np.ndarray, grid: Grid
) -> Problem:
    """
    d_t psi = (i/2) Delta psi - i w(t, x) psi - i beta |psi|^2 psi, the
    Gross-Pitaevskii equation in the rotating frame with the truncated,
    periodized trap w.
    """
    _check_trap_grid(trap, grid)
    return Problem(
        name="rotating-gpe-2d",
        grid=grid,
        nu=0.5,
        nonlinearity=PowerNonlinearity(beta=beta, kappa=1),
        initial=psi0,
        potential=RotatingTrapPotential(grid, trap),
        # w = V_c(A(t) x) is the frame turning at -Omega for R = -i(x d_y - y d_x)
        rotation=-trap.omega,
    )


def thomas_fermi_initial(trap: RotatingTrap, beta: float, grid: Grid) -> SpectralField:
    """psi_0 = sqrt(max(0, (mu - V_c)/beta)), with mu fixing unit mass."""
    if beta <= 0:
        raise ProblemError(f"Thomas-Fermi profile needs beta > 0, got {beta}")
    _check_trap_grid(trap, grid)
    x, y = (periodized(c, trap.delta) for c in grid.mesh())
    v_c = trap.harmonic(x, y)

    def mass(mu: float) -> float:
        return lp_values(grid, np.sqrt(np.maximum(0.0, (mu - v_c) / beta))) ** 2 - 1.0

    upper = 1.0
    while mass(upper) < 0:
        upper *= 2.0
        if upper > 1e12:
            raise ProblemError("Could not bracket the chemical potential")
    mu = brentq(mass, 0.0, upper, xtol=1e-14, rtol=1e-15)
    psi = np.sqrt(np.maximum(0.0, (mu - v_c) / beta))
    psi /= lp_values(grid, psi)

    plateau = cutoff_chi(x, trap.delta) * cutoff_chi(y, trap.delta)
    if np.any((psi > 0) & (plateau < 1.0)):
        raise ProblemError(
            f"Thomas-Fermi support leaves the cutoff plateau; increase delta={trap.delta}"
        )
    logger.info("Thomas-Fermi chemical potential mu=%.12g", mu)
    return SpectralField(grid=grid, values=psi)


def bec_2d(grid: Grid, trap: RotatingTrap, beta: float = 1000.0) -> Problem:
    initial = thomas_fermi_initial(trap, beta, grid)
    return rotating_gpe_2d(trap, beta, initial.values, grid)


def _plane_from_params(grid: Grid, profile_path: Optional[str] = None) -> Problem:
    profile = load_profile(Path(profile_path)) if profile_path else None
    return cubic_plane_2d(grid, profile)


def _bec_from_params(
    grid: Grid,
    gamma_x: float = 1.05,
    gamma_y: float = 0.95,
    omega: float = 0.9,
    delta: float = 32.0,
    beta: float = 1000.0,
) -> Problem:
    trap = RotatingTrap(gamma_x=gamma_x, gamma_y=gamma_y, omega=omega, delta=delta)
    return bec_2d(grid, trap, beta)


@dataclass(frozen=True)
class ProblemEntry:
    """Builder called as builder(grid, **params), with the grid dimension and nu it expects."""

    builder: Callable[..., Problem]
    dims: int
    nu: float


PROBLEMS: dict[str, ProblemEntry] = {
    "cubic_soliton_1d": ProblemEntry(cubic_soliton_1d, dims=1, nu=1.0),
    "abs_sine_1d": ProblemEntry(abs_sine_1d, dims=1, nu=1.0),
    "cubic_quintic_1d": ProblemEntry(cubic_quintic_1d, dims=1, nu=1.0),
    "cubic_plane_2d": ProblemEntry(_plane_from_params, dims=2, nu=1.0),
    "bec_2d": ProblemEntry(_bec_from_params, dims=2, nu=0.5),
}
