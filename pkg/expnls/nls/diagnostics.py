from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence, Union
import logging

import numpy as np

from expnls.nls.problems import Problem
from expnls.nls.representation import Representation
from expnls.nls.spectral import Grid, SpectralField, gradient_values, lp_values

logger = logging.getLogger(__name__)

ORDER_FIT_BOUNDS = (1e-10, 1e-1)
IMAGINARY_TOLERANCE = 1e-10


class DiagnosticsError(ValueError):
    pass


FieldLike = Union[SpectralField, np.ndarray]


def _physical(field: FieldLike) -> np.ndarray:
    if isinstance(field, SpectralField):
        field.require(Representation.PHYSICAL)
        return field.values
    return np.asarray(field)


def mass(grid: Grid, values: np.ndarray) -> float:
    """k sum |v_j|^2."""
    return lp_values(grid, values) ** 2


def discrete_energy(field: FieldLike, problem: Problem, t: float = 0.0) -> float:
    """
    H / (2 nu) with

        H = nu |grad_k v|^2 + k sum w(t) |v|^2 + k sum F(|v|^2) - Omega <R>

    where F is the antiderivative of g vanishing at 0. This gives
    1/2 |grad v|^2 - q/4 |v|_4^4 for the cubic benchmark and the
    Gross-Pitaevskii energy for nu = 1/2.
    """
    grid = problem.grid
    values = _physical(field)
    kinetic = sum(
        lp_values(grid, gradient_values(grid, values, axis)) ** 2
        for axis in range(grid.dims)
    )
    rho = np.abs(values) ** 2
    total = problem.nu * kinetic
    total += grid.cell_volume * float(np.sum(problem.nonlinearity.energy_density(rho)))
    if problem.potential is not None:
        total += grid.cell_volume * float(np.sum(problem.potential_at(t) * rho))
    if problem.rotation != 0:
        total -= problem.rotation * angular_momentum(values, grid)
    return total / (2.0 * problem.nu)


def angular_momentum(field: FieldLike, grid: Optional[Grid] = None) -> float:
    """<R> = k sum conj(v) R v with R v = -i (x d_y v - y d_x v)."""
    if isinstance(field, SpectralField):
        grid = field.grid
    if grid is None:
        raise DiagnosticsError("A grid is required for raw values")
    if grid.dims != 2:
        raise DiagnosticsError(f"Angular momentum needs a 2D field, got {grid.dims}D")
    values = _physical(field)
    x, y = grid.mesh()
    rv = -1j * (x * gradient_values(grid, values, 1) - y * gradient_values(grid, values, 0))
    value = grid.cell_volume * np.sum(np.conj(values) * rv)
    scale = max(1.0, mass(grid, values))
    if abs(value.imag) > IMAGINARY_TOLERANCE * scale:
        raise DiagnosticsError(
            f"Angular momentum has imaginary part {value.imag:.3e}; field is not resolved"
        )
    return float(value.real)


Sample = tuple[float, np.ndarray]


def phase_error(samples: Iterable[Sample], problem: Problem) -> float:
    """sup_n |psi_ex(t_n) - psi^n|_l2 over (t_n, psi^n) samples."""
    if not problem.has_exact:
        raise DiagnosticsError(f"Problem {problem.name} has no exact solution")
    return max(
        lp_values(problem.grid, problem.exact_at(t) - values) for t, values in samples
    )


def mass_error(samples: Sequence[Sample], problem: Problem) -> float:
    """
    sup_n | |psi_ex(t_n)| - |psi^n| | / |psi_ex(0)|, the reference falling back
    to the numerical initial norm without an exact solution.
    """
    grid = problem.grid
    if problem.has_exact:
        reference = [lp_values(grid, problem.exact_at(t)) for t, _ in samples]
    else:
        reference = [lp_values(grid, samples[0][1])] * len(samples)
    if reference[0] == 0:
        raise DiagnosticsError("Reference mass vanishes")
    return max(
        abs(ref - lp_values(grid, values)) / reference[0]
        for ref, (_, values) in zip(reference, samples)
    )


def energy_error(samples: Sequence[Sample], problem: Problem) -> float:
    """sup_n |E(psi_ex(t_n)) - E(psi^n)| / |E(psi_ex(0))|."""
    if problem.has_exact:
        reference = [discrete_energy(problem.exact_at(t), problem, t) for t, _ in samples]
    else:
        reference = [discrete_energy(samples[0][1], problem, samples[0][0])] * len(samples)
    if reference[0] == 0:
        raise DiagnosticsError("Reference energy vanishes")
    return max(
        abs(ref - discrete_energy(values, problem, t)) / abs(reference[0])
        for ref, (t, values) in zip(reference, samples)
    )


@dataclass
class ErrorReport:
    """
    Attributes:
        label: method descriptor.
        phase_error: E_P, None without an exact solution.
        mass_error: E_M.
        energy_error: E_E.
        times, mass, energy, angular_momentum: per-step series of length N_T + 1.
        seconds: stepping wall-clock.
    """

    label: str
    h: float
    phase_error: Optional[float]
    mass_error: float
    energy_error: float
    times: list[float] = field(default_factory=list, repr=False)
    mass: list[float] = field(default_factory=list, repr=False)
    energy: list[float] = field(default_factory=list, repr=False)
    angular_momentum: Optional[list[float]] = field(default=None, repr=False)
    seconds: float = 0.0

    def __post_init__(self):
        self.validate_errors()

    def validate_errors(self):
        for name in ("phase_error", "mass_error", "energy_error"):
            value = getattr(self, name)
            if value is not None and not value >= 0:
                raise DiagnosticsError(f"{name} must be nonnegative, got {value}")

    def summary(self) -> dict:
        out = asdict(self)
        for series in ("times", "mass", "energy", "angular_momentum"):
            out.pop(series)
        out["steps"] = len(self.times) - 1
        return out


class Monitor:
    """
    Observer collecting the per-step series an ErrorReport is built from.

    Called as monitor(step, t, psi); keeps scalars only, so long runs stay cheap
    in memory.
    """

    def __init__(self, problem: Problem, track_energy: bool = True):
        self.problem = problem
        self.track_energy = track_energy
        self.track_angular = problem.grid.dims == 2
        self.steps: list[int] = []
        self.times: list[float] = []
        self.mass: list[float] = []
        self.energy: list[float] = []
        self.angular_momentum: list[float] = []
        self.phase: list[float] = []
        self.norm: list[float] = []
        self.exact_norm: list[float] = []
        self.exact_energy: list[float] = []

    def __call__(self, step: int, t: float, psi: np.ndarray):
        grid = self.problem.grid
        self.steps.append(step)
        self.times.append(t)
        norm = lp_values(grid, psi)
        self.norm.append(norm)
        self.mass.append(norm**2)
        if self.track_energy:
            self.energy.append(discrete_energy(psi, self.problem, t))
        if self.track_angular:
            self.angular_momentum.append(angular_momentum(psi, grid))
        if self.problem.has_exact:
            exact = self.problem.exact_at(t)
            self.phase.append(lp_values(grid, exact - psi))
            self.exact_norm.append(lp_values(grid, exact))
            if self.track_energy:
                self.exact_energy.append(discrete_energy(exact, self.problem, t))

    def _relative(self, reference: list[float], values: list[float], what: str) -> float:
        if not values:
            return 0.0
        scale = abs(reference[0])
        diffs = [abs(r - v) for r, v in zip(reference, values)]
        if scale == 0:
            logger.warning("Reference %s vanishes; reporting the absolute error", what)
            return max(diffs)
        return max(diffs) / scale

    def report(self, label: str, h: float, seconds: float = 0.0) -> ErrorReport:
        if self.problem.has_exact:
            mass_ref = self.exact_norm
            energy_ref = self.exact_energy
        else:
            mass_ref = [self.norm[0]] * len(self.norm)
            energy_ref = [self.energy[0]] * len(self.energy) if self.energy else []
        return ErrorReport(
            label=label,
            h=h,
            phase_error=max(self.phase) if self.phase else None,
            mass_error=self._relative(mass_ref, self.norm, "mass"),
            energy_error=self._relative(energy_ref, self.energy, "energy"),
            times=list(self.times),
            mass=list(self.mass),
            energy=list(self.energy),
            angular_momentum=list(self.angular_momentum) if self.track_angular else None,
            seconds=seconds,
        )

    def rows(self) -> list[dict]:
        """Per-step records with the columns step, t, mass, energy[, phase_error][, angular_momentum]."""
        out = []
        for i, step in enumerate(self.steps):
            row = {"step": step, "t": self.times[i], "mass": self.mass[i]}
            row["energy"] = self.energy[i] if self.track_energy else None
            if self.phase:
                row["phase_error"] = self.phase[i]
            if self.track_angular:
                row["angular_momentum"] = self.angular_momentum[i]
            out.append(row)
        return out


@dataclass(frozen=True)
class OrderEstimate:
    slope: float
    intercept: float
    residual: float
    count: int


def order_estimate(
    points: Sequence[tuple[float, float]],
    bounds: tuple[float, float] = ORDER_FIT_BOUNDS,
) -> OrderEstimate:
    """
    Least-squares slope of log(error) against log(h) over the unsaturated points.

    Parameters
        points: (h, error) pairs
        bounds: errors outside the open interval are dropped before fitting

    Returns
        OrderEstimate with slope, intercept, rms residual of the fit and point count
    """
    lower, upper = bounds
    kept = [(h, e) for h, e in points if lower < e < upper]
    dropped = len(points) - len(kept)
    if dropped:
        logger.warning("Dropped %d saturated points outside (%g, %g)", dropped, lower, upper)
    if len(kept) < 3:
        raise DiagnosticsError(
            f"Order estimate needs at least 3 unsaturated points, got {len(kept)}"
        )
    log_h = np.log([h for h, _ in kept])
    log_e = np.log([e for _, e in kept])
    slope, intercept = np.polyfit(log_h, log_e, 1)
    fitted = slope * log_h + intercept
    residual = float(np.sqrt(np.mean((log_e - fitted) ** 2)))
    return OrderEstimate(
        slope=float(slope), intercept=float(intercept), residual=residual, count=len(kept)
    )
