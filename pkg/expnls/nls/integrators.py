from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence
import logging
import time

import numpy as np

from expnls.nls.cache import cached_precompute
from expnls.nls.coefficients import (
    CoefficientTables,
    dedupe_alphas,
    erk_alpha_set,
    find_propagator,
    propagator_table,
)
from expnls.nls.collocation import collocation_nodes, collocation_tableau
from expnls.nls.method import MethodFamily, MethodSpec
from expnls.nls.phi import DEFAULT_CONTOUR, ContourConfig
from expnls.nls.problems import Problem
from expnls.nls.splitting import SplittingScheme, splitting_scheme
from expnls.nls.tableau import ButcherTableau

logger = logging.getLogger(__name__)


class StepError(RuntimeError):
    pass


class NoConvergenceError(StepError):
    pass


class DivergenceError(StepError):
    pass


class StepCountError(ValueError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


@dataclass(frozen=True)
class StepperConfig:
    """
    Fixed-point solver settings for the implicit stage equations.

    Attributes:
        tolerance: stop once the largest relative l2 change over the stages drops below it.
        max_iterations: iterations allowed per step.
        divergence_factor: abort when a stage norm exceeds this multiple of |psi_n|.
    """

    tolerance: float = 1e-14
    max_iterations: int = 200
    divergence_factor: float = 1e6

    def __post_init__(self):
        self.validate_tolerance()
        self.validate_iterations()

    def validate_tolerance(self):
        if not self.tolerance > 0:
            raise ValueError(f"Fixed-point tolerance must be positive, got {self.tolerance}")

    def validate_iterations(self):
        if self.max_iterations < 1:
            raise ValueError(
                f"Fixed-point iterations must be at least 1, got {self.max_iterations}"
            )
        if not self.divergence_factor > 1:
            raise ValueError(
                f"Divergence factor must exceed 1, got {self.divergence_factor}"
            )


DEFAULT_STEPPER = StepperConfig()

# (stage index k, stage values, nonlinear terms in spectral space) -> stage k
StageUpdate = Callable[[int, list[np.ndarray], list[np.ndarray]], np.ndarray]


def _l2(values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2)))


def _nonlinear_spectra(problem, t, h, c, stages):
    grid = problem.grid
    return [
        grid.fft(problem.nonlinear_term(t + ck * h, stage)) for ck, stage in zip(c, stages)
    ]


def _solve_stages(
    problem: Problem,
    t: float,
    h: float,
    c: Sequence[float],
    initial: list[np.ndarray],
    update: StageUpdate,
    reference_norm: float,
    config: StepperConfig,
) -> tuple[list[np.ndarray], list[np.ndarray], int]:
    """
    Fixed-point iteration on the stage system starting from the linear part.

    Returns
        converged stages, their nonlinear terms in spectral space, iteration count
    """
    stages = initial
    limit = config.divergence_factor * reference_norm
    for iteration in range(1, config.max_iterations + 1):
        spectra = _nonlinear_spectra(problem, t, h, c, stages)
        updated = [update(k, stages, spectra) for k in range(len(c))]
        change = 0.0
        for old, new in zip(stages, updated):
            size = _l2(new)
            if not np.isfinite(size) or (reference_norm > 0 and size > limit):
                raise DivergenceError(
                    f"Stage norm {size:.3e} exceeds the guard {limit:.3e} at t={t}"
                )
            delta = _l2(new - old)
            change = max(change, delta / size if size > 0 else delta)
        stages = updated
        if change < config.tolerance:
            return stages, _nonlinear_spectra(problem, t, h, c, stages), iteration
    raise NoConvergenceError(
        f"Fixed point not reached in {config.max_iterations} iterations at t={t} "
        f"(last relative change {change:.3e}); reduce h"
    )


def _erk_advance(psi, t, h, tables: CoefficientTables, problem, config):
    grid = problem.grid
    c = tables.nodes.c
    psi_hat = grid.fft(psi)
    linear = [grid.ifft(tables.propagator(ck) * psi_hat) for ck in c]

    def update(k, stages, spectra):
        combined = sum(tables.a[k, ell] * spectra[ell] for ell in range(len(c)))
        return linear[k] + h * grid.ifft(combined)

    _, spectra, iterations = _solve_stages(
        problem, t, h, c, linear, update, _l2(psi), config
    )
    combined = sum(tables.b[k] * spectra[k] for k in range(len(c)))
    return grid.ifft(tables.propagator(1.0) * psi_hat + h * combined), iterations


def erk_step(
    psi: np.ndarray,
    t: float,
    h: float,
    tables: CoefficientTables,
    problem: Problem,
    config: StepperConfig = DEFAULT_STEPPER,
) -> np.ndarray:
    """
    One exponential Runge-Kutta collocation step from t to t + h.

    Parameters
        psi: physical values at t
        tables: coefficient tables built for this grid, h and nodes
    """
    if tables.h != h:
        raise ValueError(f"Tables were built for h={tables.h}, not h={h}")
    return _erk_advance(psi, t, h, tables, problem, config)[0]


def lawson_alphas(tableau: ButcherTableau) -> tuple[float, ...]:
    """{c_k} U {c_k - c_l} U {1 - c_k} U {1} of any tableau."""
    c = [float(v) for v in tableau.c]
    candidates = c + [ck - cl for ck in c for cl in c] + [1.0 - ck for ck in c]
    return dedupe_alphas(candidates + [1.0])


def _lawson_advance(psi, t, h, tableau, propagators, problem, config):
    grid = problem.grid
    c = [float(v) for v in tableau.c]
    s = tableau.s

    def prop(alpha):
        return find_propagator(propagators, alpha)

    psi_hat = grid.fft(psi)
    linear = [grid.ifft(prop(ck) * psi_hat) for ck in c]
    shifts = [[prop(c[k] - c[ell]) for ell in range(s)] for k in range(s)]

    def update(k, stages, spectra):
        coupled = [ell for ell in range(s) if tableau.a[k, ell] != 0]
        if not coupled:
            return linear[k]
        combined = sum(tableau.a[k, ell] * shifts[k][ell] * spectra[ell] for ell in coupled)
        return linear[k] + h * grid.ifft(combined)

    _, spectra, iterations = _solve_stages(
        problem, t, h, c, linear, update, _l2(psi), config
    )
    combined = sum(tableau.b[k] * prop(1.0 - c[k]) * spectra[k] for k in range(s))
    return grid.ifft(prop(1.0) * psi_hat + h * combined), iterations


def lawson_step(
    psi: np.ndarray,
    t: float,
    h: float,
    tableau: ButcherTableau,
    propagators: dict[float, np.ndarray],
    problem: Problem,
    config: StepperConfig = DEFAULT_STEPPER,
) -> np.ndarray:
    """Lawson step: the Runge-Kutta method of the tableau in the variable exp(-tL) psi."""
    return _lawson_advance(psi, t, h, tableau, propagators, problem, config)[0]


def nonlinear_flow(psi: np.ndarray, t: float, tau: float, problem: Problem) -> np.ndarray:
    """Exact flow of d_t psi = N_w(t, psi) over [t, t + tau]; |psi| is invariant along it."""
    if tau == 0:
        return psi
    rho = np.abs(psi) ** 2
    phase = problem.potential_integral(t, t + tau) + tau * problem.nonlinearity.phase(rho)
    return psi * np.exp(-1j * phase)


def splitting_step(
    psi: np.ndarray,
    t: float,
    h: float,
    scheme: SplittingScheme,
    problem: Problem,
    propagators: Optional[dict[float, np.ndarray]] = None,
) -> np.ndarray:
    """
    S_N(a_1 h) S_L(b_1 h) ... S_L(b_r h) S_N(a_{r+1} h) applied to psi, the
    rightmost flow first. Time advances through the nonlinear substeps only.
    """
    grid = problem.grid
    if propagators is None:
        propagators = propagator_table(grid, h, problem.nu, scheme.b)
    r = len(scheme.b)
    current, now = psi, t
    tau = scheme.a[r] * h
    current = nonlinear_flow(current, now, tau, problem)
    now += tau
    for j in range(r - 1, -1, -1):
        current = grid.ifft(find_propagator(propagators, scheme.b[j]) * grid.fft(current))
        tau = scheme.a[j] * h
        current = nonlinear_flow(current, now, tau, problem)
        now += tau
    return current


class Stepper(Protocol):
    h: float
    label: str
    iterations: list[int]
    precompute_seconds: float

    def step(self, psi: np.ndarray, t: float) -> np.ndarray: ...

    def reverse(self) -> "Stepper": ...


class ErkStepper:
    """Exponential Runge-Kutta collocation stepper for one (problem, nodes, h)."""

    def __init__(
        self,
        problem: Problem,
        method: MethodSpec,
        h: float,
        config: StepperConfig = DEFAULT_STEPPER,
        contour: ContourConfig = DEFAULT_CONTOUR,
        workers: int = 1,
        cache_dir: Optional[str] = None,
    ):
        self.problem = problem
        self.method = method
        self.h = h
        self.config = config
        self.contour = contour
        self.workers = workers
        self.cache_dir = cache_dir
        self.label = method.label()
        self.nodes = collocation_nodes(method.stages, method.nodes)
        self.tables = cached_precompute(
            problem.grid,
            h,
            self.nodes,
            nu=problem.nu,
            alpha_set=erk_alpha_set(self.nodes),
            contour=contour,
            workers=workers,
            cache_dir=cache_dir,
        )
        self.precompute_seconds = self.tables.seconds
        self.iterations: list[int] = []

    def step(self, psi: np.ndarray, t: float) -> np.ndarray:
        out, count = _erk_advance(psi, t, self.h, self.tables, self.problem, self.config)
        self.iterations.append(count)
        logger.debug("%s step at t=%.6g: %d fixed-point iterations", self.label, t, count)
        return out

    def reverse(self) -> "ErkStepper":
        return ErkStepper(
            self.problem,
            self.method,
            -self.h,
            self.config,
            self.contour,
            self.workers,
            self.cache_dir,
        )


class LawsonStepper:
    """Lawson stepper over any Butcher tableau."""

    def __init__(
        self,
        problem: Problem,
        tableau: ButcherTableau,
        h: float,
        config: StepperConfig = DEFAULT_STEPPER,
        label: Optional[str] = None,
    ):
        if h == 0:
            raise ValueError("Time step must be nonzero")
        self.problem = problem
        self.tableau = tableau
        self.h = h
        self.config = config
        self.label = label or f"{tableau.name}-lawson"
        started = time.perf_counter()
        self.propagators = propagator_table(
            problem.grid, h, problem.nu, lawson_alphas(tableau)
        )
        self.precompute_seconds = time.perf_counter() - started
        self.iterations: list[int] = []

    def step(self, psi: np.ndarray, t: float) -> np.ndarray:
        out, count = _lawson_advance(
            psi, t, self.h, self.tableau, self.propagators, self.problem, self.config
        )
        self.iterations.append(count)
        logger.debug("%s step at t=%.6g: %d fixed-point iterations", self.label, t, count)
        return out

    def reverse(self) -> "LawsonStepper":
        return LawsonStepper(self.problem, self.tableau, -self.h, self.config, self.label)


class SplittingStepper:
    def __init__(self, problem: Problem, scheme: SplittingScheme, h: float):
        if h == 0:
            raise ValueError("Time step must be nonzero")
        self.problem = problem
        self.scheme = scheme
        self.h = h
        self.label = f"splitting-{scheme.order}"
        started = time.perf_counter()
        self.propagators = propagator_table(problem.grid, h, problem.nu, scheme.b)
        self.precompute_seconds = time.perf_counter() - started
        self.iterations: list[int] = []

    def step(self, psi: np.ndarray, t: float) -> np.ndarray:
        return splitting_step(psi, t, self.h, self.scheme, self.problem, self.propagators)

    def reverse(self) -> "SplittingStepper":
        return SplittingStepper(self.problem, self.scheme, -self.h)


def build_stepper(
    problem: Problem,
    method: MethodSpec,
    h: float,
    config: StepperConfig = DEFAULT_STEPPER,
    contour: ContourConfig = DEFAULT_CONTOUR,
    workers: int = 1,
    cache_dir: Optional[str] = None,
) -> Stepper:
    if method.family == MethodFamily.ERK:
        return ErkStepper(problem, method, h, config, contour, workers, cache_dir)
    if method.family == MethodFamily.LAWSON:
        tableau = collocation_tableau(collocation_nodes(method.stages, method.nodes))
        return LawsonStepper(problem, tableau, h, config, label=method.label())
    return SplittingStepper(problem, splitting_scheme(method.order), h)


def reverse_step(stepper: Stepper, psi_next: np.ndarray, t_next: float) -> np.ndarray:
    """Phi_{t_{n+1} -> t_n}: the same method run with -h from t_{n+1}."""
    return stepper.reverse().step(psi_next, t_next)


Observer = Callable[[int, float, np.ndarray], None]


@dataclass
class IntegrationResult:
    """
    Attributes:
        final: physical values at T.
        t: final time.
        steps: number of steps taken.
        seconds: wall-clock of the stepping loop only.
        precompute_seconds: wall-clock of coefficient and propagator setup.
        iterations: fixed-point iterations per step, empty for splittings.
        observers: the observers invoked at every step, holding their series.
    """

    label: str
    h: float
    final: np.ndarray = field(repr=False)
    t: float
    steps: int
    seconds: float
    precompute_seconds: float
    iterations: list[int] = field(default_factory=list, repr=False)
    observers: tuple = field(default=(), repr=False)


def step_count(T: float, h: float) -> int:
    if h <= 0 or T < 0:
        raise StepCountError(f"Need h > 0 and T >= 0, got h={h}, T={T}")
    count = round(T / h)
    if abs(count * h - T) > 1e-12 * max(abs(T), abs(h)):
        raise StepCountError(f"Final time T={T} is not a multiple of h={h}")
    return int(count)


def integrate(
    problem: Problem,
    method: MethodSpec,
    T: float,
    h: float,
    observers: Sequence[Observer] = (),
    config: StepperConfig = DEFAULT_STEPPER,
    contour: ContourConfig = DEFAULT_CONTOUR,
    workers: int = 1,
    cache_dir: Optional[str] = None,
) -> IntegrationResult:
    """
    Step the problem from t = 0 to T with N_T = T/h steps.

    Observers are called as observer(step, t, psi) on the initial datum and after
    every step, so each sees N_T + 1 states.

    Raises
        StepCountError: T is not an integer multiple of h, before any computation
        IntegrationError: a step failed; carries the 1-based step index
    """
    n_steps = step_count(T, h)
    stepper = build_stepper(problem, method, h, config, contour, workers, cache_dir)
    logger.info(
        "Integrating %s with %s, h=%g, %d steps", problem.name, stepper.label, h, n_steps
    )
    psi = problem.initial.copy()
    for observer in observers:
        observer(0, 0.0, psi)
    started = time.perf_counter()
    t = 0.0
    for n in range(1, n_steps + 1):
        try:
            psi = stepper.step(psi, t)
        except StepError as e:
            raise IntegrationError(f"Step {n} of {stepper.label} failed: {e}", step=n) from e
        t = n * h
        for observer in observers:
            observer(n, t, psi)
    seconds = time.perf_counter() - started
    logger.info("Finished %s h=%g in %.3fs", stepper.label, h, seconds)
    return IntegrationResult(
        label=stepper.label,
        h=h,
        final=psi,
        t=t,
        steps=n_steps,
        seconds=seconds,
        precompute_seconds=stepper.precompute_seconds,
        iterations=list(stepper.iterations),
        observers=tuple(observers),
    )
