"""Operator-valued coefficients a_{k,l}(hL), b_k(hL) on the Fourier symbols.

With L diagonal, each coefficient is an entire function of z = h * lambda_p
evaluated mode by mode. Expanding the Lagrange polynomials in monomials gives

    a_{k,l}(z) = c_k sum_j beta_{l,j} c_k^j j! phi_{j+1}(c_k z)
    b_k(z)     = sum_j beta_{k,j} j! phi_{j+1}(z)
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import time

import numpy as np

from expnls.nls.collocation import CollocationNodes, LagrangeBasis, factorials
from expnls.nls.phi import DEFAULT_CONTOUR, ContourConfig, phi_values
from expnls.nls.spectral import Grid, laplacian_symbol

logger = logging.getLogger(__name__)

ALPHA_TOLERANCE = 1e-15


def _phi_split(j_max: int, z: np.ndarray, small: np.ndarray, contour: ContourConfig):
    out = np.empty((j_max + 1,) + z.shape, dtype=np.complex128)
    if np.any(small):
        out[:, small] = phi_values(j_max, z[small], contour=contour, regime="contour")
    if np.any(~small):
        out[:, ~small] = phi_values(j_max, z[~small], contour=contour, regime="direct")
    return out


def _combine(weights: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """sum_j weights[j] phis[j], accumulated in j order mode by mode."""
    out = np.zeros(phis.shape[1:], dtype=np.complex128)
    for weight, values in zip(weights, phis):
        out += weight * values
    return out


def _regime_mask(z: np.ndarray, contour: ContourConfig, regime: str) -> np.ndarray:
    if regime == "auto":
        return np.abs(z) <= contour.switch_radius
    if regime == "contour":
        return np.ones(z.shape, dtype=bool)
    if regime == "direct":
        return np.zeros(z.shape, dtype=bool)
    raise ValueError(f"Unknown regime {regime!r}")


def erk_a(
    k: int,
    ell: int,
    z,
    basis: LagrangeBasis,
    contour: ContourConfig = DEFAULT_CONTOUR,
    regime: str = "auto",
):
    """a_{k,l}(z) for 0-based stage indices k and l."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    s = basis.nodes.s
    ck = basis.nodes.c[k]
    small = _regime_mask(ck * z, contour, regime)
    phis = _phi_split(s, ck * z, small, contour)
    weights = basis.coefficients[ell] * ck ** np.arange(s) * factorials(s)
    value = ck * _combine(weights, phis[1:])
    return complex(value[0]) if value.size == 1 else value


def erk_b(
    k: int,
    z,
    basis: LagrangeBasis,
    contour: ContourConfig = DEFAULT_CONTOUR,
    regime: str = "auto",
):
    """b_k(z) for a 0-based stage index k."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    s = basis.nodes.s
    small = _regime_mask(z, contour, regime)
    phis = _phi_split(s, z, small, contour)
    weights = basis.coefficients[k] * factorials(s)
    value = _combine(weights, phis[1:])
    return complex(value[0]) if value.size == 1 else value


def lawson_alpha_set(nodes: CollocationNodes) -> tuple[float, ...]:
    """{c_k} U {c_k - c_l} U {1 - c_k} U {1}, deduplicated."""
    c = nodes.c
    candidates = list(c) + [ck - cl for ck in c for cl in c] + [1.0 - ck for ck in c]
    candidates.append(1.0)
    return dedupe_alphas(candidates)


def erk_alpha_set(nodes: CollocationNodes) -> tuple[float, ...]:
    return dedupe_alphas(list(nodes.c) + [1.0])


def dedupe_alphas(values: list[float]) -> tuple[float, ...]:
    unique: list[float] = []
    for value in sorted(values):
        if not unique or abs(value - unique[-1]) > ALPHA_TOLERANCE:
            unique.append(float(value))
    return tuple(unique)


def find_propagator(propagators: dict[float, np.ndarray], alpha: float) -> np.ndarray:
    for key, value in propagators.items():
        if abs(key - alpha) <= 1e-12:
            return value
    raise KeyError(f"No propagator precomputed for alpha={alpha}")


@dataclass
class CoefficientTables:
    """
    Precomputed diagonal operators for one (grid, h, nodes, nu).

    Attributes:
        a: a_{k,l}(z_p), shape (s, s) + grid.shape.
        b: b_k(z_p), shape (s,) + grid.shape.
        propagators: exp(alpha z_p) for every alpha of the stepping equations.
        contour_stages: True where the phi-functions of a stage went through the
            contour; row k < s holds the argument c_k z of a_{k,.}, row s the
            argument z of b. Shape (s + 1,) + grid.shape.
    """

    grid: Grid
    h: float
    nodes: CollocationNodes
    nu: float
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    propagators: dict[float, np.ndarray] = field(repr=False)
    contour_stages: np.ndarray = field(repr=False)
    contour: ContourConfig = DEFAULT_CONTOUR
    seconds: float = 0.0

    def propagator(self, alpha: float) -> np.ndarray:
        return find_propagator(self.propagators, alpha)

    def symbols(self) -> np.ndarray:
        """z_p = h * i * nu * omega_p."""
        return self.h * 1j * self.nu * laplacian_symbol(self.grid)

    @property
    def contour_modes(self) -> np.ndarray:
        """True where at least one stage of the mode used the contour."""
        return self.contour_stages.any(axis=0)

    def regime(self) -> np.ndarray:
        every = self.contour_stages.all(axis=0)
        return np.where(every, "contour", np.where(self.contour_modes, "mixed", "direct"))


def propagator_table(
    grid: Grid, h: float, nu: float, alphas: tuple[float, ...]
) -> dict[float, np.ndarray]:
    """exp(alpha h L) on every mode, one array per alpha."""
    z = h * 1j * nu * laplacian_symbol(grid)
    return {float(alpha): np.exp(alpha * z) for alpha in dedupe_alphas(list(alphas))}


def _table_chunk(z, nodes, basis, contour):
    s = nodes.s
    fact = factorials(s)
    stages = np.empty((s + 1, z.size), dtype=bool)
    a = np.empty((s, s, z.size), dtype=np.complex128)
    for k, ck in enumerate(nodes.c):
        stages[k] = np.abs(ck * z) <= contour.switch_radius
        phis = _phi_split(s, ck * z, stages[k], contour)[1:]
        powers = ck ** np.arange(s) * fact
        for ell in range(s):
            a[k, ell] = ck * _combine(basis.coefficients[ell] * powers, phis)
    stages[s] = np.abs(z) <= contour.switch_radius
    phis = _phi_split(s, z, stages[s], contour)[1:]
    b = np.empty((s, z.size), dtype=np.complex128)
    for k in range(s):
        b[k] = _combine(basis.coefficients[k] * fact, phis)
    return a, b, stages


def precompute_tables(
    grid: Grid,
    h: float,
    nodes: CollocationNodes,
    nu: float = 0.5,
    alpha_set: tuple[float, ...] = (),
    contour: ContourConfig = DEFAULT_CONTOUR,
    workers: int = 1,
) -> CoefficientTables:
    """
    Evaluate a_{k,l}, b_k and the propagators on every Fourier mode.

    Parameters
        grid: the periodic grid
        h: time step; negative values build the tables of the reversed step
        nodes: collocation nodes
        nu: L = i nu Laplacian
        alpha_set: exponents alpha of the propagators exp(alpha h L)
        contour: Cauchy integral parameters and switching radius
        workers: modes are split in this many chunks evaluated concurrently

    Returns
        CoefficientTables, identical whatever the worker count
    """
    if h == 0:
        raise ValueError("Time step must be nonzero")
    started = time.perf_counter()
    basis = LagrangeBasis(nodes)
    z = (h * 1j * nu * laplacian_symbol(grid)).reshape(-1)
    chunks = np.array_split(np.arange(z.size), max(1, min(workers, z.size)))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        parts = list(
            executor.map(lambda idx: _table_chunk(z[idx], nodes, basis, contour), chunks)
        )
    s = nodes.s
    a = np.concatenate([p[0] for p in parts], axis=-1).reshape((s, s) + grid.shape)
    b = np.concatenate([p[1] for p in parts], axis=-1).reshape((s,) + grid.shape)
    stages = np.concatenate([p[2] for p in parts], axis=-1).reshape((s + 1,) + grid.shape)
    propagators = propagator_table(grid, h, nu, tuple(alpha_set) + nodes.c + (1.0,))
    seconds = time.perf_counter() - started
    logger.info(
        "Precomputed coefficients s=%d h=%g on %s modes in %.3fs (%d with a contour stage)",
        s,
        h,
        "x".join(str(m) for m in grid.shape),
        seconds,
        int(stages.any(axis=0).sum()),
    )
    return CoefficientTables(
        grid=grid,
        h=h,
        nodes=nodes,
        nu=nu,
        a=a,
        b=b,
        propagators=propagators,
        contour_stages=stages,
        contour=contour,
        seconds=seconds,
    )
