from dataclasses import dataclass, field
from typing import Callable, Optional
import math

import numpy as np
from scipy import fft as sfft

from expnls.nls.representation import Representation


class GridError(ValueError):
    pass


class RepresentationError(ValueError):
    pass


MAX_DIMS = 2


@dataclass(frozen=True)
class Axis:
    """
    One periodic axis of a tensor grid.

    Attributes:
        x_left: left endpoint of the period cell.
        x_right: right endpoint, excluded from the node set.
        p: the axis carries M = 2**p nodes.
    """

    x_left: float
    x_right: float
    p: int

    def __post_init__(self):
        self.validate_extent()
        self.validate_power()

    def validate_extent(self):
        if not self.x_right > self.x_left:
            raise GridError(
                f"Axis extent must be positive, got ({self.x_left}, {self.x_right})"
            )

    def validate_power(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise GridError(f"Axis power p must be an integer, got {self.p!r}")
        if self.p < 1:
            raise GridError(f"Axis power p must be at least 1, got {self.p}")

    @property
    def modes(self) -> int:
        return 2**self.p

    @property
    def period(self) -> float:
        return self.x_right - self.x_left

    @property
    def spacing(self) -> float:
        return self.period / self.modes

    def nodes(self) -> np.ndarray:
        return self.x_left + self.spacing * np.arange(self.modes)

    def wavenumbers(self) -> np.ndarray:
        """mu_m = 2 pi m / period, in transform order (0..M/2-1, -M/2..-1)."""
        m = sfft.fftfreq(self.modes, d=1.0 / self.modes)
        return 2.0 * np.pi * m / self.period


@dataclass(frozen=True)
class Grid:
    """
    Periodic tensor-product grid in one or two dimensions.

    Spectral arrays use the transform library's native layout on every axis.
    Mode m of the -M/2..M/2-1 indexing sits at index m mod M.
    """

    axes: tuple[Axis, ...]
    workers: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= len(self.axes) <= MAX_DIMS:
            raise GridError(f"Grid dimension must be 1 or 2, got {len(self.axes)}")

    @property
    def dims(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(axis.modes for axis in self.axes)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    @property
    def cell_volume(self) -> float:
        """Product of the per-axis spacings, the k of the discrete norms."""
        return math.prod(axis.spacing for axis in self.axes)

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.dims, 0))

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(axis.nodes() for axis in self.axes), indexing="ij"))

    def wavenumber_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.meshgrid(*(axis.wavenumbers() for axis in self.axes), indexing="ij")
        )

    def fft(self, values: np.ndarray) -> np.ndarray:
        return sfft.fftn(values, axes=self.spatial_axes, workers=self.workers)

    def ifft(self, values: np.ndarray) -> np.ndarray:
        return sfft.ifftn(values, axes=self.spatial_axes, workers=self.workers)

    def describe(self) -> dict:
        return {
            "axes": [
                {"x_left": a.x_left, "x_right": a.x_right, "p": a.p} for a in self.axes
            ]
        }


def make_grid(dims: int, axes: list[tuple[float, float, int]]) -> Grid:
    """Build a grid from per-axis (x_left, x_right, p) triples.

    A single triple is reused on every axis.
    """
    if dims not in (1, 2):
        raise GridError(f"Grid dimension must be 1 or 2, got {dims}")
    if len(axes) == 1:
        axes = list(axes) * dims
    if len(axes) != dims:
        raise GridError(f"Expected {dims} axis definitions, got {len(axes)}")
    return Grid(axes=tuple(Axis(x_left=a, x_right=b, p=p) for a, b, p in axes))


@dataclass
class SpectralField:
    grid: Grid
    values: np.ndarray
    representation: Representation = Representation.PHYSICAL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        self.validate_shape()

    def validate_shape(self):
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"Field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def from_function(
        cls, grid: Grid, f: Callable[..., np.ndarray]
    ) -> "SpectralField":
        return cls(grid=grid, values=f(*grid.mesh()))

    def require(self, representation: Representation):
        if self.representation != representation:
            raise RepresentationError(
                f"Field is in {self.representation.value} representation, "
                f"expected {representation.value}"
            )


def to_spectral(field: SpectralField) -> SpectralField:
    """psi_hat_m = sum_j psi_j exp(-i mu_m (x_j - x_left)), unnormalized."""
    field.require(Representation.PHYSICAL)
    return SpectralField(
        grid=field.grid,
        values=field.grid.fft(field.values),
        representation=Representation.SPECTRAL,
    )


def to_physical(field: SpectralField) -> SpectralField:
    """Inverse of to_spectral; carries the 1/M factor."""
    field.require(Representation.SPECTRAL)
    return SpectralField(
        grid=field.grid,
        values=field.grid.ifft(field.values),
        representation=Representation.PHYSICAL,
    )


def gradient_values(grid: Grid, values: np.ndarray, axis: int) -> np.ndarray:
    mu = grid.wavenumber_mesh()[axis]
    return grid.ifft(1j * mu * grid.fft(values))


def discrete_gradient(field: SpectralField, axis: int = 0) -> SpectralField:
    """Spectral derivative along one axis, (grad_k v)^_m = i mu_m v^_m.

    The Nyquist mode is kept as is; real input may pick up an imaginary part there.
    """
    if not 0 <= axis < field.grid.dims:
        raise GridError(f"Axis {axis} out of range for a {field.grid.dims}D grid")
    if field.representation == Representation.SPECTRAL:
        mu = field.grid.wavenumber_mesh()[axis]
        return SpectralField(
            grid=field.grid,
            values=1j * mu * field.values,
            representation=Representation.SPECTRAL,
        )
    return SpectralField(
        grid=field.grid, values=gradient_values(field.grid, field.values, axis)
    )


def lp_values(grid: Grid, values: np.ndarray, r: float = 2.0) -> float:
    if r < 1:
        raise ValueError(f"Norm exponent must be at least 1, got {r}")
    total = grid.cell_volume * np.sum(np.abs(values) ** r)
    return float(total ** (1.0 / r))


def lp_norm(field: SpectralField, r: float = 2.0) -> float:
    """(k sum_j |v_j|^r)^(1/r) with k the cell volume."""
    field.require(Representation.PHYSICAL)
    return lp_values(field.grid, field.values, r)


def laplacian_symbol(grid: Grid) -> np.ndarray:
    """omega_p = -sum over axes of mu_{p_axis}^2, aligned with the spectral layout."""
    omega = np.zeros(grid.shape)
    for mu in grid.wavenumber_mesh():
        omega -= mu**2
    return omega
