"""phi-functions and their evaluation through a discretized Cauchy integral.

phi_0(z) = exp(z), phi_{j+1}(z) = (phi_j(z) - 1/j!) / z with phi_j(0) = 1/j!.
Near the origin the recurrence cancels catastrophically, so arguments inside
the switching radius go through the trapezoidal rule on a circle enclosing them.
"""

from dataclasses import dataclass
from typing import Callable
import math

import numpy as np


class ContourRadiusError(ValueError):
    pass


@dataclass(frozen=True)
class ContourConfig:
    """
    Attributes:
        points: trapezoidal nodes Q on the circle.
        radius: radius of the circle, centered at the origin.
        switch_radius: arguments with |z| at or below this use the contour.
    """

    points: int = 64
    radius: float = 1.0
    switch_radius: float = 0.25

    def __post_init__(self):
        if self.points < 4:
            raise ValueError(f"Contour needs at least 4 points, got {self.points}")
        if not 0 < self.switch_radius < self.radius:
            raise ValueError(
                "Switch radius must lie strictly inside the contour radius, got "
                f"{self.switch_radius} vs {self.radius}"
            )


DEFAULT_CONTOUR = ContourConfig()

# the contour circle (radius 1 by default) lies inside the series disk
SERIES_RADIUS = 2.0
SERIES_TERMS = 30


def _phi_series(j_max: int, z: np.ndarray) -> np.ndarray:
    """phi_{j_max} from its Taylor series, then phi_j = z phi_{j+1} + 1/j! downwards."""
    out = np.empty((j_max + 1,) + z.shape, dtype=np.complex128)
    top = np.full(z.shape, 1.0 / math.factorial(SERIES_TERMS + j_max), dtype=np.complex128)
    for k in range(SERIES_TERMS - 1, -1, -1):
        top = top * z + 1.0 / math.factorial(k + j_max)
    out[j_max] = top
    for j in range(j_max - 1, -1, -1):
        out[j] = z * out[j + 1] + 1.0 / math.factorial(j)
    return out


def phi_direct(j_max: int, z: np.ndarray) -> np.ndarray:
    """phi_0..phi_{j_max} without the contour; stacked along a new leading axis.

    For |z| >= 2 the forward recurrence phi_{j+1} = (phi_j - 1/j!) / z is used.
    Closer to 0 it amplifies rounding by |z|^-j, so there the top index comes
    from its series and the rest from the backward recurrence.
    """
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty((j_max + 1,) + z.shape, dtype=np.complex128)
    near = np.abs(z) < SERIES_RADIUS
    if np.any(near):
        out[:, near] = _phi_series(j_max, z[near])
    far = ~near
    if np.any(far):
        zf = z[far]
        out[0, far] = np.exp(zf)
        for j in range(j_max):
            out[j + 1, far] = (out[j, far] - 1.0 / math.factorial(j)) / zf
    return out


def contour_eval(
    f: Callable[[np.ndarray], np.ndarray],
    z,
    points: int = DEFAULT_CONTOUR.points,
    radius: float = DEFAULT_CONTOUR.radius,
):
    """Trapezoidal approximation of f(z) = (1/2 i pi) int_C f(w)/(w - z) dw.

    C is the positively oriented circle of the given radius about 0. f must
    accept the array of circle nodes and may return a leading axis of values
    per node, which is kept in front of the result.
    """
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) >= radius):
        raise ContourRadiusError(
            f"Contour evaluation needs |z| < {radius}, got max |z| = {np.max(np.abs(z))}"
        )
    w = radius * np.exp(2j * np.pi * np.arange(points) / points)
    fw = np.asarray(f(w), dtype=np.complex128)
    # dw = i w dtheta, so each node carries weight w / (w - z) / Q
    weights = w / (w - z[..., None])
    if fw.ndim > 1:
        fw = fw.reshape(fw.shape[:1] + (1,) * z.ndim + (points,))
    result = np.sum(weights * fw, axis=-1) / points
    if result.ndim == 0:
        return complex(result)
    return result


def phi_values(
    j_max: int, z, contour: ContourConfig = DEFAULT_CONTOUR, regime: str = "auto"
) -> np.ndarray:
    """phi_0..phi_{j_max} at every z, stacked along a new leading axis.

    regime "auto" picks the contour for |z| <= switch radius and the recurrence
    elsewhere; "contour" and "direct" force one route.
    """
    z = np.asarray(z, dtype=np.complex128)
    flat = z.reshape(-1)
    out = np.empty((j_max + 1, flat.size), dtype=np.complex128)
    if regime == "auto":
        small = np.abs(flat) <= contour.switch_radius
    elif regime == "contour":
        small = np.ones(flat.shape, dtype=bool)
    elif regime == "direct":
        small = np.zeros(flat.shape, dtype=bool)
    else:
        raise ValueError(f"Unknown regime {regime!r}")
    if np.any(~small):
        out[:, ~small] = phi_direct(j_max, flat[~small])
    if np.any(small):
        out[:, small] = contour_eval(
            lambda w: phi_direct(j_max, w),
            flat[small],
            points=contour.points,
            radius=contour.radius,
        )
    return out.reshape((j_max + 1,) + z.shape)


def phi(j: int, z, contour: ContourConfig = DEFAULT_CONTOUR):
    if j < 0:
        raise ValueError(f"phi index must be non-negative, got {j}")
    value = phi_values(j, z, contour=contour)[j]
    if value.ndim == 0:
        return complex(value)
    return value
