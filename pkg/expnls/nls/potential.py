from dataclasses import dataclass
import logging

import numpy as np

from expnls.nls.spectral import Grid

logger = logging.getLogger(__name__)

GAUSS_TIME_POINTS = 4


def rotation_matrix(t: float, omega: float) -> np.ndarray:
    """A(t) = ((cos Wt, -sin Wt), (sin Wt, cos Wt))."""
    angle = omega * t
    cos, sin = np.cos(angle), np.sin(angle)
    return np.array([[cos, -sin], [sin, cos]])


def _smooth_step(u: np.ndarray) -> np.ndarray:
    """S(u) = f(u) / (f(u) + f(1 - u)) with f(u) = exp(-1/u) for u > 0, else 0."""
    u = np.asarray(u, dtype=float)

    def f(v):
        out = np.zeros_like(v)
        positive = v > 0
        out[positive] = np.exp(-1.0 / v[positive])
        return out

    fu, fv = f(u), f(1.0 - u)
    return fu / (fu + fv)


def cutoff_chi(x, delta: float) -> np.ndarray:
    """
    Smooth cutoff equal to 1 on [1 - delta/2, delta/2 - 1] and 0 outside
    (-delta/2, delta/2), monotone on the two transition bands of width 1.
    """
    if delta <= 2:
        raise ValueError(f"Cutoff size delta must exceed 2, got {delta}")
    if delta < 4:
        logger.warning("Cutoff size delta=%g leaves a plateau narrower than 2", delta)
    return _smooth_step(delta / 2.0 - np.abs(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class RotatingTrap:
    """
    Anisotropic harmonic trap V_c(x) = (gamma_x^2 x^2 + gamma_y^2 y^2) / 2 seen
    from a frame rotating at angular speed omega, truncated to a cell of size delta.
    """

    gamma_x: float
    gamma_y: float
    omega: float
    delta: float

    def __post_init__(self):
        if self.delta <= 2:
            raise ValueError(f"Truncation size delta must exceed 2, got {self.delta}")

    def harmonic(self, x, y) -> np.ndarray:
        return 0.5 * (self.gamma_x**2 * x**2 + self.gamma_y**2 * y**2)

    def rotated(self, t: float, x, y) -> np.ndarray:
        """V(t, x) = V_c(A(t) x)."""
        a = rotation_matrix(t, self.omega)
        return self.harmonic(a[0, 0] * x + a[0, 1] * y, a[1, 0] * x + a[1, 1] * y)


class Potential:
    """Real potential w(t, x) sampled on the nodes of one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid

    def value(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def integral(self, t0: float, t1: float) -> np.ndarray:
        """int_{t0}^{t1} w(s, x) ds; 4-point Gauss-Legendre unless overridden."""
        nodes, weights = np.polynomial.legendre.leggauss(GAUSS_TIME_POINTS)
        half = 0.5 * (t1 - t0)
        mid = 0.5 * (t1 + t0)
        return sum(wq * half * self.value(mid + half * xq) for xq, wq in zip(nodes, weights))


class LinearOscillatingPotential(Potential):
    """w(t, x) = (x/2) omega^2 cos(omega t), sampled without truncation."""

    def __init__(self, grid: Grid, omega: float):
        super().__init__(grid)
        self.omega = omega
        (self.x,) = grid.mesh()

    def value(self, t: float) -> np.ndarray:
        return 0.5 * self.x * self.omega**2 * np.cos(self.omega * t)

    def integral(self, t0: float, t1: float) -> np.ndarray:
        w = self.omega
        return 0.5 * self.x * w * (np.sin(w * t1) - np.sin(w * t0))


class RotatingTrapPotential(Potential):
    """
    w(t, x) = V_c(A(t) x) chi(x) chi(y) on the periodic cell.

    V_c(A(t) x) = P0 + Pc cos(2 W t) + Ps sin(2 W t) with
        P0 = (x^2 + y^2)(gx^2 + gy^2) / 4
        Pc = (x^2 - y^2)(gx^2 - gy^2) / 4
        Ps = x y (gy^2 - gx^2) / 2
    so the time antiderivative is closed-form.
    """

    def __init__(self, grid: Grid, trap: RotatingTrap):
        super().__init__(grid)
        self.trap = trap
        x, y = (periodized(c, trap.delta) for c in grid.mesh())
        mask = cutoff_chi(x, trap.delta) * cutoff_chi(y, trap.delta)
        gx2, gy2 = trap.gamma_x**2, trap.gamma_y**2
        self.mask = mask
        self.p0 = 0.25 * (x**2 + y**2) * (gx2 + gy2) * mask
        self.pc = 0.25 * (x**2 - y**2) * (gx2 - gy2) * mask
        self.ps = 0.5 * x * y * (gy2 - gx2) * mask

    def value(self, t: float) -> np.ndarray:
        angle = 2.0 * self.trap.omega * t
        return self.p0 + self.pc * np.cos(angle) + self.ps * np.sin(angle)

    def integral(self, t0: float, t1: float) -> np.ndarray:
        omega = self.trap.omega
        if omega == 0:
            return self.value(t0) * (t1 - t0)
        two = 2.0 * omega
        return (
            self.p0 * (t1 - t0)
            + self.pc * (np.sin(two * t1) - np.sin(two * t0)) / two
            - self.ps * (np.cos(two * t1) - np.cos(two * t0)) / two
        )


def periodized(x: np.ndarray, delta: float) -> np.ndarray:
    """Map coordinates into the centered cell [-delta/2, delta/2)."""
    return np.mod(x + 0.5 * delta, delta) - 0.5 * delta
