"""Radial ground state of Delta Theta + Theta^3 = Theta in the plane.

Shooting on Theta(0): integrate Theta'' + Theta'/r + Theta^3 - Theta = 0 with
Theta'(0) = 0 and classify each trajectory. A zero crossing means Theta(0) was
too large; turning back up (or running away) means too small. The trustworthy
part of the converged trajectory is joined to the decaying linear solution
C K0(r), which the profile follows beyond the matching radius.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
import logging

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.special import k0

logger = logging.getLogger(__name__)

R_MAX = 20.0
R_START = 1e-4
BLOW_UP = 10.0
BRACKET = (1.0, 3.0)
MATCH_LEVEL = 1e-4
SAMPLES = 20001
MAX_BISECTIONS = 200


class ShootingError(RuntimeError):
    pass


class Shot(Enum):
    OVERSHOOT = "overshoot"
    UNDERSHOOT = "undershoot"


def _rhs(r, y):
    theta, dtheta = y
    return [dtheta, -dtheta / r + theta - theta**3]


def _crossing(r, y):
    return y[0]


_crossing.terminal = True


def _turning(r, y):
    return y[1]


_turning.terminal = True
_turning.direction = 1


def _blow_up(r, y):
    return abs(y[0]) - BLOW_UP


_blow_up.terminal = True


def _start(theta0: float) -> list[float]:
    curvature = theta0 - theta0**3
    return [theta0 + curvature * R_START**2 / 4.0, curvature * R_START / 2.0]


def shoot(theta0: float, r_max: float = R_MAX, dense: bool = False):
    return solve_ivp(
        _rhs,
        (R_START, r_max),
        _start(theta0),
        method="DOP853",
        rtol=1e-13,
        atol=1e-15,
        events=(_crossing, _turning, _blow_up),
        dense_output=dense,
    )


def classify(theta0: float, r_max: float = R_MAX) -> Shot:
    solution = shoot(theta0, r_max)
    crossing, turning, blow_up = solution.t_events
    if crossing.size:
        return Shot.OVERSHOOT
    if turning.size or blow_up.size:
        return Shot.UNDERSHOOT
    return Shot.OVERSHOOT if solution.y[0, -1] < 0 else Shot.UNDERSHOOT


@dataclass
class RadialProfile:
    """
    Sampled ground profile with a K0 tail beyond the last sample.

    Attributes:
        r: sample radii, starting at 0.
        theta: profile values at r.
    """

    r: np.ndarray
    theta: np.ndarray
    _spline: CubicSpline = field(init=False, repr=False)
    _tail: float = field(init=False, repr=False)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if self.r[0] != 0.0 or np.any(np.diff(self.r) <= 0):
            raise ShootingError("Profile radii must start at 0 and increase")
        self._spline = CubicSpline(self.r, self.theta, bc_type=((1, 0.0), "not-a-knot"))
        self._tail = float(self.theta[-1] / k0(self.r[-1]))

    @property
    def theta0(self) -> float:
        return float(self.theta[0])

    @property
    def r_match(self) -> float:
        return float(self.r[-1])

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        inside = r <= self.r_match
        out = np.empty_like(r)
        out[inside] = self._spline(r[inside])
        out[~inside] = self._tail * k0(r[~inside])
        return out

    def sample_2d(self, x, y) -> np.ndarray:
        return self(np.hypot(x, y))


def ground_profile_2d(tolerance: float = 1e-12, r_max: float = R_MAX) -> RadialProfile:
    """Bisection on Theta(0) in BRACKET until the bracket is narrower than tolerance."""
    if tolerance <= 0:
        raise ValueError(f"Tolerance must be positive, got {tolerance}")
    lo, hi = BRACKET
    if classify(lo, r_max) != Shot.UNDERSHOOT or classify(hi, r_max) != Shot.OVERSHOOT:
        raise ShootingError(f"Bracket {BRACKET} does not enclose the ground state")

    for _ in range(MAX_BISECTIONS):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if classify(mid, r_max) == Shot.OVERSHOOT:
            hi = mid
        else:
            lo = mid
    if hi - lo > tolerance:
        raise ShootingError(
            f"Bisection stalled at width {hi - lo:.3e} above tolerance {tolerance:.3e}"
        )

    theta0 = 0.5 * (lo + hi)
    profile = _trusted_profile(theta0, r_max)
    logger.info(
        "Ground profile Theta(0)=%.15f, matched to K0 tail at r=%.3f",
        theta0,
        profile.r_match,
    )
    return profile


def _trusted_profile(theta0: float, r_max: float) -> RadialProfile:
    solution = shoot(theta0, r_max, dense=True)
    r_end = solution.t[-1]
    r = np.linspace(R_START, r_end, SAMPLES)
    theta, dtheta = solution.sol(r)
    usable = (theta > MATCH_LEVEL) & (dtheta < 0)
    usable[0] = True
    stop = int(np.argmin(usable)) if not usable.all() else r.size
    if stop < 2:
        raise ShootingError("Shooting trajectory left the ground state immediately")
    r = np.concatenate(([0.0], r[:stop]))
    theta = np.concatenate(([theta0], theta[:stop]))
    return RadialProfile(r=r, theta=theta)


def save_profile(path: Path, profile: RadialProfile):
    np.savetxt(path, np.column_stack([profile.r, profile.theta]), fmt="%.17g")


def load_profile(path: Path) -> RadialProfile:
    data = np.loadtxt(path, ndmin=2)
    return RadialProfile(r=data[:, 0], theta=data[:, 1])
