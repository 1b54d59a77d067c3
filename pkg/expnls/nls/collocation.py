from dataclasses import dataclass, field
from fractions import Fraction
import logging
import math

import numpy as np
from scipy.special import eval_sh_legendre, roots_legendre

from expnls.nls.method import NodeFamily
from expnls.nls.tableau import ButcherTableau

logger = logging.getLogger(__name__)


class NodeError(ValueError):
    pass


MAX_GAUSS_STAGES = 8
EXACT_BASIS_MAX_STAGES = 5


@dataclass(frozen=True)
class CollocationNodes:
    c: tuple[float, ...]
    family: str = "custom"

    def __post_init__(self):
        self.validate_range()
        self.validate_distinct()

    def validate_range(self):
        if len(self.c) < 1:
            raise NodeError("At least one collocation node is required")
        for node in self.c:
            if not 0.0 <= node <= 1.0:
                raise NodeError(f"Collocation node {node} lies outside [0, 1]")

    def validate_distinct(self):
        if len(set(self.c)) != len(self.c):
            raise NodeError(f"Collocation nodes must be pairwise distinct, got {self.c}")

    @property
    def s(self) -> int:
        return len(self.c)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float)


def gauss_nodes(s: int) -> CollocationNodes:
    """Roots of the degree-s shifted Legendre polynomial on [0, 1], ascending."""
    if not 1 <= s <= MAX_GAUSS_STAGES:
        raise NodeError(
            f"Gauss nodes are available for 1 <= s <= {MAX_GAUSS_STAGES}, got {s}"
        )
    x, _ = roots_legendre(s)
    c = np.sort((x + 1.0) / 2.0)
    # symmetric about 1/2 to the last bit
    c = (c + (1.0 - c[::-1])) / 2.0
    residual = np.max(np.abs(eval_sh_legendre(s, c)))
    logger.debug("Gauss nodes s=%d, shifted Legendre residual %.3e", s, residual)
    return CollocationNodes(c=tuple(float(v) for v in c), family="gauss")


def equispaced_nodes(s: int) -> CollocationNodes:
    """c_k = k/s, distinct and without superconvergence."""
    if s < 1:
        raise NodeError(f"Stage count must be positive, got {s}")
    return CollocationNodes(
        c=tuple(k / s for k in range(1, s + 1)), family="equispaced"
    )


def _poly_mul(p: list, q: list) -> list:
    out = [p[0] * 0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        for j, qj in enumerate(q):
            out[i + j] += pi * qj
    return out


def _lagrange_polynomials(c: list, one) -> list[list]:
    polys = []
    for ell in range(len(c)):
        poly = [one]
        for j in range(len(c)):
            if j != ell:
                d = c[ell] - c[j]
                poly = _poly_mul(poly, [-c[j] / d, one / d])
        polys.append(poly)
    return polys


@dataclass(frozen=True)
class LagrangeBasis:
    """
    Lagrange polynomials of the nodes in the scaled variable theta = tau/h.

    coefficients[l, j] is the theta**j coefficient of the l-th polynomial.
    Up to five stages the expansion runs in exact rational arithmetic on the
    binary values of the nodes.
    """

    nodes: CollocationNodes
    coefficients: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coefficients", self._expand())

    def _expand(self) -> np.ndarray:
        if self.nodes.s <= EXACT_BASIS_MAX_STAGES:
            polys = _lagrange_polynomials([Fraction(v) for v in self.nodes.c], Fraction(1))
        else:
            polys = _lagrange_polynomials(list(self.nodes.as_array()), 1.0)
        return np.asarray([[float(v) for v in poly] for poly in polys], dtype=float)

    def evaluate(self, ell: int, theta) -> np.ndarray:
        """Value of the ell-th polynomial (0-based) at theta."""
        return np.polynomial.polynomial.polyval(theta, self.coefficients[ell])

    def integral(self, ell: int, upper: float) -> float:
        """int_0^upper of the ell-th polynomial."""
        powers = np.arange(1, self.nodes.s + 1)
        return float(np.sum(self.coefficients[ell] * upper**powers / powers))

    def sup_norm(self, ell: int, samples: int = 2001) -> float:
        theta = np.linspace(0.0, 1.0, samples)
        return float(np.max(np.abs(self.evaluate(ell, theta))))


def collocation_tableau(nodes: CollocationNodes) -> ButcherTableau:
    """a_{k,l} = int_0^{c_k} L_l, b_l = int_0^1 L_l."""
    s = nodes.s
    if s <= EXACT_BASIS_MAX_STAGES:
        a, b = _exact_collocation_integrals(nodes)
    else:
        basis = LagrangeBasis(nodes)
        a = np.array(
            [[basis.integral(ell, ck) for ell in range(s)] for ck in nodes.c]
        )
        b = np.array([basis.integral(ell, 1.0) for ell in range(s)])
    return ButcherTableau(a=a, b=b, c=nodes.as_array(), name=f"{nodes.family}-{s}")


def _exact_collocation_integrals(nodes: CollocationNodes):
    s = nodes.s
    c = [Fraction(v) for v in nodes.c]
    polys = _lagrange_polynomials(c, Fraction(1))

    def integrate(poly, upper):
        return sum(coef * upper ** (j + 1) / (j + 1) for j, coef in enumerate(poly))

    a = [[float(integrate(polys[ell], ck)) for ell in range(s)] for ck in c]
    b = [float(integrate(polys[ell], Fraction(1))) for ell in range(s)]
    return np.asarray(a), np.asarray(b)


def gauss_tableau(s: int) -> ButcherTableau:
    return collocation_tableau(gauss_nodes(s))


def factorials(n: int) -> np.ndarray:
    return np.array([math.factorial(j) for j in range(n)], dtype=float)


def collocation_nodes(s: int, family: NodeFamily = NodeFamily.GAUSS) -> CollocationNodes:
    if family == NodeFamily.GAUSS:
        return gauss_nodes(s)
    if family == NodeFamily.EQUISPACED:
        return equispaced_nodes(s)
    raise NodeError(f"Unknown node family {family}")
