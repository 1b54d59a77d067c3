from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class TableauError(ValueError):
    pass


@dataclass
class ButcherTableau:
    """
    Nodes, matrix and weights of a Runge-Kutta method.

    Attributes:
        a: s x s stage matrix.
        b: s weights.
        c: s nodes; defaults to the row sums of a, and must equal them when given.
        name: label used in reports.
    """

    a: np.ndarray
    b: np.ndarray
    c: Optional[np.ndarray] = None
    name: str = "rk"
    tolerance: float = field(default=1e-13, repr=False)

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        self.validate_shapes()
        row_sums = self.a.sum(axis=1)
        if self.c is None:
            self.c = row_sums
        else:
            self.c = np.atleast_1d(np.asarray(self.c, dtype=float))
            self.validate_nodes(row_sums)

    def validate_shapes(self):
        s = self.b.shape[0]
        if self.a.shape != (s, s):
            raise TableauError(
                f"Tableau matrix has shape {self.a.shape}, expected ({s}, {s})"
            )

    def validate_nodes(self, row_sums: np.ndarray):
        if self.c.shape != row_sums.shape:
            raise TableauError(f"Tableau nodes must have {row_sums.size} entries")
        if not np.allclose(self.c, row_sums, rtol=0.0, atol=1e-12):
            raise TableauError("Tableau nodes must equal the row sums of a")

    @property
    def s(self) -> int:
        return self.b.shape[0]

    def is_consistent(self) -> bool:
        return abs(self.b.sum() - 1.0) <= self.tolerance

    def symmetry_defect(self) -> float:
        """max |a_{s+1-k, s+1-l} + a_{k,l} - b_l|."""
        flipped = self.a[::-1, ::-1]
        return float(np.max(np.abs(flipped + self.a - self.b[None, :])))

    def is_symmetric(self) -> bool:
        return self.symmetry_defect() <= self.tolerance

    def cooper_defect(self) -> float:
        """max |b_k a_{k,l} + b_l a_{l,k} - b_k b_l|."""
        ba = self.b[:, None] * self.a
        return float(np.max(np.abs(ba + ba.T - np.outer(self.b, self.b))))

    def is_cooper(self) -> bool:
        return self.cooper_defect() <= self.tolerance


def explicit_euler_tableau() -> ButcherTableau:
    return ButcherTableau(a=[[0.0]], b=[1.0], c=[0.0], name="explicit-euler")
