from dataclasses import dataclass

import numpy as np


class SplittingError(ValueError):
    pass


THETA = (2.0 + 2.0 ** (1.0 / 3.0) + 2.0 ** (-1.0 / 3.0)) / 6.0

SIXTH_ORDER_A = (
    0.0502627644003922,
    0.413514300428344,
    0.0450798897943977,
    -0.188054853819569,
    0.541960678450780,
)
SIXTH_ORDER_B = (
    0.148816447901042,
    -0.132385865767784,
    0.067307604692185,
    0.432666402578175,
)


@dataclass(frozen=True)
class SplittingScheme:
    """
    Composition S_N(a_1 h) S_L(b_1 h) ... S_L(b_r h) S_N(a_{r+1} h).

    Attributes:
        order: nominal order.
        a: r + 1 fractions of h for the nonlinear and potential flow.
        b: r fractions of h for the linear flow.
    """

    order: int
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        self.validate_lengths()
        self.validate_sums()
        if self.order >= 2:
            self.validate_palindrome()

    def validate_lengths(self):
        if len(self.a) != len(self.b) + 1:
            raise SplittingError(
                f"Expected {len(self.b) + 1} a-coefficients, got {len(self.a)}"
            )

    def validate_sums(self):
        if abs(sum(self.a) - 1.0) > 1e-14 or abs(sum(self.b) - 1.0) > 1e-14:
            raise SplittingError("Splitting coefficients must each sum to 1")

    def validate_palindrome(self):
        if not (
            np.allclose(self.a, self.a[::-1], rtol=0, atol=1e-15)
            and np.allclose(self.b, self.b[::-1], rtol=0, atol=1e-15)
        ):
            raise SplittingError(f"Order {self.order} scheme must be palindromic")


def splitting_scheme(order: int) -> SplittingScheme:
    if order == 1:
        # S_N(h) S_L(h); the trailing S_N substep is empty
        return SplittingScheme(order=1, a=(1.0, 0.0), b=(1.0,))
    if order == 2:
        return SplittingScheme(order=2, a=(0.5, 0.5), b=(1.0,))
    if order == 4:
        a = (THETA, 0.5 - THETA)
        b = (2.0 * THETA, 1.0 - 4.0 * THETA)
        return SplittingScheme(order=4, a=a + a[::-1], b=b + b[:1])
    if order == 6:
        a = SIXTH_ORDER_A + (1.0 - 2.0 * sum(SIXTH_ORDER_A),)
        b = SIXTH_ORDER_B + (0.5 - sum(SIXTH_ORDER_B),)
        return SplittingScheme(order=6, a=a + a[-2::-1], b=b + b[::-1])
    raise SplittingError(f"No splitting scheme of order {order}")
