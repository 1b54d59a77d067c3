from dataclasses import dataclass
from enum import Enum
from typing import Optional


class MethodFamily(Enum):
    ERK = "erk"
    LAWSON = "lawson"
    SPLITTING = "splitting"


class NodeFamily(Enum):
    GAUSS = "gauss"
    EQUISPACED = "equispaced"


SPLITTING_ORDERS = (1, 2, 4, 6)


@dataclass(frozen=True)
class MethodSpec:
    """
    Parameters
        family: erk, lawson or splitting
        stages: stage count s for erk and lawson
        nodes: collocation node family for erk and lawson
        order: splitting order, one of 1, 2, 4, 6
    """

    family: MethodFamily
    stages: Optional[int] = None
    nodes: NodeFamily = NodeFamily.GAUSS
    order: Optional[int] = None

    def __post_init__(self):
        self.validate_family()

    def validate_family(self):
        if not isinstance(self.family, MethodFamily):
            raise ValueError(f"Invalid method family: {self.family}")
        if self.family == MethodFamily.SPLITTING:
            if self.order not in SPLITTING_ORDERS:
                raise ValueError(
                    f"Splitting order must be one of {SPLITTING_ORDERS}, got {self.order}"
                )
            if self.stages is not None:
                raise ValueError("Splitting methods take an order, not stages")
        else:
            if self.stages is None or self.stages < 1:
                raise ValueError(f"{self.family.value} needs a positive stage count")
            if self.order is not None:
                raise ValueError(f"{self.family.value} takes stages, not an order")

    def label(self) -> str:
        if self.family == MethodFamily.SPLITTING:
            return f"splitting-{self.order}"
        return f"{self.nodes.value}-{self.family.value}-{self.stages}"
