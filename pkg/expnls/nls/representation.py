from enum import Enum


class Representation(Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"
