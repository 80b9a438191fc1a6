"""Dephasing superchannels and memory effects."""

from ._dephkit import *  # noqa: F401,F403
from ._dephkit import (
    ContractError,
    DimensionError,
    NotDephasingRealizationError,
    SearchFailureError,
    UnsupportedDimensionError,
    ValidationError,
)

__version__ = "0.1.0"
