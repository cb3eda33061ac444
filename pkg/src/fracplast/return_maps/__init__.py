from .provider import (
    EXPLICIT, IMPLICIT, CLASSICAL, ReturnMap
)
from .explicit import ExplicitReturnMap
from .implicit import ImplicitReturnMap
from .classical import ClassicalReturnMap

__all__ = [
    "EXPLICIT",
    "IMPLICIT",
    "CLASSICAL",
    "ReturnMap",
    "ExplicitReturnMap",
    "ImplicitReturnMap",
    "ClassicalReturnMap"
]
