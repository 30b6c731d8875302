from .scalar import PoleError, Scalar, VarSpec
from .logform import LogForm

__all__ = ["LogForm", "PoleError", "Scalar", "VarSpec"]
