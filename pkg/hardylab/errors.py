# hardylab/errors.py
from typing import Any, Dict, List, Optional


class HardyLabError(Exception):
    """Base class; `code` is what the CLI reports on stderr."""

    def __init__(self, message: str, details: Optional[List[Dict[str, Any]]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or []

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details:
            out["details"] = self.details
        return out


# ---------- input / precondition errors ----------
class DimensionMismatch(HardyLabError, ValueError):
    pass


class DimensionTooSmall(HardyLabError, ValueError):
    pass


class TooFewPoles(HardyLabError, ValueError):
    pass


class DegeneratePoles(HardyLabError, ValueError):
    pass


class PoleHit(HardyLabError, ValueError):
    pass


class UnsupportedDomain(HardyLabError, ValueError):
    pass


class UnsupportedOrder(HardyLabError, ValueError):
    pass


class PositivityViolation(HardyLabError, ValueError):
    pass


class ExponentMissing(HardyLabError, ValueError):
    pass


class MeshTooCoarse(HardyLabError, ValueError):
    pass


class SchemaError(HardyLabError, ValueError):
    pass


# ---------- numerical failures ----------
class NonIntegrable(HardyLabError, ArithmeticError):
    pass


class MaxSubdivisions(HardyLabError, RuntimeError):
    pass


class NoConvergence(HardyLabError, RuntimeError):
    pass
