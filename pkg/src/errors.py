"""
Error types shared by every subpackage.

Each error carries the CLI exit code it maps to: 2 for configuration and parse
problems, 1 for computational failures.
"""
from typing import Any, Dict, Optional


class SubFinslerError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable form written to stderr by the CLI."""
        return {"error": type(self).__name__, "message": str(self)}


class ConfigError(SubFinslerError):
    """Invalid configuration file or command-line arguments."""

    exit_code = 2


class ExpressionSyntaxError(SubFinslerError):
    """Malformed expression source."""

    exit_code = 2

    def __init__(self, message: str, offset: int, expected: Optional[str] = None):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.expected = expected

    def to_dict(self) -> Dict[str, Any]:
        # Reported under the grammar-level name used in the config reference
        return {
            "error": "SyntaxError",
            "message": str(self),
            "offset": self.offset,
            "expected": self.expected,
        }


class ConfigSyntaxError(ExpressionSyntaxError):
    """Configuration file is not well-formed JSON."""


class UnknownVariable(SubFinslerError):
    """Expression references an undeclared name."""

    exit_code = 2

    def __init__(self, name: str):
        super().__init__(f"Unknown variable: {name!r}")
        self.name = name


class UnknownSystem(SubFinslerError):
    """Catalog lookup failed."""

    exit_code = 2

    def __init__(self, name: str):
        super().__init__(f"Unknown system: {name!r}")
        self.name = name


class DomainError(SubFinslerError):
    """Evaluation outside the domain of a function (log of nonpositive, 1/0, ...)."""


class RegularityError(SubFinslerError):
    """Frame or matrix is numerically rank deficient."""


class SingularHessian(RegularityError):
    """Fiber Hessian of the extended Lagrangian is not invertible."""


class NotGenerating(SubFinslerError):
    """Iterated brackets do not span the tangent space up to the requested depth."""

    def __init__(self, rank: int, dim: int, max_depth: int):
        super().__init__(
            f"Distribution not bracket generating up to depth {max_depth}: rank {rank} < {dim}"
        )
        self.rank = rank
        self.dim = dim
        self.max_depth = max_depth


class NoConvergence(SubFinslerError):
    """Iterative solver exhausted its budget."""

    def __init__(self, message: str, best_residual: Optional[float] = None):
        if best_residual is not None:
            message = f"{message} (best residual {best_residual:.3e})"
        super().__init__(message)
        self.best_residual = best_residual

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["best_residual"] = self.best_residual
        return data


class StepFailure(SubFinslerError):
    """Adaptive integrator step size underflow."""


class NonHorizontal(SubFinslerError):
    """Curve velocity leaves the distribution beyond tolerance."""


class InvalidRegion(SubFinslerError):
    """Sampling region is empty or malformed."""

    exit_code = 2
