"""
Forward-mode automatic differentiation with dual numbers.

A ``DualNumber`` carries a value and one derivative slot per seeded variable.
Values may themselves be dual numbers, which gives exact higher-order
derivatives by nesting; ``depth`` records the nesting level so that mixed-level
arithmetic treats shallower numbers as constants.
"""
import math
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DomainError


def scale(derivatives: np.ndarray, factor: Any) -> np.ndarray:
    """derivatives * factor, elementwise when the factor is itself a dual number."""
    if isinstance(factor, DualNumber):
        out = np.empty(len(derivatives), dtype=object)
        for i, d in enumerate(derivatives):
            out[i] = factor * d
        return out
    return derivatives * factor


class DualNumber:
    """Value plus derivative vector, closed under arithmetic and elementary functions."""

    __slots__ = ("value", "derivatives", "depth")

    # numpy defers binary operators to the reflected DualNumber methods
    __array_ufunc__ = None

    def __init__(self, value: Any, derivatives: np.ndarray):
        self.value = value
        self.derivatives = derivatives
        self.depth = value.depth + 1 if isinstance(value, DualNumber) else 1

    def __repr__(self) -> str:
        return f"DualNumber({self.value!r}, {self.derivatives!r})"

    def __float__(self) -> float:
        return float(primal(self))

    def _deeper(self, other) -> bool:
        return isinstance(other, DualNumber) and other.depth > self.depth

    def _peer(self, other) -> Optional[bool]:
        """True for same level, False for a constant, None when the operand is not ours to handle.

        Deeper dual numbers are dispatched to their own reflected methods before
        this is consulted: Python never tries the reflected method of an operand
        of the same type.
        """
        if isinstance(other, DualNumber):
            return other.depth == self.depth
        if isinstance(other, np.ndarray):
            return None
        return False

    def __add__(self, other):
        if self._deeper(other):
            return other.__radd__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        if peer:
            return DualNumber(self.value + other.value, self.derivatives + other.derivatives)
        return DualNumber(self.value + other, self.derivatives)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        if self._deeper(other):
            return other.__rsub__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        if peer:
            return DualNumber(self.value - other.value, self.derivatives - other.derivatives)
        return DualNumber(self.value - other, self.derivatives)

    def __rsub__(self, other):
        if self._deeper(other):
            return other.__sub__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        return DualNumber(other - self.value, -self.derivatives)

    def __neg__(self):
        return DualNumber(-self.value, -self.derivatives)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if self._deeper(other):
            return other.__rmul__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        if peer:
            return DualNumber(
                self.value * other.value,
                scale(self.derivatives, other.value) + scale(other.derivatives, self.value),
            )
        return DualNumber(self.value * other, scale(self.derivatives, other))

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if self._deeper(other):
            return other.__rtruediv__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        if peer:
            inv = reciprocal(other.value)
            quotient = self.value * inv
            return DualNumber(
                quotient,
                scale(self.derivatives, inv) - scale(other.derivatives, quotient * inv),
            )
        inv = reciprocal(other)
        return DualNumber(self.value * inv, scale(self.derivatives, inv))

    def __rtruediv__(self, other):
        if self._deeper(other):
            return other.__truediv__(self)
        peer = self._peer(other)
        if peer is None:
            return NotImplemented
        inv = reciprocal(self.value)
        quotient = other * inv
        return DualNumber(quotient, scale(self.derivatives, -(quotient * inv)))

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def __abs__(self):
        return fabs(self)


def primal(a: Any) -> Any:
    """Innermost float of a possibly nested number."""
    while isinstance(a, DualNumber):
        a = a.value
    return a


def _any(condition) -> bool:
    return bool(np.any(condition))


def reciprocal(a: Any) -> Any:
    """1/a with a domain check on the primal value."""
    if _any(primal(a) == 0):
        raise DomainError("division by zero")
    return 1.0 / a


def divide(a: Any, b: Any) -> Any:
    if _any(primal(b) == 0):
        raise DomainError("division by zero")
    return a / b


# Elementary functions

def sin(a):
    if isinstance(a, DualNumber):
        return DualNumber(sin(a.value), scale(a.derivatives, cos(a.value)))
    if isinstance(a, np.ndarray):
        return np.sin(a)
    return math.sin(a)


def cos(a):
    if isinstance(a, DualNumber):
        return DualNumber(cos(a.value), scale(a.derivatives, -sin(a.value)))
    if isinstance(a, np.ndarray):
        return np.cos(a)
    return math.cos(a)


def tan(a):
    if isinstance(a, DualNumber):
        t = tan(a.value)
        return DualNumber(t, scale(a.derivatives, 1.0 + t * t))
    if _any(np.cos(a) == 0.0):
        raise DomainError("tan at a pole")
    if isinstance(a, np.ndarray):
        return np.tan(a)
    return math.tan(a)


def exp(a):
    if isinstance(a, DualNumber):
        e = exp(a.value)
        return DualNumber(e, scale(a.derivatives, e))
    if isinstance(a, np.ndarray):
        return np.exp(a)
    try:
        return math.exp(a)
    except OverflowError as e:
        raise DomainError(f"exp overflow: {e}") from e


def log(a):
    if _any(primal(a) <= 0):
        raise DomainError("log of nonpositive value")
    if isinstance(a, DualNumber):
        return DualNumber(log(a.value), scale(a.derivatives, reciprocal(a.value)))
    if isinstance(a, np.ndarray):
        return np.log(a)
    return math.log(a)


def sqrt(a):
    p = primal(a)
    if isinstance(a, DualNumber):
        if _any(p <= 0):
            raise DomainError("sqrt derivative at nonpositive value")
        s = sqrt(a.value)
        return DualNumber(s, scale(a.derivatives, 0.5 * reciprocal(s)))
    if _any(p < 0):
        raise DomainError("sqrt of negative value")
    if isinstance(a, np.ndarray):
        return np.sqrt(a)
    return math.sqrt(a)


def fabs(a):
    if isinstance(a, DualNumber):
        sign = np.sign(primal(a))
        return DualNumber(fabs(a.value), a.derivatives * sign)
    if isinstance(a, np.ndarray):
        return np.abs(a)
    return abs(a)


def _integer_exponent(b: Any) -> Optional[int]:
    if isinstance(b, (DualNumber, np.ndarray)):
        return None
    b = float(b)
    return int(b) if b.is_integer() else None


def power(a, b):
    """a^b. Integer exponents allow any base; otherwise the base must be nonnegative."""
    n = _integer_exponent(b)
    if n is not None:
        if n == 0:
            return 1.0
        if n < 0:
            return reciprocal(power(a, -n))
        if isinstance(a, DualNumber):
            return DualNumber(power(a.value, n), scale(a.derivatives, n * power(a.value, n - 1)))
        return a ** n
    if isinstance(b, DualNumber):
        if _any(primal(a) <= 0):
            raise DomainError("power with variable exponent needs a positive base")
        return exp(b * log(a))
    b = float(b)
    p = primal(a)
    if _any(p < 0):
        raise DomainError("non-integer power of negative base")
    if isinstance(a, DualNumber):
        if b < 1 and _any(p == 0):
            raise DomainError("non-integer power derivative at zero")
        return DualNumber(power(a.value, b), scale(a.derivatives, b * power(a.value, b - 1)))
    if isinstance(a, np.ndarray):
        return np.power(a, b)
    return math.pow(a, b)


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "abs": fabs,
}

CONSTANTS = {
    "pi": math.pi,
}


# Seeding and extraction

def depth_of(a: Any) -> int:
    return a.depth if isinstance(a, DualNumber) else 0


def promote(a: Any, template: Any) -> Any:
    """Wrap ``a`` with zero derivative slots up to the nesting depth of ``template``."""
    if depth_of(a) >= depth_of(template):
        return a
    return DualNumber(promote(a, template.value), np.zeros(len(template.derivatives)))


def seed(values: Sequence[Any]) -> List[DualNumber]:
    """One new derivative level over ``values``, each seeded with a unit slot.

    Values shallower than the deepest one are promoted first, so the new level
    sits on top of every entry.
    """
    values = list(values)
    base = max((depth_of(v) for v in values), default=0)
    if base > 0:
        template = next(v for v in values if depth_of(v) == base)
        values = [promote(v, template) for v in values]
    eye = np.eye(len(values))
    return [DualNumber(v, eye[i]) for i, v in enumerate(values)]


def seed_batch(columns: np.ndarray) -> List[DualNumber]:
    """Seed m variables whose values are length-N sample arrays.

    Every variable of the evaluated expression must be seeded: numpy constants
    do not mix with batched dual numbers.
    """
    columns = np.asarray(columns, dtype=float)
    m, count = columns.shape
    seeded = []
    for i in range(m):
        derivatives = np.zeros((m, count))
        derivatives[i] = 1.0
        seeded.append(DualNumber(columns[i], derivatives))
    return seeded


def split(a: Any, depth: int, size: int) -> Tuple[Any, List[Any]]:
    """(value, derivatives) of ``a`` at nesting level ``depth``; constants have zero slots."""
    if isinstance(a, DualNumber) and a.depth == depth:
        return a.value, list(a.derivatives)
    return a, [0.0] * size


def gradient(fn: Callable[[List[Any]], Any], point: Sequence[Any]) -> Tuple[Any, List[Any]]:
    """Value and first derivatives of ``fn`` at ``point`` (entries may be dual numbers)."""
    level = max((depth_of(p) for p in point), default=0) + 1
    result = fn(seed(point))
    return split(result, level, len(point))


def jacobian(
    fn: Callable[[List[Any]], Sequence[Any]], point: Sequence[Any]
) -> Tuple[List[Any], List[List[Any]]]:
    """Values and Jacobian rows of a vector-valued ``fn``."""
    level = max((depth_of(p) for p in point), default=0) + 1
    results = fn(seed(point))
    values, rows = [], []
    for r in results:
        v, d = split(r, level, len(point))
        values.append(v)
        rows.append(d)
    return values, rows


def hessian(
    fn: Callable[[List[Any]], Any],
    point: Sequence[Any],
    rows: Optional[Sequence[int]] = None,
) -> Tuple[Any, List[Any], List[List[Any]]]:
    """Value, gradient and second derivatives of ``fn`` by two nested levels.

    ``rows`` restricts the outer level to a subset of variables; the returned
    second-derivative block then has shape (len(rows), len(point)).
    """
    m = len(point)
    rows = list(range(m)) if rows is None else list(rows)
    base = max((depth_of(p) for p in point), default=0)
    inner = seed(point)
    eye = np.eye(len(rows))
    variables: List[Any] = list(inner)
    for a, i in enumerate(rows):
        variables[i] = DualNumber(inner[i], eye[a])
    result = fn(variables)
    inner_value, outer = split(result, base + 2, len(rows))
    value, grad = split(inner_value, base + 1, m)
    second = [split(entry, base + 1, m)[1] for entry in outer]
    return value, grad, second

