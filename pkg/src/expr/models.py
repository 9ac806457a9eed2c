"""
Expression tree nodes.
"""
from dataclasses import dataclass
from typing import Tuple, Union


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or "+"
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    function: str
    args: Tuple["Node", ...]


Node = Union[Number, Variable, Unary, Binary, Call]


def free_variables(node: Node) -> Tuple[str, ...]:
    """Variable names referenced by ``node`` in first-occurrence order."""
    seen = []

    def walk(n: Node) -> None:
        if isinstance(n, Variable):
            if n.name not in seen:
                seen.append(n.name)
        elif isinstance(n, Unary):
            walk(n.operand)
        elif isinstance(n, Binary):
            walk(n.left)
            walk(n.right)
        elif isinstance(n, Call):
            for arg in n.args:
                walk(arg)

    walk(node)
    return tuple(seen)
