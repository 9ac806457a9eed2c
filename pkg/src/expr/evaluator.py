"""
Compiled scalar expressions.

A ``ScalarExpr`` compiles its tree once into nested closures over a positional
environment, so the same object evaluates floats, numpy arrays and (nested)
dual numbers without re-walking the tree.
"""
from typing import Any, Callable, Dict, List, Mapping, Sequence, Tuple

from ..errors import UnknownVariable
from .dual import FUNCTIONS, depth_of, divide, power, seed, split
from .models import Binary, Call, Node, Number, Unary, Variable, free_variables
from .parser import parse_tree, to_source

Compiled = Callable[[Sequence[Any]], Any]


def _compile(node: Node, index: Mapping[str, int]) -> Compiled:
    if isinstance(node, Number):
        value = node.value
        return lambda env: value
    if isinstance(node, Variable):
        slot = index[node.name]
        return lambda env: env[slot]
    if isinstance(node, Unary):
        operand = _compile(node.operand, index)
        if node.op == "-":
            return lambda env: -operand(env)
        return operand
    if isinstance(node, Binary):
        left = _compile(node.left, index)
        right = _compile(node.right, index)
        if node.op == "+":
            return lambda env: left(env) + right(env)
        if node.op == "-":
            return lambda env: left(env) - right(env)
        if node.op == "*":
            return lambda env: left(env) * right(env)
        if node.op == "/":
            return lambda env: divide(left(env), right(env))
        if node.op == "^":
            return lambda env: power(left(env), right(env))
        raise ValueError(f"Unknown operator {node.op!r}")
    if isinstance(node, Call):
        fn = FUNCTIONS[node.function]
        arg = _compile(node.args[0], index)
        return lambda env: fn(arg(env))
    raise TypeError(f"Unknown node {node!r}")


class ScalarExpr:
    """Parsed expression over an ordered list of declared variables."""

    def __init__(self, tree: Node, variables: Sequence[str], source: str = ""):
        self.tree = tree
        self.variables: Tuple[str, ...] = tuple(variables)
        self.source = source or to_source(tree)
        index = {name: i for i, name in enumerate(self.variables)}
        for name in free_variables(tree):
            if name not in index:
                raise UnknownVariable(name)
        self._fn = _compile(tree, index)

    def __repr__(self) -> str:
        return f"ScalarExpr({self.source!r})"

    def __call__(self, env: Sequence[Any]) -> Any:
        """Evaluate on values given positionally in declared-variable order."""
        return self._fn(env)

    @property
    def is_constant(self) -> bool:
        return not free_variables(self.tree)

    def evaluate(self, bindings: Mapping[str, Any]) -> Any:
        return self._fn(self._env(bindings))

    def _env(self, bindings: Mapping[str, Any]) -> List[Any]:
        env = []
        for name in self.variables:
            if name not in bindings:
                raise UnknownVariable(name)
            env.append(bindings[name])
        return env


def parse(source: str, variables: Sequence[str]) -> ScalarExpr:
    """Parse ``source`` allowing only ``variables`` as free names."""
    return ScalarExpr(parse_tree(source, variables), variables, source)


def constant(value: float, variables: Sequence[str] = ()) -> ScalarExpr:
    return ScalarExpr(Number(float(value)), variables)


def eval_with_derivatives(
    expr: ScalarExpr, bindings: Mapping[str, Any], seeds: Sequence[str]
) -> Tuple[Any, List[Any]]:
    """Value and exact partial derivatives with respect to ``seeds``."""
    env: Dict[str, Any] = dict(bindings)
    for name in seeds:
        if name not in env:
            raise UnknownVariable(name)
    level = max((depth_of(env[name]) for name in seeds), default=0) + 1
    seeded = seed([env[name] for name in seeds])
    for name, value in zip(seeds, seeded):
        env[name] = value
    result = expr.evaluate(env)
    value, derivatives = split(result, level, len(seeds))
    return value, derivatives
