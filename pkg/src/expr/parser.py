"""
Recursive-descent parser for scalar expressions.

Grammar::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom (('^' | '**') unary)?
    atom  := number | name | name '(' expr ')' | '(' expr ')'

``^`` is right associative and binds tighter than unary minus on its left,
so ``-x^2`` is ``-(x^2)``.
"""
import re
from typing import List, Sequence

from ..errors import ExpressionSyntaxError, UnknownVariable
from .dual import CONSTANTS, FUNCTIONS
from .models import Binary, Call, Node, Number, Unary, Variable

_TOKEN = re.compile(
    r"""
    (?P<space>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.X,
)

END = "end of input"


class Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def tokenize(source: str) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if match is None:
            raise ExpressionSyntaxError(f"Unexpected character {source[pos]!r}", pos, "token")
        kind = match.lastgroup
        if kind != "space":
            text = match.group()
            tokens.append(Token("op" if text == "**" else kind, "^" if text == "**" else text, pos))
        pos = match.end()
    tokens.append(Token("end", "", len(source)))
    return tokens


class Parser:
    """Parses one source string against a list of declared variable names."""

    def __init__(self, source: str, variables: Sequence[str]):
        self.source = source
        self.variables = set(variables)
        self.tokens = tokenize(source)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def _advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.index += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            self._fail(repr(text))

    def _fail(self, expected: str):
        token = self.current
        found = END if token.kind == "end" else repr(token.text)
        raise ExpressionSyntaxError(f"Expected {expected}, found {found}", token.offset, expected)

    def parse(self) -> Node:
        if self.current.kind == "end":
            self._fail("expression")
        node = self._expr()
        if self.current.kind != "end":
            self._fail("operator or end of input")
        return node

    def _expr(self) -> Node:
        node = self._term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            node = Binary(op, node, self._term())
        return node

    def _term(self) -> Node:
        node = self._unary()
        while self.current.kind == "op" and self.current.text in ("*", "/"):
            op = self._advance().text
            node = Binary(op, node, self._unary())
        return node

    def _unary(self) -> Node:
        if self.current.kind == "op" and self.current.text in "+-":
            op = self._advance().text
            return Unary(op, self._unary())
        return self._power()

    def _power(self) -> Node:
        base = self._atom()
        if self._accept("^"):
            return Binary("^", base, self._unary())
        return base

    def _atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            return Number(float(token.text))
        if token.kind == "name":
            self._advance()
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self._expr()
                self._expect(")")
                return Call(token.text, (arg,))
            if token.text in self.variables:
                return Variable(token.text)
            if token.text in CONSTANTS:
                return Number(CONSTANTS[token.text])
            raise UnknownVariable(token.text)
        if self._accept("("):
            node = self._expr()
            self._expect(")")
            return node
        self._fail("number, name or '('")


def parse_tree(source: str, variables: Sequence[str]) -> Node:
    return Parser(source, variables).parse()


def _number_source(value: float) -> str:
    text = repr(float(value))
    if text in ("inf", "nan", "-inf"):
        raise ValueError(f"Cannot print non-finite constant {text}")
    return text


def to_source(node: Node) -> str:
    """Fully parenthesized source text that parses back to the same tree."""
    if isinstance(node, Number):
        text = _number_source(node.value)
        return f"({text})" if text.startswith("-") else text
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Unary):
        return f"({node.op}{to_source(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        args = ", ".join(to_source(a) for a in node.args)
        return f"{node.function}({args})"
    raise TypeError(f"Unknown node {node!r}")

