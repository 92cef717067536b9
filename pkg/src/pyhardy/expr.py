"""Closed-form functions of one positive variable.

Grammar (the only accepted input)::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" exponent)?
    base   := number | VAR | "e" | func "(" expr ")" | "(" expr ")" | "-" factor
    func   := "exp" | "ln" | "abs" | "min" | "max"     # min/max take two args

``exponent`` is a number, ``e``, a negated exponent, or a parenthesised
expression that does not mention the variable. ``VAR`` is ``r`` for weights;
N-functions are written in ``x`` / ``λ`` / ``lam``.

Evaluation is vectorised over numpy arrays. An undefined value (ln of a
non-positive number, division by zero, ``0^-1``, ``inf - inf``) is never
returned as NaN: ``Expression.__call__`` raises `DomainError` naming the
offending point. Derivatives of ``abs``/``min``/``max`` are written with
``u/abs(u)``, so evaluating a derivative at a kink is a division-by-zero
domain error.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, fields, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .search import suggest

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

FUNCTIONS = ("exp", "ln", "abs", "min", "max")
_BINARY_FUNCTIONS = ("min", "max")


# ----------------------------------------------------------------------------
# Errors
# ----------------------------------------------------------------------------


class ExpressionSyntaxError(ValueError):
    """Input does not conform to the grammar.

    Attributes:
        text: The input as given.
        offset: UTF-8 byte offset of the offending token.
    """

    def __init__(self, message: str, text: str, offset: int):
        self.text = text
        self.offset = offset
        super().__init__(f"{message} at offset {offset} in {text!r}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class NonConstantExponentError(ExpressionSyntaxError):
    pass


class DomainError(ValueError):
    """Evaluation left the domain of the closed form.

    Attributes:
        expression: Text of the expression being evaluated.
        at: The point where evaluation failed.
        reason: Short description (``"ln of non-positive argument"``, ...).
    """

    def __init__(self, reason: str, expression: str, at: float):
        self.reason = reason
        self.expression = expression
        self.at = at
        super().__init__(f"{reason} evaluating {expression!r} at {at!r}")


# ----------------------------------------------------------------------------
# AST
# ----------------------------------------------------------------------------


class Node:
    """Base of the immutable AST. Subclasses are frozen dataclasses."""

    def eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def diff(self) -> "Node":
        raise NotImplementedError

    def text(self, var: str) -> str:
        raise NotImplementedError

    def children(self) -> Tuple["Node", ...]:
        values = (getattr(self, f.name) for f in fields(self))
        return tuple(v for v in values if isinstance(v, Node))


@dataclass(frozen=True)
class Const(Node):
    value: float
    name: Optional[str] = None

    def eval(self, x):
        return np.full(np.shape(x), self.value)

    def diff(self):
        return ZERO

    def text(self, var):
        if self.name is not None:
            return self.name
        if not math.isfinite(self.value):
            raise ValueError(f"cannot serialize non-finite constant {self.value!r}")
        if math.copysign(1.0, self.value) < 0:
            return f"(-{-self.value!r})"
        return repr(self.value)


@dataclass(frozen=True)
class Var(Node):
    def eval(self, x):
        return x

    def diff(self):
        return ONE

    def text(self, var):
        return var


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def eval(self, x):
        return -self.arg.eval(x)

    def diff(self):
        return neg(self.arg.diff())

    def text(self, var):
        return f"(-{self.arg.text(var)})"


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node

    def eval(self, x):
        return self.left.eval(x) + self.right.eval(x)

    def diff(self):
        return add(self.left.diff(), self.right.diff())

    def text(self, var):
        return f"({self.left.text(var)} + {self.right.text(var)})"


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node

    def eval(self, x):
        return self.left.eval(x) - self.right.eval(x)

    def diff(self):
        return sub(self.left.diff(), self.right.diff())

    def text(self, var):
        return f"({self.left.text(var)} - {self.right.text(var)})"


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node

    def eval(self, x):
        return self.left.eval(x) * self.right.eval(x)

    def diff(self):
        return add(mul(self.left.diff(), self.right), mul(self.left, self.right.diff()))

    def text(self, var):
        return f"({self.left.text(var)} * {self.right.text(var)})"


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node

    def eval(self, x):
        den = self.right.eval(x)
        return np.where(den == 0, np.nan, self.left.eval(x) / den)

    def diff(self):
        top = sub(mul(self.left.diff(), self.right), mul(self.left, self.right.diff()))
        return div(top, power(self.right, 2.0))

    def text(self, var):
        return f"({self.left.text(var)} / {self.right.text(var)})"


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: float

    def eval(self, x):
        b = self.base.eval(x)
        out = np.power(b, self.exponent)
        if self.exponent < 0:
            out = np.where(b == 0, np.nan, out)
        return out

    def diff(self):
        n = self.exponent
        return mul(mul(Const(n), power(self.base, n - 1.0)), self.base.diff())

    def text(self, var):
        n = self.exponent
        exp_text = repr(n) if math.copysign(1.0, n) > 0 else f"(-{-n!r})"
        return f"({self.base.text(var)}^{exp_text})"


@dataclass(frozen=True)
class Call(Node):
    func: str
    arg: Node

    def eval(self, x):
        a = self.arg.eval(x)
        if self.func == "exp":
            return np.exp(a)
        if self.func == "ln":
            return np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), np.nan)
        return np.abs(a)

    def diff(self):
        a = self.arg
        if self.func == "exp":
            return mul(self, a.diff())
        if self.func == "ln":
            return div(a.diff(), a)
        return mul(div(a, Call("abs", a)), a.diff())

    def text(self, var):
        return f"{self.func}({self.arg.text(var)})"


@dataclass(frozen=True)
class MinMax(Node):
    func: str
    left: Node
    right: Node

    def eval(self, x):
        a, b = self.left.eval(x), self.right.eval(x)
        return np.minimum(a, b) if self.func == "min" else np.maximum(a, b)

    def diff(self):
        a, b = self.left, self.right
        da, db = a.diff(), b.diff()
        # sign of (b - a) selects a' for min, sign of (a - b) for max.
        gap = sub(b, a) if self.func == "min" else sub(a, b)
        sign = div(gap, Call("abs", gap))
        half = Const(0.5)
        return add(mul(half, add(da, db)), mul(mul(half, sub(da, db)), sign))

    def text(self, var):
        return f"{self.func}({self.left.text(var)}, {self.right.text(var)})"


ZERO = Const(0.0)
ONE = Const(1.0)


# ----------------------------------------------------------------------------
# Folding constructors (used by differentiation)
# ----------------------------------------------------------------------------


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Const) and node.value == value


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def add(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if isinstance(a, Const):
        if isinstance(b, Const):
            return Const(a.value * b.value)
        if a.value == -1.0:
            return neg(b)
        if isinstance(b, Mul) and isinstance(b.left, Const):
            return mul(Const(a.value * b.left.value), b.right)
        if isinstance(b, Div) and isinstance(b.left, Const):
            return div(Const(a.value * b.left.value), b.right)
        if isinstance(b, Neg):
            return mul(Const(-a.value), b.arg)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def power(a: Node, n: float) -> Node:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const) and not (a.value == 0 and n < 0):
        return Const(a.value**n)
    return Pow(a, n)


def _has_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    return any(_has_var(c) for c in node.children())


def _replace_var(node: Node, replacement: Node) -> Node:
    if isinstance(node, Var):
        return replacement
    updates = {
        f.name: _replace_var(getattr(node, f.name), replacement)
        for f in fields(node)
        if isinstance(getattr(node, f.name), Node)
    }
    return replace(node, **updates) if updates else node


def _diagnose(node: Node, x: float) -> str:
    """Name the innermost operation that turns finite inputs into NaN."""
    point = np.array(x)
    for child in node.children():
        if np.isnan(child.eval(point)):
            return _diagnose(child, x)
    if isinstance(node, Call) and node.func == "ln":
        return "ln of non-positive argument"
    if isinstance(node, Div):
        return "division by zero"
    if isinstance(node, Pow):
        return "power of a non-positive base"
    return "indeterminate form"


# ----------------------------------------------------------------------------
# Expression
# ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Expression:
    """A parsed closed form. Immutable; evaluation is pure and thread-safe.

    Equality is structural on the AST; the variable name is presentation.
    """

    root: Node
    variable: str = "r"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expression) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"

    @property
    def text(self) -> str:
        return self.root.text(self.variable)

    @property
    def is_constant(self) -> bool:
        return not _has_var(self.root)

    def evaluate_array(self, x: ArrayLike, *, strict: bool = True) -> np.ndarray:
        """Evaluate on an array. Non-strict mode returns NaN where undefined."""
        arr = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = np.asarray(self.root.eval(arr), dtype=float)
        if strict:
            bad = np.isnan(out)
            if bad.any():
                at = float(arr.flat[int(np.flatnonzero(bad)[0])]) if arr.ndim else float(arr)
                with np.errstate(all="ignore"):
                    reason = _diagnose(self.root, at)
                raise DomainError(reason, self.text, at)
        return out

    def __call__(self, x: ArrayLike) -> ArrayLike:
        out = self.evaluate_array(x)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def derivative(self) -> "Expression":
        return Expression(self.root.diff(), self.variable)

    def dilate(self, lam: float) -> "Expression":
        """The expression of ``f(lam * r)``."""
        return Expression(_replace_var(self.root, mul(Const(float(lam)), Var())), self.variable)


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[^\W\d]\w*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "number" | "ident" | "op" | "end"
    text: str
    pos: int  # character index


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r}", text, len(text[:pos].encode("utf-8"))
            )
        kind = m.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = _tokenize(text)
        self.i = 0
        self.used_variable: Optional[str] = None

    # -- helpers -------------------------------------------------------------

    def offset(self, tok: _Token) -> int:
        return len(self.text[: tok.pos].encode("utf-8"))

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token, cls=ExpressionSyntaxError):
        return cls(message, self.text, self.offset(tok))

    def expect(self, op: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != op:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise self.error(f"expected {op!r}, found {found}", tok)
        return self.advance()

    def is_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text in ops

    def number(self, tok: _Token) -> float:
        value = float(tok.text)
        if not math.isfinite(value):
            raise self.error(f"number {tok.text!r} out of range", tok)
        return value

    def unknown(self, tok: _Token) -> UnknownIdentifierError:
        # function names first: one-letter names score high against any short typo
        close = suggest(tok.text, FUNCTIONS, limit=1) or suggest(
            tok.text, ("e", *self.variables), limit=1
        )
        hint = f" (did you mean {close[0]!r}?)" if close else ""
        return self.error(f"unknown identifier {tok.text!r}{hint}", tok, UnknownIdentifierError)

    # -- grammar -------------------------------------------------------------

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise self.error(f"unexpected {tok.text!r}", tok)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.is_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.is_op("*", "/"):
            op = self.advance().text
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Node:
        node = self.base()
        if self.is_op("^"):
            self.advance()
            node = Pow(node, self.exponent())
        return node

    def exponent(self) -> float:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return self.number(tok)
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return -self.exponent()
        if tok.kind == "ident":
            if tok.text == "e":
                self.advance()
                return math.e
            if tok.text in self.variables:
                raise self.error("non-constant exponent", tok, NonConstantExponentError)
            if tok.text not in FUNCTIONS:
                raise self.unknown(tok)
            raise self.error("exponent must be a number or a parenthesised constant", tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            inner = self.expr()
            self.expect(")")
            if _has_var(inner):
                raise self.error("non-constant exponent", tok, NonConstantExponentError)
            with np.errstate(all="ignore"):
                value = float(inner.eval(np.array(1.0)))
            if not math.isfinite(value):
                raise self.error("exponent does not evaluate to a finite number", tok)
            return value
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"expected exponent, found {found}", tok)

    def base(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Const(self.number(tok))
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            return neg_literal(self.factor())
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            self.advance()
            if tok.text in self.variables:
                if self.used_variable is None:
                    self.used_variable = tok.text
                return Var()
            if tok.text == "e":
                return Const(math.e, "e")
            if tok.text in FUNCTIONS:
                self.expect("(")
                first = self.expr()
                if tok.text in _BINARY_FUNCTIONS:
                    self.expect(",")
                    second = self.expr()
                    self.expect(")")
                    return MinMax(tok.text, first, second)
                self.expect(")")
                return Call(tok.text, first)
            raise self.unknown(tok)
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"unexpected {found}", tok)


def neg_literal(node: Node) -> Node:
    """Unary minus as the parser builds it: a negated literal is a literal."""
    if isinstance(node, Const) and node.name is None:
        return Const(-node.value)
    return Neg(node)


def parse(text: str, variables: Sequence[str] = ("r",)) -> Expression:
    """Parse ``text`` into an `Expression`.

    Args:
        text: Input conforming to the module grammar.
        variables: Accepted spellings of the single variable.

    Raises:
        ExpressionSyntaxError: malformed input, with the byte offset.
        UnknownIdentifierError: a name that is neither a function, ``e``,
            nor one of ``variables``.
        NonConstantExponentError: the exponent mentions the variable.
    """
    if not isinstance(text, str):
        raise TypeError(f"expression must be a string, got {type(text).__name__}")
    parser = _Parser(text, variables)
    root = parser.parse()
    logger.debug("parsed %r", text)
    return Expression(root, parser.used_variable or variables[0])


def evaluate(e: Expression, r: float) -> float:
    """Evaluate ``e`` at a single point; raises `DomainError` off-domain."""
    return float(e.evaluate_array(float(r)))


def differentiate(e: Expression) -> Expression:
    """Exact derivative of ``e`` with light constant folding."""
    return e.derivative()


def serialize(e: Expression) -> str:
    """Grammar text that parses back to a structurally equal AST."""
    return e.text
