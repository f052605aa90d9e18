"""Coefficient expressions in one real variable ``t``.

Grammar (EBNF)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := number | 't' | func '(' expr ')' | '(' expr ')'
    func   := 'sqrt' | 'exp' | 'ln'

``^`` is right-associative and binds tighter than unary minus, so ``-t^2``
means ``-(t^2)`` and ``2^-t`` means ``2^(-t)``.  Evaluation is forward-mode:
every node returns its value together with its exact first derivative.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import DomainError, ExprSyntaxError, UnknownIdentifier

__all__ = [
    "Const", "Var", "Neg", "BinOp", "Call", "CoeffExpr", "Dual",
    "parse_expr", "eval_dual", "FUNCTIONS",
]

FUNCTIONS = ("sqrt", "exp", "ln")


# --------------------------------------------------------------------------
# Tree nodes
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Const:
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True, slots=True)
class Var:
    def __str__(self):
        return "t"


@dataclass(frozen=True, slots=True)
class Neg:
    arg: object

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True, slots=True)
class BinOp:
    op: str
    left: object
    right: object

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True, slots=True)
class Call:
    func: str
    arg: object

    def __str__(self):
        return f"{self.func}({self.arg})"


@dataclass(frozen=True)
class CoeffExpr:
    """Parsed expression.  Equality is structural (``source`` is ignored)."""

    root: object
    source: str = field(default="", compare=False)

    def __str__(self):
        return self.source or str(self.root)

    def canonical(self) -> str:
        """Fully parenthesised text that re-parses to an identical tree."""
        return str(self.root)

    def is_literal(self, value: float) -> bool:
        return isinstance(self.root, Const) and self.root.value == value

    def __call__(self, t: float) -> "Dual":
        return eval_dual(self, t)

    def __reduce__(self):
        # slotted frozen nodes do not unpickle on 3.10; rebuild from text
        return (_reparse, (self.canonical(), self.source))

    def compose(self, inner: "CoeffExpr") -> "CoeffExpr":
        """Substitute ``inner`` for every occurrence of ``t``."""
        root = _substitute(self.root, inner.root)
        return CoeffExpr(root, str(root))

    @classmethod
    def constant(cls, value: float) -> "CoeffExpr":
        return cls(Const(float(value)), repr(float(value)))

    @classmethod
    def combine(cls, op: str, left: "CoeffExpr", right: "CoeffExpr") -> "CoeffExpr":
        root = BinOp(op, left.root, right.root)
        return cls(root, str(root))


def _reparse(text, source):
    return CoeffExpr(parse_expr(text).root, source)


def _substitute(node, inner):
    if isinstance(node, Var):
        return inner
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(_substitute(node.arg, inner))
    if isinstance(node, BinOp):
        return BinOp(node.op, _substitute(node.left, inner), _substitute(node.right, inner))
    return Call(node.func, _substitute(node.arg, inner))


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = self._tokenize(source)
        self.pos = 0

    def _offset(self, char_index):
        return len(self.source[:char_index].encode("utf-8"))

    def error(self, message, char_index):
        return ExprSyntaxError(message, self._offset(char_index), self.source)

    def _tokenize(self, source):
        tokens = []
        i = 0
        while i < len(source):
            m = _TOKEN.match(source, i)
            if m is None:
                raise self.error(f"unexpected character {source[i]!r}", i)
            kind = m.lastgroup
            if kind != "ws":
                tokens.append((kind, m.group(), i))
            i = m.end()
        tokens.append(("eof", "", len(source)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text):
        kind, value, where = self.peek()
        if kind != "op" or value != text:
            found = "end of input" if kind == "eof" else repr(value)
            raise self.error(f"expected {text!r}, found {found}", where)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, value, where = self.peek()
        if kind != "eof":
            raise self.error(f"unexpected {value!r}", where)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor())
        node = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def _group(self, open_at):
        # an unterminated group is reported at its opening parenthesis
        try:
            node = self.expr()
            self.expect_op(")")
        except ExprSyntaxError as exc:
            if exc.offset == self._offset(len(self.source)):
                raise self.error("unbalanced '('", open_at) from None
            raise
        return node

    def base(self):
        kind, value, where = self.advance()
        if kind == "num":
            number = float(value)
            if not math.isfinite(number):
                raise self.error(f"numeric literal {value!r} is not finite", where)
            return Const(number)
        if kind == "name":
            if value == "t":
                return Var()
            if value not in FUNCTIONS:
                raise UnknownIdentifier(value, self._offset(where), self.source)
            _, _, open_at = self.expect_op("(")
            return Call(value, self._group(open_at))
        if kind == "op" and value == "(":
            return self._group(where)
        found = "end of input" if kind == "eof" else repr(value)
        raise self.error(f"expected a number, 't', a function or '(', found {found}", where)


def parse_expr(source: str) -> CoeffExpr:
    """Parse ``source`` into a :class:`CoeffExpr`.

    Raises
    ------
    ExprSyntaxError
        Malformed input; ``offset`` locates the problem.
    UnknownIdentifier
        Any name other than ``t``, ``sqrt``, ``exp`` and ``ln``.
    """
    if not isinstance(source, str):
        raise TypeError(f"expression source must be str, not {type(source).__name__}")
    return CoeffExpr(_Parser(source).parse(), source)


# --------------------------------------------------------------------------
# Dual numbers
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Dual:
    """``value + deriv * eps`` with ``eps**2 = 0``."""

    value: float
    deriv: float = 0.0

    @staticmethod
    def lift(x):
        return x if isinstance(x, Dual) else Dual(float(x), 0.0)

    def __add__(self, other):
        other = Dual.lift(other)
        return Dual(self.value + other.value, self.deriv + other.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        other = Dual.lift(other)
        return Dual(self.value - other.value, self.deriv - other.deriv)

    def __rsub__(self, other):
        return Dual.lift(other) - self

    def __neg__(self):
        return Dual(-self.value, -self.deriv)

    def __mul__(self, other):
        other = Dual.lift(other)
        return Dual(self.value * other.value,
                    self.value * other.deriv + self.deriv * other.value)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Dual.lift(other)
        if other.value == 0.0:
            raise DomainError("division by zero")
        q = self.value / other.value
        return Dual(q, (self.deriv - q * other.deriv) / other.value)

    def __rtruediv__(self, other):
        return Dual.lift(other) / self

    def sqrt(self):
        if self.value <= 0.0:
            raise DomainError("sqrt of non-positive value")
        r = math.sqrt(self.value)
        return Dual(r, self.deriv / (2.0 * r))

    def exp(self):
        try:
            e = math.exp(self.value)
        except OverflowError:
            raise DomainError("exp overflow") from None
        return Dual(e, e * self.deriv)

    def log(self):
        if self.value <= 0.0:
            raise DomainError("ln of non-positive value")
        return Dual(math.log(self.value), self.deriv / self.value)

    def __pow__(self, other):
        other = Dual.lift(other)
        y = other.value
        if other.deriv == 0.0 and float(y).is_integer():
            n = int(y)
            if n == 0:
                return Dual(1.0, 0.0)
            if self.value == 0.0 and n < 0:
                raise DomainError("zero raised to a negative power")
            try:
                v = self.value ** n
                d = n * self.value ** (n - 1) * self.deriv if n != 1 else self.deriv
            except (OverflowError, ZeroDivisionError):
                raise DomainError("power overflow") from None
            return Dual(v, d)
        if self.value <= 0.0:
            raise DomainError("non-integer power of non-positive base")
        lx = math.log(self.value)
        try:
            v = math.exp(y * lx)
        except OverflowError:
            raise DomainError("power overflow") from None
        return Dual(v, v * (other.deriv * lx + y * self.deriv / self.value))


_CALLS = {"sqrt": Dual.sqrt, "exp": Dual.exp, "ln": Dual.log}
_BINOPS = {
    "+": Dual.__add__,
    "-": Dual.__sub__,
    "*": Dual.__mul__,
    "/": Dual.__truediv__,
    "^": Dual.__pow__,
}


def _eval(node, x: Dual) -> Dual:
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return Dual(node.value, 0.0)
    try:
        if isinstance(node, BinOp):
            out = _BINOPS[node.op](_eval(node.left, x), _eval(node.right, x))
        elif isinstance(node, Neg):
            out = -_eval(node.arg, x)
        else:
            out = _CALLS[node.func](_eval(node.arg, x))
    except DomainError as exc:
        if exc.subexpr is not None:
            raise
        raise DomainError(exc.args[0], t=x.value, subexpr=str(node)) from None
    if not (math.isfinite(out.value) and math.isfinite(out.deriv)):
        raise DomainError("non-finite result", t=x.value, subexpr=str(node))
    return out


def eval_dual(expr: CoeffExpr, t: float) -> Dual:
    """Value and first derivative of ``expr`` at ``t`` in one pass."""
    return _eval(expr.root, Dual(float(t), 1.0))
