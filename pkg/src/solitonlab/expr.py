"""Closed-form scalar expressions in the four chart coordinates.

Parsing, evaluation, serialization and exact symbolic differentiation.
Grammar::

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := unary
    unary   := '-' unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

so that ``-x^2`` is ``-(x^2)`` and ``a^b^c`` is ``a^(b^c)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

FUNCTIONS = {
    "exp": 1, "log": 1, "sqrt": 1, "sin": 1, "cos": 1, "tan": 1,
    "sinh": 1, "cosh": 1, "tanh": 1, "pow": 2,
}
CONSTANTS = {"pi": math.pi}


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, source: str = ""):
        self.pos = pos
        self.source = source
        super().__init__(f"{message} at position {pos}")


class ExprSyntaxError(ParseError):
    pass


class UnknownIdentifierError(ParseError):
    pass


class UnknownFunctionError(ParseError):
    pass


class ArityError(ParseError):
    pass


class DomainError(ArithmeticError):
    """Evaluation left the real domain of some subexpression."""

    def __init__(self, message: str, subexpr: str, pos: int = -1):
        self.subexpr = subexpr
        self.pos = pos
        where = f" (source position {pos})" if pos >= 0 else ""
        super().__init__(f"{message} in '{subexpr}'{where}")


# --------------------------------------------------------------------------
# AST


class Expr:
    """Base class of AST nodes.  Nodes are immutable."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    name: str
    pos: int = field(default=-1, compare=False)

    @property
    def value(self) -> float:
        return CONSTANTS[self.name]


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str
    index: int
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    operand: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    args: tuple
    pos: int = field(default=-1, compare=False)


ZERO = Num(0.0)
ONE = Num(1.0)
TWO = Num(2.0)


# --------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos, source)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.source = source
        self.coords = {name: i for i, name in enumerate(coords)}
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.peek()
        if text != value or kind != "op":
            got = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, got {got}", pos, self.source)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(
                f"expected operator or end of input, got {text!r}", pos, self.source
            )
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.term(), pos)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, pos = self.advance()
            node = BinOp(op, node, self.unary(), pos)
        return node

    def unary(self) -> Expr:
        kind, text, pos = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary(), pos)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary(), pos)
        return base

    def primary(self) -> Expr:
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text), pos)
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                return self.call(text, pos)
            if text in self.coords:
                return Var(text, self.coords[text], pos)
            if text in CONSTANTS:
                return Const(text, pos)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs an argument list", pos, self.source)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", pos, self.source)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        got = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"expected number, identifier or '(', got {got}", pos, self.source)

    def call(self, name: str, pos: int) -> Expr:
        if name not in FUNCTIONS:
            raise UnknownFunctionError(f"unknown function {name!r}", pos, self.source)
        self.expect("(")
        args = [self.expr()]
        while self.peek()[0] == "op" and self.peek()[1] == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        if len(args) != FUNCTIONS[name]:
            raise ArityError(
                f"{name} takes {FUNCTIONS[name]} argument(s), got {len(args)}", pos, self.source
            )
        return Call(name, tuple(args), pos)


def parse(source: str, coords: Sequence[str] = ("t", "x", "y", "z")) -> Expr:
    """Parse expression text whose identifiers are drawn from ``coords``."""
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError("empty expression", 0, str(source))
    return _Parser(source, coords).parse()


# --------------------------------------------------------------------------
# Serialization

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(node: Expr) -> int:
    if isinstance(node, Num):
        return _PREC_UNARY if node.value < 0 or math.copysign(1, node.value) < 0 else _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_UNARY
    if isinstance(node, BinOp):
        return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]
    return _PREC_ATOM


def _wrap(node: Expr, min_prec: int) -> str:
    text = to_text(node)
    return f"({text})" if _prec(node) < min_prec else text


def to_text(node: Expr) -> str:
    """Serialize to text that parses back to an equivalent expression."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, _PREC_UNARY)
    if isinstance(node, Call):
        return f"{node.func}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, BinOp):
        op = node.op
        if op in "+-":
            right = _wrap(node.right, _PREC_MUL)
            return f"{_wrap(node.left, _PREC_ADD)} {op} {right}"
        if op in "*/":
            return f"{_wrap(node.left, _PREC_MUL)}{op}{_wrap(node.right, _PREC_UNARY)}"
        return f"{_wrap(node.left, _PREC_ATOM)}^{_wrap(node.right, _PREC_UNARY)}"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# Evaluation


def _pow(base: float, expo: float) -> float:
    if base < 0 and not float(expo).is_integer():
        raise ValueError("negative base with non-integer exponent")
    if base == 0 and expo < 0:
        raise ZeroDivisionError("zero to a negative power")
    return math.pow(base, expo)


def _checked_div(a: float, b: float) -> float:
    if b == 0:
        raise ZeroDivisionError("division by zero")
    return a / b


def _checked_log(a: float) -> float:
    if a <= 0:
        raise ValueError("log of non-positive value")
    return math.log(a)


def _checked_sqrt(a: float) -> float:
    if a < 0:
        raise ValueError("sqrt of negative value")
    return math.sqrt(a)


_UNARY_IMPL: dict[str, Callable[[float], float]] = {
    "exp": math.exp, "log": _checked_log, "sqrt": _checked_sqrt,
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
}


def _apply(node: Expr, fn: Callable, *args: float) -> float:
    try:
        value = fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainError(str(exc), to_text(node), node.pos) from None
    if not math.isfinite(value):
        raise DomainError("non-finite result", to_text(node), node.pos)
    return value


def evaluate(node: Expr, point: Sequence[float]) -> float:
    """Evaluate by direct tree walk (reference semantics)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(point[node.index])
    if isinstance(node, Neg):
        return -evaluate(node.operand, point)
    if isinstance(node, BinOp):
        a = evaluate(node.left, point)
        b = evaluate(node.right, point)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return _apply(node, lambda u, v: u * v, a, b)
        if node.op == "/":
            return _apply(node, _checked_div, a, b)
        return _apply(node, _pow, a, b)
    if isinstance(node, Call):
        args = [evaluate(a, point) for a in node.args]
        if node.func == "pow":
            return _apply(node, _pow, *args)
        return _apply(node, _UNARY_IMPL[node.func], *args)
    raise TypeError(f"not an expression node: {node!r}")


def compile_expr(node: Expr) -> Callable[[Sequence[float]], float]:
    """Compile to a Python function of the point; same semantics as :func:`evaluate`.

    Shared subtrees (by identity) are computed once.
    """
    lines: list[str] = []
    names: dict[int, str] = {}
    nodes: list[Expr] = []

    def emit(n: Expr) -> str:
        key = id(n)
        if key in names:
            return names[key]
        if isinstance(n, (Num, Const)):
            ref = repr(float(n.value))
            names[key] = ref
            return ref
        if isinstance(n, Var):
            ref = f"p[{n.index}]"
            names[key] = ref
            return ref
        if isinstance(n, Neg):
            rhs = f"-{emit(n.operand)}"
        elif isinstance(n, BinOp):
            a, b = emit(n.left), emit(n.right)
            if n.op in "+-":
                rhs = f"{a} {n.op} {b}"
            else:
                nodes.append(n)
                fn = {"*": "_mul", "/": "_div", "^": "_pow"}[n.op]
                rhs = f"_ap({len(nodes) - 1}, {fn}, {a}, {b})"
        elif isinstance(n, Call):
            args = ", ".join(emit(a) for a in n.args)
            nodes.append(n)
            fn = "_pow" if n.func == "pow" else f"_f_{n.func}"
            rhs = f"_ap({len(nodes) - 1}, {fn}, {args})"
        else:
            raise TypeError(f"not an expression node: {n!r}")
        ref = f"v{len(lines)}"
        lines.append(f"    {ref} = {rhs}")
        names[key] = ref
        return ref

    result = emit(node)
    src = "def _compiled(p):\n" + "\n".join(lines) + f"\n    return float({result})\n"

    def _ap(k, fn, *args):
        return _apply(nodes[k], fn, *args)

    env = {
        "_ap": _ap, "_mul": lambda u, v: u * v, "_div": _checked_div, "_pow": _pow,
        **{f"_f_{name}": impl for name, impl in _UNARY_IMPL.items()},
    }
    exec(compile(src, "<expr>", "exec"), env)
    return env["_compiled"]


# --------------------------------------------------------------------------
# Simplifying constructors (used by the differentiator)


def _num(v: float) -> Num:
    return Num(float(v))


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value + b.value)
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(b, Neg):
        return sub(a, b.operand)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value - b.value)
    if b == ZERO:
        return a
    if a == ZERO:
        return neg(b)
    if isinstance(b, Neg):
        return add(a, b.operand)
    return BinOp("-", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return _num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num) and not isinstance(a, Num):
        a, b = b, a
    if isinstance(a, Num):
        if isinstance(b, Num):
            return _num(a.value * b.value)
        if a.value == 0:
            return ZERO
        if a.value == 1:
            return b
        if a.value == -1:
            return neg(b)
        if isinstance(b, BinOp) and b.op == "*" and isinstance(b.left, Num):
            return mul(_num(a.value * b.left.value), b.right)
    if isinstance(a, Neg):
        return neg(mul(a.operand, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.operand))
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0:
        return _num(a.value / b.value)
    if isinstance(a, Neg):
        return neg(div(a.operand, b))
    return BinOp("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num):
        if b.value == 1:
            return a
        if b.value == 0:
            return ONE
    return BinOp("^", a, b)


def call(func: str, *args: Expr) -> Expr:
    return Call(func, tuple(args))


def variables(node: Expr) -> frozenset[int]:
    """Coordinate indices that ``node`` depends on."""
    if isinstance(node, Var):
        return frozenset((node.index,))
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        out: frozenset[int] = frozenset()
        for a in node.args:
            out |= variables(a)
        return out
    return frozenset()


# --------------------------------------------------------------------------
# Differentiation


def _d_power(base: Expr, expo: Expr, i: int, d) -> Expr:
    db = d(base)
    if i not in variables(expo):
        if db == ZERO:
            return ZERO
        if isinstance(expo, Num):
            lowered = power(base, _num(expo.value - 1))
            return mul(mul(expo, lowered), db)
        return mul(mul(expo, power(base, sub(expo, ONE))), db)
    de = d(expo)
    whole = power(base, expo)
    inner = add(mul(de, call("log", base)), mul(expo, div(db, base)))
    return mul(whole, inner)


def differentiate(node: Expr, i: int) -> Expr:
    """Exact partial derivative with respect to coordinate ``i``."""
    if not 0 <= i < 4:
        raise ValueError(f"coordinate index out of range: {i}")
    cache: dict[int, Expr] = {}

    def d(n: Expr) -> Expr:
        key = id(n)
        hit = cache.get(key)
        if hit is not None:
            return hit
        out = _derive(n)
        cache[key] = out
        return out

    def _derive(n: Expr) -> Expr:
        if isinstance(n, (Num, Const)):
            return ZERO
        if isinstance(n, Var):
            return ONE if n.index == i else ZERO
        if isinstance(n, Neg):
            return neg(d(n.operand))
        if isinstance(n, BinOp):
            u, v = n.left, n.right
            if n.op == "+":
                return add(d(u), d(v))
            if n.op == "-":
                return sub(d(u), d(v))
            if n.op == "*":
                return add(mul(d(u), v), mul(u, d(v)))
            if n.op == "/":
                du, dv = d(u), d(v)
                if dv == ZERO:
                    return div(du, v)
                return div(sub(mul(du, v), mul(u, dv)), power(v, TWO))
            return _d_power(u, v, i, d)
        if isinstance(n, Call):
            f = n.func
            if f == "pow":
                return _d_power(n.args[0], n.args[1], i, d)
            u = n.args[0]
            du = d(u)
            if du == ZERO:
                return ZERO
            if f == "exp":
                return mul(du, n)
            if f == "log":
                return div(du, u)
            if f == "sqrt":
                return div(du, mul(TWO, n))
            if f == "sin":
                return mul(du, call("cos", u))
            if f == "cos":
                return neg(mul(du, call("sin", u)))
            if f == "tan":
                return div(du, power(call("cos", u), TWO))
            if f == "sinh":
                return mul(du, call("cosh", u))
            if f == "cosh":
                return mul(du, call("sinh", u))
            if f == "tanh":
                return div(du, power(call("cosh", u), TWO))
        raise TypeError(f"not an expression node: {n!r}")

    return d(node)


class Partials:
    """Lazily built, compiled partial derivatives of one expression.

    ``values(point, multi)`` evaluates the mixed partial named by the
    sorted tuple of coordinate indices ``multi`` (``()`` is the value).
    """

    def __init__(self, node: Expr):
        self.node = node
        self._exprs: dict[tuple[int, ...], Expr] = {(): node}
        self._funcs: dict[tuple[int, ...], Callable] = {}

    def expr(self, multi: tuple[int, ...]) -> Expr:
        multi = tuple(sorted(multi))
        hit = self._exprs.get(multi)
        if hit is None:
            parent = self.expr(multi[:-1])
            hit = differentiate(parent, multi[-1])
            self._exprs[multi] = hit
        return hit

    def value(self, point: Sequence[float], multi: tuple[int, ...] = ()) -> float:
        multi = tuple(sorted(multi))
        fn = self._funcs.get(multi)
        if fn is None:
            e = self.expr(multi)
            fn = (lambda p, _v=float(e.value): _v) if isinstance(e, (Num, Const)) else compile_expr(e)
            self._funcs[multi] = fn
        return fn(point)

    @property
    def is_constant(self) -> bool:
        return not variables(self.node)
