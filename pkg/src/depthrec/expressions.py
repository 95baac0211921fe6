"""Closed-form expression mini-language.

Grammar (recursive descent, ``^`` binds tighter than unary minus and is
right-associative; ``*``/``/`` and ``+``/``-`` are left-associative)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # exponent must fold to an integer
    atom    := NUMBER | 'pi' | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

Variables are ``theta`` or ``t``; functions are sin, cos, tan, sqrt, exp,
log.  Parsing, printing and re-parsing is a fixed point.  Expressions can
be evaluated as floats, compiled to fast callables, differentiated
symbolically (the result stays inside the grammar), or evaluated with
:class:`~depthrec.series.PowerSeries` arguments for high-order derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError
from .series import PowerSeries

__all__ = [
    "Expression", "Num", "Pi", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "parse_expression", "to_text", "differentiate", "to_callable", "series_coefficients",
    "derivatives_at", "FUNCTIONS", "VARIABLES",
]

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "exp", "log")
VARIABLES = ("theta", "t")


class Expression:
    """Base class for AST nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Num(Expression):
    value: float


@dataclass(frozen=True, slots=True)
class Pi(Expression):
    pass


@dataclass(frozen=True, slots=True)
class Var(Expression):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, slots=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True, slots=True)
class Pow(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True, slots=True)
class Call(Expression):
    func: str
    arg: Expression


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOK_NUMBER = "number"
_TOK_IDENT = "identifier"
_TOK_OP = "operator"
_TOK_LPAREN = "("
_TOK_RPAREN = ")"
_TOK_EOF = "end of input"


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            tokens.append(_Token(_TOK_NUMBER, text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token(_TOK_IDENT, text[i:j], i))
            i = j
            continue
        if ch in "+-*/^":
            tokens.append(_Token(_TOK_OP, ch, i))
            i += 1
            continue
        if ch == "(":
            tokens.append(_Token(_TOK_LPAREN, ch, i))
            i += 1
            continue
        if ch == ")":
            tokens.append(_Token(_TOK_RPAREN, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i,
                         {_TOK_NUMBER, _TOK_IDENT, "operator", "(", ")"})
    tokens.append(_Token(_TOK_EOF, "", n))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: set[str]) -> ParseError:
        tok = self.peek()
        what = tok.text or tok.kind
        return ParseError(f"unexpected {what!r}", tok.offset, expected)

    def parse(self) -> Expression:
        node = self.expr()
        if self.peek().kind != _TOK_EOF:
            raise self.fail({"+", "-", "*", "/", "^", _TOK_EOF})
        return node

    def expr(self) -> Expression:
        node = self.term()
        while self.peek().kind == _TOK_OP and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expression:
        node = self.factor()
        while self.peek().kind == _TOK_OP and self.peek().text in "*/":
            op = self.advance().text
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Expression:
        tok = self.peek()
        if tok.kind == _TOK_OP and tok.text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        tok = self.peek()
        if tok.kind == _TOK_OP and tok.text == "^":
            self.advance()
            exp_tok = self.peek()
            exponent = self.factor()
            value = _fold_constant(exponent)
            if value is None or abs(value - round(value)) > 1e-12:
                raise ParseError("exponent must be an integer constant",
                                 exp_tok.offset, {"integer"})
            return Pow(base, int(round(value)))
        return base

    def atom(self) -> Expression:
        tok = self.peek()
        if tok.kind == _TOK_NUMBER:
            self.advance()
            return Num(float(tok.text))
        if tok.kind == _TOK_IDENT:
            self.advance()
            name = tok.text
            if name == "pi":
                return Pi()
            if name in VARIABLES:
                return Var(name)
            if name in FUNCTIONS:
                if self.peek().kind != _TOK_LPAREN:
                    raise self.fail({"("})
                self.advance()
                arg = self.expr()
                if self.peek().kind != _TOK_RPAREN:
                    raise self.fail({")"})
                self.advance()
                return Call(name, arg)
            raise ParseError(f"unknown identifier {name!r}", tok.offset,
                             set(FUNCTIONS) | set(VARIABLES) | {"pi"})
        if tok.kind == _TOK_LPAREN:
            self.advance()
            node = self.expr()
            if self.peek().kind != _TOK_RPAREN:
                raise self.fail({")"})
            self.advance()
            return node
        raise self.fail({_TOK_NUMBER, _TOK_IDENT, "(", "-"})


def _fold_constant(node: Expression) -> float | None:
    """Value of a constant subtree, or None if it contains a variable."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Neg):
        v = _fold_constant(node.arg)
        return None if v is None else -v
    if isinstance(node, (Add, Sub, Mul, Div)):
        a = _fold_constant(node.left)
        b = _fold_constant(node.right)
        if a is None or b is None:
            return None
        if isinstance(node, Add):
            return a + b
        if isinstance(node, Sub):
            return a - b
        if isinstance(node, Mul):
            return a * b
        return a / b if b != 0 else None
    if isinstance(node, Pow):
        a = _fold_constant(node.base)
        return None if a is None else a ** node.exponent
    return None


def parse_expression(text: str) -> Expression:
    """Parse ``text`` into an AST, raising :class:`ParseError` on failure."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0, {_TOK_NUMBER, _TOK_IDENT, "(", "-"})
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printer (minimal parentheses; print -> parse is the identity)
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _print(node: Expression) -> tuple[str, int]:
    if isinstance(node, Num):
        v = node.value
        if v == int(v) and abs(v) < 1e16:
            return str(int(v)), _PREC_ATOM
        return repr(v), _PREC_ATOM
    if isinstance(node, Pi):
        return "pi", _PREC_ATOM
    if isinstance(node, Var):
        return node.name, _PREC_ATOM
    if isinstance(node, Call):
        inner, _ = _print(node.arg)
        return f"{node.func}({inner})", _PREC_ATOM
    if isinstance(node, Neg):
        inner, prec = _print(node.arg)
        if prec < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}", _PREC_NEG
    if isinstance(node, Pow):
        base, prec = _print(node.base)
        if prec < _PREC_ATOM:
            base = f"({base})"
        if node.exponent < 0:
            return f"{base}^({node.exponent})", _PREC_POW
        return f"{base}^{node.exponent}", _PREC_POW
    if isinstance(node, (Add, Sub)):
        op = "+" if isinstance(node, Add) else "-"
        left, lp = _print(node.left)
        right, rp = _print(node.right)
        if lp < _PREC_ADD:
            left = f"({left})"
        if rp <= _PREC_ADD:
            right = f"({right})"
        return f"{left} {op} {right}", _PREC_ADD
    if isinstance(node, (Mul, Div)):
        op = "*" if isinstance(node, Mul) else "/"
        left, lp = _print(node.left)
        right, rp = _print(node.right)
        if lp < _PREC_MUL:
            left = f"({left})"
        if rp <= _PREC_MUL:
            right = f"({right})"
        return f"{left}{op}{right}", _PREC_MUL
    raise TypeError(f"unknown node {node!r}")


def to_text(node: Expression) -> str:
    return _print(node)[0]


# ---------------------------------------------------------------------------
# Symbolic differentiation (closed under the grammar)
# ---------------------------------------------------------------------------

_ZERO = Num(0.0)
_ONE = Num(1.0)
_TWO = Num(2.0)


def _is_zero(node: Expression) -> bool:
    return isinstance(node, Num) and node.value == 0.0


def _is_one(node: Expression) -> bool:
    return isinstance(node, Num) and node.value == 1.0


def _add(a: Expression, b: Expression) -> Expression:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def _sub(a: Expression, b: Expression) -> Expression:
    if _is_zero(b):
        return a
    if _is_zero(a):
        return Neg(b)
    return Sub(a, b)


def _mul(a: Expression, b: Expression) -> Expression:
    if _is_zero(a) or _is_zero(b):
        return _ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    return Mul(a, b)


def _div(a: Expression, b: Expression) -> Expression:
    if _is_zero(a):
        return _ZERO
    if _is_one(b):
        return a
    return Div(a, b)


def _pow(base: Expression, exponent: int) -> Expression:
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    return Pow(base, exponent)


def differentiate(node: Expression) -> Expression:
    """Derivative with respect to the expression's variable."""
    if isinstance(node, (Num, Pi)):
        return _ZERO
    if isinstance(node, Var):
        return _ONE
    if isinstance(node, Neg):
        d = differentiate(node.arg)
        return _ZERO if _is_zero(d) else Neg(d)
    if isinstance(node, Add):
        return _add(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Sub):
        return _sub(differentiate(node.left), differentiate(node.right))
    if isinstance(node, Mul):
        return _add(_mul(differentiate(node.left), node.right),
                    _mul(node.left, differentiate(node.right)))
    if isinstance(node, Div):
        num = _sub(_mul(differentiate(node.left), node.right),
                   _mul(node.left, differentiate(node.right)))
        return _div(num, _pow(node.right, 2))
    if isinstance(node, Pow):
        d = differentiate(node.base)
        term = _mul(Num(float(node.exponent)), _pow(node.base, node.exponent - 1))
        return _mul(term, d)
    if isinstance(node, Call):
        d = differentiate(node.arg)
        f, u = node.func, node.arg
        if f == "sin":
            outer: Expression = Call("cos", u)
        elif f == "cos":
            outer = Neg(Call("sin", u))
        elif f == "tan":
            outer = _add(_ONE, _pow(Call("tan", u), 2))
        elif f == "sqrt":
            return _div(d, _mul(_TWO, Call("sqrt", u)))
        elif f == "exp":
            outer = Call("exp", u)
        elif f == "log":
            return _div(d, u)
        else:
            raise ValueError(f"unknown function {f!r}")
        return _mul(outer, d)
    raise TypeError(f"unknown node {node!r}")


# ---------------------------------------------------------------------------
# Evaluation: compiled float callables and power-series arguments
# ---------------------------------------------------------------------------

_MATH_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sqrt": math.sqrt, "exp": math.exp, "log": math.log,
}


def _build(node: Expression):
    if isinstance(node, Num):
        v = node.value
        return lambda th: v
    if isinstance(node, Pi):
        return lambda th: math.pi
    if isinstance(node, Var):
        return lambda th: th
    if isinstance(node, Neg):
        f = _build(node.arg)
        return lambda th: -f(th)
    if isinstance(node, Add):
        a, b = _build(node.left), _build(node.right)
        return lambda th: a(th) + b(th)
    if isinstance(node, Sub):
        a, b = _build(node.left), _build(node.right)
        return lambda th: a(th) - b(th)
    if isinstance(node, Mul):
        a, b = _build(node.left), _build(node.right)
        return lambda th: a(th) * b(th)
    if isinstance(node, Div):
        a, b = _build(node.left), _build(node.right)
        return lambda th: a(th) / b(th)
    if isinstance(node, Pow):
        a, n = _build(node.base), node.exponent
        return lambda th: a(th) ** n
    if isinstance(node, Call):
        fn, a = _MATH_FUNCS[node.func], _build(node.arg)
        return lambda th: fn(a(th))
    raise TypeError(f"unknown node {node!r}")


def to_callable(node: Expression):
    """Compile the AST into a float->float callable.

    Math-domain failures (sqrt/log of a negative, division by zero,
    overflow) are reported as :class:`EvalError` carrying the offending
    argument.
    """
    raw = _build(node)

    def call(theta: float) -> float:
        try:
            return raw(theta)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise EvalError(f"cannot evaluate expression: {exc}", theta) from exc

    return call


def _eval_series(node: Expression, var: PowerSeries):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Var):
        return var
    if isinstance(node, Neg):
        return -_eval_series(node.arg, var)
    if isinstance(node, Add):
        return _eval_series(node.left, var) + _eval_series(node.right, var)
    if isinstance(node, Sub):
        return _eval_series(node.left, var) - _eval_series(node.right, var)
    if isinstance(node, Mul):
        return _eval_series(node.left, var) * _eval_series(node.right, var)
    if isinstance(node, Div):
        return _eval_series(node.left, var) / _eval_series(node.right, var)
    if isinstance(node, Pow):
        return _eval_series(node.base, var) ** node.exponent
    if isinstance(node, Call):
        arg = _eval_series(node.arg, var)
        if isinstance(arg, PowerSeries):
            return getattr(arg, node.func)()
        return _MATH_FUNCS[node.func](arg)
    raise TypeError(f"unknown node {node!r}")


def series_coefficients(node: Expression, center: float, order: int) -> np.ndarray:
    """Taylor coefficients of the expression about ``center`` up to ``order``."""
    var = PowerSeries.variable(center, order)
    try:
        result = _eval_series(node, var)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvalError(f"cannot expand expression: {exc}", center) from exc
    if isinstance(result, PowerSeries):
        return result.c.copy()
    coeffs = np.zeros(order + 1)
    coeffs[0] = result
    return coeffs


def derivatives_at(node: Expression, center: float, order: int) -> np.ndarray:
    """Derivative values ``[f, f', ..., f^(order)]`` at ``center``."""
    coeffs = series_coefficients(node, center, order)
    fact = np.array([math.factorial(k) for k in range(order + 1)], dtype=float)
    return coeffs * fact
