"""Scalar arithmetic expressions in scheduling-parameter variables.

Matrix entries of an LPV model can be given as strings like
``"sqrt(4.8*r1-8.6)"``.  Variables are named ``r1 ... rm`` (1-based).
Supported functions: sin, cos, sqrt, exp, abs.

Precedence (tightest first): power, unary minus, mul/div, add/sub.
Binary operators of equal precedence associate to the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ExprDomainError, ExprParseError

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "abs": abs,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Call

# precedence levels used for both parsing and printing
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None, self.pos
        ch = self.text[self.pos]
        start = self.pos
        if ch.isdigit() or ch == ".":
            j = self.pos
            seen_exp = False
            while j < len(self.text):
                c = self.text[j]
                if c.isdigit() or c == ".":
                    j += 1
                elif c in "eE" and j + 1 < len(self.text) and (
                    self.text[j + 1].isdigit() or self.text[j + 1] in "+-"
                ):
                    seen_exp = True
                    j += 1
                    if self.text[j] in "+-":
                        j += 1
                else:
                    break
            return ("num", self.text[start:j]), start
        if ch.isalpha() or ch == "_":
            j = self.pos
            while j < len(self.text) and (self.text[j].isalnum() or self.text[j] == "_"):
                j += 1
            return ("ident", self.text[start:j]), start
        if ch in "+-*/^()":
            return ("op", ch), start
        raise ExprParseError(f"unexpected character {ch!r}", start)

    def next(self):
        tok, start = self.peek()
        if tok is not None:
            self.pos = start + len(tok[1])
        return tok, start


class _Parser:
    """Recursive-descent parser over the token stream."""

    def __init__(self, text: str, arity: int):
        self.tk = _Tokenizer(text)
        self.arity = arity

    def parse(self) -> Expr:
        e = self.expr()
        tok, start = self.tk.peek()
        if tok is not None:
            raise ExprParseError(f"trailing input {tok[1]!r}", start)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            tok, _ = self.tk.peek()
            if tok is not None and tok[0] == "op" and tok[1] in "+-":
                self.tk.next()
                left = BinOp(tok[1], left, self.term())
            else:
                return left

    def term(self) -> Expr:
        left = self.unary()
        while True:
            tok, _ = self.tk.peek()
            if tok is not None and tok[0] == "op" and tok[1] in "*/":
                self.tk.next()
                left = BinOp(tok[1], left, self.unary())
            else:
                return left

    def unary(self) -> Expr:
        tok, _ = self.tk.peek()
        if tok is not None and tok == ("op", "-"):
            self.tk.next()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        left = self.atom()
        while True:
            tok, _ = self.tk.peek()
            if tok is not None and tok == ("op", "^"):
                self.tk.next()
                # same-precedence binary operators associate left
                left = BinOp("^", left, self.atom())
            else:
                return left

    def atom(self) -> Expr:
        tok, start = self.tk.next()
        if tok is None:
            raise ExprParseError("unexpected end of input", start)
        kind, text = tok
        if kind == "num":
            try:
                return Num(float(text))
            except ValueError:
                raise ExprParseError(f"bad number literal {text!r}", start) from None
        if kind == "ident":
            if text in _FUNCTIONS:
                tok2, start2 = self.tk.next()
                if tok2 != ("op", "("):
                    raise ExprParseError(f"expected '(' after {text}", start2)
                arg = self.expr()
                tok3, start3 = self.tk.next()
                if tok3 != ("op", ")"):
                    raise ExprParseError("expected ')'", start3)
                return Call(text, arg)
            if text.startswith("r") and text[1:].isdigit():
                idx = int(text[1:])
                if not 1 <= idx <= self.arity:
                    raise ExprParseError(
                        f"variable {text} out of range (arity {self.arity})", start
                    )
                return Var(idx)
            raise ExprParseError(f"unknown identifier {text!r}", start)
        if tok == ("op", "("):
            e = self.expr()
            tok2, start2 = self.tk.next()
            if tok2 != ("op", ")"):
                raise ExprParseError("expected ')'", start2)
            return e
        raise ExprParseError(f"unexpected token {text!r}", start)


def parse(text: str, arity: int) -> Expr:
    """Parse an expression string with variables r1..r<arity>."""
    if not text or not text.strip():
        raise ExprParseError("empty expression", 0)
    return _Parser(text, arity).parse()


def pretty(e: Expr) -> str:
    """Render the tree; parse(pretty(e)) is structurally identical to e."""
    return _pretty(e, 0)


def _pretty(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"r{e.index}"
    if isinstance(e, Call):
        return f"{e.name}({_pretty(e.arg, 0)})"
    if isinstance(e, Neg):
        p = _PREC["neg"]
        s = "-" + _pretty(e.arg, p)
        return f"({s})" if parent_prec > p else s
    p = _PREC[e.op]
    # left-associative: the right child needs parens at equal precedence
    s = _pretty(e.left, p) + e.op + _pretty(e.right, p + 1)
    return f"({s})" if parent_prec > p else s


def evaluate(e: Expr, rho) -> float:
    """Evaluate at the parameter vector rho (sequence, 1-based via Var.index).

    Raises ExprDomainError on negative sqrt arguments or division by zero,
    reporting the offending sub-expression.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(rho[e.index - 1])
    if isinstance(e, Neg):
        return -evaluate(e.arg, rho)
    if isinstance(e, Call):
        v = evaluate(e.arg, rho)
        if e.name == "sqrt" and v < 0.0:
            raise ExprDomainError(f"sqrt of negative argument {v:.6g}", pretty(e))
        return _FUNCTIONS[e.name](v)
    a = evaluate(e.left, rho)
    b = evaluate(e.right, rho)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0.0:
            raise ExprDomainError("division by zero", pretty(e))
        return a / b
    # power; fractional powers of negative bases are a domain error
    if a < 0.0 and b != round(b):
        raise ExprDomainError(f"fractional power of negative base {a:.6g}", pretty(e))
    return a**b
