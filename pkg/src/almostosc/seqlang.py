"""A small language for coefficient sequences in the index variable ``n``.

Grammar (EBNF)::

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" exponent ] ;
    exponent = INT | "(" ["-"] INT [ "/" INT ] ")" | power ;   (* must be literal *)
    atom     = NUMBER | "n" | "(" expr ")" ;
    NUMBER   = digits [ "." digits ] ;

Precedence from tight to loose is ``^``, unary minus, ``* /``, ``+ -``.
``* / + -`` associate to the left and ``^`` to the right. Exponents must be
literal integers or rationals whose reduced form has odd numerator and
denominator. The one index-dependent power is the alternating sign
``(-1)^n`` (optionally ``(-1)^(n+j)`` for an integer shift ``j``), which is
a primitive node of its own.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Union

import numpy as np

from .numerics import Mode, Value, as_mode, checked, odd_ratio_pow


class SeqLangError(ValueError):
    pass


class SeqSyntaxError(SeqLangError):
    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class NonLiteralExponentError(SeqLangError):
    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"exponent at offset {offset} is not a literal rational")


class ExponentDomainError(SeqLangError):
    pass


class SeqEvalError(ArithmeticError):
    """Evaluation failed at a particular index (division by zero, overflow)."""

    def __init__(self, message: str, n: int):
        self.n = n
        super().__init__(f"{message} at n={n}")


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Index:
    pass


@dataclass(frozen=True)
class AltSign:
    """``(-1)^(n + shift)``."""

    shift: int = 0


@dataclass(frozen=True)
class Neg:
    operand: "SeqExpr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "SeqExpr"
    right: "SeqExpr"


@dataclass(frozen=True)
class Pow:
    base: "SeqExpr"
    exponent: Fraction


SeqExpr = Union[Num, Index, AltSign, Neg, BinOp, Pow]


# --- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<var>n)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class _Tok:
    kind: str  # "num", "n", an operator character, or "end"
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise SeqSyntaxError(f"unexpected character {text[pos]!r}", pos,
                                 frozenset({"number", "n", "(", "-"}))
        start = m.start(m.lastgroup)
        if m.group("num") is not None:
            toks.append(_Tok("num", m.group("num"), start))
        elif m.group("var") is not None:
            if m.end() < len(text) and (text[m.end()].isalnum() or text[m.end()] == "_"):
                raise SeqSyntaxError("unknown identifier", start, frozenset({"n"}))
            toks.append(_Tok("n", "n", start))
        else:
            toks.append(_Tok(m.group("op"), m.group("op"), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


# --- parser ----------------------------------------------------------------

_ATOM_START = frozenset({"number", "n", "(", "-"})


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Tok:
        if self.tok.kind != kind:
            raise SeqSyntaxError(f"unexpected {self._describe(self.tok)}", self.tok.offset,
                                 frozenset({kind}))
        return self.take()

    @staticmethod
    def _describe(t: _Tok) -> str:
        return "end of input" if t.kind == "end" else repr(t.text)

    def parse(self) -> SeqExpr:
        node = self.expr()
        if self.tok.kind != "end":
            raise SeqSyntaxError(f"unexpected {self._describe(self.tok)}", self.tok.offset,
                                 frozenset({"+", "-", "*", "/", "^", "end of input"}))
        return node

    def expr(self) -> SeqExpr:
        node = self.term()
        while self.tok.kind in ("+", "-"):
            op = self.take().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> SeqExpr:
        node = self.unary()
        while self.tok.kind in ("*", "/"):
            op = self.take().kind
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> SeqExpr:
        if self.tok.kind == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> SeqExpr:
        base = self.atom()
        if self.tok.kind != "^":
            return base
        caret = self.take()
        start = self.tok.offset
        if self.tok.kind == "end":
            raise SeqSyntaxError("missing exponent", start, frozenset({"number", "("}))
        if base == Neg(Num(Fraction(1))):
            shift = self._alt_exponent()
            if shift is not None:
                return AltSign(shift)
        exponent = self._literal_exponent()
        if exponent is None:
            raise NonLiteralExponentError(start)
        if exponent.denominator % 2 == 0 or (exponent.denominator > 1 and exponent.numerator % 2 == 0):
            raise ExponentDomainError(
                f"exponent {exponent} at offset {caret.offset} is neither an integer nor a ratio of odd integers")
        return Pow(base, exponent)

    def _alt_exponent(self) -> int | None:
        """Match ``n`` or ``(n + INT)`` / ``(n - INT)`` after ``(-1)^``."""
        save = self.i
        if self.tok.kind == "n":
            self.take()
            return 0
        if self.tok.kind == "(":
            self.take()
            if self.tok.kind == "n":
                self.take()
                if self.tok.kind == ")":
                    self.take()
                    return 0
                if self.tok.kind in ("+", "-"):
                    op = self.take().kind
                    if self.tok.kind == "num" and "." not in self.tok.text:
                        j = int(self.take().text)
                        if self.tok.kind == ")":
                            self.take()
                            return j if op == "+" else -j
        self.i = save
        return None

    def _literal_exponent(self) -> Fraction | None:
        save = self.i
        if self.tok.kind == "num" and "." not in self.tok.text:
            value = Fraction(int(self.take().text))
            if self.tok.kind == "^":
                # a^2^3: right-associative, but the exponent is then not a literal
                self.i = save
                self.power()
                return None
            return value
        if self.tok.kind == "(":
            self.take()
            negative = False
            if self.tok.kind == "-":
                self.take()
                negative = True
            if self.tok.kind == "num" and "." not in self.tok.text:
                num = int(self.take().text)
                den = 1
                if self.tok.kind == "/":
                    self.take()
                    if self.tok.kind == "num" and "." not in self.tok.text:
                        den = int(self.take().text)
                    else:
                        den = None
                if den and self.tok.kind == ")":
                    self.take()
                    value = Fraction(num, den)
                    return -value if negative else value
        # not a literal: consume the would-be exponent so the error points at it
        self.i = save
        if self.tok.kind in ("num", "n", "(", "-"):
            return None
        raise SeqSyntaxError(f"unexpected {self._describe(self.tok)}", self.tok.offset,
                             frozenset({"number", "("}))

    def atom(self) -> SeqExpr:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(Fraction(Decimal(t.text)))
        if t.kind == "n":
            self.take()
            return Index()
        if t.kind == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        raise SeqSyntaxError(f"unexpected {self._describe(t)}", t.offset, _ATOM_START)


def parse_seq(text: str) -> SeqExpr:
    """Parse ``text`` into an expression tree."""
    if not text or not text.strip():
        raise SeqSyntaxError("empty expression", 0, _ATOM_START)
    return _Parser(text).parse()


# --- printer ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: SeqExpr) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _UNARY_PREC
    if isinstance(node, (Pow, AltSign)):
        return _POW_PREC
    return _ATOM_PREC


def _num_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    d = Decimal(value.numerator) / Decimal(value.denominator)
    if Fraction(d) != value:
        raise ValueError(f"literal {value} has no finite decimal form")
    return format(d, "f")


def to_text(node: SeqExpr) -> str:
    """Canonical text; ``parse_seq(to_text(e)) == e``."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Index):
        return "n"
    if isinstance(node, AltSign):
        if node.shift == 0:
            return "(-1)^n"
        op = "+" if node.shift > 0 else "-"
        return f"(-1)^(n{op}{abs(node.shift)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        # -(-x) and -(a+b) need parentheses; so does -(a*b) to keep the tree
        if _prec(node.operand) < _POW_PREC:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, Pow):
        base = to_text(node.base)
        if _prec(node.base) <= _POW_PREC:
            base = f"({base})"
        e = node.exponent
        exp = str(e.numerator) if e.denominator == 1 and e >= 0 else f"({e})"
        return f"{base}^{exp}"
    left = to_text(node.left)
    right = to_text(node.right)
    p = _PREC[node.op]
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# --- evaluation --------------------------------------------------------------


def _apply_pow(base: Value, exponent: Fraction) -> Value:
    if exponent.denominator == 1:
        return base ** exponent.numerator if exponent >= 0 else 1 / base ** -exponent.numerator
    return odd_ratio_pow(base, exponent)


def _eval(node: SeqExpr, n: int, exact: bool) -> Value:
    if isinstance(node, Num):
        return node.value if exact else float(node.value)
    if isinstance(node, Index):
        return Fraction(n) if exact else float(n)
    if isinstance(node, AltSign):
        s = -1 if (n + node.shift) % 2 else 1
        return Fraction(s) if exact else float(s)
    if isinstance(node, Neg):
        return -_eval(node.operand, n, exact)
    if isinstance(node, Pow):
        return checked(_apply_pow(_eval(node.base, n, exact), node.exponent))
    a = _eval(node.left, n, exact)
    b = _eval(node.right, n, exact)
    if node.op == "+":
        return checked(a + b)
    if node.op == "-":
        return checked(a - b)
    if node.op == "*":
        return checked(a * b)
    return checked(a / b)


def eval_seq(expr: SeqExpr, n: int, mode: Mode | str = Mode.EXACT) -> Value:
    """Value of ``expr`` at index ``n`` as a Fraction (exact) or float."""
    if n < 1:
        raise ValueError(f"index must be >= 1, got {n}")
    try:
        return _eval(expr, int(n), as_mode(mode) is Mode.EXACT)
    except ZeroDivisionError:
        raise SeqEvalError("division by zero", n) from None
    except OverflowError as exc:
        raise SeqEvalError(f"overflow ({exc})", n) from None


def _eval_array(node: SeqExpr, ns: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(ns.shape, float(node.value))
    if isinstance(node, Index):
        return ns.astype(np.float64)
    if isinstance(node, AltSign):
        return np.where((ns + node.shift) % 2 == 0, 1.0, -1.0)
    if isinstance(node, Neg):
        return -_eval_array(node.operand, ns)
    if isinstance(node, Pow):
        base = _eval_array(node.base, ns)
        e = node.exponent
        if e.denominator == 1:
            return base ** float(e.numerator)
        return np.sign(base) * np.abs(base) ** float(e)
    a = _eval_array(node.left, ns)
    b = _eval_array(node.right, ns)
    return {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[node.op](a, b)


def eval_seq_array(expr: SeqExpr, ns) -> np.ndarray:
    """Float values of ``expr`` at every index in ``ns`` (vectorized).

    Raises :class:`SeqEvalError` at the first index producing a non-finite
    value (division by zero or overflow).
    """
    ns = np.asarray(ns, dtype=np.int64)
    with np.errstate(all="ignore"):
        out = _eval_array(expr, ns)
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        n = int(ns[bad[0]])
        eval_seq(expr, n, Mode.EXACT)  # raises with the precise reason
        raise SeqEvalError("overflow", n)
    return out


def first_nonpositive(expr: SeqExpr, start: int, stop: int, mode: Mode | str = Mode.FLOAT) -> int | None:
    """First ``n`` in ``[start, stop]`` where ``expr`` is not strictly positive.

    Returns ``None`` when the sequence is positive on the whole window.
    """
    if as_mode(mode) is Mode.FLOAT:
        values = eval_seq_array(expr, np.arange(start, stop + 1))
        bad = np.flatnonzero(values <= 0)
        return int(start + bad[0]) if bad.size else None
    for n in range(start, stop + 1):
        if eval_seq(expr, n, Mode.EXACT) <= 0:
            return n
    return None


def as_expr(value) -> SeqExpr:
    """Accept an expression tree, a source string, or a number."""
    if isinstance(value, (Num, Index, AltSign, Neg, BinOp, Pow)):
        return value
    if isinstance(value, (int, Fraction)):
        return parse_seq(str(value)) if value >= 0 else Neg(parse_seq(str(-value)))
    return parse_seq(str(value))
