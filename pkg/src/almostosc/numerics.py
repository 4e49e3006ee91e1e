"""Dual-mode scalar arithmetic: exact rationals and 64-bit floats.

A value is either a :class:`fractions.Fraction` (exact mode) or a ``float``.
Exact arithmetic is kept as long as every exponent involved produces a
rational result; anything else is coerced to ``float`` explicitly.

The powers used throughout the package are odd-ratio powers
``x -> sign(x) * |x|**(p/q)`` with ``p`` and ``q`` odd, which are defined
(and strictly increasing) on the whole real line.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2

Value = Union[Fraction, float]

#: absolute tolerance used by float comparisons unless a caller overrides it
DEFAULT_ATOL = 1e-9


class Mode(str, enum.Enum):
    EXACT = "exact"
    FLOAT = "float"


class NumericOverflowError(OverflowError):
    """A float computation left the finite range."""


def as_mode(mode: Mode | str) -> Mode:
    return mode if isinstance(mode, Mode) else Mode(str(mode).lower())


def to_value(x, mode: Mode | str = Mode.EXACT) -> Value:
    """Convert ``x`` (int, str, Fraction, float) to a value of ``mode``.

    Strings are parsed by :class:`Fraction`, so ``"1/2"`` and ``"0.25"`` are
    both accepted.
    """
    mode = as_mode(mode)
    if isinstance(x, str):
        x = Fraction(x.strip())
    if mode is Mode.FLOAT:
        return checked(float(x))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise NumericOverflowError(f"non-finite value {x!r}")
        return Fraction(x)
    return Fraction(x)


def checked(x: Value) -> Value:
    """Return ``x`` unchanged, raising if it is a non-finite float."""
    if isinstance(x, float) and not math.isfinite(x):
        raise NumericOverflowError(f"float overflow (got {x!r})")
    return x


def is_exact(x) -> bool:
    return isinstance(x, (Fraction, int))


def sign(x: Value) -> int:
    return int(x > 0) - int(x < 0)


def close(a: Value, b: Value, atol: float = DEFAULT_ATOL) -> bool:
    """Exact equality for two rationals, ``|a - b| <= atol`` otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= atol


@dataclass(frozen=True, order=False)
class OddRatio:
    """Positive exponent ``num/den`` with both parts odd, kept in lowest terms."""

    num: int
    den: int = 1

    def __post_init__(self):
        num, den = int(self.num), int(self.den)
        if num < 1 or den < 1:
            raise ValueError(f"odd ratio needs positive parts, got {num}/{den}")
        g = math.gcd(num, den)
        num, den = num // g, den // g
        if num % 2 == 0 or den % 2 == 0:
            raise ValueError(f"{num}/{den} is not a ratio of odd positive integers")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def parse(cls, text) -> "OddRatio":
        """Accept ``"5/3"``, ``"3"``, an int or a Fraction."""
        if isinstance(text, OddRatio):
            return text
        if isinstance(text, float):
            raise TypeError("odd ratios must be given exactly, not as floats")
        f = Fraction(str(text).strip()) if isinstance(text, str) else Fraction(text)
        return cls(f.numerator, f.denominator)

    def fraction(self) -> Fraction:
        return Fraction(self.num, self.den)

    def value(self) -> float:
        return self.num / self.den

    def reciprocal(self) -> "OddRatio":
        return OddRatio(self.den, self.num)

    @property
    def is_integer(self) -> bool:
        return self.den == 1

    def __lt__(self, other):
        return self.fraction() < _frac(other)

    def __le__(self, other):
        return self.fraction() <= _frac(other)

    def __gt__(self, other):
        return self.fraction() > _frac(other)

    def __ge__(self, other):
        return self.fraction() >= _frac(other)

    def __str__(self):
        return str(self.num) if self.den == 1 else f"{self.num}/{self.den}"


def _frac(x) -> Fraction:
    return x.fraction() if isinstance(x, OddRatio) else Fraction(x)


def _exact_root(u: int, k: int) -> int | None:
    """Integer ``k``-th root of ``u >= 0`` if ``u`` is a perfect power."""
    root, exact = gmpy2.iroot(gmpy2.mpz(u), k)
    return int(root) if exact else None


def rational_root(x: Fraction, k: int) -> Fraction | None:
    """Exact positive ``k``-th root of ``x >= 0``, or ``None`` if irrational."""
    p = _exact_root(x.numerator, k)
    if p is None:
        return None
    q = _exact_root(x.denominator, k)
    if q is None:
        return None
    return Fraction(p, q)


def pos_pow(x: Value, exponent: Fraction | int) -> Value:
    """``x**exponent`` for ``x >= 0`` and rational ``exponent``.

    Exact for rational ``x`` whenever the result is rational; float otherwise.
    """
    exponent = Fraction(exponent)
    if x < 0:
        raise ValueError(f"pos_pow needs a nonnegative base, got {x}")
    if is_exact(x):
        x = Fraction(x)
        if exponent.denominator == 1:
            if x == 0 and exponent < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return x ** exponent.numerator
        root = rational_root(x, exponent.denominator)
        if root is not None:
            if root == 0 and exponent < 0:
                raise ZeroDivisionError("0 raised to a negative power")
            return root ** exponent.numerator
        try:
            x = float(x)
        except OverflowError as exc:
            raise NumericOverflowError(str(exc)) from None
    if x == 0.0:
        if exponent < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return 0.0 if exponent > 0 else 1.0
    try:
        return checked(float(x) ** float(exponent))
    except OverflowError as exc:
        raise NumericOverflowError(str(exc)) from None


def odd_ratio_pow(x: Value, rho: OddRatio | Fraction) -> Value:
    """Sign-preserving power ``sign(x) * |x|**rho``.

    ``rho`` may also be a negative rational with odd parts (used by the
    sequence language); the zero base then raises ``ZeroDivisionError``.
    """
    rho = _frac(rho)
    if rho.numerator % 2 == 0 or rho.denominator % 2 == 0:
        raise ValueError(f"exponent {rho} is not an odd ratio")
    s = sign(x)
    mag = pos_pow(abs(x), rho)
    return mag if s >= 0 else -mag


def odd_ratio_root(u: Value, rho: OddRatio) -> Value:
    """The unique real ``t`` with ``odd_ratio_pow(t, rho) == u``."""
    return odd_ratio_pow(u, rho.reciprocal())
