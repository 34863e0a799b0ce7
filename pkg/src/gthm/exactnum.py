"""Exact-where-possible scalar arithmetic for geometric dimensions.

Scalars flow through three representations: ``Fraction`` for rational
quantities, ``Rad`` for square roots of rationals (the typical shape of
a length between rational points), and ``float`` once a computation
leaves that tower.  Arithmetic degrades to float silently; equality and
residuals stay exact whenever both operands are exact, which is what
lets a rational-coordinate theorem close with residual exactly zero.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union


class Rad:
    """sqrt(radicand) for a positive non-square rational radicand.

    Instances are only built through :func:`sqrt_exact`, which collapses
    perfect squares back to ``Fraction``; code elsewhere may therefore
    assume a ``Rad`` is irrational and positive.
    """

    __slots__ = ("radicand",)

    def __init__(self, radicand: Fraction):
        self.radicand = radicand

    def __float__(self) -> float:
        return math.sqrt(float(self.radicand))

    def __repr__(self) -> str:
        return f"Rad({self.radicand})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Rad) and self.radicand == other.radicand

    def __hash__(self) -> int:
        return hash(("Rad", self.radicand))


Scalar = Union[Fraction, Rad, float]


def _perfect_sqrt(q: Fraction) -> Fraction | None:
    # math.isqrt is exact on arbitrary ints; a rational is square iff
    # numerator and denominator both are.
    rn = math.isqrt(q.numerator)
    rd = math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def sqrt_exact(q: Fraction) -> Scalar:
    """Square root of a nonnegative rational, exact when possible."""
    if q < 0:
        raise ValueError(f"square root of negative rational {q}")
    if q == 0:
        return Fraction(0)
    root = _perfect_sqrt(q)
    if root is not None:
        return root
    return Rad(q)


def is_exact(v: Scalar) -> bool:
    return isinstance(v, (Fraction, Rad))


def as_float(v: Scalar) -> float:
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, Rad):
        return float(v)
    return v


def square(v: Scalar) -> Fraction | float:
    if isinstance(v, Fraction):
        return v * v
    if isinstance(v, Rad):
        return v.radicand
    return v * v


def sqrt_scalar(v: Scalar) -> Scalar:
    if isinstance(v, Fraction):
        return sqrt_exact(v)
    if isinstance(v, Rad):
        # sqrt(sqrt(q)) leaves the tower
        return math.sqrt(float(v))
    if v < 0:
        raise ValueError(f"square root of negative value {v}")
    return math.sqrt(v)


def add(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a + b
    if isinstance(a, Rad) and isinstance(b, Rad):
        if a.radicand == b.radicand:
            return Rad(4 * a.radicand)  # sqrt(q) + sqrt(q) = sqrt(4q)
        return float(a) + float(b)
    if isinstance(a, Fraction) and a == 0:
        return b
    if isinstance(b, Fraction) and b == 0:
        return a
    return as_float(a) + as_float(b)


def sub(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a - b
    if isinstance(a, Rad) and isinstance(b, Rad):
        if a.radicand == b.radicand:
            return Fraction(0)
        return float(a) - float(b)
    if isinstance(b, Fraction) and b == 0:
        return a
    return as_float(a) - as_float(b)


def mul(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a * b
    if isinstance(a, Rad) and isinstance(b, Rad):
        return sqrt_exact(a.radicand * b.radicand)
    if isinstance(a, Fraction) and isinstance(b, Rad):
        a, b = b, a
    if isinstance(a, Rad) and isinstance(b, Fraction):
        if b == 0:
            return Fraction(0)
        if b > 0:
            return Rad(b * b * a.radicand)
        return -float(a) * float(-b)
    return as_float(a) * as_float(b)


def div(a: Scalar, b: Scalar) -> Scalar:
    if isinstance(b, Fraction) and b == 0:
        raise ZeroDivisionError("division by exact zero")
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a / b
    if isinstance(a, Rad) and isinstance(b, Rad):
        return sqrt_exact(a.radicand / b.radicand)
    if isinstance(a, Fraction) and isinstance(b, Rad):
        if a == 0:
            return Fraction(0)
        if a > 0:
            return sqrt_exact(a * a / b.radicand)
        return -math.sqrt(float(a * a) / float(b.radicand))
    if isinstance(a, Rad) and isinstance(b, Fraction):
        if b > 0:
            return Rad(a.radicand / (b * b))
        return -float(a) / float(-b)
    fb = as_float(b)
    if fb == 0.0:
        raise ZeroDivisionError("division by zero")
    return as_float(a) / fb


def exact_eq(a: Scalar, b: Scalar) -> bool:
    """True iff both values are exact and provably equal."""
    if not (is_exact(a) and is_exact(b)):
        return False
    sa = 1 if isinstance(a, Rad) else (0 if a == 0 else (1 if a > 0 else -1))
    sb = 1 if isinstance(b, Rad) else (0 if b == 0 else (1 if b > 0 else -1))
    return sa == sb and square(a) == square(b)


def rel_err(a: Scalar, b: Scalar) -> float:
    """Relative disagreement of two scalars; exactly 0.0 for equal exact values."""
    if exact_eq(a, b):
        return 0.0
    fa, fb = as_float(a), as_float(b)
    scale = max(abs(fa), abs(fb))
    if scale == 0.0:
        return 0.0
    return abs(fa - fb) / scale
