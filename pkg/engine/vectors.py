# engine/vectors.py
"""Exact rational vector helpers shared by the geometry and LP code."""

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Sequence, Tuple, Union

Vector = Tuple[Fraction, ...]
Scalar = Union[int, Fraction]


def vec(values: Iterable[Union[int, str, Fraction]]) -> Vector:
    """Builds a vector of Fractions from ints, Fractions or "p/q" strings."""
    return tuple(Fraction(v) for v in values)


def zeros(dim: int) -> Vector:
    return (Fraction(0),) * dim


def unit(dim: int, j: int) -> Vector:
    """Canonical basis vector e^j, with j counted from 0."""
    return tuple(Fraction(1 if k == j else 0) for k in range(dim))


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def neg(a: Sequence[Fraction]) -> Vector:
    return tuple(-x for x in a)


def mul(s: Scalar, a: Sequence[Fraction]) -> Vector:
    return tuple(s * x for x in a)


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def vsum(vectors: Iterable[Sequence[Fraction]], dim: int) -> Vector:
    return reduce(add, vectors, zeros(dim))


def is_zero(a: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in a)


def primitive(a: Sequence[Fraction]) -> Vector:
    """Positive multiple of `a` with coprime integer entries (zero stays zero)."""
    if is_zero(a):
        return tuple(Fraction(0) for _ in a)
    lcm = 1
    for x in a:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in a]
    g = reduce(gcd, (abs(i) for i in ints if i))
    return tuple(Fraction(i // g) for i in ints)


def fmt(x: Fraction) -> str:
    """Renders a rational as "p/q" (denominator always shown)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fmt_vec(a: Sequence[Fraction]) -> str:
    return "(" + ",".join(fmt(x) for x in a) + ")"


def _rref(rows: Sequence[Sequence[Fraction]], n: int):
    m = [list(r) for r in rows]
    pivots = []
    row = 0
    for col in range(n):
        if row == len(m):
            break
        pivot = next((i for i in range(row, len(m)) if m[i][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        p = m[row][col]
        m[row] = [x / p for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    return m[:row], pivots


def echelon_basis(vectors: Sequence[Sequence[Fraction]], n: int) -> list:
    """Reduced row echelon basis of span(vectors) as (pivot column, row) pairs."""
    m, pivots = _rref(vectors, n)
    return [(pc, tuple(r)) for pc, r in zip(pivots, m)]
