"""Independent reference computations used to cross-check the package."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import sympy


def laplace_det(A) -> Fraction:
    n = len(A)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(A[0][0])
    total = Fraction(0)
    for c in range(n):
        if A[0][c] == 0:
            continue
        minor = [row[:c] + row[c + 1:] for row in A[1:]]
        total += (-1) ** c * A[0][c] * laplace_det(minor)
    return total


def principal_minors_nonnegative(A) -> bool:
    n = len(A)
    for k in range(1, n + 1):
        for idx in combinations(range(n), k):
            if laplace_det([[A[i][j] for j in idx] for i in idx]) < 0:
                return False
    return True


def minor_rank(A) -> int:
    """Largest k with a nonzero k x k minor (small matrices only)."""
    if not A or not A[0]:
        return 0
    rows, cols = len(A), len(A[0])
    for k in range(min(rows, cols), 0, -1):
        for ri in combinations(range(rows), k):
            for ci in combinations(range(cols), k):
                if laplace_det([[A[i][j] for j in ci] for i in ri]) != 0:
                    return k
    return 0


def sympy_rank(A) -> int:
    return sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in A]).rank()


def atomic_moment(atoms, weights, i: int, j: int) -> Fraction:
    return sum((w * Fraction(x) ** i * Fraction(y) ** j for (x, y), w in zip(atoms, weights)), Fraction(0))
