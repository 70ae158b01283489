"""Generators for the golden moment families used throughout the tests.

* :func:`cubic_curve` -- degree-6 data on the curve y = x^3, with the two
  top moments ``c`` (beta_15) and ``d`` (beta_06) free.
* :func:`extra_relation` -- degree-6 data with an extra column relation
  X^2Y = t(X,Y), parametrized by ``r`` (beta_15).
* :func:`second_stage` -- degree-8 data whose RG extension M_5 is positive
  but M_6 need not be, parametrized by ``a, b, g, h``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .moment import MomentSequence

# Catalan numbers: the even moments of x for the measure underlying cubic_curve.
_CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862]


def cubic_curve_rank8_d(c) -> Fraction:
    """The value of beta_06 making rank M_3 = 8 for a given beta_15 = c."""
    c = Fraction(c)
    return 2026881 - 2844 * c + c * c


def cubic_curve(c=1430, d: Optional[object] = None) -> MomentSequence:
    c = Fraction(c)
    d = cubic_curve_rank8_d(c) if d is None else Fraction(d)

    def x_moment(k: int) -> Fraction:
        if k == 16:
            return c
        if k == 18:
            return d
        return Fraction(0) if k % 2 else Fraction(_CATALAN[k // 2])

    return MomentSequence.from_function(3, lambda i, j: x_moment(i + 3 * j))


def extra_relation_beta06(r) -> Fraction:
    r = Fraction(r)
    return (443272376768 - 2742712830 * r + 4826809 * r * r) / Fraction(41327767)


def extra_relation(r=300) -> MomentSequence:
    r = Fraction(r)
    F = Fraction
    values = {
        (0, 0): 1, (2, 0): 1, (0, 2): 1,
        (1, 0): 0, (0, 1): 0,
        (1, 1): 0, (3, 0): 0, (2, 1): 0, (0, 3): 0,
        (1, 2): 2, (4, 0): 2, (3, 1): 0, (1, 3): 0,
        (2, 2): 5, (0, 4): 22,
        (5, 0): -1, (4, 1): -2, (3, 2): 13, (2, 3): 3, (1, 4): F(894, 13), (0, 5): F(336, 13),
        (6, 0): 178, (5, 1): 139, (4, 2): 159, (3, 3): F(1657, 13), (2, 4): F(4298, 13),
        (1, 5): r, (0, 6): extra_relation_beta06(r),
    }
    return MomentSequence(3, values)


def second_stage(a=60, b=Fraction(1, 4), g=Fraction(1, 4), h=0) -> MomentSequence:
    a, b, g, h = (Fraction(v) for v in (a, b, g, h))
    values = {(i, j): Fraction(0) for i in range(9) for j in range(9 - i)}
    values.update({
        (0, 0): 1, (2, 0): 1, (0, 2): 1, (2, 2): 1,
        (4, 0): 2, (0, 4): 2, (4, 2): 2, (2, 4): 2,
        (6, 0): 5, (0, 6): 5,
        (7, 0): a, (6, 1): b, (1, 6): g, (0, 7): h,
        (8, 0): 13 + a * a + b * b, (7, 1): a * b, (6, 2): 5, (5, 3): 0, (4, 4): 4,
        (3, 5): 0, (2, 6): 5, (1, 7): g * h, (0, 8): 13 + g * g + h * h,
    })
    return MomentSequence(4, values)


def second_stage_eta(a, b, g, h) -> Fraction:
    """Sign test for positivity of M_6 in the second_stage family (M_6 >= 0 iff eta <= 0)."""
    a, b, g, h = (Fraction(v) for v in (a, b, g, h))
    left = 1 - 3 * b**2 + b**4 - a * b**2 * g + a * b**4 * g + b * h - 2 * b**3 * h
    right = -1 - a * g + 3 * g**2 + 2 * a * g**3 - g**4 + b * g**2 * h - b * g**4 * h
    return left * right


def second_stage_bgtest(b, g) -> Fraction:
    b, g = Fraction(b), Fraction(g)
    return 1 - 2 * b**2 - 2 * g**2 + 3 * b**2 * g**2 + b**4 * g**2 + b**2 * g**4 - b**4 * g**4
