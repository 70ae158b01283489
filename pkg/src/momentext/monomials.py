"""Degree-lexicographic monomials and sparse bivariate polynomials.

Within a degree the order is x-power descending: 1, x, y, x^2, xy, y^2, ...
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class Monomial(NamedTuple):
    i: int  # x exponent
    j: int  # y exponent

    @property
    def degree(self) -> int:
        return self.i + self.j

    def shift(self, a: int, b: int) -> "Monomial":
        return Monomial(self.i + a, self.j + b)

    def swapped(self) -> "Monomial":
        return Monomial(self.j, self.i)

    def __str__(self) -> str:
        return monomial_str(self)


def monomial_str(m: Monomial, upper: bool = False) -> str:
    x, y = ("X", "Y") if upper else ("x", "y")
    parts = []
    for name, e in ((x, m.i), (y, m.j)):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "".join(parts) if parts else "1"


def deglex_index(m: Monomial) -> int:
    k = m.i + m.j
    return k * (k + 1) // 2 + m.j


def monomial_at(index: int) -> Monomial:
    k = 0
    while (k + 1) * (k + 2) // 2 <= index:
        k += 1
    j = index - k * (k + 1) // 2
    return Monomial(k - j, j)


def count_up_to(d: int) -> int:
    return (d + 1) * (d + 2) // 2


def monomials_of_degree(k: int) -> list[Monomial]:
    return [Monomial(k - j, j) for j in range(k + 1)]


def monomials_up_to(d: int) -> list[Monomial]:
    return [m for k in range(d + 1) for m in monomials_of_degree(k)]


def cross_diagonal(block_row: int, block_col: int, level: int) -> list[tuple[Monomial, Monomial]]:
    """(row, col) pairs of block B[block_row, block_col] sharing one moment.

    ``level`` is the y-exponent of that moment, so the shared moment is
    ``beta[block_row + block_col - level, level]``; levels run over
    ``0 .. block_row + block_col``.
    """
    pairs = []
    for a in range(block_row + 1):
        b = level - a
        if 0 <= b <= block_col:
            pairs.append((Monomial(block_row - a, a), Monomial(block_col - b, b)))
    return pairs


class Poly:
    """Sparse bivariate polynomial with exact coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for mono, coef in (terms or {}).items():
            c = Fraction(coef)
            if c:
                m = Monomial(*mono)
                clean[m] = clean.get(m, Fraction(0)) + c
                if not clean[m]:
                    del clean[m]
        self._terms = clean

    @classmethod
    def monomial(cls, i: int, j: int, coef=1) -> "Poly":
        return cls({(i, j): coef})

    @classmethod
    def from_vector(cls, vec: Sequence, basis: Sequence[Monomial] | None = None) -> "Poly":
        if basis is None:
            basis = [monomial_at(k) for k in range(len(vec))]
        return cls({m: c for m, c in zip(basis, vec) if c})

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items(), key=lambda t: deglex_index(t[0])))

    def coefficient(self, i: int, j: int) -> Fraction:
        return self._terms.get(Monomial(i, j), Fraction(0))

    @property
    def degree(self) -> int:
        return max((m.degree for m in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = Fraction(other)
            return Poly({m: c * v for m, v in self._terms.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = Monomial(m1.i + m2.i, m1.j + m2.j)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def shift(self, a: int, b: int) -> "Poly":
        """x^a y^b * self."""
        return Poly({Monomial(m.i + a, m.j + b): c for m, c in self._terms.items()})

    def swapped(self) -> "Poly":
        return Poly({m.swapped(): c for m, c in self._terms.items()})

    def to_vector(self, d: int) -> list[Fraction]:
        if self.degree > d:
            raise ValueError(f"polynomial of degree {self.degree} does not fit in P_{d}")
        vec = [Fraction(0)] * count_up_to(d)
        for m, c in self._terms.items():
            vec[deglex_index(m)] = c
        return vec

    def evaluate(self, x, y):
        return sum(c * x**m.i * y**m.j for m, c in self._terms.items()) if self._terms else 0 * x

    def evaluate_float(self, x: float, y: float) -> float:
        return float(sum(float(c) * x**m.i * y**m.j for m, c in self._terms.items()))

    def format(self, upper: bool = False) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m, c in self.items():
            name = monomial_str(m, upper)
            mag = abs(c)
            if name == "1":
                body = str(mag)
            elif mag == 1:
                body = name
            elif mag.denominator == 1:
                body = f"{mag}{name}"
            else:
                body = f"({mag}){name}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Poly({self.format()!r})"


def poly_sum(polys: Iterable[Poly]) -> Poly:
    total = Poly()
    for p in polys:
        total = total + p
    return total
