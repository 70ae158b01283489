"""Column relations of a moment matrix and recursive determinacy."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .exactla import Mat, matvec, nullspace, rank, rref
from .monomials import Monomial, Poly, count_up_to, monomial_at, monomials_up_to
from .moment import MomentMatrix, build_moment_matrix, leading_rank


@dataclass(frozen=True)
class ColumnRelation:
    """X^i Y^j = rhs(X, Y), rhs supported on strictly earlier (independent) columns."""

    target: Monomial
    rhs: Poly

    @property
    def degree(self) -> int:
        return self.target.degree

    @property
    def degree_reducing(self) -> bool:
        return self.rhs.degree < self.target.degree

    def polynomial(self) -> Poly:
        """target - rhs, which vanishes as a column combination."""
        return Poly.monomial(*self.target) - self.rhs

    def shifted(self, a: int, b: int) -> "ColumnRelation":
        return ColumnRelation(self.target.shift(a, b), self.rhs.shift(a, b))

    def swapped(self) -> "ColumnRelation":
        return ColumnRelation(self.target.swapped(), self.rhs.swapped())

    def __str__(self) -> str:
        from .monomials import monomial_str

        return f"{monomial_str(self.target, upper=True)} = {self.rhs.format(upper=True)}"


def kernel_relations(M: MomentMatrix) -> list[ColumnRelation]:
    """One relation per column lying in the span of the columns before it."""
    R, pivots = rref(M.mat)
    monos = M.monomials
    pivot_set = set(pivots)
    out = []
    for c, target in enumerate(monos):
        if c in pivot_set:
            continue
        rhs = {monos[p]: R[row][c] for row, p in enumerate(pivots) if p < c and R[row][c]}
        out.append(ColumnRelation(target, Poly(rhs)))
    return out


def independent_columns(M: MomentMatrix) -> list[Monomial]:
    _, pivots = rref(M.mat)
    monos = M.monomials
    return [monos[p] for p in pivots]


def relation_holds(M: MomentMatrix, poly: Poly) -> bool:
    return not any(matvec(M.mat, poly.to_vector(M.degree)))


@dataclass(frozen=True)
class RGResult:
    ok: bool
    violation: Optional[tuple[ColumnRelation, Monomial]] = None


def is_recursively_generated(M: MomentMatrix, relations: Optional[list[ColumnRelation]] = None) -> RGResult:
    """Check that every kernel relation survives multiplication by x^a y^b within degree."""
    if relations is None:
        relations = kernel_relations(M)
    d = M.degree
    for rel in relations:
        base = rel.polynomial()
        for s in monomials_up_to(d - rel.degree):
            if s.degree == 0:
                continue
            if not relation_holds(M, base.shift(*s)):
                return RGResult(False, (rel, s))
    return RGResult(True)


class Classification(str, enum.Enum):
    FLAT = "Flat"
    RD_EXT = "RdExtHypothesis"
    RD_NEW = "RdNewHypothesis"
    GENERAL_RD = "GeneralRD"
    NOT_RD = "NotRD"


@dataclass(frozen=True)
class DeterminacyProfile:
    """X^n = p and Y^m = q, expressed in the normalized frame.

    When ``roles_swapped`` is set the normalized frame is the original one
    with x and y exchanged; ``p`` and ``q`` live in that frame.
    """

    n: int
    p: Poly
    m: int
    q: Poly
    roles_swapped: bool = False
    classification: Classification = Classification.GENERAL_RD
    also_swapped: bool = False  # the other orientation is RD as well

    @property
    def x_relation(self) -> ColumnRelation:
        return ColumnRelation(Monomial(self.n, 0), self.p)

    @property
    def y_relation(self) -> ColumnRelation:
        return ColumnRelation(Monomial(0, self.m), self.q)

    def band_bound(self, d: int) -> int:
        return self.n + self.m - d - 1

    def generators(self) -> tuple[Poly, Poly]:
        """x^n - p and y^m - q in the original variables."""
        f = Poly.monomial(self.n, 0) - self.p
        g = Poly.monomial(0, self.m) - self.q
        if self.roles_swapped:
            return f.swapped(), g.swapped()
        return f, g

    def original_relations(self) -> tuple[ColumnRelation, ColumnRelation]:
        if self.roles_swapped:
            return self.x_relation.swapped(), self.y_relation.swapped()
        return self.x_relation, self.y_relation


def _pair_from_relations(relations: list[ColumnRelation], d: int) -> Optional[tuple[ColumnRelation, ColumnRelation]]:
    xs = [r for r in relations if r.target.j == 0 and 1 <= r.target.i <= d]
    ys = [r for r in relations if r.target.i == 0 and 1 <= r.target.j <= d]
    if not xs or not ys:
        return None
    xrel = min(xs, key=lambda r: r.target.i)
    yrel = min(ys, key=lambda r: r.target.j)
    # deg-lex reduction already guarantees deg p < n and no y^m term in q
    return xrel, yrel


def normalized(M: MomentMatrix, swapped: bool) -> MomentMatrix:
    return build_moment_matrix(M.moments.swapped()) if swapped else M


def detect_rd(M: MomentMatrix, relations: Optional[list[ColumnRelation]] = None) -> Optional[DeterminacyProfile]:
    """Find X^n = p, Y^m = q (minimal n, m); fall back to the swapped orientation."""
    if M.degree < 1:
        return None
    if relations is None:
        relations = kernel_relations(M)
    straight = _pair_from_relations(relations, M.degree)
    Ms = normalized(M, True)
    swapped = _pair_from_relations(kernel_relations(Ms), M.degree)
    if straight is not None:
        xr, yr = straight
        prof = DeterminacyProfile(xr.target.i, xr.rhs, yr.target.j, yr.rhs, False, also_swapped=swapped is not None)
        return _with_class(prof, classify(M, prof))
    if swapped is not None:
        xr, yr = swapped
        prof = DeterminacyProfile(xr.target.i, xr.rhs, yr.target.j, yr.rhs, True)
        return _with_class(prof, classify(M, prof))
    return None


def _with_class(prof: DeterminacyProfile, cls: Classification) -> DeterminacyProfile:
    return DeterminacyProfile(prof.n, prof.p, prof.m, prof.q, prof.roles_swapped, cls, prof.also_swapped)


def is_flat(M: MomentMatrix) -> bool:
    return M.degree >= 1 and rank(M.mat) == leading_rank(M, M.degree - 1)


def generated_family(prof: DeterminacyProfile, d: int) -> list[Poly]:
    """x^i y^j (x^n - p) and x^k y^l (y^m - q) of degree at most d (normalized frame)."""
    f = Poly.monomial(prof.n, 0) - prof.p
    g = Poly.monomial(0, prof.m) - prof.q
    out = [f.shift(*s) for s in monomials_up_to(d - prof.n)] if prof.n <= d else []
    out += [g.shift(*s) for s in monomials_up_to(d - prof.m)] if prof.m <= d else []
    return out


def same_span(vectors: list[list[Fraction]], basis: list[list[Fraction]]) -> bool:
    r1 = rank(vectors) if vectors else 0
    r2 = rank(basis) if basis else 0
    both = vectors + basis
    return r1 == r2 == (rank(both) if both else 0)


def classify(M: MomentMatrix, prof: Optional[DeterminacyProfile]) -> Classification:
    if prof is None:
        return Classification.NOT_RD
    if is_flat(M):
        return Classification.FLAT
    Mn = normalized(M, prof.roles_swapped)
    d = Mn.degree
    family = [f.to_vector(d) for f in generated_family(prof, d)]
    if same_span(family, nullspace(Mn.mat)):
        return Classification.RD_EXT
    relations = kernel_relations(Mn)
    if all(r.degree_reducing for r in relations) and is_recursively_generated(Mn, relations).ok:
        return Classification.RD_NEW
    return Classification.GENERAL_RD
