"""Moment sequences, moment matrices and the atomic-measure moment oracle."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .exactla import Mat, psd_check, rank, submatrix
from .monomials import Monomial, Poly, count_up_to, deglex_index, monomial_at, monomials_up_to


class IncompleteMoments(ValueError):
    def __init__(self, missing: list[tuple[int, int]]):
        shown = ", ".join(f"({i},{j})" for i, j in missing[:12])
        more = "" if len(missing) <= 12 else f" ... ({len(missing)} total)"
        super().__init__(f"missing moments: {shown}{more}")
        self.missing = missing


class DegreeTooHigh(ValueError):
    pass


def moment_indices(total_degree: int) -> list[tuple[int, int]]:
    return [(m.i, m.j) for m in monomials_up_to(total_degree)]


@dataclass(frozen=True)
class MomentSequence:
    """beta_{ij} for every i + j <= 2 * half_degree."""

    half_degree: int
    values: Mapping[tuple[int, int], Fraction]

    def __post_init__(self):
        clean = {}
        for (i, j), v in self.values.items():
            if i + j > 2 * self.half_degree:
                raise DegreeTooHigh(f"moment ({i},{j}) exceeds degree {2 * self.half_degree}")
            clean[(int(i), int(j))] = Fraction(v)
        missing = [ij for ij in moment_indices(2 * self.half_degree) if ij not in clean]
        if missing:
            raise IncompleteMoments(missing)
        object.__setattr__(self, "values", clean)

    @classmethod
    def from_function(cls, half_degree: int, fn: Callable[[int, int], object]) -> "MomentSequence":
        return cls(half_degree, {(i, j): Fraction(fn(i, j)) for i, j in moment_indices(2 * half_degree)})

    @property
    def degree(self) -> int:
        return 2 * self.half_degree

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.values[ij]

    def swapped(self) -> "MomentSequence":
        return MomentSequence(self.half_degree, {(j, i): v for (i, j), v in self.values.items()})

    def scaled(self, c) -> "MomentSequence":
        c = Fraction(c)
        return MomentSequence(self.half_degree, {ij: c * v for ij, v in self.values.items()})

    def truncated(self, half_degree: int) -> "MomentSequence":
        if half_degree > self.half_degree:
            raise DegreeTooHigh(f"cannot truncate to a higher degree ({half_degree})")
        return MomentSequence(half_degree, {ij: v for ij, v in self.values.items() if sum(ij) <= 2 * half_degree})

    def max_abs(self) -> Fraction:
        return max(abs(v) for v in self.values.values())


def riesz(beta: MomentSequence, f: Poly) -> Fraction:
    if f.degree > beta.degree:
        raise DegreeTooHigh(f"deg f = {f.degree} exceeds {beta.degree}")
    return sum((c * beta[(m.i, m.j)] for m, c in f.items()), Fraction(0))


@dataclass(frozen=True)
class MomentMatrix:
    degree: int
    mat: Mat = field(repr=False)
    moments: MomentSequence = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.mat)

    @property
    def monomials(self) -> list[Monomial]:
        return monomials_up_to(self.degree)

    def leading(self, k: int) -> Mat:
        """The principal block M_k (k <= degree)."""
        n = count_up_to(k)
        return [row[:n] for row in self.mat[:n]]

    def rank(self) -> int:
        return rank(self.mat)

    def entry(self, row: Monomial, col: Monomial) -> Fraction:
        return self.mat[deglex_index(row)][deglex_index(col)]

    def column(self, m: Monomial) -> list[Fraction]:
        k = deglex_index(m)
        return [row[k] for row in self.mat]


def build_moment_matrix(beta: MomentSequence, k: Optional[int] = None) -> MomentMatrix:
    if k is None:
        k = beta.half_degree
    if k > beta.half_degree:
        raise DegreeTooHigh(f"M_{k} needs moments of degree {2 * k}, have {beta.degree}")
    monos = monomials_up_to(k)
    mat = [[beta[(r.i + c.i, r.j + c.j)] for c in monos] for r in monos]
    return MomentMatrix(k, mat, beta if k == beta.half_degree else beta.truncated(k))


@dataclass(frozen=True)
class Violation:
    kind: str  # "symmetry" or "moment"
    moment: tuple[int, int]
    block: tuple[int, int]
    level: int
    positions: tuple[tuple[int, int], ...]
    values: tuple[Fraction, ...]

    def describe(self) -> str:
        i, j = self.moment
        where = ", ".join(f"({r},{c})" for r, c in self.positions)
        vals = ", ".join(str(v) for v in self.values)
        return f"{self.kind} violation for beta_{{{i},{j}}} in B{list(self.block)} level {self.level}: {where} -> {vals}"


def _degree_for_dim(n: int) -> int:
    d = 0
    while count_up_to(d) < n:
        d += 1
    if count_up_to(d) != n:
        raise ValueError(f"dimension {n} is not (d+1)(d+2)/2 for any d")
    return d


def validate_structure(M) -> list[Violation]:
    """Empty iff M is symmetric and every entry agrees with a single moment sequence."""
    mat = M.mat if isinstance(M, MomentMatrix) else M
    n = len(mat)
    _degree_for_dim(n)
    monos = [monomial_at(k) for k in range(n)]
    out: list[Violation] = []
    for r in range(n):
        for c in range(r + 1, n):
            if mat[r][c] != mat[c][r]:
                a, b = monos[r], monos[c]
                out.append(Violation("symmetry", (a.i + b.i, a.j + b.j), (a.degree, b.degree), a.j + b.j,
                                     ((r, c), (c, r)), (mat[r][c], mat[c][r])))
    seen: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for r in range(n):
        for c in range(r, n):
            a, b = monos[r], monos[c]
            seen.setdefault((a.i + b.i, a.j + b.j), []).append((r, c))
    for ij, positions in sorted(seen.items(), key=lambda t: deglex_index(Monomial(*t[0]))):
        vals = [mat[r][c] for r, c in positions]
        if any(v != vals[0] for v in vals):
            bad = [k for k, v in enumerate(vals) if v != vals[0]]
            r, c = positions[bad[0]]
            a, b = monos[r], monos[c]
            out.append(Violation("moment", ij, (a.degree, b.degree), a.j + b.j,
                                 tuple(positions), tuple(vals)))
    return out


@dataclass(frozen=True)
class RationalAtomicMeasure:
    atoms: tuple[tuple[Fraction, Fraction], ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        atoms = tuple((Fraction(x), Fraction(y)) for x, y in self.atoms)
        weights = tuple(Fraction(w) for w in self.weights)
        if len(atoms) != len(weights):
            raise ValueError("atoms and weights differ in length")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
        if len(set(atoms)) != len(atoms):
            raise ValueError("atoms must be pairwise distinct")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.atoms)


def moments_from_atoms(mu: RationalAtomicMeasure, up_to: int) -> MomentSequence:
    """Exact moments of an atomic measure through total degree ``up_to`` (even)."""
    if up_to % 2:
        raise ValueError("moment sequences have even total degree")
    values = {}
    for i, j in moment_indices(up_to):
        values[(i, j)] = sum((w * x**i * y**j for (x, y), w in zip(mu.atoms, mu.weights)), Fraction(0))
    return MomentSequence(up_to // 2, values)


def grid_measure(xs: Sequence, ys: Sequence, weights: Optional[Iterable] = None) -> RationalAtomicMeasure:
    """Measure on the product grid xs x ys, row-major in xs; uniform weight 1 by default."""
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    if len(set(xs)) != len(xs) or len(set(ys)) != len(ys):
        raise ValueError("grid nodes must be distinct")
    atoms = [(x, y) for x in xs for y in ys]
    ws = [Fraction(1)] * len(atoms) if weights is None else [Fraction(w) for w in weights]
    return RationalAtomicMeasure(tuple(atoms), tuple(ws))


def is_positive(M: MomentMatrix) -> bool:
    return psd_check(M.mat).psd


def leading_rank(M: MomentMatrix, k: int) -> int:
    n = count_up_to(k)
    return rank(submatrix(M.mat, range(n), range(n)))
