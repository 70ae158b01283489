"""Exact rational linear algebra.

Matrices are plain ``list[list[Fraction]]`` (row-major). Nothing here ever
touches floating point: every PSD/rank verdict downstream is decided on
these routines.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

Mat = list[list[Fraction]]


class RangeViolation(ValueError):
    """A column of B does not lie in the range of M."""

    def __init__(self, column: int):
        super().__init__(f"column {column} is not in the range of M")
        self.column = column


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("floats are not accepted by exact routines")
    return Fraction(value)


def as_matrix(rows: Sequence[Sequence]) -> Mat:
    return [[to_fraction(v) for v in row] for row in rows]


def zeros(rows: int, cols: int) -> Mat:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Mat:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def transpose(A: Mat) -> Mat:
    return [list(col) for col in zip(*A)] if A else []


def matmul(A: Mat, B: Mat) -> Mat:
    if not A:
        return []
    Bt = transpose(B)
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def matvec(A: Mat, x: Sequence[Fraction]) -> list[Fraction]:
    return [sum((a * b for a, b in zip(row, x)), Fraction(0)) for row in A]


def submatrix(A: Mat, rows: Sequence[int], cols: Sequence[int]) -> Mat:
    return [[A[i][j] for j in cols] for i in rows]


def is_symmetric(A: Mat) -> bool:
    n = len(A)
    return all(A[i][j] == A[j][i] for i in range(n) for j in range(i + 1, n))


def _integer_rows(A: Mat) -> list[list[int]]:
    out = []
    for row in A:
        scale = lcm(*(v.denominator for v in row)) if row else 1
        out.append([int(v * scale) for v in row])
    return out


def rank(A: Mat) -> int:
    """Rank via fraction-free (Bareiss) elimination on a row-scaled integer copy."""
    if not A or not A[0]:
        return 0
    M = _integer_rows(A)
    nrows, ncols = len(M), len(M[0])
    r = 0
    prev = 1
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, nrows):
            a = M[i][c]
            row_i, row_r = M[i], M[r]
            for j in range(c + 1, ncols):
                row_i[j] = (p * row_i[j] - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def determinant(A: Mat) -> Fraction:
    """Fraction-free (Bareiss) determinant."""
    n = len(A)
    if n == 0:
        return Fraction(1)
    denom = 1
    M = []
    for row in A:
        s = lcm(*(v.denominator for v in row))
        denom *= s
        M.append([int(v * s) for v in row])
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return Fraction(sign * M[n - 1][n - 1], denom)


def rref(A: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form and the pivot column indices."""
    R = [list(row) for row in A]
    if not R:
        return R, []
    nrows, ncols = len(R), len(R[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if R[i][c] != 0), None)
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = 1 / R[r][c]
        R[r] = [v * inv for v in R[r]]
        for i in range(nrows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
    return R, pivots


def solve_columns(A: Mat, B: Mat) -> list[Optional[list[Fraction]]]:
    """Solve ``A x = b`` for every column ``b`` of ``B`` with a single elimination.

    Consistent columns get the solution that vanishes on the non-pivot
    columns of ``A``; inconsistent ones get ``None``.
    """
    nrows = len(A)
    ncols = len(A[0]) if A else 0
    nrhs = len(B[0]) if B else 0
    aug = [list(A[i]) + list(B[i]) for i in range(nrows)]
    R, pivots = rref(aug) if aug else ([], [])
    a_pivots = [p for p in pivots if p < ncols]
    out: list[Optional[list[Fraction]]] = []
    for k in range(nrhs):
        col = ncols + k
        # any nonzero right-hand side below the A-pivot rows means b is not in Ran A
        if any(R[i][col] != 0 for i in range(len(a_pivots), nrows)):
            out.append(None)
            continue
        x = [Fraction(0)] * ncols
        for row_idx, p in enumerate(a_pivots):
            x[p] = R[row_idx][col]
        out.append(x)
    return out


def solve_consistent(A: Mat, b: Sequence) -> Optional[list[Fraction]]:
    """Some ``x`` with ``A x = b`` (zero on free columns), or ``None`` if b is not in Ran A."""
    return solve_columns(A, [[to_fraction(v)] for v in b])[0]


def nullspace(A: Mat) -> list[list[Fraction]]:
    """A basis of ker A, one vector per free column."""
    if not A:
        return []
    ncols = len(A[0])
    R, pivots = rref(A)
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for row_idx, p in enumerate(pivots):
            v[p] = -R[row_idx][free]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class PsdCertificate:
    """Witness that a symmetric matrix is not PSD.

    ``kind`` is ``"negative_diagonal"`` (``pair = (i, i)``) or
    ``"zero_diagonal"`` (zero pivot with nonzero entry at ``pair``).
    ``principal`` indexes a principal submatrix with negative determinant.
    """

    kind: str
    pair: tuple[int, int]
    principal: tuple[int, ...]


@dataclass(frozen=True)
class PsdResult:
    psd: bool
    rank: int
    certificate: Optional[PsdCertificate] = None


def psd_check(A: Mat) -> PsdResult:
    n = len(A)
    S = [list(row) for row in A]
    active = list(range(n))
    pivots: list[int] = []
    while active:
        for i in active:
            if S[i][i] < 0:
                cert = PsdCertificate("negative_diagonal", (i, i), tuple(sorted(pivots + [i])))
                return PsdResult(False, len(pivots), cert)
            if S[i][i] == 0:
                j = next((j for j in active if S[i][j] != 0), None)
                if j is not None:
                    pair = (min(i, j), max(i, j))
                    cert = PsdCertificate("zero_diagonal", pair, tuple(sorted(pivots + [i, j])))
                    return PsdResult(False, len(pivots), cert)
        k = next((i for i in active if S[i][i] > 0), None)
        if k is None:
            break
        active.remove(k)
        pivots.append(k)
        inv = 1 / S[k][k]
        row_k = S[k]
        for i in active:
            f = S[i][k] * inv
            if f:
                row_i = S[i]
                for j in active:
                    row_i[j] -= f * row_k[j]
    return PsdResult(True, len(pivots))


def schur_delta(M: Mat, B: Mat, C: Mat, W: Optional[Mat] = None) -> Mat:
    """``C - W^T M W`` where ``M W = B``.

    Raises :class:`RangeViolation` if some column of ``B`` is outside Ran M.
    """
    if W is None:
        W = range_factor(M, B)
    WtB = matmul(transpose(W), B) if W and W[0] else zeros(len(C), len(C))
    return [[C[i][j] - WtB[i][j] for j in range(len(C))] for i in range(len(C))]


def range_factor(M: Mat, B: Mat) -> Mat:
    """Deterministic ``W`` with ``M W = B``; raises RangeViolation on failure."""
    if not B or not B[0]:
        return [[] for _ in range(len(M[0]) if M else 0)]
    cols = solve_columns(M, B)
    for k, x in enumerate(cols):
        if x is None:
            raise RangeViolation(k)
    return transpose(cols)  # type: ignore[arg-type]
