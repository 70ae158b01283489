"""Atomic representing measures read off a flat moment matrix.

Everything up to the multiplication matrices is exact; floating point is used
only for eigenvalues, weights and root finding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from .exactla import determinant, rref, solve_columns
from .monomials import Monomial, Poly, deglex_index
from .moment import MomentMatrix, MomentSequence
from .relations import DeterminacyProfile, is_flat

DEFAULT_TOL = 1e-9
# deterministic separating directions for t*Mx + s*My
SEPARATORS = (0.7548776662466927, 1.3247179572447460, -0.5698402909980532, 2.2055694304005903, -1.8392867552141612)
MAX_RESULTANT_DEGREE = 12


class NotFlat(ValueError):
    pass


class SpectrumUnresolved(RuntimeError):
    pass


class IllConditioned(RuntimeError):
    pass


def flat_basis(M: MomentMatrix) -> list[Monomial]:
    """Independent columns of M_{k-1}, which span Col M_k when M_k is flat."""
    if not is_flat(M):
        raise NotFlat(f"M_{M.degree} is not a flat extension of M_{M.degree - 1}")
    _, pivots = rref(M.leading(M.degree - 1))
    return [M.monomials[p] for p in pivots]


def exact_multiplication_matrices(M: MomentMatrix) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    basis = flat_basis(M)
    idx = [deglex_index(b) for b in basis]
    A = [[row[c] for c in idx] for row in M.mat]
    out = []
    for a, b in ((1, 0), (0, 1)):
        targets = [deglex_index(m.shift(a, b)) for m in basis]
        rhs = [[row[c] for c in targets] for row in M.mat]
        sols = solve_columns(A, rhs)
        if any(s is None for s in sols):
            raise NotFlat("shifted basis column outside the column space")
        out.append([[s[r] for s in sols] for r in range(len(basis))])
    return out[0], out[1]


def multiplication_matrices(M: MomentMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of multiplication by x and y on Col M_k, in the basis :func:`flat_basis`."""
    Mx, My = exact_multiplication_matrices(M)
    return np.array(Mx, dtype=float), np.array(My, dtype=float)


def _separated(values: np.ndarray, tol: float) -> bool:
    if len(values) < 2:
        return True
    scale = max(1.0, float(np.max(np.abs(values))))
    gaps = np.abs(values[:, None] - values[None, :])
    np.fill_diagonal(gaps, np.inf)
    return float(gaps.min()) > tol * scale


def extract_atoms(Mx: np.ndarray, My: np.ndarray, tol: float = DEFAULT_TOL,
                  separators: Sequence[float] = SEPARATORS) -> list[tuple[float, float]]:
    """Joint eigenvalues of commuting Mx, My, read off eigenvectors of Mx + s*My."""
    sep = max(tol, 1e-7)
    for s in separators:
        vals, vecs = np.linalg.eig(Mx + s * My)
        if not _separated(vals, sep):
            continue
        atoms = []
        for k in range(len(vals)):
            v = vecs[:, k]
            nv = np.vdot(v, v)
            x = np.vdot(v, Mx @ v) / nv
            y = np.vdot(v, My @ v) / nv
            atoms.append((float(x.real), float(y.real)))
        atoms.sort(key=_order)
        return _dedupe(atoms, tol)
    raise SpectrumUnresolved(f"no separating combination among {len(separators)} tried")


def _order(p: tuple) -> tuple[float, float]:
    # round so that round-off noise around zero does not reorder atoms
    return round(float(p[0]), 8), round(float(p[1]), 8)


def _dedupe(points: list[tuple[float, float]], tol: float) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for p in points:
        scale = max(1.0, abs(p[0]), abs(p[1]))
        if all(max(abs(p[0] - q[0]), abs(p[1] - q[1])) > tol * scale for q in out):
            out.append(p)
    return out


def _vandermonde(atoms: Sequence[tuple[float, float]], monos: list[tuple[int, int]]) -> np.ndarray:
    xs = np.array([a[0] for a in atoms])
    ys = np.array([a[1] for a in atoms])
    return np.array([xs**i * ys**j for i, j in monos])


def moment_residuals(atoms, weights, beta: MomentSequence) -> dict[tuple[int, int], float]:
    monos = sorted(beta.values, key=lambda ij: deglex_index(Monomial(*ij)))
    fitted = _vandermonde(atoms, monos) @ np.asarray(weights, dtype=float)
    return {ij: float(fitted[k] - float(beta[ij])) for k, ij in enumerate(monos)}


def solve_densities(atoms: Sequence[tuple[float, float]], beta: MomentSequence,
                    tol: Optional[float] = DEFAULT_TOL) -> tuple[np.ndarray, dict[tuple[int, int], float]]:
    """Least-squares weights over every moment of beta, with the residual of each moment.

    Rows and columns are equilibrated before solving: an atom far from the
    origin carries a tiny weight but large high-order moments.
    Raises :class:`IllConditioned` when the worst residual exceeds tol * max|beta|.
    """
    monos = sorted(beta.values, key=lambda ij: deglex_index(Monomial(*ij)))
    V = _vandermonde(atoms, monos)
    rhs = np.array([float(beta[ij]) for ij in monos])
    rows = np.maximum(np.abs(V).max(axis=1), 1.0)
    V = V / rows[:, None]
    cols = np.maximum(np.abs(V).max(axis=0), np.finfo(float).tiny)
    scaled, *_ = np.linalg.lstsq(V / cols, rhs / rows, rcond=None)
    weights = scaled / cols
    residuals = moment_residuals(atoms, weights, beta)
    if tol is not None:
        worst = max(abs(r) for r in residuals.values())
        if worst > tol * float(beta.max_abs()):
            raise IllConditioned(f"moment residual {worst:.3e} exceeds {tol:g} * max|beta|")
    return weights, residuals


@dataclass
class AtomicMeasure:
    atoms: list[tuple[float, float]]
    weights: list[float]
    residuals: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals.values()), default=0.0)

    def __len__(self) -> int:
        return len(self.atoms)


def measure_from_flat(M: MomentMatrix, beta: Optional[MomentSequence] = None,
                      tol: float = DEFAULT_TOL) -> AtomicMeasure:
    """Atoms of the flat M plus weights fitted to ``beta`` (default: the moments of M).

    Falls back to 50-digit arithmetic when double precision cannot fit the
    moments to tol * max|beta| (clustered atoms, weights spanning many decades).
    """
    beta = M.moments if beta is None else beta
    Mx, My = multiplication_matrices(M)
    atoms = extract_atoms(Mx, My, tol)
    weights, residuals = solve_densities(atoms, beta, None)
    if max(abs(r) for r in residuals.values()) > tol * float(beta.max_abs()):
        atoms, weights = _precise_measure(M, beta, tol)
        residuals = moment_residuals(atoms, weights, beta)
    return AtomicMeasure(atoms, [float(w) for w in weights], residuals)


def _mpf(q: Fraction) -> mpmath.mpf:
    return mpmath.mpf(q.numerator) / q.denominator


def _precise_measure(M: MomentMatrix, beta: MomentSequence, tol: float, dps: int = 50):
    exact = exact_multiplication_matrices(M)
    with mpmath.workdps(dps):
        Mx, My = (mpmath.matrix([[_mpf(v) for v in row] for row in A]) for A in exact)
        n = Mx.rows
        for s in SEPARATORS:
            vals, vecs = mpmath.eig(Mx + mpmath.mpf(s) * My)
            floats = np.array([complex(v) for v in vals])
            if _separated(floats, max(tol, 1e-7)):
                break
        else:
            raise SpectrumUnresolved(f"no separating combination among {len(SEPARATORS)} tried")
        X, Y = Mx * vecs, My * vecs
        atoms = []
        for k in range(n):
            nv = sum(abs(vecs[i, k]) ** 2 for i in range(n))
            x = sum(mpmath.conj(vecs[i, k]) * X[i, k] for i in range(n)) / nv
            y = sum(mpmath.conj(vecs[i, k]) * Y[i, k] for i in range(n)) / nv
            atoms.append((mpmath.re(x), mpmath.re(y)))
        atoms.sort(key=_order)
        monos = sorted(beta.values, key=lambda ij: deglex_index(Monomial(*ij)))
        V = mpmath.matrix([[x**i * y**j for x, y in atoms] for i, j in monos])
        rhs = mpmath.matrix([_mpf(beta[ij]) for ij in monos])
        w, _ = mpmath.qr_solve(V, rhs)
        return [(float(x), float(y)) for x, y in atoms], [float(v) for v in w]


def _poly_scale(f: Poly, x: float, y: float) -> float:
    return sum(abs(float(c)) * abs(x) ** m.i * abs(y) ** m.j for m, c in f.items())


@dataclass
class MeasureCheck:
    weights_positive: bool
    generator_residual: float
    generators_vanish: bool
    moment_residual: float
    moments_match: bool
    atom_count: int
    expected_atoms: Optional[int]
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_measure(mu: AtomicMeasure, beta: MomentSequence, prof: Optional[DeterminacyProfile] = None,
                   tol: float = DEFAULT_TOL, flat_rank: Optional[int] = None) -> MeasureCheck:
    failures = []
    # an atom counts as present when its largest moment contribution is visible at scale tol
    scale = float(beta.max_abs())
    monos = list(beta.values)
    reach = np.abs(_vandermonde(mu.atoms, monos)).max(axis=0) if mu.atoms else np.zeros(0)
    contrib = [w * r for w, r in zip(mu.weights, reach)]
    positive = all(c > tol * scale for c in contrib)
    if not positive:
        failures.append(f"atom contribution below {tol:g} * max|beta|: {min(contrib):.3e}")
    gen_res = 0.0
    if prof is not None:
        for f in prof.generators():
            for x, y in mu.atoms:
                gen_res = max(gen_res, abs(f.evaluate_float(x, y)) / max(1.0, _poly_scale(f, x, y)))
    gens_ok = gen_res <= max(tol, 1e-8)
    if not gens_ok:
        failures.append(f"generators do not vanish at the atoms (relative residual {gen_res:.3e})")
    residuals = moment_residuals(mu.atoms, mu.weights, beta)
    mom_res = max(abs(r) for r in residuals.values())
    moments_ok = mom_res <= tol * scale
    if not moments_ok:
        failures.append(f"moment residual {mom_res:.3e} exceeds {tol:g} * max|beta|")
    if flat_rank is not None and len(mu.atoms) != flat_rank:
        failures.append(f"{len(mu.atoms)} atoms but the flat matrix has rank {flat_rank}")
    return MeasureCheck(positive, gen_res, gens_ok, mom_res, moments_ok, len(mu.atoms), flat_rank, failures)


# -- the variety V = {x^n = p, y^m = q} ---------------------------------------------------------

def _x_coefficients(f: Poly, y0: Fraction) -> list[Fraction]:
    """Coefficients of f(x, y0) in x, constant term first."""
    deg = max((m.i for m in f.terms), default=0)
    out = [Fraction(0)] * (deg + 1)
    for m, c in f.items():
        out[m.i] += c * y0**m.j
    return out


def _sylvester(a: list, b: list) -> list[list]:
    """Sylvester matrix of two polynomials given by coefficient lists (constant first)."""
    m, n = len(a) - 1, len(b) - 1
    size = m + n
    rows = []
    for k in range(n):
        rows.append([Fraction(0)] * k + a[::-1] + [Fraction(0)] * (size - m - 1 - k))
    for k in range(m):
        rows.append([Fraction(0)] * k + b[::-1] + [Fraction(0)] * (size - n - 1 - k))
    return rows


def _interpolate(xs: list[Fraction], ys: list[Fraction]) -> list[Fraction]:
    """Newton interpolation, returned as monomial coefficients (constant first)."""
    n = len(xs)
    coef = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    out = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        # out = out * (x - xs[k]) + coef[k]
        shifted = [Fraction(0)] + out[:-1]
        out = [s - xs[k] * o for s, o in zip(shifted, out)]
        out[0] += coef[k]
    return out


def _trim(p: list[Fraction]) -> list[Fraction]:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _polydivmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a, b = _trim(a), _trim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    while len(r) >= len(b) and any(r):
        shift = len(r) - len(b)
        f = r[-1] / b[-1]
        q[shift] = f
        for k, c in enumerate(b):
            r[k + shift] -= f * c
        r = _trim(r[:-1]) if r[-1] == 0 else _trim(r)
        if len(r) == 1 and r[0] == 0:
            break
    return _trim(q), _trim(r)


def _polygcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a, b = _trim(a), _trim(b)
    while any(b):
        _, r = _polydivmod(a, b)
        a, b = b, r
    return [c / a[-1] for c in a]


def resultant_in_y(f: Poly, g: Poly) -> list[Fraction]:
    """Res_x(f, g) as a polynomial in y (constant first), computed exactly."""
    bound = max(f.degree, 1) * max(g.degree, 1)
    ys = [Fraction(k) for k in range(bound + 1)]
    vals = [determinant(_sylvester(_x_coefficients(f, y0), _x_coefficients(g, y0))) for y0 in ys]
    return _trim(_interpolate(ys, vals))


def _real_roots(coeffs: Sequence[float], tol: float = 1e-7) -> list[float]:
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs[::-1])
    return sorted(float(r.real) for r in roots if abs(r.imag) <= tol * (1 + abs(r)))


@dataclass
class Variety:
    generators: list[Poly]
    points: Optional[list[tuple[float, float]]] = None
    cardinality: Optional[int] = None


def variety(generators: Sequence[Poly], tol: float = DEFAULT_TOL) -> Variety:
    """Real common zeros of two generators, or an empty answer when the guard trips."""
    f, g = generators
    res = resultant_in_y(f, g)
    if not any(res) or len(res) - 1 > MAX_RESULTANT_DEGREE:
        return Variety(list(generators))
    square_free = res
    if len(res) > 2:
        deriv = [k * c for k, c in enumerate(res)][1:]
        common = _polygcd(res, deriv)
        square_free, _ = _polydivmod(res, common)
    check = max(tol, 1e-6)
    points: list[tuple[float, float]] = []
    for y0 in _real_roots([float(c) for c in square_free]):
        fx = [sum(float(c) * y0**m.j for m, c in f.items() if m.i == k) for k in range(f.degree + 1)]
        gx = [sum(float(c) * y0**m.j for m, c in g.items() if m.i == k) for k in range(g.degree + 1)]
        fscale = max(abs(c) for c in fx) if fx else 0.0
        gscale = max(abs(c) for c in gx) if gx else 0.0
        if fscale <= check and gscale <= check:
            return Variety(list(generators))  # a whole line of zeros
        base, other = (fx, g) if fscale > check else (gx, f)
        for x0 in _real_roots(base):
            if abs(other.evaluate_float(x0, y0)) <= check * max(1.0, _poly_scale(other, x0, y0)):
                points.append((x0, y0))
    points = _dedupe(sorted(points, key=_order), 1e-6)
    return Variety(list(generators), points, len(points))


def variety_cardinality(prof: DeterminacyProfile, tol: float = DEFAULT_TOL) -> Optional[int]:
    return variety(prof.generators(), tol).cardinality
