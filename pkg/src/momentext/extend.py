"""Construction of the unique RG extension M_{d+1} of a recursively determinate M_d.

The block B(d+1) only carries new moments of degree 2d+1 (in its bottom
block B[d, d+1]); C(d+1) = B[d+1, d+1] only carries new moments of degree
2d+2.  Both are filled the same way, by imposing column definitions derived
from X^n = p and Y^m = q:

1. left band  X^{n+f} Y^{d+1-n-f} := (x^f y^{d+1-n-f} p)(X, Y),
2. column X^{d+1-m} Y^m := (x^{d+1-m} q)(X, Y), row by row from the top,
   which completes the central band along cross-diagonals,
3. right band X^{d+1-m-g} Y^{m+g} := (x^{d+1-m-g} y^g q)(X, Y).

Each imposed entry fixes one moment.  An entry whose moment was already
fixed (an old moment, or a new one fixed earlier) is compared instead of
overwritten; disagreements are the negative certificates.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .exactla import Mat, PsdCertificate, RangeViolation, psd_check, range_factor, rank, schur_delta
from .monomials import Monomial, Poly, monomial_str, monomials_of_degree, monomials_up_to
from .moment import MomentMatrix, MomentSequence, build_moment_matrix
from .relations import (
    Classification,
    ColumnRelation,
    DeterminacyProfile,
    detect_rd,
    is_flat,
    is_recursively_generated,
    kernel_relations,
    normalized,
)

log = logging.getLogger(__name__)


class NotApplicable(ValueError):
    """M_d is not positive, not recursively generated, or not recursively determinate."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass(frozen=True)
class Rule:
    """A column definition col(target) := rhs(X, Y)."""

    target: Monomial
    rhs: Poly
    label: str


@dataclass(frozen=True)
class Conflict:
    """Two definitions of the same moment disagree.

    ``existing`` was fixed first (by ``existing_source``); ``value`` is what
    ``rule`` demands at (row, col).  ``discrepancy = existing - value``.
    """

    row: Monomial
    col: Monomial
    moment: tuple[int, int]
    existing: Fraction
    existing_source: str
    value: Fraction
    rule: str

    @property
    def discrepancy(self) -> Fraction:
        return self.existing - self.value

    def swapped(self) -> "Conflict":
        return Conflict(self.row.swapped(), self.col.swapped(), self.moment[::-1], self.existing,
                        self.existing_source, self.value, self.rule + " [swapped frame]")

    def describe(self) -> str:
        return (f"row {monomial_str(self.row, True)}, column {monomial_str(self.col, True)} "
                f"(beta_{self.moment[0]},{self.moment[1]}): {self.existing_source} gives {self.existing}, "
                f"{self.rule} gives {self.value}; discrepancy {self.discrepancy}")


class _Undefined(KeyError):
    pass


class _Stage:
    """Fills the new moments of total degree ``D`` from column definitions."""

    def __init__(self, known: dict[tuple[int, int], Fraction], D: int):
        self.known = known
        self.D = D
        self.new: dict[tuple[int, int], Fraction] = {}
        self.source: dict[tuple[int, int], str] = {}
        self.conflicts: list[Conflict] = []
        self._seen: set[tuple] = set()

    def value(self, key: tuple[int, int]) -> Fraction:
        if key[0] + key[1] < self.D:
            return self.known[key]
        try:
            return self.new[key]
        except KeyError:
            raise _Undefined(key) from None

    def evaluate(self, rule: Rule, row: Monomial) -> Fraction:
        return sum((c * self.value((u.i + row.i, u.j + row.j)) for u, c in rule.rhs.items()), Fraction(0))

    def impose(self, rule: Rule, row: Monomial) -> None:
        val = self.evaluate(rule, row)
        key = (rule.target.i + row.i, rule.target.j + row.j)
        if key[0] + key[1] < self.D:
            existing, src = self.known[key], "old moment"
        elif key in self.new:
            existing, src = self.new[key], self.source[key]
        else:
            self.new[key] = val
            self.source[key] = f"{rule.label} at row {monomial_str(row, True)}"
            return
        if existing != val:
            tag = (rule.label, row, rule.target)
            if tag not in self._seen:
                self._seen.add(tag)
                self.conflicts.append(Conflict(row, rule.target, key, existing, src, val, rule.label))

    def missing(self) -> list[tuple[int, int]]:
        return [(self.D - j, j) for j in range(self.D + 1) if (self.D - j, j) not in self.new]


def _label(shift: Monomial, name: str) -> str:
    s = monomial_str(shift)
    return name if s == "1" else f"({s}){name}"


def profile_rules(prof: DeterminacyProfile, d: int) -> tuple[list[Rule], Rule, list[Rule]]:
    """(left band, pivot column X^{d+1-m}Y^m, right band) definitions for degree d+1 columns."""
    n, m = prof.n, prof.m
    left = []
    for f in range(d + 2 - n):
        s = Monomial(f, d + 1 - n - f)
        left.append(Rule(Monomial(n + f, d + 1 - n - f), prof.p.shift(*s), _label(s, "p")))
    pivot_shift = Monomial(d + 1 - m, 0)
    pivot = Rule(Monomial(d + 1 - m, m), prof.q.shift(*pivot_shift), _label(pivot_shift, "q"))
    right = []
    for g in range(1, d + 2 - m):
        s = Monomial(d + 1 - m - g, g)
        right.append(Rule(Monomial(d + 1 - m - g, m + g), prof.q.shift(*s), _label(s, "q")))
    return left, pivot, right


def recursiveness_rules(relations: Sequence[ColumnRelation], d: int) -> list[Rule]:
    """Every kernel relation of M_d, shifted so that its target has degree d+1."""
    out = []
    for rel in relations:
        for s in monomials_of_degree(d + 1 - rel.degree):
            out.append(Rule(rel.target.shift(*s), rel.rhs.shift(*s), _label(s, f"[{rel}]")))
    return out


def _fill(stage: _Stage, rows: list[Monomial], prof: DeterminacyProfile, d: int,
          extra: Sequence[Rule] = ()) -> None:
    left, pivot, right = profile_rules(prof, d)
    for rule in left:
        for row in rows:
            stage.impose(rule, row)
    for rule in [pivot] + right:
        for row in rows:
            stage.impose(rule, row)
    missing = stage.missing()
    if missing:
        raise RuntimeError(f"moments {missing} of degree {stage.D} were never defined")
    for rule in left + [pivot] + right + list(extra):
        for row in rows:
            stage.impose(rule, row)


@dataclass(frozen=True)
class BlockB:
    """B(d+1) together with the degree-(2d+1) moments that define it."""

    mat: Mat
    moments: dict[tuple[int, int], Fraction]
    sources: dict[tuple[int, int], str]


@dataclass(frozen=True)
class BInconsistent:
    conflicts: tuple[Conflict, ...]
    kind = "BInconsistent"

    @property
    def certificate(self) -> Conflict:
        return self.conflicts[0]

    def describe(self) -> str:
        return "B block not well defined: " + self.certificate.describe()


@dataclass(frozen=True)
class RangeFailure:
    column: Monomial
    kind = "RangeFailure"

    def describe(self) -> str:
        return f"column {monomial_str(self.column, True)} of B is not in Ran M_d"


@dataclass(frozen=True)
class CInconsistent:
    conflicts: tuple[Conflict, ...]
    kind = "CInconsistent"

    @property
    def certificate(self) -> Conflict:
        return self.conflicts[0]

    def describe(self) -> str:
        return "C block not well defined: " + self.certificate.describe()


@dataclass(frozen=True)
class NotPsd:
    certificate: PsdCertificate
    labels: tuple[Monomial, ...]  # monomials indexing the Schur complement
    kind = "NotPsd"

    def describe(self) -> str:
        names = ", ".join(monomial_str(self.labels[i], True) for i in self.certificate.principal)
        return f"Schur complement not PSD ({self.certificate.kind}) on {{{names}}}"


@dataclass(frozen=True)
class NotRecursivelyGenerated:
    relation: ColumnRelation
    multiplier: Monomial
    kind = "NotRecursivelyGenerated"

    def describe(self) -> str:
        return f"relation {self.relation} fails after multiplying by {monomial_str(self.multiplier)}"


@dataclass(frozen=True)
class Extended:
    matrix: MomentMatrix
    flat: bool
    rank: int
    classification: Optional[Classification] = None
    kind = "Extended"

    def describe(self) -> str:
        return f"M_{self.matrix.degree} {'flat' if self.flat else 'positive, RG'} with rank {self.rank}"


ExtensionOutcome = Union[BInconsistent, RangeFailure, CInconsistent, NotPsd, NotRecursivelyGenerated, Extended]


def _known(beta: MomentSequence) -> dict[tuple[int, int], Fraction]:
    return dict(beta.values)


def build_B(M: MomentMatrix, prof: DeterminacyProfile,
            relations: Optional[Sequence[ColumnRelation]] = None) -> Union[BlockB, BInconsistent]:
    """B(d+1) for M_d in the normalized frame of ``prof``.

    ``relations`` (default: all kernel relations of M_d) are additionally
    imposed after shifting to degree d+1, which is what recursiveness of
    (M_d B) demands.
    """
    d = M.degree
    if relations is None:
        relations = kernel_relations(M)
    stage = _Stage(_known(M.moments), 2 * d + 1)
    rows = monomials_up_to(d)
    _fill(stage, rows, prof, d, recursiveness_rules(relations, d))
    if stage.conflicts:
        return BInconsistent(tuple(stage.conflicts))
    cols = monomials_of_degree(d + 1)
    mat = [[stage.value((r.i + c.i, r.j + c.j)) for c in cols] for r in rows]
    return BlockB(mat, dict(stage.new), dict(stage.source))


def check_range(M: MomentMatrix, B: Mat) -> Union[Mat, RangeFailure]:
    try:
        return range_factor(M.mat, B)
    except RangeViolation as exc:
        return RangeFailure(monomials_of_degree(M.degree + 1)[exc.column])


def build_C(M: MomentMatrix, block: BlockB, prof: DeterminacyProfile) -> Union[tuple[Mat, dict], CInconsistent]:
    """C(d+1) from the transposed relations in the rows of degree d+1."""
    d = M.degree
    known = _known(M.moments)
    known.update(block.moments)
    stage = _Stage(known, 2 * d + 2)
    rows = monomials_of_degree(d + 1)
    _fill(stage, rows, prof, d)
    if stage.conflicts:
        return CInconsistent(tuple(stage.conflicts))
    C = [[stage.value((r.i + c.i, r.j + c.j)) for c in rows] for r in rows]
    return C, dict(stage.new)


@dataclass(frozen=True)
class CandidateExtension:
    B: Mat
    C: Mat
    W: Mat
    delta: Mat
    psd: bool
    rank_next: int
    flat: bool
    rg: bool
    matrix: MomentMatrix
    psd_certificate: Optional[PsdCertificate] = None
    rg_violation: Optional[tuple[ColumnRelation, Monomial]] = None


def assemble(M: MomentMatrix, B: Mat, C: Mat, W: Mat, moments: MomentSequence) -> CandidateExtension:
    delta = schur_delta(M.mat, B, C, W)
    check = psd_check(delta)
    rank_delta = check.rank if check.psd else rank(delta)
    new_matrix = build_moment_matrix(moments)
    rg = is_recursively_generated(new_matrix) if check.psd else None
    return CandidateExtension(
        B=B, C=C, W=W, delta=delta, psd=check.psd,
        rank_next=rank(M.mat) + rank_delta, flat=rank_delta == 0,
        rg=bool(rg and rg.ok), matrix=new_matrix,
        psd_certificate=check.certificate,
        rg_violation=rg.violation if rg is not None else None,
    )


@dataclass(frozen=True)
class Preconditions:
    psd: bool
    rank: int
    rg: bool
    relations: tuple[ColumnRelation, ...]
    profile: Optional[DeterminacyProfile]
    rg_violation: Optional[tuple[ColumnRelation, Monomial]] = None

    @property
    def classification(self) -> Classification:
        return self.profile.classification if self.profile else Classification.NOT_RD


def analyze(M: MomentMatrix) -> Preconditions:
    check = psd_check(M.mat)
    relations = kernel_relations(M)
    rg = is_recursively_generated(M, relations)
    profile = detect_rd(M, relations)
    r = check.rank if check.psd else rank(M.mat)
    return Preconditions(check.psd, r, rg.ok, tuple(relations), profile, rg.violation)


def require_applicable(pre: Preconditions) -> DeterminacyProfile:
    if not pre.psd:
        raise NotApplicable("not_psd", "M_d is not positive semidefinite")
    if not pre.rg:
        rel, s = pre.rg_violation
        raise NotApplicable("not_rg", f"relation {rel} fails after multiplying by {monomial_str(s)}")
    if pre.profile is None:
        raise NotApplicable("not_rd", "no column relations X^n = p, Y^m = q")
    return pre.profile


def _swap_outcome(outcome: ExtensionOutcome) -> ExtensionOutcome:
    if isinstance(outcome, (BInconsistent, CInconsistent)):
        return type(outcome)(tuple(c.swapped() for c in outcome.conflicts))
    if isinstance(outcome, RangeFailure):
        return RangeFailure(outcome.column.swapped())
    if isinstance(outcome, NotPsd):
        return NotPsd(outcome.certificate, tuple(m.swapped() for m in outcome.labels))
    if isinstance(outcome, NotRecursivelyGenerated):
        return NotRecursivelyGenerated(outcome.relation.swapped(), outcome.multiplier.swapped())
    return outcome


def extend_normalized(M: MomentMatrix, prof: DeterminacyProfile) -> tuple[ExtensionOutcome, Optional[CandidateExtension]]:
    """One extension step in the normalized frame (no precondition checks)."""
    d = M.degree
    block = build_B(M, prof)
    if isinstance(block, BInconsistent):
        return block, None
    W = check_range(M, block.mat)
    if isinstance(W, RangeFailure):
        return W, None
    built = build_C(M, block, prof)
    if isinstance(built, CInconsistent):
        return built, None
    C, top = built
    values = dict(M.moments.values)
    values.update(block.moments)
    values.update(top)
    cand = assemble(M, block.mat, C, W, MomentSequence(d + 1, values))
    if not cand.psd:
        return NotPsd(cand.psd_certificate, tuple(monomials_of_degree(d + 1))), cand
    if not cand.rg:
        rel, s = cand.rg_violation
        return NotRecursivelyGenerated(rel, s), cand
    return Extended(cand.matrix, cand.flat, cand.rank_next), cand


def extend_step(M: MomentMatrix, pre: Optional[Preconditions] = None) -> ExtensionOutcome:
    """Build the unique RG extension of M, or the certificate that it does not exist."""
    if pre is None:
        pre = analyze(M)
    prof = require_applicable(pre)
    Mn = normalized(M, prof.roles_swapped)
    outcome, _ = extend_normalized(Mn, prof)
    if isinstance(outcome, Extended):
        mat = outcome.matrix
        if prof.roles_swapped:
            mat = build_moment_matrix(mat.moments.swapped())
        next_prof = detect_rd(mat)
        cls = next_prof.classification if next_prof else Classification.NOT_RD
        return Extended(mat, outcome.flat, outcome.rank, cls)
    return _swap_outcome(outcome) if prof.roles_swapped else outcome


class VerdictKind(str, enum.Enum):
    MEASURE_EXISTS = "measure_exists"
    NO_MEASURE = "no_measure"
    NOT_APPLICABLE = "not_applicable"
    BOUND_EXHAUSTED = "bound_exhausted"


@dataclass(frozen=True)
class ChainStep:
    degree: int
    outcome: ExtensionOutcome
    rank: Optional[int]
    classification: Optional[Classification]


@dataclass
class ChainReport:
    initial: MomentMatrix
    preconditions: Preconditions
    steps: list[ChainStep] = field(default_factory=list)
    verdict: VerdictKind = VerdictKind.NOT_APPLICABLE
    flat_degree: Optional[int] = None
    failed_degree: Optional[int] = None
    reason: Optional[str] = None
    band_bound: Optional[int] = None
    variety_bound: Optional[int] = None
    variety_cardinality: Optional[int] = None

    @property
    def flat_matrix(self) -> Optional[MomentMatrix]:
        if self.verdict is not VerdictKind.MEASURE_EXISTS:
            return None
        if not self.steps:
            return self.initial
        last = self.steps[-1].outcome
        return last.matrix if isinstance(last, Extended) else None


def run_chain(M: MomentMatrix, max_steps: Optional[int] = None, variety: bool = True) -> ChainReport:
    """Extend M_d until a flat extension appears or a step fails.

    Raises :class:`NotApplicable` when M_d is not positive, RG and RD.
    """
    pre = analyze(M)
    prof = require_applicable(pre)
    d = M.degree
    report = ChainReport(initial=M, preconditions=pre, band_bound=prof.band_bound(d))
    if variety:
        from .measure import variety_cardinality

        card = variety_cardinality(prof)
        if card is not None:
            report.variety_cardinality = card
            report.variety_bound = 1 + card - pre.rank
    if is_flat(M):
        report.verdict = VerdictKind.MEASURE_EXISTS
        report.flat_degree = d
        return report
    limit = min(prof.band_bound(d), d - 1) if max_steps is None else max_steps
    current, current_pre = M, pre
    for _ in range(max(limit, 0)):
        outcome = extend_step(current, current_pre)
        k = current.degree + 1
        if not isinstance(outcome, Extended):
            log.info("step to M_%d failed: %s", k, outcome.describe())
            report.steps.append(ChainStep(k, outcome, None, None))
            report.verdict = VerdictKind.NO_MEASURE
            report.failed_degree = k
            report.reason = outcome.kind
            return report
        log.info("M_%d: %s", k, outcome.describe())
        report.steps.append(ChainStep(k, outcome, outcome.rank, outcome.classification))
        if outcome.flat:
            report.verdict = VerdictKind.MEASURE_EXISTS
            report.flat_degree = k
            return report
        current = outcome.matrix
        current_pre = analyze(current)
    report.verdict = VerdictKind.BOUND_EXHAUSTED
    log.warning("no flat extension within %d steps", limit)
    return report
