import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from momentext.exactla import PsdCertificate, nullspace, psd_check, schur_delta
from momentext.extend import (
    BInconsistent,
    BlockB,
    Extended,
    NotApplicable,
    NotPsd,
    RangeFailure,
    VerdictKind,
    analyze,
    build_B,
    build_C,
    check_range,
    extend_normalized,
    extend_step,
    run_chain,
)
from momentext.fixtures import (
    cubic_curve,
    extra_relation,
    second_stage,
    second_stage_bgtest,
    second_stage_eta,
)
from momentext.monomials import Monomial, monomials_of_degree
from momentext.moment import (
    MomentSequence,
    RationalAtomicMeasure,
    build_moment_matrix,
    grid_measure,
    moments_from_atoms,
)
from momentext.relations import Classification, detect_rd
from oracles import atomic_moment, sympy_rank

Q = F(1, 4)


def chain_matrices(report):
    return [s.outcome.matrix for s in report.steps if isinstance(s.outcome, Extended)]


def test_cubic_curve_B4_follows_relation():
    M = build_moment_matrix(cubic_curve(1430))
    block = build_B(M, detect_rd(M))
    assert isinstance(block, BlockB)
    col = {m: [row[k] for row in block.mat] for k, m in enumerate(monomials_of_degree(4))}
    # X^3 = Y shifted by x and by y
    assert col[Monomial(4, 0)] == M.column(Monomial(1, 1))
    assert col[Monomial(3, 1)] == M.column(Monomial(0, 2))
    assert all(v == 0 for (i, j), v in block.moments.items() if (i + 3 * j) % 2 == 1)


def test_extra_relation_certificate():
    M = build_moment_matrix(extra_relation(300))
    out = build_B(M, detect_rd(M))
    assert isinstance(out, BInconsistent)
    c = out.certificate
    assert c.row == Monomial(1, 2) and c.col == Monomial(3, 1) and c.moment == (4, 3)
    assert (c.existing, c.value, c.discrepancy) == (F(-43077, 13), F(-44315, 13), F(1238, 13))
    assert c.existing_source.startswith("(y)p") and c.rule.startswith("(x)[X^2Y")


@settings(max_examples=10, deadline=None)
@given(st.fractions(min_value=250, max_value=350, max_denominator=13))
def test_extra_relation_discrepancy_formula(r):
    M = build_moment_matrix(extra_relation(r))
    out = build_B(M, detect_rd(M))
    expected = (169 * r - 49462) / 13
    if expected == 0:
        assert isinstance(out, BlockB)
    else:
        assert isinstance(out, BInconsistent)
        assert out.certificate.discrepancy == expected


def test_extra_relation_critical_value_is_consistent():
    r = F(49462, 169)
    report = run_chain(build_moment_matrix(extra_relation(r)))
    assert report.verdict is VerdictKind.MEASURE_EXISTS
    assert report.flat_degree == 4 and report.steps[0].rank == 7


def test_point_mass_flat_immediately():
    beta = moments_from_atoms(RationalAtomicMeasure(((2, 3),), (1,)), 2)
    report = run_chain(build_moment_matrix(beta))
    assert report.verdict is VerdictKind.MEASURE_EXISTS and report.flat_degree == 1 and not report.steps


def test_range_failure_on_corrupted_B():
    M = build_moment_matrix(cubic_curve(1430))
    block = build_B(M, detect_rd(M))
    kernel = nullspace(M.mat)[0]
    B = [row[:] for row in block.mat]
    for i, v in enumerate(kernel):
        B[i][2] += v
    out = check_range(M, B)
    assert isinstance(out, RangeFailure) and out.column == monomials_of_degree(4)[2]
    assert isinstance(check_range(M, block.mat), list)


def second_stage_C4(a, b, g, h):
    return [
        [13 + a * a + b * b, a * b, 5, 0, 4],
        [a * b, 5, 0, 4, 0],
        [5, 0, 4, 0, 5],
        [0, 4, 0, 5, g * h],
        [4, 0, 5, g * h, 13 + g * g + h * h],
    ]


@pytest.mark.parametrize("a,b,g,h", [(60, Q, Q, 0), (F(5, 2), F(-1, 3), F(1, 7), 3)])
def test_build_C_reproduces_golden_block(a, b, g, h):
    a, b, g, h = (F(v) for v in (a, b, g, h))
    beta = second_stage(a, b, g, h)
    M3 = build_moment_matrix(beta, 3)
    prof = detect_rd(build_moment_matrix(beta))
    deg7 = {(7 - j, j): beta[(7 - j, j)] for j in range(8)}
    B = [row[10:] for row in build_moment_matrix(beta).mat[:10]]
    C, top = build_C(M3, BlockB(B, deg7, {}), prof)
    assert C == second_stage_C4(a, b, g, h)
    assert all(top[k] == beta[k] for k in top)


@settings(max_examples=8, deadline=None)
@given(st.fractions(min_value=-F(7, 8), max_value=F(7, 8), max_denominator=8),
       st.fractions(min_value=-F(7, 8), max_value=F(7, 8), max_denominator=8),
       st.fractions(min_value=-50, max_value=50, max_denominator=3))
def test_delta4_compression(b, g, a):
    M = build_moment_matrix(second_stage(a, b, g, 0))
    M3 = M.leading(3)
    B = [row[10:] for row in M.mat[:10]]
    C = [row[10:] for row in M.mat[10:]]
    delta = schur_delta(M3, B, C)
    comp = [[delta[i][j] for j in (1, 2, 3)] for i in (1, 2, 3)]
    assert comp == [[1 - b * b, 0, 0], [0, 1, 0], [0, 0, 1 - g * g]]


@settings(max_examples=6, deadline=None)
@given(st.fractions(min_value=-F(2, 3), max_value=F(2, 3), max_denominator=6),
       st.fractions(min_value=-F(2, 3), max_value=F(2, 3), max_denominator=6),
       st.fractions(min_value=-80, max_value=80, max_denominator=2),
       st.fractions(min_value=-5, max_value=5, max_denominator=2))
def test_delta5_closed_form(b, g, a, h):
    M = build_moment_matrix(second_stage(a, b, g, h))
    _, cand = extend_normalized(M, detect_rd(M))
    expected = [[F(0)] * 6 for _ in range(6)]
    expected[2][2] = (2 * b * b - 1) / (b * b - 1)
    expected[3][3] = (2 * g * g - 1) / (g * g - 1)
    expected[2][3] = expected[3][2] = b * g
    assert cand.delta == expected


def step_to_six(a, h):
    M = build_moment_matrix(second_stage(a, Q, Q, h))
    out = extend_step(M)
    assert isinstance(out, Extended) and out.rank == 15
    M5 = out.matrix
    return M5, extend_normalized(M5, detect_rd(M5))


@settings(max_examples=4, deadline=None)
@given(st.fractions(min_value=40, max_value=70, max_denominator=2),
       st.fractions(min_value=-2, max_value=2, max_denominator=2))
def test_delta6_sign_test(a, h):
    _, (outcome, cand) = step_to_six(a, h)
    eta = second_stage_eta(a, Q, Q, h)
    assert cand.delta[3][3] == -eta / second_stage_bgtest(Q, Q)
    assert isinstance(outcome, NotPsd) == (eta > 0)


def test_second_stage_fails_at_six():
    report = run_chain(build_moment_matrix(second_stage(60, Q, Q, 0)))
    assert report.verdict is VerdictKind.NO_MEASURE and report.failed_degree == 6
    assert report.steps[0].rank == 15
    out = report.steps[-1].outcome
    assert isinstance(out, NotPsd)
    assert out.certificate.kind == "negative_diagonal"
    assert [out.labels[i] for i in out.certificate.principal] == [Monomial(3, 3)]


def test_second_stage_measure_branch():
    report = run_chain(build_moment_matrix(second_stage(50, Q, Q, 0)))
    assert report.verdict is VerdictKind.MEASURE_EXISTS and report.flat_degree == 7
    assert [s.rank for s in report.steps] == [15, 16, 16]
    critical = run_chain(build_moment_matrix(second_stage(F(836, 15), Q, Q, 0)))
    assert critical.verdict is VerdictKind.MEASURE_EXISTS and critical.flat_degree == 6


@pytest.mark.parametrize("c,verdict,degree,card", [(1428, "no_measure", 4, 7), (1429, "measure_exists", 4, 9),
                                                    (1430, "measure_exists", 5, 9)])
def test_cubic_curve_chain(c, verdict, degree, card):
    report = run_chain(build_moment_matrix(cubic_curve(c)))
    assert report.verdict.value == verdict
    assert (report.flat_degree or report.failed_degree) == degree
    assert report.variety_cardinality == card and report.band_bound == 2
    if c == 1430:
        assert report.steps[0].rank == 9 and report.steps[0].classification is Classification.RD_EXT


def test_bound_exhausted():
    report = run_chain(build_moment_matrix(cubic_curve(1430)), max_steps=1)
    assert report.verdict is VerdictKind.BOUND_EXHAUSTED and len(report.steps) == 1


def test_not_applicable():
    values = dict(cubic_curve(1430).truncated(1).values)
    values[(2, 0)] = F(-1)
    with pytest.raises(NotApplicable) as exc:
        run_chain(build_moment_matrix(MomentSequence(1, values)))
    assert exc.value.reason == "not_psd"

    line = dict(moments_from_atoms(RationalAtomicMeasure(((1, 0), (1, 1), (1, 2)), (1, 1, 1)), 4).values)
    line[(4, 0)] += 1
    with pytest.raises(NotApplicable) as exc:
        extend_step(build_moment_matrix(MomentSequence(2, line)))
    assert exc.value.reason == "not_rg"

    pts = ((0, 0), (1, 0), (0, 1), (2, 3), (-1, 2), (3, 5))
    generic = moments_from_atoms(RationalAtomicMeasure(pts, (1, 2, 3, 1, 1, 1)), 4)
    with pytest.raises(NotApplicable) as exc:
        run_chain(build_moment_matrix(generic))
    assert exc.value.reason == "not_rd"


def test_swapped_orientation_extends_in_original_frame():
    pts = ((2, 0), (-2, 0), (4, 1), (-1, 1))
    mu = RationalAtomicMeasure(pts, (1, 2, 1, 3))
    M = build_moment_matrix(moments_from_atoms(mu, 4))
    assert analyze(M).profile.roles_swapped
    report = run_chain(M)
    assert report.verdict is VerdictKind.MEASURE_EXISTS
    for Mk in chain_matrices(report):
        for (i, j), v in Mk.moments.values.items():
            assert v == atomic_moment(pts, mu.weights, i, j)


def random_grid(rng, k):
    xs = rng.sample(range(-6, 7), k)
    ys = rng.sample(range(-6, 7), k)
    ws = [F(rng.randint(1, 9), rng.randint(1, 4)) for _ in range(k * k)]
    return grid_measure(xs, ys, ws)


@pytest.mark.parametrize("seed", range(6))
def test_extension_matches_measure_oracle(seed):
    rng = random.Random(seed)
    k = 2 + seed % 2
    mu = random_grid(rng, k)
    M = build_moment_matrix(moments_from_atoms(mu, 2 * k))
    report = run_chain(M)
    assert report.verdict is VerdictKind.MEASURE_EXISTS and report.flat_degree == 2 * k - 1
    for Mk in chain_matrices(report):
        for (i, j), v in Mk.moments.values.items():
            assert v == atomic_moment(mu.atoms, mu.weights, i, j)
        assert Mk.rank() == sympy_rank(Mk.mat) <= k * k


@settings(max_examples=5, deadline=None)
@given(st.fractions(min_value=F(1, 9), max_value=30, max_denominator=9))
def test_chain_scale_invariant(s):
    beta = cubic_curve(1430)
    base = run_chain(build_moment_matrix(beta), variety=False)
    scaled = run_chain(build_moment_matrix(beta.scaled(s)), variety=False)
    assert scaled.verdict == base.verdict and scaled.flat_degree == base.flat_degree
    assert [st_.rank for st_ in scaled.steps] == [st_.rank for st_ in base.steps]


@pytest.mark.parametrize("beta", [cubic_curve(1430), second_stage(50, Q, Q, 0)])
def test_extensions_are_conservative_and_rg(beta):
    M = build_moment_matrix(beta)
    prev = M
    for Mk in chain_matrices(run_chain(M, variety=False)):
        d = prev.degree
        assert Mk.leading(d) == prev.mat
        assert psd_check(Mk.mat).psd
        assert analyze(Mk).rg
        prev = Mk


def test_flat_input_has_no_steps():
    M = build_moment_matrix(moments_from_atoms(grid_measure([0, 1], [0, 1]), 6))
    report = run_chain(M)
    assert report.verdict is VerdictKind.MEASURE_EXISTS and report.flat_degree == 3 and not report.steps
