import pytest

from dpmod.isometry import Isometry, MatrixGroup, close_group, conjugate
from dpmod.lattice import m_n
from dpmod.obstruction import (BIHOLOMORPHIC, branch_search, centralizer_witnesses, classify_finite_subgroup,
                               make_hypothesis, order2_profile_report)
from dpmod.textdata import evaluate_expression
from dpmod.verdict import CONSISTENT, OBSTRUCTED, REALIZED, UNDETERMINED, ObstructionError, Verdict

L2 = m_n(2)
A = evaluate_expression(L2, "Ref(E1-E2)", {})
B = evaluate_expression(L2, "Ref(H-E1-E2)", {})
MINUS = Isometry.minus_identity(L2)


def group(*gens):
    return close_group(MatrixGroup.generated_by(L2, gens))


def test_hypothesis_validation():
    g = group(A, B)
    with pytest.raises(ObstructionError):
        make_hypothesis(g, Isometry.identity(L2))
    with pytest.raises(ObstructionError):
        make_hypothesis(g, MINUS)
    with pytest.raises(ObstructionError):
        make_hypothesis(group(A, MINUS), A, [B])


def test_centralizer_witnesses_generate_modulo_the_focus():
    g = group(A, B, MINUS)
    w = centralizer_witnesses(g, A)
    span = close_group(MatrixGroup.generated_by(L2, (A,) + w))
    assert span.order == 8 and len(w) == 2


@pytest.mark.parametrize("gens,expected", [((A, B), OBSTRUCTED), ((A, -B), OBSTRUCTED), ((-(A * B), -A), OBSTRUCTED)])
def test_lattice_only_obstructions(gens, expected):
    v = classify_finite_subgroup(group(*gens), 2, catalog=(), certificates=())
    assert v.status == expected
    assert any("closed" in t for t in v.trace)


@pytest.mark.parametrize("gens", [(A, MINUS), (B, -B), (A * B, MINUS), (A * B, -B)])
def test_realizable_groups_are_not_obstructed_without_the_catalog(gens):
    v = classify_finite_subgroup(group(*gens), 2, catalog=(), certificates=())
    assert v.status in (CONSISTENT, UNDETERMINED)
    v = classify_finite_subgroup(group(*gens), 2)
    assert v.status == REALIZED and v.entry


def test_group_outside_the_candidates_is_undetermined():
    # conjugating by an infinite-order isometry moves the group away from the standard candidates
    t = evaluate_expression(L2, "Ref(H-E1-E2) Ref(E2)", {})
    g = close_group(conjugate(group(A, MINUS), t))
    v = classify_finite_subgroup(g, 2, catalog=(), certificates=())
    assert v.status == UNDETERMINED
    assert "conjugacy" in v.trace[-1]


def test_identity_group_is_consistent():
    v = classify_finite_subgroup(group(Isometry.identity(L2)), 2, catalog=(), certificates=())
    assert v.status == CONSISTENT


def test_branch_search_is_thread_independent():
    h = make_hypothesis(group(A, B, MINUS), A)
    one = branch_search(h, threads=1)
    four = branch_search(h, threads=4)
    assert one == four


def test_profile_report_needs_an_involution():
    with pytest.raises(ObstructionError):
        order2_profile_report(L2, Isometry.identity(L2))
    r = order2_profile_report(L2, A)
    assert not r.flags[BIHOLOMORPHIC]["infeasible"]


def test_verdict_rejects_unknown_status():
    with pytest.raises(ObstructionError):
        Verdict("Maybe")
