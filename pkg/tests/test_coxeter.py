import numpy as np
import pytest

from oracles import closure_order

from dpmod.coxeter import (NONCOMPACT_ROOT, coxeter_system, gram_consistency_check,
                           maximal_finite_candidates, pair_order_table, parabolic_subgroup)
from dpmod.isometry import INFINITE


def _power_order(m, cap=50):
    p = np.eye(len(m), dtype=np.int64)
    for k in range(1, cap + 1):
        p = p @ m
        if np.array_equal(p, np.eye(len(m), dtype=np.int64)):
            return k
    return INFINITE


@pytest.mark.parametrize("n", [2, 3])
def test_pair_orders_match_numpy_powers(n):
    c = coxeter_system(n)
    t = pair_order_table(c)
    mats = [np.array(r.canonical_matrix) for r in c.reflections]
    for i in range(len(mats)):
        for j in range(len(mats)):
            want = 1 if i == j else _power_order(mats[i] @ mats[j])
            assert t[i][j] == want
            assert t[i][j] == c.label(i, j)


def test_two_point_diagram():
    c = coxeter_system(2)
    assert c.root_names == ("H-E1-E2", "E1-E2", "E2")
    t = pair_order_table(c)
    assert (t[0][1], t[1][2], t[0][2]) == (2, 4, INFINITE)


@pytest.mark.parametrize("n", [2, 3])
def test_gram_consistency(n):
    rep = gram_consistency_check(coxeter_system(n))
    assert rep.passed and not rep.failures


def test_gram_consistency_catches_a_wrong_label():
    c = coxeter_system(3)
    labels = dict(c.labels)
    key = next(iter(sorted(labels)))
    labels[key] = 6 if labels[key] != 6 else 3
    rep = gram_consistency_check(c.with_labels(labels))
    assert not rep.passed


def test_parabolic_finiteness_n2():
    c = coxeter_system(2)
    assert not parabolic_subgroup(c, "E1-E2").finite
    p = parabolic_subgroup(c, "H-E1-E2")
    assert p.finite and p.order == 8
    p = parabolic_subgroup(c, "E2")
    assert p.finite and p.order == 4


def test_parabolic_orders_n3_against_numpy():
    c = coxeter_system(3)
    for root in c.root_names:
        p = parabolic_subgroup(c, root)
        if root == NONCOMPACT_ROOT:
            assert not p.finite
            continue
        assert p.order == closure_order([g.canonical_matrix for g in p.generators])
    assert {r: parabolic_subgroup(c, r).order for r in c.root_names if r != NONCOMPACT_ROOT} == \
        {"H-E1-E2-E3": 48, "E2-E3": 16, "E3": 12}


def test_maximal_candidates_skip_the_noncompact_root():
    names = [r for r, _ in maximal_finite_candidates(coxeter_system(3))]
    assert NONCOMPACT_ROOT not in names and len(names) == 3
    plain = sorted(g.order for _, g in maximal_finite_candidates(coxeter_system(2), include_minus_identity=False))
    assert plain == [4, 8]
