import pytest

from oracles import block_involution, seeded, sturm_inertia

from dpmod.equivariant import (POINT, EquivariantError, FixedSetProfile, complete_caps, decompose_involution,
                               empty_fixed_set_possible, enumerate_profiles, is_involution, nonzero_class_rule,
                               parse_component)
from dpmod.isometry import Isometry
from dpmod.lattice import eigenlattice, m_n, m_star, sublattice_gram
from dpmod.signature_defect import defect_budget, parity_prune, quotient_signature
from dpmod.textdata import evaluate_expression


def _el(n, expr):
    L = m_n(n)
    return L, evaluate_expression(L, expr, {})


def test_small_decompositions():
    L, A = _el(2, "Ref(E1-E2)")
    assert str(decompose_involution(L, A)) == "(t, c, r) = (1, 0, 1)"
    L0 = m_n(0)
    assert (decompose_involution(L0, Isometry.minus_identity(L0)).c) == 1
    S = m_star()
    d = decompose_involution(S, Isometry.minus_identity(S))
    assert (d.t, d.c, d.r) == (0, 2, 0)
    swap = Isometry.from_matrix(S, [[0, 1], [1, 0]])
    d = decompose_involution(S, swap)
    assert (d.t, d.c, d.r) == (0, 0, 1)


def test_bare_matrices_and_non_involutions():
    assert decompose_involution(None, [[0, 1], [1, 0]]).r == 1
    assert not is_involution([[1, 1], [0, 1]])
    with pytest.raises(EquivariantError):
        decompose_involution(None, [[1, 1], [0, 1]])


def test_block_built_involutions_small_sample():
    rng = seeded(2)
    for t, c, r in [(0, 0, 3), (2, 2, 1), (1, 3, 1), (6, 0, 0), (0, 6, 0)]:
        d = decompose_involution(None, block_involution(rng, t, c, r))
        assert (d.t, d.c, d.r) == (t, c, r)


def test_profile_parsing_and_printing():
    p = FixedSetProfile.parse("[#3RP2, pt]")
    assert str(p) == "[#3RP2, pt]"
    assert FixedSetProfile.parse("[pt, S2]") == FixedSetProfile.parse("[S2, pt]")
    assert str(FixedSetProfile.parse("[T2, K]")) in ("[T2, K]", "[K, T2]")
    assert parse_component("pt") == POINT
    with pytest.raises(EquivariantError):
        FixedSetProfile.parse("[]")


def test_every_enumerated_profile_satisfies_the_betti_equations():
    for n in range(0, 6):
        L = m_n(n)
        for k in range(0, n + 1):
            expr = " ".join(["Ref(H)"] + [f"Ref(E{i})" for i in range(1, k + 1)])
            m = evaluate_expression(L, expr, {})
            d = decompose_involution(L, m)
            mc, mx = complete_caps(d)
            for p in enumerate_profiles(d, mc, mx):
                assert p.satisfies(d)
                assert p.betti_even == d.t + 2 and p.betti_one == d.c


def test_caps_limit_the_search():
    L, A = _el(2, "Ref(E1-E2)")
    d = decompose_involution(L, A)
    assert [str(p) for p in enumerate_profiles(d, 4, 4)] == ["[S2, pt]", "[pt, pt, pt]"]
    assert [str(p) for p in enumerate_profiles(d, 2, 4)] == ["[S2, pt]"]
    with pytest.raises(EquivariantError):
        enumerate_profiles(d, 0, 1)


def test_three_point_blowup_profile_list():
    L, c = _el(3, "Ref(H) Ref(E1) Ref(E2)")
    d = decompose_involution(L, c)
    mc, mx = complete_caps(d)
    assert [str(p) for p in enumerate_profiles(d, mc, mx)] == ["[#3RP2, pt]"]


def test_empty_fixed_set_uses_lefschetz_number():
    L, c = _el(3, "Ref(H) Ref(E1) Ref(E2)")
    d = decompose_involution(L, c)
    assert d.lefschetz == 0 and empty_fixed_set_possible(d)
    L, A = _el(2, "Ref(E1-E2)")
    assert not empty_fixed_set_possible(decompose_involution(L, A))


def test_nonzero_class_rule():
    assert nonzero_class_rule(FixedSetProfile.parse("[S2, pt]"), 0)
    assert not nonzero_class_rule(FixedSetProfile.parse("[T2]"), 0)
    with pytest.raises(EquivariantError):
        nonzero_class_rule(FixedSetProfile.parse("[RP2, pt]"), 0)


def test_budgets_for_the_swap_and_its_twisted_partner():
    L, A = _el(2, "Ref(E1-E2)")
    B = evaluate_expression(L, "Ref(H-E1-E2)", {})
    b = defect_budget(L, A)
    assert (b.sigma_M, b.sigma_quotient, b.budget) == (-1, 0, 1)
    b2 = defect_budget(L, -(A * B))
    assert (b2.sigma_quotient, b2.budget) == (-2, -3)


def test_quotient_signature_against_sturm():
    for n in range(1, 6):
        L = m_n(n)
        for expr in ("Ref(E1)", "Ref(H)", "-I", "Ref(H) Ref(E1)"):
            m = evaluate_expression(L, expr, {})
            p, q, z = sturm_inertia(sublattice_gram(eigenlattice(L, m, 1)))
            assert quotient_signature(L, m) == p - q


def test_parity_pruning():
    L, A = _el(2, "Ref(E1-E2)")
    b = defect_budget(L, A)
    assert parity_prune(b, FixedSetProfile.parse("[S2, pt]"))
    assert not parity_prune(b, FixedSetProfile.parse("[pt, pt, pt]"))
    assert parity_prune(b, FixedSetProfile.parse("[RP2, pt]"))
