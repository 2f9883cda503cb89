import math

import pytest

from oracles import box_values

from dpmod import diophantine as dio
from dpmod.lattice import Sublattice, custom_lattice, m_n


def test_negative_definite_rank_one_is_closed_by_the_bound():
    v = dio.solve_form([[-2]], -3)
    assert v.status == dio.UNSOLVABLE and v.reason == dio.DEFINITE


def test_pell_form_gives_the_trivial_witness():
    v = dio.solve_form([[1, 0], [0, -2]], 1)
    assert v.status == dio.SOLVABLE and v.coeffs == (1, 0)


def test_binary_isotropy_is_decided_by_the_discriminant():
    v = dio.solve_form([[1, 0], [0, -2]], 0)
    assert v.status == dio.UNSOLVABLE and v.reason == dio.DESCENT
    v = dio.solve_form([[1, 0], [0, -4]], 0)
    assert v.status == dio.SOLVABLE and v.coeffs[0] ** 2 == 4 * v.coeffs[1] ** 2 and any(v.coeffs)


def test_square_discriminant_uses_divisors():
    # -4x^2 - 10xy = -2x(2x + 5y) = 10 has no integer solution, and no small modulus sees it
    v = dio.solve_form([[-4, -5], [-5, 0]], 10)
    assert v.status == dio.UNSOLVABLE and v.reason == dio.DIVISORS
    assert not any(-2 * x * (2 * x + 5 * y) == 10 for x in range(-20, 21) for y in range(-20, 21))
    v = dio.solve_form([[0, 1], [1, 0]], 7)
    assert v.status == dio.UNSOLVABLE  # 2xy is even
    v = dio.solve_form([[0, 1], [1, 0]], 8)
    assert v.status == dio.SOLVABLE


def test_zero_vector_allowed_only_when_asked():
    assert dio.solve_form([[-1]], 0, require_nonzero=False).status == dio.SOLVABLE
    assert dio.solve_form([[-1]], 0, require_nonzero=True).status == dio.UNSOLVABLE


def test_fundamental_units_against_search():
    for D in range(2, 61):
        if math.isqrt(D) ** 2 == D:
            continue
        x, y = dio.fundamental_unit(D)
        assert x * x - D * y * y == 1
        smallest = next(yy for yy in range(1, 10 ** 6) if math.isqrt(1 + D * yy * yy) ** 2 == 1 + D * yy * yy)
        assert y == smallest


def test_pell_window_beyond_the_box():
    # x^2 - 61 y^2 = 1 has its smallest nontrivial solution far outside small boxes
    gram = [[1, 0], [0, -61]]
    for k in (-3, 3, 5, -5, 12):
        v = dio.solve_form(gram, k)
        assert v.status in (dio.SOLVABLE, dio.UNSOLVABLE)
        if v.status == dio.SOLVABLE:
            x, y = v.coeffs
            assert x * x - 61 * y * y == k
        else:
            assert k not in box_values(gram, 60)


def test_modular_obstruction():
    assert dio.modular_obstruction([[1, 0], [0, 1]], 3) == 4
    assert dio.modular_obstruction([[1, 0], [0, 1]], 5) is None
    assert dio.modular_obstruction([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 7) == 8


def test_ternary_forms():
    v = dio.solve_form([[1, 0, 0], [0, -1, 0], [0, 0, -1]], 0)
    assert v.status == dio.SOLVABLE
    v = dio.solve_form([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 7)
    assert v.status == dio.UNSOLVABLE
    v = dio.solve_form([[1, 0, 0], [0, -7, 0], [0, 0, -10]], 0)
    assert v.status == dio.UNKNOWN


def test_degenerate_forms():
    v = dio.solve_form([[1, 1], [1, 1]], 4)
    assert v.status == dio.SOLVABLE and (v.coeffs[0] + v.coeffs[1]) ** 2 == 4
    assert dio.solve_form([[0, 0], [0, 0]], 0).status == dio.SOLVABLE
    assert dio.solve_form([[0, 0], [0, 0]], 1).status == dio.UNSOLVABLE


def test_norm_equation_on_sublattices():
    L = m_n(3)
    s = Sublattice.span(L, ["E3"])
    v = dio.solve_norm_equation(dio.NormEquation(s, 0, True))
    assert v.unsolvable
    s2 = Sublattice.span(L, ["H", "E1+E2"])
    v = dio.solve_norm_equation(dio.NormEquation(s2, -1, True))
    assert v.status in (dio.SOLVABLE, dio.UNSOLVABLE)
    v = dio.solve_norm_equation(dio.NormEquation(Sublattice.full(L), -1, True,
                                                 extra_membership=Sublattice.span(L, ["E1", "E2"])))
    assert v.solvable and L.format(v.witness) in ("E1", "-E1", "E2", "-E2")


def test_rank_above_three_is_refused():
    L = m_n(4)
    with pytest.raises(dio.UnsupportedEquation):
        dio.solve_norm_equation(dio.NormEquation(Sublattice.full(L), 1))


def test_non_symmetric_gram_is_refused():
    with pytest.raises(dio.UnsupportedEquation):
        dio.solve_form([[1, 2], [0, 1]], 1)
