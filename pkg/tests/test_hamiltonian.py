"""Testing the hamiltonian module"""

from fractions import Fraction

import pytest

from tools import corpus
from tools.entropy import I_value
from tools.errors import HypothesisError, SpecError, UnsupportedError, ValidationError
from tools.hamiltonian import (
    DiagonalHamiltonian,
    Hamiltonian,
    Piece,
    bernstein_szego,
    constant,
    det_one_reparametrize,
    diag,
    dual,
    eta_grid,
    from_dict,
    integrate_entry,
    make_hamiltonian,
    parse_number,
    piecewise_diagonal,
    shift,
    szego_characteristic,
    szego_truncation,
    to_dict,
    trace_normalize,
    validate,
    weyl_tail_angle,
    xi,
    xi_inverse,
)
from tools.weyl import m_function


def test_parse_number_accepts_rational_strings():
    assert parse_number("1/2", "h2[0]") == Fraction(1, 2)
    assert parse_number(3, "h1[0]") == 3


@pytest.mark.parametrize("value", [True, "half", None, float("inf")])
def test_parse_number_rejects(value):
    with pytest.raises(SpecError) as info:
        parse_number(value, "h1[0]")
    assert info.value.field == "h1[0]"


def test_from_dict_shorthand(bump):
    H = from_dict({"breakpoints": [0, 1], "h1": [2, 1], "h2": ["1/2", 1]})
    assert isinstance(H, DiagonalHamiltonian)
    assert H == bump
    assert to_dict(H)["pieces"][0]["h22"] == "1/2"


def test_from_dict_full_schema_round_trip(corpus_hamiltonians):
    H = corpus_hamiltonians["staircase"]
    assert not H.is_diagonal
    assert from_dict(to_dict(H)) == H


def test_from_dict_length_mismatch():
    with pytest.raises(SpecError) as info:
        from_dict({"breakpoints": [0, 1], "h1": [2, 1], "h2": [1]})
    assert info.value.field == "h2"


def test_from_dict_missing_tail():
    with pytest.raises(SpecError) as info:
        from_dict({"breakpoints": [0], "pieces": []})
    assert info.value.field == "tail"


def test_breakpoints_must_start_at_zero():
    with pytest.raises(ValidationError):
        Hamiltonian((1, 2), (diag(1, 1),), diag(1, 1))


def test_breakpoints_must_increase():
    with pytest.raises(ValidationError) as info:
        make_hamiltonian((0, 2, 1), (diag(1, 1), diag(1, 1)), diag(1, 1))
    assert info.value.field == "breakpoints[2]"


def test_validate_names_the_bad_piece():
    H = make_hamiltonian((0, 1), (Piece(1, 2, 1),), diag(1, 1))
    with pytest.raises(ValidationError) as info:
        validate(H)
    assert info.value.field == "pieces[0]"


def test_validate_trivial():
    H = constant(1, 0)
    with pytest.raises(ValidationError):
        validate(H)
    report = validate(H, strict=False)
    assert not report["nontrivial"]
    assert report["violations"]


def test_validate_reports_indivisible_intervals(corpus_hamiltonians):
    report = validate(corpus_hamiltonians["stieltjes_hamiltonian"])
    assert report["singular"]
    assert not report["det_positive_tail"]
    assert [(i.start, i.end) for i in report["indivisible_intervals"]] == [(0, 1), (1, 2), (2, float("inf"))]


def test_weyl_tail_angle(corpus_hamiltonians):
    assert weyl_tail_angle(corpus_hamiltonians["stieltjes_hamiltonian"]) == 0.0
    assert weyl_tail_angle(constant(2, 8)) is None


def test_dual_is_an_involution(corpus_hamiltonians):
    for H in corpus_hamiltonians.values():
        assert dual(dual(H)) == H


def test_shift(bump):
    half = shift(bump, Fraction(1, 2))
    assert half.breakpoints == (0, Fraction(1, 2))
    assert half.pieces == (diag(2, Fraction(1, 2)),)
    assert shift(bump, 3) == constant(1, 1)
    with pytest.raises(ValueError):
        shift(bump, -1)


def test_cut_and_coalesce(bump):
    assert bump.cut(Fraction(1, 2)).coalesce() == bump
    assert bump.cut(5).coalesce() == bump


def test_det_one_reparametrize():
    H = piecewise_diagonal([0, 1], [4, 1], [1, 1])
    G, clock = det_one_reparametrize(H)
    assert G.breakpoints == (0, 2)
    assert G.pieces == (diag(2, Fraction(1, 2)),)
    assert clock.rates[0] == 2
    assert all(p.det == 1 for p in G.pieces + (G.tail,))


def test_det_one_reparametrize_needs_positive_det(corpus_hamiltonians):
    with pytest.raises(HypothesisError):
        det_one_reparametrize(corpus_hamiltonians["stieltjes_hamiltonian"])


def test_trace_normalize(bump):
    G = trace_normalize(bump)
    assert G.breakpoints == (0, Fraction(5, 2))
    assert G.pieces == (diag(Fraction(4, 5), Fraction(1, 5)),)
    assert G.tail == diag(Fraction(1, 2), Fraction(1, 2))


def test_xi_and_eta(bump):
    assert xi(bump, 1) == 1
    assert xi_inverse(bump, 3) == 3
    assert eta_grid(bump, 3) == [0, 1, 2, 3]


def test_eta_grid_needs_det_positive_tail(corpus_hamiltonians):
    with pytest.raises(HypothesisError):
        eta_grid(corpus_hamiltonians["stieltjes_hamiltonian"], 2)


def test_integrate_entry(bump):
    assert integrate_entry(bump, 0, 2, "h1") == 3
    assert integrate_entry(bump, 0, 2, "h2") == Fraction(3, 2)
    assert integrate_entry(constant(1, 0), 0, float("inf"), "h2") == 0


def test_szego_characteristic_bump(bump):
    report = szego_characteristic(bump)
    assert report["value"] == Fraction(1, 2)
    assert report["terms"] == [Fraction(1, 2)]
    assert report["int_h1"] == [3]


def test_szego_characteristic_constant_vanishes():
    assert szego_characteristic(constant(2, 8))["value"] == 0


def test_szego_characteristic_terms_nonnegative():
    H = piecewise_diagonal([0, 1, 3, Fraction(7, 2)], [3, Fraction(1, 2), 2, 1],
                           [Fraction(1, 3), 2, Fraction(1, 2), 1])
    assert all(term >= 0 for term in szego_characteristic(H)["terms"])


def test_szego_characteristic_rejects_non_diagonal(corpus_hamiltonians):
    with pytest.raises(UnsupportedError):
        szego_characteristic(corpus_hamiltonians["staircase"])


def test_szego_truncation_of_bump_is_bump(bump):
    G = szego_truncation(bump, 0)
    assert G.coalesce() == bump
    assert szego_characteristic(G)["value"] <= szego_characteristic(bump)["value"]


@pytest.mark.parametrize("seed", range(5))
def test_det_one_reparametrize_keeps_m(seed):
    H = corpus.random_piecewise(seed)
    G, _ = det_one_reparametrize(H)
    assert all(p.det == pytest.approx(1.0, rel=1e-12) for p in list(G.pieces) + [G.tail])
    assert m_function(G, 1j).m_value == pytest.approx(m_function(H, 1j).m_value, rel=1e-10)


@pytest.mark.parametrize("r", [0.5, 1, 3])
def test_bernstein_szego_of_constant(r):
    H = constant(2, 8)
    I_r = I_value(H, r)
    assert I_r == pytest.approx(2.0, rel=1e-14)
    G = bernstein_szego(H, r, I_r)
    assert float(G.tail.h11) == pytest.approx(0.5, rel=1e-14)
    assert float(G.tail.h22) == pytest.approx(2.0, rel=1e-14)
    assert m_function(G, 1j).m_value == pytest.approx(2j, abs=1e-12)
