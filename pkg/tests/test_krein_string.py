"""Testing the krein_string module"""

import math
from fractions import Fraction

import numpy as np
import pytest

from tools.errors import HypothesisError, SpecError, UnsupportedError, ValidationError
from tools.hamiltonian import INF, diag, piecewise_diagonal, trace_normalize
from tools.krein_string import (
    N_inverse,
    StringSpec,
    dual_string,
    geometric_characteristic,
    geometric_deltas,
    geometric_string,
    hamiltonian_to_string,
    phi_psi,
    q_function,
    string_characteristic,
    string_density,
    string_from_dict,
    string_to_dict,
    string_to_hamiltonian,
    szego_log_integral,
    t_points,
    t_points_direct,
    termwise_agreement,
    wronskian,
)

HALF = Fraction(1, 2)
UNIT_DENSITY = StringSpec(INF, ((INF, 1),))
FINITE = StringSpec(1, ((1, 1),))


def test_string_validation():
    with pytest.raises(ValidationError) as info:
        StringSpec(2, ((1, 1),))
    assert info.value.field == "density"
    with pytest.raises(ValidationError) as info:
        StringSpec(INF, ((INF, -1),))
    assert info.value.field == "density[0].value"
    with pytest.raises(ValidationError) as info:
        StringSpec(1, ((1, 1),), ((1, 1),))
    assert info.value.field == "atoms[0].pos"
    with pytest.raises(ValidationError) as info:
        StringSpec(INF, ((INF, 1),), ((1, 1), (HALF, 1)))
    assert info.value.field == "atoms[1].pos"


def test_zero_string_violates_the_hypothesis():
    with pytest.raises(HypothesisError):
        StringSpec(INF, ((INF, 0),))


def test_equal_densities_merge():
    S = StringSpec(INF, ((1, 2), (3, 2), (INF, 1)))
    assert S.density == ((3, 2), (INF, 1))


def test_mass_function(corpus_strings):
    S = corpus_strings["unit_density_atom"]
    assert S.mass_at(Fraction(1, 4)) == Fraction(1, 4)
    assert S.mass_at(HALF) == Fraction(3, 2)
    assert S.mass_at(2) == 3
    assert S.last_event == HALF
    assert S.singular_mass == 1


def test_image_hamiltonian(corpus_strings):
    H = string_to_hamiltonian(corpus_strings["unit_density_atom"])
    assert H == piecewise_diagonal([0, 1, 2], [HALF, 0, HALF], [HALF, 1, HALF])


def test_single_mass_image(corpus_strings, corpus_hamiltonians):
    assert string_to_hamiltonian(corpus_strings["stieltjes"]) == corpus_hamiltonians["stieltjes_hamiltonian"]


def test_finite_length_image():
    H = string_to_hamiltonian(FINITE)
    assert H.breakpoints == (0, 2)
    assert H.tail == diag(0, 1)
    assert hamiltonian_to_string(H) == FINITE


def test_round_trips(corpus_strings, corpus_hamiltonians):
    for S in corpus_strings.values():
        assert hamiltonian_to_string(string_to_hamiltonian(S)) == S
    H = corpus_hamiltonians["stieltjes_hamiltonian"]
    assert string_to_hamiltonian(hamiltonian_to_string(H)) == H


def test_inverse_needs_unit_trace(bump):
    with pytest.raises(ValidationError) as info:
        hamiltonian_to_string(bump)
    assert "trace_normalize" in str(info.value)
    S = hamiltonian_to_string(trace_normalize(bump))
    assert S == StringSpec(INF, ((2, Fraction(1, 4)), (INF, 1)))


def test_inverse_needs_diagonal(corpus_hamiltonians):
    with pytest.raises(UnsupportedError):
        hamiltonian_to_string(corpus_hamiltonians["staircase"])


def test_dual_string():
    assert dual_string(StringSpec(INF, ((INF, 4),))) == StringSpec(INF, ((INF, Fraction(1, 4)),))


def test_t_points(corpus_strings):
    S = corpus_strings["unit_density_atom"]
    assert t_points(S, 4) == [0, 1, 2, 3, 4]
    assert t_points_direct(S, 4) == [0, 1, 2, 3, 4]
    assert N_inverse(S, 3) == 1


def test_t_points_need_a_density_tail(corpus_strings):
    with pytest.raises(HypothesisError):
        t_points(corpus_strings["stieltjes"], 3)
    with pytest.raises(HypothesisError):
        string_characteristic(FINITE)


def test_string_characteristic(corpus_strings):
    report = string_characteristic(corpus_strings["unit_density_atom"])
    assert report["value"] == 2
    assert report["dt"] == [2]
    assert report["dM"] == [3]


def test_termwise_agreement(corpus_strings):
    assert termwise_agreement(corpus_strings["unit_density_atom"])["max_difference"] == 0.0


@pytest.mark.parametrize("x", [0.25, 0.5, 1.0, 3.0])
def test_wronskian(corpus_strings, x):
    prop = phi_psi(corpus_strings["unit_density_atom"], x, 1 + 1j)
    assert wronskian(prop) == pytest.approx(1.0, abs=1e-12)


def test_phi_psi_domain():
    with pytest.raises(ValueError):
        phi_psi(FINITE, 2, -1)


def test_single_mass_q(corpus_strings):
    S = corpus_strings["stieltjes"]
    assert q_function(S, -1) == pytest.approx(2.0, abs=1e-14)
    for z in (-3 + 1j, 0.5 + 2j):
        assert q_function(S, z) == pytest.approx(1 - 1 / z, rel=1e-13)
        assert q_function(S, z, route="hamiltonian") == pytest.approx(1 - 1 / z, rel=1e-12)


def test_unit_density_q():
    for z in (-1, -4, -2 + 3j):
        expected = 1 / np.sqrt(complex(-z))
        assert q_function(UNIT_DENSITY, z) == pytest.approx(expected, rel=1e-13)
        assert q_function(UNIT_DENSITY, z, route="hamiltonian") == pytest.approx(expected, rel=1e-12)


def test_finite_length_q():
    assert q_function(FINITE, -1) == pytest.approx(math.tanh(1), rel=1e-14)
    assert q_function(FINITE, -1, route="hamiltonian") == pytest.approx(math.tanh(1), rel=1e-12)


def test_q_routes_agree_with_atoms(corpus_strings):
    S = corpus_strings["unit_density_atom"]
    for z in (-2 + 0j, 1 + 1j, -0.5 + 0.1j):
        assert q_function(S, z) == pytest.approx(q_function(S, z, route="hamiltonian"), rel=1e-10)


def test_q_off_the_spectrum():
    with pytest.raises(ValueError):
        q_function(UNIT_DENSITY, 2.0)


def test_log_integral():
    assert szego_log_integral(UNIT_DENSITY) == pytest.approx(0.0, abs=1e-12)
    assert string_density(UNIT_DENSITY, 4.0) == pytest.approx(0.5, rel=1e-14)


def test_log_integral_of_pure_point_string(corpus_strings):
    assert szego_log_integral(corpus_strings["stieltjes"]) == -math.inf
    with pytest.raises(UnsupportedError):
        string_density(corpus_strings["stieltjes"], 1.0)


def test_geometric_deltas():
    deltas = geometric_deltas(0.75, 3)
    assert deltas[0] == 1.0
    assert deltas[1] == pytest.approx(1 - 2 ** -0.75)
    assert deltas[2] == pytest.approx(deltas[1] * (1 - 3 ** -0.75))


def test_geometric_string_layout():
    S = geometric_string(0.75, 4)
    assert len(S.atoms) == 4
    assert S.atoms[0] == (0.5, 0.5)
    assert S.tail_density == pytest.approx(geometric_deltas(0.75, 5)[4] ** -2)
    with pytest.raises(ValueError):
        geometric_string(0.4, 4)


@pytest.mark.parametrize("horizon", [1, 4, 16])
def test_geometric_characteristic_matches_the_string(horizon):
    direct = string_characteristic(geometric_string(0.75, horizon))["value"]
    closed = geometric_characteristic(0.75, horizon)["truncated_value"]
    assert direct == pytest.approx(closed, rel=1e-9)


def test_geometric_termwise():
    assert termwise_agreement(geometric_string(0.75, 16))["max_difference"] < 1e-8


def test_geometric_bounds():
    reports = [geometric_characteristic(0.75, n) for n in (64, 256, 1024)]
    assert all(r["partial"] <= reports[0]["upper"] for r in reports)
    assert [r["singular_mass"] for r in reports] == [32, 128, 512]
    assert reports[0]["ac_tail_bound"] == pytest.approx(0.6119, abs=1e-3)
    assert reports[0]["truncated_value"] < reports[0]["partial"]


def test_string_json():
    S = string_from_dict({"L": "inf", "density": [{"value": 1}], "atoms": [{"pos": "1/2", "mass": 1}]})
    assert S.atoms == ((HALF, 1),)
    data = string_to_dict(S)
    assert data["L"] == "inf"
    assert data["atoms"] == [{"pos": "1/2", "mass": 1}]
    assert string_from_dict(data) == S


def test_string_json_errors():
    with pytest.raises(SpecError) as info:
        string_from_dict({"density": [{"value": 1}]})
    assert info.value.field == "L"
    with pytest.raises(SpecError) as info:
        string_from_dict({"L": 2, "density": [{"value": 1}, {"value": 2}]})
    assert info.value.field == "density[0].upto"
    with pytest.raises(HypothesisError):
        string_from_dict({"L": 1, "end_mass": 3, "density": [{"value": 1}]})
