"""Testing the transfer module"""

import numpy as np
import pytest

from tools import corpus
from tools.hamiltonian import constant, diag, dual, shift, xi
from tools.transfer import (
    dual_matrix,
    energy_check,
    mean_type_estimate,
    sinc,
    solve,
    solve_path,
    step_matrix,
)


@pytest.mark.parametrize("z", [1j, 0.5 + 2j, -3 + 0.1j])
def test_identity_hamiltonian_is_a_rotation(z):
    t = 1.7
    M = solve(constant(1, 1), t, z)
    np.testing.assert_allclose(
        [M.theta_plus, M.phi_plus, M.theta_minus, M.phi_minus],
        [np.cos(z * t), np.sin(z * t), -np.sin(z * t), np.cos(z * t)],
        rtol=1e-13,
    )


def test_rank_one_step_is_linear():
    z = 2 - 1j
    M = step_matrix(diag(1, 0), 2.0, z)
    np.testing.assert_allclose(M.array, [[1, 0], [-2 * z, 1]], atol=1e-15)


def test_step_needs_positive_length():
    with pytest.raises(ValueError):
        step_matrix(diag(1, 1), 0.0, 1j)


def test_sinc_near_zero():
    w = np.array([0.0, 1e-6, 0.3])
    np.testing.assert_allclose(sinc(w), [1.0, 1.0 - 1e-12 / 6, np.sin(0.3) / 0.3], rtol=1e-15)


@pytest.mark.parametrize("seed", range(10))
def test_det_is_one(seed):
    H = corpus.random_piecewise(seed)
    M = solve(H, 5.0, 1 + 1j)
    assert M.det_residual() < 1e-12


def test_vectorized_z(bump):
    zs = np.array([1j, 2j, 1 + 1j])
    M = solve(bump, 1.0, zs)
    assert np.shape(M.theta_plus) == (3,)
    for k, z in enumerate(zs):
        single = solve(bump, 1.0, z)
        assert M.theta_plus[k] == pytest.approx(single.theta_plus, rel=1e-14)


def test_solve_path_matches_solve():
    H = corpus.random_piecewise(3)
    times = [0.0, 0.4, 1.3, 2.0, 6.5]
    for t, M in zip(times, solve_path(H, times, 0.3 + 0.8j)):
        np.testing.assert_allclose(M.array, solve(H, t, 0.3 + 0.8j).array, rtol=1e-12, atol=1e-14)


def test_dual_matrix_solves_the_dual():
    H = corpus.random_piecewise(7)
    z = -0.4 + 1.2j
    np.testing.assert_allclose(dual_matrix(solve(H, 3.0, z)).array, solve(dual(H), 3.0, z).array,
                               rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_energy_identity(seed):
    H = corpus.random_piecewise(seed)
    report = energy_check(H, 4.0, 0.7 + 0.9j)
    assert report["relative"] < 1e-10
    assert report["lhs"] > 0


def test_energy_routes_agree(bump):
    closed = energy_check(bump, 2.5, 1 + 1j)
    quad = energy_check(bump, 2.5, 1 + 1j, route="quadrature")
    assert closed["rhs"] == pytest.approx(quad["rhs"], rel=1e-9)


def test_mean_type_estimate():
    assert mean_type_estimate(constant(1, 1), 1.0, 20.0) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("seed", range(5))
def test_reflection_symmetry(seed):
    H = corpus.random_piecewise(seed)
    z = 0.6 + 0.9j
    np.testing.assert_allclose(solve(H, 4.0, -z.conjugate()).array, np.conj(solve(H, 4.0, z).array),
                               rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_cocycle(seed):
    H = corpus.random_piecewise(seed)
    z = 0.3 + 0.2j
    for r in (0.35, 1.3, 2.0):
        whole = solve(H, 4.0, z).array
        split = solve(shift(H, r), 4.0 - r, z).array @ solve(H, r, z).array
        assert np.linalg.norm(whole - split) < 1e-12 * max(1.0, np.linalg.norm(whole))


def test_stieltjes_two_step_product(corpus_hamiltonians):
    H = corpus_hamiltonians["stieltjes_hamiltonian"]
    for z in (0.7 + 0.3j, 2j, -1.5 + 0.1j):
        np.testing.assert_allclose(solve(H, 2.0, z).array, [[1 - z * z, z], [-z, 1]], atol=1e-14)


@pytest.mark.parametrize("name,t", [("bump", 0.5), ("staircase", 0.6)])
def test_mean_type_at_large_y(corpus_hamiltonians, name, t):
    H = corpus_hamiltonians[name]
    assert abs(mean_type_estimate(H, t, 1e3) - float(xi(H, t))) < 0.01
