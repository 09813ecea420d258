"""
canon-szego — Verify Suite
Runs every exact identity and bound check on the built-in corpus.

Checks: constant exactness, transfer integrity, bump benchmark, identity
suite, entropy bounds, weight identities, string bijection
"""

from __future__ import annotations

import logging
import math
import time
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from tools import corpus
from tools.entropy import (
    I_quadrature,
    I_value,
    J_exact,
    J_quadrature,
    K_mu,
    K_value,
    identity_suite,
)
from tools.hamiltonian import (
    Hamiltonian,
    det_one_reparametrize,
    szego_characteristic,
)
from tools.krein_string import (
    geometric_characteristic,
    hamiltonian_to_string,
    phi_psi,
    q_function,
    string_characteristic,
    string_to_hamiltonian,
    t_points,
    t_points_direct,
    termwise_agreement,
    wronskian,
)
from tools.muckenhoupt import (
    bound_report,
    empirical_constants,
    int_characteristic,
    int_characteristic_quadrature,
    sequences_and_identity,
    weight_from_hamiltonian,
)
from tools.transfer import energy_check, solve
from tools.weyl import density_function, m_function

logger = logging.getLogger(__name__)

RANDOM_TRANSFER = 100
RANDOM_TWO_PIECE = 20
RANDOM_WEIGHTS = 10
BRACKET_CONSTANT = 8.0
GEOMETRIC_HORIZONS = (64, 256, 1024)
Q_BRIDGE_POINTS = (1j, 1 + 1j, 2j)


def check(name: str, value: float, threshold: float, passed: Optional[bool] = None, **extra) -> dict:
    """One row of the report: passed defaults to value <= threshold."""
    if passed is None:
        passed = bool(value <= threshold)
    return {"name": name, "value": float(value), "threshold": float(threshold), "passed": bool(passed), **extra}


def audit_constant() -> list[dict]:
    """diag(2, 8): m(i) = 2i, w = 2, J = log 2, K = 0, K~ = 0."""
    H = corpus.constant_example()
    m = m_function(H, 1j).m_value
    w = density_function(H)(np.linspace(-10, 10, 41))
    J = J_exact(H)
    return [
        check("constant.m_i", abs(m - 2j), 1e-12),
        check("constant.density", float(np.max(np.abs(w - 2))), 1e-12),
        check("constant.J", abs(J - math.log(2)), 1e-12),
        check("constant.K", abs(K_value(H).K), 1e-12),
        check("constant.szego", abs(float(szego_characteristic(H)["value"])), 0.0),
    ]


def _random_z(rng: np.random.Generator) -> complex:
    while True:
        z = complex(rng.uniform(-5, 5), rng.uniform(-5, 5))
        if abs(z) <= 5 and abs(z.imag) >= 0.1:
            return z


def audit_transfer(count: int = RANDOM_TRANSFER) -> list[dict]:
    """det M = 1 and the energy identity on random piecewise Hamiltonians, t <= 10, |z| <= 5."""
    det_worst, energy_worst = 0.0, 0.0
    for seed in range(count):
        H = corpus.random_piecewise(seed)
        rng = np.random.default_rng(10_000 + seed)
        t = float(rng.uniform(0, 10))
        z = _random_z(rng)
        det_worst = max(det_worst, solve(H, t, z).det_residual())
        energy_worst = max(energy_worst, energy_check(H, t, z)["relative"])
    return [
        check("transfer.det", det_worst, 1e-12, samples=count),
        check("transfer.energy", energy_worst, 1e-10, samples=count),
    ]


def bump_closed_forms() -> dict:
    c, s = math.cosh(1), math.sinh(1)
    return {"I": (c + s / 2) / (c + 2 * s), "J": 2 - 2 * math.log(c + 2 * s)}


def audit_bump() -> list[dict]:
    """diag(2, 1/2) on [0, 1): closed forms for I and J, both J routes, K~ = 1/2."""
    H = corpus.bump()
    expected = bump_closed_forms()
    I = I_value(H)
    J = J_exact(H)
    density = density_function(H)
    J_quad = J_quadrature(density, 1e-9, even=True)
    I_quad = I_quadrature(density, 1e-9)
    K_exact, K_quad = K_mu(I, J), K_mu(I, J_quad)
    szego = szego_characteristic(H)["value"]
    return [
        check("bump.I", abs(I - expected["I"]), 1e-12),
        check("bump.J", abs(J - expected["J"]), 1e-12),
        check("bump.J_quadrature", abs(J - J_quad), 1e-6),
        check("bump.I_quadrature", abs(I - I_quad), 1e-6),
        check("bump.K_routes", abs(K_exact - K_quad), 1e-4, K=K_exact),
        check("bump.K_value", abs(K_exact - 0.1157), 1e-4),
        check("bump.szego", abs(szego - Fraction(1, 2)), 0.0, passed=szego == Fraction(1, 2)),
    ]


def audit_identities(count: int = RANDOM_TWO_PIECE) -> list[dict]:
    """The identity suite on the diagonal corpus members and random two-piece det-1 Hamiltonians."""
    members = [(name, H) for name, H in corpus.hamiltonians().items()
               if H.is_diagonal and H.tail.det > 0]
    members += [(f"two_piece[{seed}]", corpus.random_two_piece(seed)) for seed in range(count)]
    rows = []
    for name, H in members:
        report = identity_suite(H)
        rows.append(check(
            f"identities.{name}",
            report["checks_run"] - report["checks_passed"],
            0,
            issues=",".join(report["issues"]),
        ))
    return rows


def _weight_members() -> list[tuple[str, Hamiltonian]]:
    members = []
    for name, H in corpus.hamiltonians().items():
        if not H.is_diagonal or not all(p.det > 0 for p in list(H.pieces) + [H.tail]):
            continue
        if any(p.det != 1 for p in list(H.pieces) + [H.tail]):
            H, _ = det_one_reparametrize(H)
        members.append((name, H))
    return members


def audit_bounds() -> list[dict]:
    """K <= [h]_int, the p1 inequality and the local lower bound; the beta family co-vanishing."""
    rows = []
    for name, H in _weight_members():
        report = bound_report(weight_from_hamiltonian(H))
        rows.append(check(f"bounds.{name}.int", max(0.0, report["K"] - report["int_characteristic"]), 1e-12,
                          passed=report["upper_holds"]))
        rows.append(check(f"bounds.{name}.p1", max(0.0, report["p1_sum"] - report["p1_bound"]), 1e-12,
                          passed=report["p1_holds"]))
        rows.append(check(f"bounds.{name}.local", max(0.0, report["local_lower_bound"]
                                                      - math.exp(report["K"] / 2)), 1e-10,
                          passed=report["lower_holds"]))

    family = corpus.beta_family()
    K = [K_value(H).K for H in family]
    Kt = [float(szego_characteristic(H)["value"]) for H in family]
    decreasing = all(a > b > 0 for a, b in zip(K, K[1:])) and all(a > b > 0 for a, b in zip(Kt, Kt[1:]))
    ratios = [k / kt for k, kt in zip(K, Kt)]
    worst = max(max(r, 1 / r) for r in ratios)
    rows.append(check("bounds.beta_family.monotone", 0.0 if decreasing else 1.0, 0.0))
    rows.append(check("bounds.beta_family.ratio", worst, 100.0, ratio_min=min(ratios), ratio_max=max(ratios)))
    return rows


def audit_weights(count: int = RANDOM_WEIGHTS) -> list[dict]:
    """The L1 identity for h~, [h]_int against quadrature, and [h]_{2,l1} <= c [h, alpha] for alpha_n in [3, 4]."""
    identity_worst, int_worst = 0.0, 0.0
    weights = [corpus.random_weight(seed) for seed in range(count)]
    for h in weights:
        identity_worst = max(identity_worst, float(sequences_and_identity(h)["residual"]))
        int_worst = max(int_worst, abs(int_characteristic(h) - int_characteristic_quadrature(h)))
    constants = empirical_constants(weights, [corpus.random_alphas(seed) for seed in range(count)])
    return [
        check("weights.l1_identity", identity_worst, 1e-10, samples=count),
        check("weights.int_quadrature", int_worst, 1e-8, samples=count),
        check("weights.bracket_constant", constants["bracket_constant"], BRACKET_CONSTANT, samples=count),
    ]


def _q_bridge_residual(S, z: complex) -> float:
    m = m_function(string_to_hamiltonian(S), z).m_value
    return abs(z * q_function(S, z * z) + 1 / m)


def audit_strings() -> list[dict]:
    """Bijection, t_n grid, characteristic, q against m, and the geometric string."""
    rows = []
    strings = corpus.strings()
    for name, S in strings.items():
        back = hamiltonian_to_string(string_to_hamiltonian(S))
        rows.append(check(f"strings.{name}.round_trip", 0.0 if back == S else 1.0, 0.0))
    for name, H in corpus.hamiltonians().items():
        if H.is_diagonal and all(p.trace == 1 for p in list(H.pieces) + [H.tail]):
            again = string_to_hamiltonian(hamiltonian_to_string(H))
            rows.append(check(f"strings.{name}.round_trip", 0.0 if again == H.coalesce() else 1.0, 0.0))

    unit = strings["unit_density_atom"]
    same = t_points(unit, 6) == t_points_direct(unit, 6)
    rows.append(check("strings.t_points", 0.0 if same else 1.0, 0.0))
    value = string_characteristic(unit)["value"]
    rows.append(check("strings.unit_density_atom.characteristic", abs(float(value) - 2), 0.0, passed=value == 2))
    rows.append(check("strings.unit_density_atom.termwise", termwise_agreement(unit)["max_difference"], 0.0))

    wr = max(abs(wronskian(phi_psi(unit, x, 1 + 1j)) - 1) for x in (0.25, 0.5, 1.0, 3.0))
    rows.append(check("strings.wronskian", wr, 1e-12))

    single = strings["stieltjes"]
    rows.append(check("strings.q_bridge", max(_q_bridge_residual(single, z) for z in Q_BRIDGE_POINTS), 1e-10))
    q = q_function(single, -1 + 0j)
    rows.append(check("strings.stieltjes.q", abs(q - 2), 1e-14))

    geometric = corpus.geometric_example()
    closed = geometric_characteristic(corpus.GEOMETRIC_ALPHA, 64)
    direct = string_characteristic(geometric)["value"]
    rows.append(check("strings.geometric.truncated", abs(direct - closed["truncated_value"])
                      / max(1.0, closed["truncated_value"]), 1e-9))
    rows.append(check("strings.geometric.termwise", termwise_agreement(geometric)["max_difference"], 1e-8))

    # longer horizons must stay under the certified bounds of the shortest one
    reports = [geometric_characteristic(corpus.GEOMETRIC_ALPHA, n) for n in GEOMETRIC_HORIZONS]
    first = reports[0]
    overshoot = max(
        max(r["ac_partial"] - first["ac_partial"] - first["ac_tail_bound"],
            r["singular_partial"] - first["singular_partial"] - first["singular_tail_bound"],
            r["length_partial"] - first["length_partial"] - first["length_tail_bound"])
        for r in reports[1:]
    )
    increasing = all(b["partial"] > a["partial"] for a, b in zip(reports, reports[1:]))
    rows.append(check("strings.geometric.finite", overshoot, 0.0,
                      passed=overshoot <= 0 and increasing and math.isfinite(first["upper"]),
                      upper=first["upper"], partial=reports[-1]["partial"]))
    return rows


AUDITS: tuple[tuple[str, Callable[[], list[dict]]], ...] = (
    ("constant", audit_constant),
    ("transfer", audit_transfer),
    ("bump", audit_bump),
    ("identities", audit_identities),
    ("bounds", audit_bounds),
    ("weights", audit_weights),
    ("strings", audit_strings),
)


def run_verify_suite(audits=AUDITS, timings: bool = False) -> dict:
    """
    Run every audit.

    Returns:
        {
            'checks_run': int,
            'checks_passed': int,
            'checks': [...],
            'issues': [...]
        }
    """
    checks = []
    for label, audit in audits:
        started = time.perf_counter()
        rows = audit()
        elapsed = time.perf_counter() - started
        logger.info("%s: %d checks in %.2fs", label, len(rows), elapsed)
        if timings:
            for row in rows:
                row["seconds"] = elapsed
        checks.extend(rows)
    return {
        "checks_run": len(checks),
        "checks_passed": sum(1 for c in checks if c["passed"]),
        "checks": checks,
        "issues": [c["name"] for c in checks if not c["passed"]],
    }


if __name__ == "__main__":
    print("\n🔍 VERIFY SUITE\n")
    result = run_verify_suite()
    print(f"Checks completed: {result['checks_passed']}/{result['checks_run']} passed\n")
    for name in result["issues"]:
        print(f"   ❌ {name}")
    if not result["issues"]:
        print("🎉 Every identity holds.\n")
