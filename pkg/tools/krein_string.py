"""
canon-szego — Krein strings
[M, L] pairs with piecewise-constant density and finitely many atoms: the
bijection to unit-trace diagonal Hamiltonians, the t_n grid, the string
characteristic, phi/psi propagation, the q-function and the geometric string.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy import special

from tools.entropy import J_exact, J_quadrature
from tools.errors import HypothesisError, SpecError, UnsupportedError, ValidationError
from tools.hamiltonian import (
    INF,
    Hamiltonian,
    Number,
    diag,
    dual,
    eta_grid,
    exact_div,
    exact_sqrt,
    is_nontrivial,
    make_hamiltonian,
    parse_number,
    render_number,
    szego_characteristic,
)
from tools.transfer import sinc
from tools.weyl import density_function, m_function

logger = logging.getLogger(__name__)

SDSING = "L + lim M = inf and lim M > 0"
SQRT_DENSITY = "sqrt(M') not in L1(R+)"
UNIT_TRACE_SLACK = 1e-12


@dataclass(frozen=True)
class StringSpec:
    """
    Krein string [M, L].

    ``density`` holds (upto, value) pairs: M' = value on [previous upto, upto),
    the last upto being L. ``atoms`` holds (position, mass) pairs. A finite L
    carries infinite mass at L.
    """

    length: Number
    density: tuple
    atoms: tuple = ()

    def __post_init__(self):
        if not self.length > 0:
            raise ValidationError(f"string length must be positive, got {self.length}", field="L")
        density = [tuple(p) for p in self.density]
        if not density:
            raise ValidationError("density needs at least one piece", field="density")
        previous = 0
        for k, (upto, value) in enumerate(density):
            if not upto > previous:
                raise ValidationError(f"density breakpoints must increase ({previous} -> {upto})",
                                      field=f"density[{k}].upto")
            if value < 0:
                raise ValidationError(f"density must be nonnegative, got {value}", field=f"density[{k}].value")
            previous = upto
        if density[-1][0] != self.length:
            raise ValidationError(f"last density piece must end at L={self.length}", field="density")

        atoms = [tuple(a) for a in self.atoms]
        for k, (position, mass) in enumerate(atoms):
            if not 0 <= position < self.length:
                raise ValidationError(f"atom at {position} lies outside [0, L)", field=f"atoms[{k}].pos")
            if not mass > 0:
                raise ValidationError(f"atom mass must be positive, got {mass}", field=f"atoms[{k}].mass")
            if k and not position > atoms[k - 1][0]:
                raise ValidationError("atom positions must be strictly increasing", field=f"atoms[{k}].pos")

        merged = []
        for upto, value in density:
            if merged and merged[-1][1] == value:
                merged[-1] = (upto, value)
            else:
                merged.append((upto, value))
        object.__setattr__(self, "density", tuple(merged))
        object.__setattr__(self, "atoms", tuple(atoms))

        if self.length == INF and not atoms and all(v == 0 for _, v in merged):
            raise HypothesisError(
                "M vanishes identically, so v = 0 and the logarithmic integral is -inf; "
                "a string needs L + lim M = inf and lim M > 0",
                hypothesis=SDSING,
            )

    @property
    def tail_density(self) -> Number:
        return self.density[-1][1]

    def segments(self) -> Iterator[tuple]:
        """Yield (start, end, value, atom_mass_at_start) on the grid refined by the atoms."""
        atoms = dict(self.atoms)
        grid = sorted({0, *atoms} | {u for u, _ in self.density[:-1]})
        grid.append(self.length)
        for a, b in zip(grid, grid[1:]):
            yield a, b, self.density_at(a), atoms.get(a, 0)

    def density_at(self, t: Number) -> Number:
        for upto, value in self.density:
            if t < upto:
                return value
        raise ValueError(f"t={t} outside [0, L)")

    def mass_at(self, t: Number) -> Number:
        """M(t) = m[0, t]."""
        total = 0
        for a, b, value, atom in self.segments():
            if a > t:
                break
            total += atom + value * (min(b, t) - a)
        return total

    @property
    def last_event(self) -> Number:
        """Start of the final constant stretch: last density break or atom."""
        return max([0] + [u for u, _ in self.density[:-1]] + [p for p, _ in self.atoms])

    @property
    def singular_mass(self) -> Number:
        return sum(m for _, m in self.atoms)


@dataclass(frozen=True)
class StringPropagation:
    """phi, psi and their right derivatives at x."""

    x: float
    phi: complex
    psi: complex
    dphi: complex
    dpsi: complex


# ─── bijection ───────────────────────────────────────────────────────────────


def _unit_trace_piece(value: Number) -> tuple:
    return exact_div(1, 1 + value), exact_div(value, 1 + value)


def string_to_hamiltonian(S: StringSpec) -> Hamiltonian:
    """
    diag(h1, h2) with unit trace: a density piece M' = v of length l becomes
    diag(1/(1+v), v/(1+v)) on a stretch of length (1+v)l, an atom becomes
    diag(0, 1) on a stretch of length mass.
    """
    bps = [0]
    pieces = []
    tail = None
    for a, b, value, atom in S.segments():
        if atom:
            pieces.append(diag(0, 1))
            bps.append(bps[-1] + atom)
        h1, h2 = _unit_trace_piece(value)
        if b == INF:
            tail = diag(h1, h2)
            break
        pieces.append(diag(h1, h2))
        bps.append(bps[-1] + (1 + value) * (b - a))
    if tail is None:
        tail = diag(0, 1)
    return make_hamiltonian(bps, pieces, tail).coalesce()


def _is_unit_trace(trace: Number) -> bool:
    if isinstance(trace, float):
        return abs(trace - 1) <= UNIT_TRACE_SLACK
    return trace == 1


def hamiltonian_to_string(H: Hamiltonian) -> StringSpec:
    """Inverse of string_to_hamiltonian on nontrivial unit-trace diagonal Hamiltonians."""
    if not H.is_diagonal:
        raise UnsupportedError("only diagonal Hamiltonians correspond to strings")
    named = [(f"pieces[{k}]", p) for k, p in enumerate(H.pieces)] + [("tail", H.tail)]
    for name, piece in named:
        if not _is_unit_trace(piece.trace):
            raise ValidationError(
                f"trace of {name} is {piece.trace}, expected 1; apply trace_normalize(H) first", field=name
            )
    if not is_nontrivial(H):
        raise ValidationError("Hamiltonian is trivial and corresponds to no string")

    x = 0
    density, atoms = [], []
    length = INF
    for start, end, piece in H.segments():
        if piece.h11 == 0:
            if end == INF:
                if atoms and atoms[-1][0] == x:
                    atoms.pop()
                length = x
                break
            if atoms and atoms[-1][0] == x:
                atoms[-1] = (x, atoms[-1][1] + (end - start))
            else:
                atoms.append((x, end - start))
            continue
        value = exact_div(piece.h22, piece.h11)
        if end == INF:
            density.append((INF, value))
            break
        x = x + piece.h11 * (end - start)
        density.append((x, value))
    return StringSpec(length, tuple(density), tuple(atoms))


def dual_string(S: StringSpec) -> StringSpec:
    """String whose image is diag(h2, h1)."""
    return hamiltonian_to_string(dual(string_to_hamiltonian(S)))


# ─── grids and the string characteristic ────────────────────────────────────


def N_inverse(S: StringSpec, y: Number) -> Number:
    """inf{t >= 0 : t + M(t) >= y}."""
    if y < 0:
        raise ValueError(f"y must be >= 0, got {y}")
    acc = 0
    for a, b, value, atom in S.segments():
        if y <= acc + atom:
            return a
        acc += atom
        rate = 1 + value
        if b == INF or acc + rate * (b - a) >= y:
            return a + exact_div(y - acc, rate)
        acc += rate * (b - a)
    return S.length


def _require_sqrt_density(S: StringSpec):
    if S.length != INF or S.tail_density == 0:
        raise HypothesisError(
            "sqrt(M') is integrable on [0, L); the t_n grid is finite",
            hypothesis=SQRT_DENSITY,
        )


def t_points_direct(S: StringSpec, n_max: int) -> list:
    """t_n = min{t : integral of sqrt(M') over [0, t] = n}, from the density alone."""
    _require_sqrt_density(S)
    points = [0]
    acc = 0
    segments = list(S.segments())
    k = 0
    for n in range(1, n_max + 1):
        while True:
            a, b, value, _ = segments[k]
            rate = exact_sqrt(value) if value > 0 else 0
            if rate and (b == INF or acc + rate * (b - a) >= n):
                points.append(a + exact_div(n - acc, rate))
                break
            acc += rate * (b - a)
            k += 1
    return points


def t_points(S: StringSpec, n_max: int) -> list:
    """t_n = N^(-1)(eta_n), with eta_n the det-arclength grid of the image Hamiltonian."""
    _require_sqrt_density(S)
    return [N_inverse(S, e) for e in eta_grid(string_to_hamiltonian(S), n_max)]


def string_characteristic(S: StringSpec) -> dict:
    """
    Sum over n of (t_{n+2} - t_n)(M(t_{n+2}) - M(t_n)) - 4.

    Terms vanish identically once t_n passes the last event, so the sum stops there.
    """
    _require_sqrt_density(S)
    last = S.last_event
    n_max = 2
    t = t_points_direct(S, n_max)
    while t[-3] < last:
        n_max *= 2
        t = t_points_direct(S, n_max)
    count = next(n for n in range(len(t)) if t[n] >= last)
    mass = [S.mass_at(tn) for tn in t[: count + 2]]
    dt = [t[n + 2] - t[n] for n in range(count)]
    dM = [mass[n + 2] - mass[n] for n in range(count)]
    terms = [a * b - 4 for a, b in zip(dt, dM)]
    logger.debug("string characteristic truncated after %d terms (last event %s)", count, last)
    return {
        "value": sum(terms) if terms else 0,
        "terms": terms,
        "t": t[: count + 2],
        "dt": dt,
        "dM": dM,
    }


def termwise_agreement(S: StringSpec) -> dict:
    """String characteristic against the Szegő characteristic of the image, term by term."""
    string_terms = string_characteristic(S)["terms"]
    hamiltonian_terms = szego_characteristic(string_to_hamiltonian(S))["terms"]
    size = max(len(string_terms), len(hamiltonian_terms))
    padded_s = list(string_terms) + [0] * (size - len(string_terms))
    padded_h = list(hamiltonian_terms) + [0] * (size - len(hamiltonian_terms))
    diffs = [abs(float(a) - float(b)) for a, b in zip(padded_s, padded_h)]
    return {"string": padded_s, "hamiltonian": padded_h, "max_difference": max(diffs, default=0.0)}


# ─── propagation and the q-function ─────────────────────────────────────────


def _density_step(value: Number, length: float, z: complex) -> np.ndarray:
    """Propagator of -y'' = z v y across a stretch of the given length."""
    k = cmath.sqrt(z * float(value))
    s = complex(sinc(np.asarray(k * length)))
    c = cmath.cos(k * length)
    return np.array([[c, length * s], [-z * float(value) * length * s, c]], dtype=complex)


def _atom_step(mass: Number, z: complex) -> np.ndarray:
    return np.array([[1, 0], [-z * float(mass), 1]], dtype=complex)


def _fundamental(S: StringSpec, x: Number, z: complex) -> np.ndarray:
    """[[phi, psi], [phi', psi']] at x, atoms at x included."""
    F = np.eye(2, dtype=complex)
    for a, b, value, atom in S.segments():
        if a > x:
            break
        if atom:
            F = _atom_step(atom, z) @ F
        stop = min(b, x)
        if stop > a:
            F = _density_step(value, float(stop - a), z) @ F
    return F


def phi_psi(S: StringSpec, x: Number, z: complex) -> StringPropagation:
    """
    Solutions of phi(x) = 1 - z * integral over [0, x] of (x - s) phi(s) dm(s)
    and psi(x) = x - z * integral over [0, x] of (x - s) psi(s) dm(s).
    """
    if x < 0 or x > S.length or x == INF:
        raise ValueError(f"x={x} outside [0, L]")
    F = _fundamental(S, x, complex(z))
    return StringPropagation(float(x), complex(F[0, 0]), complex(F[0, 1]), complex(F[1, 0]), complex(F[1, 1]))


def wronskian(prop: StringPropagation) -> complex:
    return prop.phi * prop.dpsi - prop.dphi * prop.psi


def _q_direct(S: StringSpec, z: complex) -> complex:
    if S.length != INF:
        p = phi_psi(S, S.length, z)
        num, den = p.psi, p.phi
    else:
        p = phi_psi(S, S.last_event, z)
        value = float(S.tail_density)
        if value > 0:
            k = cmath.sqrt(-z * value)
            num, den = k * p.psi + p.dpsi, k * p.phi + p.dphi
        else:
            num, den = p.dpsi, p.dphi
    if den == 0:
        raise UnsupportedError(
            "the limit of psi/phi degenerates at this z; use route='hamiltonian' (z q(z^2) = -1/m(z))"
        )
    return num / den


def q_via_hamiltonian(S: StringSpec, z: complex) -> complex:
    """q(z) = -1/(s m(s)) with s^2 = z, Im s > 0, m of the image Hamiltonian."""
    s = cmath.sqrt(z)
    if s.imag < 0:
        s = -s
    return -1 / (s * m_function(string_to_hamiltonian(S), s).m_value)


def q_function(S: StringSpec, z: complex, route: str = "direct") -> complex:
    """
    Principal Weyl function q(z) = lim psi(x, z)/phi(x, z) as x -> L.

    route "direct" propagates phi/psi and closes the tail in closed form;
    "hamiltonian" goes through m of the image Hamiltonian.
    """
    z = complex(z)
    if z.imag == 0 and z.real >= 0:
        raise ValueError(f"q is defined off [0, inf), got z={z}")
    if route == "direct":
        return _q_direct(S, z)
    if route == "hamiltonian":
        return q_via_hamiltonian(S, z)
    raise ValueError(f"unknown route {route!r}")


# ─── spectral side ───────────────────────────────────────────────────────────


def string_density(S: StringSpec, x):
    """Density v of the string's spectral measure at x > 0, from w_dual(sqrt x) = sqrt(x) v(x)."""
    Hd = dual(string_to_hamiltonian(S))
    if not Hd.tail.det > 0:
        raise UnsupportedError("the string has no density tail; its spectral measure has v = 0")
    root = np.sqrt(np.asarray(x, dtype=float))
    value = density_function(Hd)(root) / root
    return float(value) if np.ndim(value) == 0 else value


def szego_log_integral(S: StringSpec, route: str = "exact", tol: Optional[float] = None) -> float:
    """
    Integral over R+ of log v(x) / ((1 + x) sqrt(x)), evaluated as
    pi * J of the dual image Hamiltonian; -inf when v vanishes.
    """
    Hd = dual(string_to_hamiltonian(S))
    if not Hd.tail.det > 0:
        logger.debug("string has no density tail; log integral is -inf")
        return -math.inf
    if route == "exact":
        return math.pi * J_exact(Hd)
    if route == "quadrature":
        return math.pi * J_quadrature(density_function(Hd), tol, even=True)
    raise ValueError(f"unknown route {route!r}")


# ─── geometric string ────────────────────────────────────────────────────────


def geometric_eps(n: int, alpha: float) -> float:
    return 0.0 if n == 0 else -((n + 1) ** -alpha)


def geometric_deltas(alpha: float, count: int) -> list[float]:
    """delta_n = product over j <= n of (1 + eps_j)."""
    deltas = []
    current = 1.0
    for n in range(count):
        current *= 1 + geometric_eps(n, alpha)
        deltas.append(current)
    return deltas


def _check_alpha(alpha: float, horizon: int):
    if not 0.5 < alpha < 1:
        raise ValueError(f"alpha must lie in (1/2, 1), got {alpha}")
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")


def geometric_string(alpha: float, horizon: int, atom_mass: float = 0.5) -> StringSpec:
    """
    M' = delta_n^-2 on [t_n, t_{n+1}), t_{n+1} - t_n = delta_n, an atom of
    ``atom_mass`` at the midpoint of every piece, and the density of piece
    ``horizon`` continued to infinity.
    """
    _check_alpha(alpha, horizon)
    deltas = geometric_deltas(alpha, horizon + 1)
    t = [0.0]
    for d in deltas[:horizon]:
        t.append(t[-1] + d)
    density = [(t[n + 1], deltas[n] ** -2) for n in range(horizon)] + [(INF, deltas[horizon] ** -2)]
    atoms = [(t[n] + deltas[n] / 2, atom_mass) for n in range(horizon)] if atom_mass > 0 else []
    return StringSpec(INF, tuple(density), tuple(atoms))


def _gamma_tail(beta: float, start: float) -> float:
    """Bound on the sum over n >= N of delta_n, with start = N + 1."""
    a = 1 / beta
    return (math.exp(2 ** beta / beta) * beta ** (a - 1)
            * special.gamma(a) * special.gammaincc(a, start ** beta / beta))


def geometric_characteristic(alpha: float, horizon: int, atom_mass: float = 0.5) -> dict:
    """
    Partial sums of the characteristic of the infinite geometric string (every
    piece carries an atom) and certified bounds on the remainder.

    Returns:
        dict with ac_partial, singular_partial, partial, ac_tail_bound,
        singular_tail_bound, upper, truncated_value (the characteristic of
        geometric_string(alpha, horizon, atom_mass)), singular_mass,
        length_partial and length_tail_bound
    """
    _check_alpha(alpha, horizon)
    deltas = geometric_deltas(alpha, horizon + 1)
    ratios = [deltas[n + 1] / deltas[n] for n in range(horizon)]
    ac = [r + 1 / r - 2 for r in ratios]
    singular = [2 * atom_mass * (deltas[n] + deltas[n + 1]) for n in range(horizon)]
    beta = 1 - alpha
    c_alpha = 1 / (1 - 2 ** -alpha)
    ac_tail = c_alpha * (horizon + 1) ** (1 - 2 * alpha) / (2 * alpha - 1)
    length_tail = _gamma_tail(beta, horizon + 1)
    singular_tail = 4 * atom_mass * length_tail
    partial = sum(ac) + sum(singular)
    return {
        "alpha": alpha,
        "horizon": horizon,
        "ac_partial": sum(ac),
        "singular_partial": sum(singular),
        "partial": partial,
        "ac_tail_bound": ac_tail,
        "singular_tail_bound": singular_tail,
        "upper": partial + ac_tail + singular_tail,
        "truncated_value": partial - atom_mass * (deltas[horizon - 1] + deltas[horizon]),
        "singular_mass": atom_mass * horizon,
        "length_partial": sum(deltas[:horizon]),
        "length_tail_bound": length_tail,
    }


# ─── JSON ────────────────────────────────────────────────────────────────────


def _parse_extended(value, field_name: str) -> Number:
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return INF
    return parse_number(value, field_name)


def string_from_dict(data: dict) -> StringSpec:
    """{"L": number|"inf", "density": [{"upto", "value"}], "atoms": [{"pos", "mass"}]}."""
    if not isinstance(data, dict):
        raise SpecError("string spec must be a JSON object")
    if "L" not in data:
        raise SpecError("missing L", field="L")
    length = _parse_extended(data["L"], "L")
    if "end_mass" in data and _parse_extended(data["end_mass"], "end_mass") != INF:
        raise HypothesisError(
            "L + lim M < inf: q is meromorphic and real on R, so v = 0 and the logarithmic integral is -inf",
            hypothesis=SDSING,
        )

    raw_density = data.get("density")
    if not isinstance(raw_density, list) or not raw_density:
        raise SpecError("density must be a non-empty list", field="density")
    density = []
    for k, item in enumerate(raw_density):
        if not isinstance(item, dict) or "value" not in item:
            raise SpecError("expected an object with upto and value", field=f"density[{k}]")
        last = k == len(raw_density) - 1
        if "upto" in item:
            upto = _parse_extended(item["upto"], f"density[{k}].upto")
        elif last:
            upto = length
        else:
            raise SpecError("missing upto", field=f"density[{k}].upto")
        density.append((upto, parse_number(item["value"], f"density[{k}].value")))

    raw_atoms = data.get("atoms", [])
    if not isinstance(raw_atoms, list):
        raise SpecError("atoms must be a list", field="atoms")
    atoms = []
    for k, item in enumerate(raw_atoms):
        if not isinstance(item, dict) or "pos" not in item or "mass" not in item:
            raise SpecError("expected an object with pos and mass", field=f"atoms[{k}]")
        atoms.append((parse_number(item["pos"], f"atoms[{k}].pos"),
                      parse_number(item["mass"], f"atoms[{k}].mass")))
    return StringSpec(length, tuple(density), tuple(atoms))


def _render_extended(value: Number):
    return "inf" if value == INF else render_number(value)


def string_to_dict(S: StringSpec) -> dict:
    return {
        "L": _render_extended(S.length),
        "density": [{"upto": _render_extended(u), "value": render_number(v)} for u, v in S.density],
        "atoms": [{"pos": render_number(p), "mass": render_number(m)} for p, m in S.atoms],
    }


if __name__ == "__main__":
    single = StringSpec(INF, ((INF, 0),), ((1, 1),))
    print("image:", string_to_hamiltonian(single))
    print("q(-1) =", q_function(single, -1))
    print("geometric:", geometric_characteristic(0.75, 200))
