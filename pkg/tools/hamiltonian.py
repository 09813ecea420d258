"""
canon-szego — Hamiltonian
Piecewise-constant Hamiltonians on R+: validation, duality, shifts,
Bernstein–Szegő truncation, det-1 reparametrization and the xi/eta grids.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from tools.errors import HypothesisError, SpecError, UnsupportedError, ValidationError

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]

INF = math.inf


def exact_sqrt(x: Number) -> Number:
    """Square root that stays rational for perfect squares of ints and Fractions."""
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        if x < 0:
            raise ValueError(f"sqrt of negative value {x}")
        q = Fraction(x)
        num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if num * num == q.numerator and den * den == q.denominator:
            return Fraction(num, den)
    return math.sqrt(x)


def exact_div(a: Number, b: Number) -> Number:
    """Division that keeps int/Fraction operands rational."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return Fraction(a) / Fraction(b)
    return a / b


@dataclass(frozen=True)
class Piece:
    """Real symmetric 2x2 block [[h11, h12], [h12, h22]]."""

    h11: Number
    h12: Number
    h22: Number

    @property
    def det(self) -> Number:
        return self.h11 * self.h22 - self.h12 * self.h12

    @property
    def trace(self) -> Number:
        return self.h11 + self.h22

    @property
    def sqrt_det(self) -> Number:
        d = self.det
        return exact_sqrt(d) if d > 0 else 0

    @property
    def is_diagonal(self) -> bool:
        return self.h12 == 0

    def is_psd(self) -> bool:
        slack = 1e-13 * max(1.0, abs(float(self.h11 * self.h22)))
        if isinstance(self.det, (int, Fraction)):
            slack = 0
        return self.h11 >= 0 and self.h22 >= 0 and self.det >= -slack

    def is_rank_one(self) -> bool:
        return self.det == 0 and self.trace > 0

    def is_type_zero(self) -> bool:
        """diag(c, 0) with c > 0."""
        return self.h12 == 0 and self.h22 == 0 and self.h11 > 0

    def is_type_half_pi(self) -> bool:
        """diag(0, c) with c > 0."""
        return self.h12 == 0 and self.h11 == 0 and self.h22 > 0

    def proportional(self, other: "Piece") -> bool:
        """Exact test for other = c * self with c > 0."""
        a = (self.h11, self.h12, self.h22)
        b = (other.h11, other.h12, other.h22)
        for i in range(3):
            for j in range(i + 1, 3):
                if a[i] * b[j] != a[j] * b[i]:
                    return False
        return all(x * y >= 0 for x, y in zip(a, b)) and self.trace * other.trace > 0

    def angle(self) -> float:
        """Type phi in [0, pi) of a rank-one piece h * e_phi e_phi^T."""
        if not self.is_rank_one():
            raise ValueError("angle is defined for rank-one pieces only")
        base = math.atan2(math.sqrt(self.h22), math.sqrt(self.h11))
        return base if self.h12 >= 0 else math.pi - base

    def scaled(self, c: Number) -> "Piece":
        return Piece(self.h11 * c, self.h12 * c, self.h22 * c)

    def dual(self) -> "Piece":
        return Piece(self.h22, -self.h12, self.h11)

    def as_array(self) -> np.ndarray:
        return np.array(
            [[float(self.h11), float(self.h12)], [float(self.h12), float(self.h22)]],
            dtype=float,
        )

    def entry(self, name: str) -> Number:
        return {"h1": self.h11, "h11": self.h11, "h2": self.h22, "h22": self.h22, "h12": self.h12}[name]


def diag(a: Number, b: Number) -> Piece:
    return Piece(a, 0, b)


IDENTITY = diag(1, 1)


@dataclass(frozen=True)
class Hamiltonian:
    """
    Piecewise-constant Hamiltonian.

    ``breakpoints`` is 0 = t_0 < t_1 < ... < t_K; ``pieces[k]`` lives on
    [t_k, t_{k+1}) and ``tail`` on [t_K, inf).
    """

    breakpoints: tuple
    pieces: tuple
    tail: Piece

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "pieces", tuple(self.pieces))
        bps = self.breakpoints
        if not bps or bps[0] != 0:
            raise ValidationError("breakpoints must start at 0", field="breakpoints")
        if len(self.pieces) != len(bps) - 1:
            raise ValidationError(
                f"{len(bps)} breakpoints need {len(bps) - 1} pieces, got {len(self.pieces)}",
                field="pieces",
            )
        for k in range(1, len(bps)):
            if not bps[k] > bps[k - 1] or not math.isfinite(bps[k]):
                raise ValidationError(
                    f"breakpoints must be finite and strictly increasing ({bps[k - 1]} -> {bps[k]})",
                    field=f"breakpoints[{k}]",
                )

    @property
    def t_end(self) -> Number:
        """Start t_K of the constant tail."""
        return self.breakpoints[-1]

    @property
    def is_diagonal(self) -> bool:
        return self.tail.is_diagonal and all(p.is_diagonal for p in self.pieces)

    def segments(self) -> Iterator[tuple]:
        """Yield (start, end, piece), the tail last with end = inf."""
        for k, piece in enumerate(self.pieces):
            yield self.breakpoints[k], self.breakpoints[k + 1], piece
        yield self.t_end, INF, self.tail

    def piece_at(self, t: Number) -> Piece:
        for start, end, piece in self.segments():
            if start <= t < end:
                return piece
        raise ValueError(f"t={t} is outside R+")

    def h1(self, t: Number) -> Number:
        return self.piece_at(t).h11

    def h2(self, t: Number) -> Number:
        return self.piece_at(t).h22

    def cut(self, r: Number) -> "Hamiltonian":
        """Insert r into the breakpoint grid by splitting the piece containing it."""
        bps = list(self.breakpoints)
        if r <= 0 or r in bps:
            return self
        if r > self.t_end:
            return make_hamiltonian(bps + [r], list(self.pieces) + [self.tail], self.tail)
        k = max(i for i, b in enumerate(bps) if b < r)
        pieces = list(self.pieces)
        pieces.insert(k, pieces[k])
        bps.insert(k + 1, r)
        return make_hamiltonian(bps, pieces, self.tail)

    def coalesce(self) -> "Hamiltonian":
        """Merge equal neighbours and drop trailing pieces equal to the tail."""
        bps = [0]
        pieces = []
        for start, end, piece in list(self.segments())[:-1]:
            if pieces and pieces[-1] == piece:
                bps[-1] = end
            else:
                pieces.append(piece)
                bps.append(end)
        while pieces and pieces[-1] == self.tail:
            pieces.pop()
            bps.pop()
        return make_hamiltonian(bps, pieces, self.tail)

    def allclose(self, other: "Hamiltonian", atol: float = 1e-12) -> bool:
        """Pointwise comparison on the union of both grids."""
        grid = sorted(set(float(b) for b in self.breakpoints) | set(float(b) for b in other.breakpoints))
        samples = [(a + b) / 2 for a, b in zip(grid, grid[1:])] + [grid[-1] + 1.0]
        for t in samples:
            p, q = self.piece_at(t), other.piece_at(t)
            if any(abs(float(x) - float(y)) > atol for x, y in
                   zip((p.h11, p.h12, p.h22), (q.h11, q.h12, q.h22))):
                return False
        return True


@dataclass(frozen=True)
class DiagonalHamiltonian(Hamiltonian):
    """Hamiltonian with h12 = 0 on every piece."""

    def __post_init__(self):
        super().__post_init__()
        for k, piece in enumerate(self.pieces):
            if not piece.is_diagonal:
                raise ValidationError("diagonal Hamiltonian has h12 != 0", field=f"pieces[{k}].h12")
        if not self.tail.is_diagonal:
            raise ValidationError("diagonal Hamiltonian has h12 != 0", field="tail.h12")


def make_hamiltonian(breakpoints: Sequence[Number], pieces: Sequence[Piece], tail: Piece) -> Hamiltonian:
    """Build a Hamiltonian, picking the diagonal class when every piece allows it."""
    if tail.is_diagonal and all(p.is_diagonal for p in pieces):
        return DiagonalHamiltonian(tuple(breakpoints), tuple(pieces), tail)
    return Hamiltonian(tuple(breakpoints), tuple(pieces), tail)


def constant(a1: Number, a2: Number) -> DiagonalHamiltonian:
    return make_hamiltonian((0,), (), diag(a1, a2))


def piecewise_diagonal(breakpoints: Sequence[Number], h1: Sequence[Number], h2: Sequence[Number]) -> Hamiltonian:
    """diag(h1, h2) with the last entry of each list used for the tail."""
    if len(h1) != len(breakpoints) or len(h2) != len(breakpoints):
        raise ValidationError("h1 and h2 need one value per breakpoint (last one is the tail)", field="h1")
    pieces = [diag(a, b) for a, b in zip(h1[:-1], h2[:-1])]
    return make_hamiltonian(breakpoints, pieces, diag(h1[-1], h2[-1]))


@dataclass(frozen=True)
class IndivisibleInterval:
    start: Number
    end: Number
    angle: float
    profile: tuple = field(default=())


@dataclass(frozen=True)
class TimeChange:
    """Exact piecewise-linear clock of a det-1 reparametrization."""

    old_breakpoints: tuple
    new_breakpoints: tuple
    rates: tuple
    eps: Number


# ─── structure ────────────────────────────────────────────────────────────────


def is_nontrivial(H: Hamiltonian) -> bool:
    everything = list(H.pieces) + [H.tail]
    if all(p.is_type_zero() for p in everything):
        return False
    if all(p.is_type_half_pi() for p in everything):
        return False
    return True


def indivisible_intervals(H: Hamiltonian) -> list[IndivisibleInterval]:
    """Maximal runs of consecutive rank-one pieces sharing one direction."""
    runs: list[list[tuple]] = []
    for start, end, piece in H.segments():
        if not piece.is_rank_one():
            runs.append([])
            continue
        if runs and runs[-1] and runs[-1][-1][2].proportional(piece):
            runs[-1].append((start, end, piece))
        else:
            runs.append([(start, end, piece)])
    found = []
    for run in runs:
        if not run:
            continue
        found.append(IndivisibleInterval(
            start=run[0][0],
            end=run[-1][1],
            angle=run[0][2].angle(),
            profile=tuple((s, e, p.trace) for s, e, p in run),
        ))
    return found


def weyl_tail_angle(H: Hamiltonian) -> Optional[float]:
    """Type of an indivisible tail, None when det(tail) > 0."""
    return H.tail.angle() if H.tail.is_rank_one() else None


def validate(H: Hamiltonian, strict: bool = True) -> dict:
    """
    Structural diagnostics.

    Args:
        H: Hamiltonian to check
        strict: raise on a trivial Hamiltonian instead of listing the violation

    Returns:
        dict with singular, nontrivial, diagonal, det_positive_tail,
        indivisible_intervals and violations
    """
    named = [(f"pieces[{k}]", p) for k, p in enumerate(H.pieces)] + [("tail", H.tail)]
    for name, piece in named:
        if not piece.is_psd():
            raise ValidationError(f"{name} is not positive semidefinite (det = {piece.det})", field=name)
        if piece.trace == 0:
            raise ValidationError(f"trace vanishes on {name}", field=name)

    violations = []
    nontrivial = is_nontrivial(H)
    if not nontrivial:
        message = "Hamiltonian is trivial: every piece is a positive multiple of one diagonal projector"
        if strict:
            raise ValidationError(message)
        violations.append(message)

    return {
        "singular": H.tail.trace > 0,
        "nontrivial": nontrivial,
        "diagonal": H.is_diagonal,
        "det_positive_tail": H.tail.det > 0,
        "indivisible_intervals": indivisible_intervals(H),
        "violations": violations,
    }


# ─── transformations ─────────────────────────────────────────────────────────


def dual(H: Hamiltonian) -> Hamiltonian:
    return make_hamiltonian(H.breakpoints, [p.dual() for p in H.pieces], H.tail.dual())


def shift(H: Hamiltonian, r: Number) -> Hamiltonian:
    """H_r(x) = H(x + r); triviality of the result is left to the caller."""
    if r < 0:
        raise ValueError(f"shift needs r >= 0, got {r}")
    if r == 0:
        return H
    bps = [0]
    pieces = []
    for start, end, piece in list(H.segments())[:-1]:
        if end <= r:
            continue
        pieces.append(piece)
        bps.append(end - r)
    return make_hamiltonian(bps, pieces, H.tail)


def perturb(H: Hamiltonian, eps: Number) -> Hamiltonian:
    """H + eps * Id on [0, t_K)."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    if eps == 0:
        return H
    pieces = [Piece(p.h11 + eps, p.h12, p.h22 + eps) for p in H.pieces]
    return make_hamiltonian(H.breakpoints, pieces, H.tail)


def det_one_reparametrize(H: Hamiltonian, eps: Number = 0) -> tuple[Hamiltonian, TimeChange]:
    """
    Equivalent Hamiltonian with det = 1 on every piece.

    The clock is the inverse of xi for H + eps*Id on [0, t_K), so a piece of
    length l with sqrt(det) = s becomes a piece of length s*l carrying H/s.
    """
    He = perturb(H, eps)
    rates = []
    new_bps = [0]
    new_pieces = []
    for k, (start, end, piece) in enumerate(He.segments()):
        s = piece.sqrt_det
        if s == 0:
            where = "the tail" if end == INF else f"piece {k}"
            raise HypothesisError(
                f"det vanishes on {where}; pass eps > 0 or use a det-positive tail",
                hypothesis="det H > 0 after perturbation",
            )
        rates.append(s)
        scaled = Piece(exact_div(piece.h11, s), exact_div(piece.h12, s), exact_div(piece.h22, s))
        if end == INF:
            tail = scaled
        else:
            new_pieces.append(scaled)
            new_bps.append(new_bps[-1] + s * (end - start))
    record = TimeChange(tuple(He.breakpoints), tuple(new_bps), tuple(rates), eps)
    logger.debug("det-1 clock: %s -> %s", record.old_breakpoints, record.new_breakpoints)
    return make_hamiltonian(new_bps, new_pieces, tail), record


def trace_normalize(H: Hamiltonian) -> Hamiltonian:
    """Equivalent Hamiltonian with unit trace (the clock runs at speed trace H)."""
    new_bps = [0]
    pieces = []
    for start, end, piece in H.segments():
        tr = piece.trace
        if tr == 0:
            raise ValidationError("trace vanishes on a piece; cannot normalize")
        scaled = Piece(exact_div(piece.h11, tr), exact_div(piece.h12, tr), exact_div(piece.h22, tr))
        if end == INF:
            tail = scaled
        else:
            pieces.append(scaled)
            new_bps.append(new_bps[-1] + tr * (end - start))
    return make_hamiltonian(new_bps, pieces, tail)


def bernstein_szego(H: Hamiltonian, r: Number, I_r: float) -> Hamiltonian:
    """H on [0, r) continued by the constant diag(1/I_r, I_r)."""
    if not H.is_diagonal:
        raise UnsupportedError("Bernstein–Szegő truncation needs a diagonal Hamiltonian")
    if not (math.isfinite(I_r) and I_r > 0):
        raise HypothesisError(
            f"I_H(r) = {I_r} is not positive and finite; the shifted Hamiltonian is trivial",
            hypothesis="nontrivial shift",
        )
    G = H.cut(r)
    bps = [b for b in G.breakpoints if b <= r]
    pieces = G.pieces[: len(bps) - 1]
    return make_hamiltonian(bps, pieces, diag(exact_div(1, I_r), I_r)).coalesce()


# ─── mean type and the eta grid ─────────────────────────────────────────────


def xi(H: Hamiltonian, t: Number) -> Number:
    """xi_H(t) = integral of sqrt(det H) over [0, t]."""
    total = 0
    for start, end, piece in H.segments():
        if start >= t:
            break
        total += piece.sqrt_det * (min(end, t) - start)
    return total


def xi_inverse(H: Hamiltonian, y: Number) -> Number:
    """min{t : xi(t) = y}, exact for piecewise-constant H."""
    acc = 0
    for start, end, piece in H.segments():
        if acc >= y:
            return start
        rate = piece.sqrt_det
        if rate == 0:
            continue
        if end == INF or acc + rate * (end - start) >= y:
            return start + exact_div(y - acc, rate)
        acc += rate * (end - start)
    raise HypothesisError(
        "sqrt(det H) is integrable; the det-arclength grid is finite",
        hypothesis="sqrt(det H) not in L1(R+)",
    )


def eta_grid(H: Hamiltonian, n_max: int) -> list:
    """eta_0 = 0 < eta_1 < ... < eta_{n_max} with xi(eta_n) = n."""
    if H.tail.det <= 0:
        raise HypothesisError(
            "sqrt(det H) is integrable (det of the tail is 0); the Szegő characteristic hypothesis is violated",
            hypothesis="sqrt(det H) not in L1(R+)",
        )
    return [xi_inverse(H, n) for n in range(n_max + 1)]


def integrate_entry(H: Hamiltonian, a: Number, b: Number, entry: str = "h1") -> Number:
    """Exact integral of one entry of H over [a, b]."""
    total = 0
    for start, end, piece in H.segments():
        lo, hi = max(start, a), min(end, b)
        if hi <= lo:
            continue
        value = piece.entry(entry)
        if hi == INF:
            if value != 0:
                return INF
            continue
        total += value * (hi - lo)
    return total


def szego_characteristic(H: Hamiltonian) -> dict:
    """
    Discrete Szegő characteristic: sum over n of
    (integral of h1)(integral of h2) - 4 on [eta_n, eta_{n+2}].

    Terms vanish once eta_n reaches the tail, so the sum stops there.

    Returns:
        dict with value, terms, eta, int_h1, int_h2
    """
    if not H.is_diagonal:
        raise UnsupportedError("the Szegő characteristic is defined for diagonal Hamiltonians")
    eta = eta_grid(H, 2)
    terms, int_h1, int_h2 = [], [], []
    n = 0
    while eta[n] < H.t_end:
        while len(eta) < n + 3:
            eta.append(xi_inverse(H, len(eta)))
        a, b = eta[n], eta[n + 2]
        i1 = integrate_entry(H, a, b, "h1")
        i2 = integrate_entry(H, a, b, "h2")
        int_h1.append(i1)
        int_h2.append(i2)
        terms.append(i1 * i2 - 4)
        n += 1
        if len(eta) < n + 1:
            eta.append(xi_inverse(H, n))
    logger.debug("Szegő characteristic truncated after %d terms", len(terms))
    return {
        "value": sum(terms) if terms else 0,
        "terms": terms,
        "eta": eta[: len(terms) + 2],
        "int_h1": int_h1,
        "int_h2": int_h2,
    }


def szego_truncation(H: Hamiltonian, k: int) -> Hamiltonian:
    """H on [0, eta_{k+2}) continued by diag(y1^2, 1), y1 = integral of h1 over [eta_{k+2}, eta_{k+3}]."""
    if not H.is_diagonal:
        raise UnsupportedError("the Szegő truncation needs a diagonal Hamiltonian")
    eta = eta_grid(H, k + 3)
    cut_at = eta[k + 2]
    y1 = integrate_entry(H, cut_at, eta[k + 3], "h1")
    G = H.cut(cut_at)
    bps = [b for b in G.breakpoints if b <= cut_at]
    return make_hamiltonian(bps, G.pieces[: len(bps) - 1], diag(y1 * y1, 1))


# ─── JSON ────────────────────────────────────────────────────────────────────


def parse_number(value, field_name: str) -> Number:
    """JSON number or rational string such as "1/2"."""
    if isinstance(value, bool):
        raise SpecError(f"expected a number, got {value!r}", field=field_name)
    if isinstance(value, (int, float)):
        if isinstance(value, float) and not math.isfinite(value):
            raise SpecError("value must be finite", field=field_name)
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise SpecError(f"expected a number, got {value!r}", field=field_name)


def render_number(value: Number):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return value


def _piece_from_dict(data, field_name: str) -> Piece:
    if not isinstance(data, dict):
        raise SpecError("expected an object with h11, h12, h22", field=field_name)
    try:
        return Piece(
            parse_number(data["h11"], f"{field_name}.h11"),
            parse_number(data.get("h12", 0), f"{field_name}.h12"),
            parse_number(data["h22"], f"{field_name}.h22"),
        )
    except KeyError as exc:
        raise SpecError(f"missing entry {exc.args[0]}", field=field_name) from None


def from_dict(data: dict) -> Hamiltonian:
    """Hamiltonian from the full schema or the diagonal shorthand."""
    if not isinstance(data, dict):
        raise SpecError("Hamiltonian spec must be a JSON object")
    raw_bps = data.get("breakpoints", [0])
    if not isinstance(raw_bps, list):
        raise SpecError("breakpoints must be a list", field="breakpoints")
    bps = [parse_number(b, f"breakpoints[{k}]") for k, b in enumerate(raw_bps)]

    if "h1" in data or "h2" in data:
        h1, h2 = data.get("h1"), data.get("h2")
        if not isinstance(h1, list) or not isinstance(h2, list):
            raise SpecError("diagonal shorthand needs both h1 and h2 lists", field="h1")
        if len(h1) != len(bps) or len(h2) != len(bps):
            raise SpecError(
                f"h1/h2 need {len(bps)} values (one per breakpoint, last one is the tail)",
                field="h1" if len(h1) != len(bps) else "h2",
            )
        return piecewise_diagonal(
            bps,
            [parse_number(v, f"h1[{k}]") for k, v in enumerate(h1)],
            [parse_number(v, f"h2[{k}]") for k, v in enumerate(h2)],
        )

    raw_pieces = data.get("pieces", [])
    if not isinstance(raw_pieces, list):
        raise SpecError("pieces must be a list", field="pieces")
    if "tail" not in data:
        raise SpecError("missing tail", field="tail")
    pieces = [_piece_from_dict(p, f"pieces[{k}]") for k, p in enumerate(raw_pieces)]
    return make_hamiltonian(bps, pieces, _piece_from_dict(data["tail"], "tail"))


def to_dict(H: Hamiltonian) -> dict:
    def piece(p: Piece) -> dict:
        return {"h11": render_number(p.h11), "h12": render_number(p.h12), "h22": render_number(p.h22)}

    return {
        "breakpoints": [render_number(b) for b in H.breakpoints],
        "pieces": [piece(p) for p in H.pieces],
        "tail": piece(H.tail),
    }


if __name__ == "__main__":
    bump = piecewise_diagonal([0, 1], [2, 1], [Fraction(1, 2), 1])
    print("eta:", eta_grid(bump, 4))
    print("K~:", szego_characteristic(bump)["value"])
