"""
canon-szego — Muckenhoupt
Fixed-scale Muckenhoupt characteristics of piecewise-constant weights h and
the inequality witnesses that tie them to the entropy of diag(h, 1/h).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, optimize

from tools.entropy import K_value
from tools.errors import UnsupportedError, ValidationError
from tools.hamiltonian import (
    INF,
    Hamiltonian,
    Number,
    diag,
    exact_div,
    make_hamiltonian,
    szego_characteristic,
)

logger = logging.getLogger(__name__)

P1_GRID = 64


@dataclass(frozen=True)
class WeightFunction:
    """Positive piecewise-constant h: values[k] on [t_k, t_{k+1}), tail on [t_K, inf)."""

    breakpoints: tuple
    values: tuple
    tail: Number

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(self.breakpoints))
        object.__setattr__(self, "values", tuple(self.values))
        bps = self.breakpoints
        if not bps or bps[0] != 0 or any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValidationError("weight breakpoints must start at 0 and increase", field="breakpoints")
        if len(self.values) != len(bps) - 1:
            raise ValidationError("one weight value per interval", field="values")
        for k, v in enumerate(self.values + (self.tail,)):
            if not v > 0:
                raise ValidationError(f"weight must be positive, got {v}", field=f"values[{k}]")

    @property
    def t_end(self) -> Number:
        return self.breakpoints[-1]

    def segments(self):
        for k, v in enumerate(self.values):
            yield self.breakpoints[k], self.breakpoints[k + 1], v
        yield self.t_end, INF, self.tail

    def value_at(self, t: Number) -> Number:
        for start, end, v in self.segments():
            if start <= t < end:
                return v
        raise ValueError(f"t={t} outside R+")

    def integral(self, a: Number, b: Number, inverse: bool = False) -> Number:
        total = 0
        for start, end, v in self.segments():
            lo, hi = max(start, a), min(end, b)
            if hi > lo:
                total += (exact_div(1, v) if inverse else v) * (hi - lo)
        return total

    def average(self, a: Number, b: Number, inverse: bool = False) -> Number:
        return exact_div(self.integral(a, b, inverse), b - a)

    def defect(self, a: Number, b: Number) -> Number:
        """<h>_I <1/h>_I - 1 on I = [a, b)."""
        return self.average(a, b) * self.average(a, b, inverse=True) - 1


def weight_from_hamiltonian(H: Hamiltonian) -> WeightFunction:
    """h for H = diag(h, 1/h)."""
    if not H.is_diagonal:
        raise UnsupportedError("weights come from diagonal Hamiltonians")
    for name, piece in [(f"pieces[{k}]", p) for k, p in enumerate(H.pieces)] + [("tail", H.tail)]:
        if abs(float(piece.det) - 1) > 1e-12:
            raise ValidationError(f"det H must be 1 to read off a weight, got {piece.det}", field=name)
    return WeightFunction(H.breakpoints, [p.h11 for p in H.pieces], H.tail.h11)


def hamiltonian_from_weight(h: WeightFunction) -> Hamiltonian:
    return make_hamiltonian(
        h.breakpoints,
        [diag(v, exact_div(1, v)) for v in h.values],
        diag(h.tail, exact_div(1, h.tail)),
    )


def _alpha_at(alpha, n: int) -> Number:
    if callable(alpha):
        return alpha(n)
    if isinstance(alpha, (int, float)) or hasattr(alpha, "denominator"):
        return alpha
    if n >= len(alpha):
        raise ValueError(f"alpha sequence too short: need index {n}")
    return alpha[n]


def _last_index(h: WeightFunction) -> int:
    """Intervals starting at n >= t_K sit inside the tail."""
    return math.ceil(h.t_end)


def bracket_terms(h: WeightFunction, alpha) -> list:
    terms = []
    for n in range(_last_index(h)):
        a = _alpha_at(alpha, n)
        if not a > 0:
            raise ValueError(f"alpha_{n} must be positive, got {a}")
        terms.append(h.defect(n, n + a))
    return terms


def bracket(h: WeightFunction, alpha) -> Number:
    """[h, alpha] = sum over n of (<h><1/h> - 1) on [n, n + alpha_n)."""
    return sum(bracket_terms(h, alpha), 0)


def a2l1(h: WeightFunction) -> Number:
    """[h]_{2,l1} = [h, 2]."""
    return bracket(h, 2)


def _tail_sums(h: WeightFunction) -> tuple[list, list]:
    """S_k = integral over [t_k, inf) of h(s) e^{t_k - s}, and the same for 1/h."""
    S = [float(h.tail)]
    Sd = [1.0 / float(h.tail)]
    for k in range(len(h.values) - 1, -1, -1):
        length = float(h.breakpoints[k + 1] - h.breakpoints[k])
        decay = math.exp(-length)
        v = float(h.values[k])
        S.append(v * (1 - decay) + decay * S[-1])
        Sd.append((1 - decay) / v + decay * Sd[-1])
    S.reverse()
    Sd.reverse()
    return S, Sd


def kappa(h: WeightFunction, r: float, dual: bool = False) -> float:
    """kappa(r) (or kappa_d(r)) in closed form."""
    S, Sd = _tail_sums(h)
    for k, (start, end, v) in enumerate(h.segments()):
        if start <= r < end:
            if end == INF:
                return 1.0
            v = float(v)
            rel = (v * Sd[k + 1]) if dual else (S[k + 1] / v)
            return 1.0 + math.exp(r - float(end)) * (rel - 1.0)
    raise ValueError(f"r={r} outside R+")


def int_characteristic(h: WeightFunction) -> float:
    """[h]_int = integral over R+ of kappa + kappa_d - 2, summed exactly per piece."""
    S, Sd = _tail_sums(h)
    total = 0.0
    for k, v in enumerate(h.values):
        length = float(h.breakpoints[k + 1] - h.breakpoints[k])
        v = float(v)
        total += (1 - math.exp(-length)) * (S[k + 1] / v + v * Sd[k + 1] - 2)
    return total


def int_characteristic_quadrature(h: WeightFunction) -> float:
    """[h]_int by adaptive quadrature of kappa + kappa_d - 2; kappa = 1 on the tail."""
    total = 0.0
    for start, end, _ in list(h.segments())[:-1]:
        value, _ = integrate.quad(
            lambda r: kappa(h, r) + kappa(h, r, dual=True) - 2,
            float(start), float(end), epsabs=1e-13, epsrel=1e-12,
        )
        total += value
    return total


def sequences_and_identity(h: WeightFunction) -> dict:
    """
    Q_n, f_n, v_n, the renormalized weight h~ = h/f_n on [n, n+1), and the
    residual of the unit-interval L1 identity

        sum ||h~ + 1/h~ - 2||_{L1[n,n+1)} = sum (<h><1/h> - 1)_{[n,n+1)}

    with factor 1: on each unit interval <h~> = 1 and <1/h~> = <h><1/h>, and
    h~ + 1/h~ - 2 >= 0, so the L1 norm is the plain integral.
    """
    count = _last_index(h) + 2
    Q, f, pieces = [], [], []
    lhs, rhs = 0, 0
    for n in range(count):
        Q.append(h.defect(n, n + 2))
        fn = h.average(n, n + 1)
        f.append(fn)
        local = []
        for start, end, v in h.segments():
            lo, hi = max(start, n), min(end, n + 1)
            if hi > lo:
                local.append((lo, hi, exact_div(v, fn)))
        pieces.append(local)
        lhs += sum((hi - lo) * (w + exact_div(1, w) - 2) for lo, hi, w in local)
        rhs += h.defect(n, n + 1)

    ratios = [float(exact_div(f[n + 1], f[n])) for n in range(count - 1)]
    two_sided = max((max(q, 1 / q) / (1 + float(Qn)) for q, Qn in zip(ratios, Q)), default=0.0)
    near = [abs(q - 1) / math.sqrt(float(Qn)) for q, Qn in zip(ratios, Q) if 0 < Qn <= 1]
    return {
        "Q": Q,
        "f": f,
        "v": v_sequence(h, f),
        "h_tilde": pieces,
        "lhs": lhs,
        "rhs": rhs,
        "residual": abs(lhs - rhs),
        "ratio_constant": two_sided,
        "sqrt_constant": max(near, default=0.0),
    }


def v_sequence(h: WeightFunction, f: Optional[Sequence[Number]] = None) -> list[float]:
    """v_0 = 0, v_n = log(f_n / f_{n-1})."""
    if f is None:
        f = [h.average(n, n + 1) for n in range(_last_index(h) + 2)]
    return [0.0] + [math.log(float(f[n]) / float(f[n - 1])) for n in range(1, len(f))]


def _as_weight(h: Union[WeightFunction, Hamiltonian]) -> WeightFunction:
    return weight_from_hamiltonian(h) if isinstance(h, Hamiltonian) else h


def _refined_minimum(fn: Callable[[float], float], ts: list[float]) -> tuple[float, float]:
    """Minimum of fn over [ts[0], ts[-1]]: every local grid minimum polished by bounded Brent."""
    values = [fn(t) for t in ts]
    last = len(ts) - 1
    best_t, best_value = ts[int(np.argmin(values))], min(values)
    for k, v in enumerate(values):
        if (k > 0 and values[k - 1] < v) or (k < last and values[k + 1] < v):
            continue
        lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, last)]
        if hi <= lo:
            continue
        res = optimize.minimize_scalar(fn, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        if res.fun < best_value:
            best_t, best_value = float(res.x), float(res.fun)
    return best_t, best_value


def p1_witness(h: Union[WeightFunction, Hamiltonian], grid: int = P1_GRID) -> dict:
    """
    t_n in [3, 4] minimizing a_n(t) = <h><1/h> over [4n, 4n + t] (grid search
    refined by Brent), and the check sum (a_n(t_n) - 1) <= exp(10 K) - 1.
    """
    h = _as_weight(h)
    K = K_value(hamiltonian_from_weight(h)).K
    ts = np.linspace(3.0, 4.0, grid).tolist()
    t_n, a_n = [], []
    n = 0
    while 4 * n < h.t_end:
        t, a = _refined_minimum(lambda s, n=n: float(h.defect(4 * n, 4 * n + float(s))) + 1, ts)
        t_n.append(t)
        a_n.append(a)
        n += 1
    total = sum(a - 1 for a in a_n)
    bound = math.expm1(10 * K)
    return {
        "t": t_n,
        "a": a_n,
        "sum": total,
        "bound": bound,
        "slack": bound - total,
        "holds": total <= bound + 1e-12,
        "K": K,
    }


def local_lower_bound(h: Union[WeightFunction, Hamiltonian]) -> float:
    """Integral over R+ of sqrt(a(t)) t e^{-t}, a(t) = <h>_{[0,t]} <1/h>_{[0,t]}."""
    h = _as_weight(h)

    def integrand(t: float) -> float:
        if t <= 0:
            return 0.0
        a = float(h.average(0, t)) * float(h.average(0, t, inverse=True))
        return math.sqrt(a) * t * math.exp(-t)

    edges = [float(b) for b in h.breakpoints]
    total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        total += integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11)[0]
    total += integrate.quad(integrand, edges[-1], np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
    return total


def split_interval_report(h: WeightFunction, start: float, length: float, split: float) -> dict:
    """
    Ratios on I = [start, start + length) split at start + split*length,
    with |I-|/|I| = split >= 1/5, and the empirical constants they imply.
    """
    if not 0.2 <= split <= 1:
        raise ValueError(f"split must lie in [1/5, 1], got {split}")
    end, cut = start + length, start + split * length
    eta = float(h.defect(start, end))
    whole, left = float(h.average(start, end)), float(h.average(start, cut))
    upward = abs(whole / left - 1)
    downward = abs(left / whole - 1)
    left_defect = float(h.defect(start, cut))
    report = {
        "eta": eta,
        "ratio_whole_to_left": upward,
        "ratio_left_to_whole": downward,
        "left_defect": left_defect,
    }
    if eta > 0:
        report["c_ratio_whole_to_left"] = upward / math.sqrt(eta * (1 + eta))
        report["c_ratio_left_to_whole"] = downward / min(1.0, math.sqrt(eta))
        report["c_left_defect"] = left_defect / eta
    return report


def _exponential_bound_constant(integral: float, P: float) -> float:
    """Smallest c with integral <= c P e^{cP}."""
    if integral <= 0:
        return 0.0
    if P <= 0:
        return math.inf
    return optimize.brentq(lambda c: c * P * math.exp(c * P) - integral, 0.0, max(1.0, integral / P) + 50.0 / P)


def bound_report(h: Union[WeightFunction, Hamiltonian]) -> dict:
    """Entropy of diag(h, 1/h) against [h]_int, the local lower bound and the p1 witness."""
    h = _as_weight(h)
    H = hamiltonian_from_weight(h)
    K = K_value(H).K
    upper = int_characteristic(h)
    lower = local_lower_bound(h)
    witness = p1_witness(h)
    return {
        "K": K,
        "int_characteristic": upper,
        "upper_holds": K <= upper + 1e-12,
        "local_lower_bound": lower,
        "lower_holds": math.exp(K / 2) >= lower - 1e-10,
        "p1_sum": witness["sum"],
        "p1_bound": witness["bound"],
        "p1_holds": witness["holds"],
    }


def empirical_constants(family: Iterable[WeightFunction], alphas: Optional[Iterable] = None) -> dict:
    """
    Worst-case constants over a family: [h]_{2,l1} <= c [h, alpha],
    [h]_int <= c P e^{cP} with P = [h]_{2,l1}, and the two-sided ratio of
    K to the Szegő characteristic. alphas pairs one window sequence (or
    scalar) with each member, 7/2 everywhere when omitted.
    """
    weights = list(family)
    alphas = list(alphas) if alphas is not None else [Fraction(7, 2)] * len(weights)
    if len(alphas) != len(weights):
        raise ValueError(f"{len(alphas)} alpha sequences for {len(weights)} weights")
    c_bracket, c_int, ratio_lo, ratio_hi = 0.0, 0.0, math.inf, 0.0
    for h, alpha in zip(weights, alphas):
        P = float(a2l1(h))
        B = float(bracket(h, alpha))
        if B > 0:
            c_bracket = max(c_bracket, P / B)
        c_int = max(c_int, _exponential_bound_constant(int_characteristic(h), P))
        H = hamiltonian_from_weight(h)
        K = K_value(H).K
        Kt = float(szego_characteristic(H)["value"])
        if K > 0 and Kt > 0:
            ratio_lo, ratio_hi = min(ratio_lo, K / Kt), max(ratio_hi, K / Kt)
    return {
        "bracket_constant": c_bracket,
        "int_constant": c_int,
        "entropy_ratio_min": ratio_lo,
        "entropy_ratio_max": ratio_hi,
        "family_size": len(weights),
    }


if __name__ == "__main__":
    h = WeightFunction((0, 1), (2,), 1)
    print("[h]_2,l1 =", a2l1(h))
    print("[h]_int  =", int_characteristic(h))
    print(bound_report(h))
