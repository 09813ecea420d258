"""
canon-szego — Transfer
Closed-form solution of J M' = z H M for piecewise-constant H.

Entries are laid out as M = [[Theta+, Phi+], [Theta-, Phi-]]; every function
accepts a scalar z or a numpy array of z values (shape (...,) -> (..., 2, 2)).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import integrate

from tools.hamiltonian import Hamiltonian, Piece

logger = logging.getLogger(__name__)

J = np.array([[0.0, -1.0], [1.0, 0.0]])
SERIES_CUTOFF = 1e-4

Complex = Union[complex, np.ndarray]


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """M(t, z); entries are complex scalars or arrays of matching shape."""

    theta_plus: Complex
    phi_plus: Complex
    theta_minus: Complex
    phi_minus: Complex

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "TransferMatrix":
        if arr.ndim == 2:
            return cls(complex(arr[0, 0]), complex(arr[0, 1]), complex(arr[1, 0]), complex(arr[1, 1]))
        return cls(arr[..., 0, 0], arr[..., 0, 1], arr[..., 1, 0], arr[..., 1, 1])

    @property
    def array(self) -> np.ndarray:
        top = np.stack([np.asarray(self.theta_plus), np.asarray(self.phi_plus)], axis=-1)
        bottom = np.stack([np.asarray(self.theta_minus), np.asarray(self.phi_minus)], axis=-1)
        return np.stack([top, bottom], axis=-2)

    def det(self) -> Complex:
        return self.theta_plus * self.phi_minus - self.theta_minus * self.phi_plus

    def det_residual(self) -> float:
        """|det M - 1| relative to the size of the two products."""
        scale = np.abs(self.theta_plus * self.phi_minus) + np.abs(self.theta_minus * self.phi_plus)
        return float(np.max(np.abs(self.det() - 1) / np.maximum(1.0, scale)))


def sinc(w: np.ndarray) -> np.ndarray:
    """sin(w)/w with a Taylor branch near 0."""
    w2 = w * w
    series = 1 - w2 / 6 + w2 * w2 / 120 - w2 * w2 * w2 / 5040
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(w) / w
    return np.where(np.abs(w) < SERIES_CUTOFF, series, direct)


def step_array(piece: Piece, delta: float, z) -> np.ndarray:
    """exp(-z * delta * J H) as an array of shape z.shape + (2, 2)."""
    z = np.asarray(z, dtype=complex)
    JH = J @ piece.as_array()
    gen = np.asarray(-z * float(delta))[..., None, None] * JH
    eye = np.broadcast_to(np.eye(2, dtype=complex), gen.shape)
    if piece.det == 0:
        return eye + gen
    omega = np.asarray(z * float(delta) * math.sqrt(float(piece.det)))
    cos = np.asarray(np.cos(omega))
    sc = np.asarray(sinc(omega))
    return cos[..., None, None] * eye + sc[..., None, None] * gen


def step_matrix(piece: Piece, delta: float, z) -> TransferMatrix:
    """
    Propagator across one constant piece.

    Args:
        piece: the 2x2 block H_k
        delta: length of the stretch, > 0
        z: spectral parameter (scalar or array)

    Returns:
        TransferMatrix of exp(-z*delta*J*H_k)
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return TransferMatrix.from_array(step_array(piece, delta, z))


def _stretches(H: Hamiltonian, t: float):
    for start, end, piece in H.segments():
        if start >= t:
            break
        yield start, min(end, t), piece


def solve_array(H: Hamiltonian, t: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    M = np.broadcast_to(np.eye(2, dtype=complex), z.shape + (2, 2)).copy()
    for start, stop, piece in _stretches(H, t):
        M = step_array(piece, stop - start, z) @ M
    return M


def solve(H: Hamiltonian, t: float, z) -> TransferMatrix:
    """M(t, z) as the ordered product of piece propagators."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return TransferMatrix.from_array(solve_array(H, t, z))


def solve_path(H: Hamiltonian, ts: Sequence[float], z) -> list[TransferMatrix]:
    """M(t, z) at increasing times in one pass."""
    times = list(ts)
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("times must be nondecreasing")
    z = np.asarray(z, dtype=complex)
    M = np.broadcast_to(np.eye(2, dtype=complex), z.shape + (2, 2)).copy()
    out = []
    reached = 0.0
    for t in times:
        for start, end, piece in H.segments():
            lo, hi = max(start, reached), min(end, t)
            if hi > lo:
                M = step_array(piece, hi - lo, z) @ M
        reached = max(reached, t)
        out.append(TransferMatrix.from_array(M.copy()))
    return out


def dual_matrix(M: TransferMatrix) -> TransferMatrix:
    """J* M J, the transfer matrix of the dual Hamiltonian."""
    arr = np.asarray(M.array)
    return TransferMatrix.from_array(J.T @ arr @ J)


def mean_type_estimate(H: Hamiltonian, t: float, y: float) -> float:
    """log|Theta+(t, iy)| / y, which tends to xi_H(t) as y grows."""
    M = solve(H, t, 1j * y)
    return float(np.log(np.abs(M.theta_plus)) / y)


# ─── energy identity ─────────────────────────────────────────────────────────


def _small(x: float) -> bool:
    return abs(x) < 0.1


def _sinhc(x: float) -> float:
    if _small(x):
        return sum(x ** (2 * k) / math.factorial(2 * k + 1) for k in range(8))
    return math.sinh(x) / x


def _sinhc_minus_sinc(x: float, y: float) -> float:
    """sinh(x)/x - sin(y)/y without cancellation for small arguments."""
    if _small(x) and _small(y):
        return sum((x ** (2 * k) - (-1) ** k * y ** (2 * k)) / math.factorial(2 * k + 1) for k in range(1, 9))
    return _sinhc(x) - (math.sin(y) / y if y != 0 else 1.0)


def _sinhc_plus_sinc(x: float, y: float) -> float:
    return _sinhc(x) + (math.sin(y) / y if not _small(y) else
                        sum((-1) ** k * y ** (2 * k) / math.factorial(2 * k + 1) for k in range(8)))


def _one_minus_cos_over(x: float) -> float:
    if _small(x):
        return sum((-1) ** (k + 1) * x ** (2 * k - 1) / math.factorial(2 * k) for k in range(1, 9))
    return (1 - math.cos(x)) / x


def _cosh_minus_one_over(x: float) -> float:
    if _small(x):
        return sum(x ** (2 * k - 1) / math.factorial(2 * k) for k in range(1, 9))
    return (math.cosh(x) - 1) / x


def _hform(u: np.ndarray, Hk: np.ndarray, v: np.ndarray) -> complex:
    """u^* H v."""
    return complex(np.conj(u) @ Hk @ v)


def _piece_energy(piece: Piece, delta: float, z: complex, u: np.ndarray) -> float:
    """Integral over the piece of <H Theta, Theta> for Theta starting at u."""
    Hk = piece.as_array()
    if piece.det == 0:
        v = -z * (J @ Hk @ u)
        return (delta * _hform(u, Hk, u).real
                + delta ** 2 * _hform(u, Hk, v).real
                + delta ** 3 / 3 * _hform(v, Hk, v).real)
    root = math.sqrt(float(piece.det))
    b = -(J @ Hk @ u) / root
    kappa = z * root
    x, y = 2 * kappa.imag * delta, 2 * kappa.real * delta
    cc = delta / 2 * _sinhc_plus_sinc(x, y)
    ss = delta / 2 * _sinhc_minus_sinc(x, y)
    cs = delta / 2 * complex(_one_minus_cos_over(y), _cosh_minus_one_over(x))
    return (cc * _hform(u, Hk, u).real
            + ss * _hform(b, Hk, b).real
            + 2 * (cs * _hform(u, Hk, b)).real)


def _piece_energy_quad(piece: Piece, delta: float, z: complex, u: np.ndarray) -> float:
    Hk = piece.as_array()

    def integrand(tau: float) -> float:
        theta = step_array(piece, tau, z) @ u if tau > 0 else u
        return _hform(theta, Hk, theta).real

    value, _ = integrate.quad(integrand, 0.0, delta, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def energy_check(H: Hamiltonian, t: float, z: complex, route: str = "closed-form") -> dict:
    """
    Both sides of Im(Theta+ conj Theta-) = Im z * integral of <H Theta, Theta> over [0, t].

    Args:
        H: Hamiltonian
        t: horizon
        z: spectral parameter
        route: "closed-form" (exact per-piece integrals) or "quadrature"

    Returns:
        dict with lhs, rhs, absolute and relative residuals
    """
    piece_energy = _piece_energy if route == "closed-form" else _piece_energy_quad
    z = complex(z)
    theta = np.array([1.0 + 0j, 0.0 + 0j])
    total = 0.0
    for start, stop, piece in _stretches(H, t):
        delta = float(stop - start)
        total += piece_energy(piece, delta, z, theta)
        theta = step_array(piece, delta, z) @ theta
    lhs = float((theta[0] * np.conj(theta[1])).imag)
    rhs = z.imag * total
    absolute = abs(lhs - rhs)
    return {
        "lhs": lhs,
        "rhs": rhs,
        "absolute": absolute,
        "relative": absolute / max(1.0, abs(lhs), abs(rhs)),
    }


if __name__ == "__main__":
    from tools.hamiltonian import constant

    M = solve(constant(1, 1), 1.0, 1j)
    print("Theta+ =", M.theta_plus, "Theta- =", M.theta_minus)
    print(energy_check(constant(1, 1), 1.0, 1j))
