"""
canon-szego — Weyl
Weyl–Titchmarsh function m(z), nested Weyl disks, the spectral density on R
and the Herglotz coefficients of diagonal Hamiltonians.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from tools import config
from tools.errors import HorizonError, UnsupportedError, ValidationError
from tools.hamiltonian import INF, Hamiltonian, Number, Piece
from tools.transfer import TransferMatrix, solve, solve_array

logger = logging.getLogger(__name__)

EXACT_TAIL = "exact-tail"
DISK_LIMIT = "disk-limit"
HORIZON_START = 1.0
HORIZON_CAP = 2.0 ** 20


@dataclass(frozen=True)
class WeylResult:
    m_value: complex
    radius: float
    route: str
    t: Optional[float] = None


@dataclass(frozen=True)
class HerglotzCoefficients:
    a: float
    b: Number


def weyl_fraction(M: TransferMatrix, omega: Optional[float] = 0.0):
    """(omega*Phi+ + Phi-)/(omega*Theta+ + Theta-); omega = None or inf gives Phi+/Theta+."""
    if omega is None or (isinstance(omega, float) and math.isinf(omega)):
        return M.phi_plus / M.theta_plus
    return (omega * M.phi_plus + M.phi_minus) / (omega * M.theta_plus + M.theta_minus)


def tail_m(tail: Piece) -> complex:
    """m of the constant det-positive Hamiltonian [[a, c], [c, d]]: (c + i*sqrt(ad - c^2))/a."""
    if not tail.det > 0:
        raise UnsupportedError("tail_m needs a det-positive tail")
    return complex(float(tail.h12), math.sqrt(float(tail.det))) / float(tail.h11)


def _exact(H: Hamiltonian, z) -> complex:
    M = solve(H, H.t_end, z)
    tail = H.tail
    if tail.det > 0:
        mr = tail_m(tail)
        return (M.phi_plus + mr * M.phi_minus) / (M.theta_plus + mr * M.theta_minus)
    phi = tail.angle()
    c, s = math.cos(phi), math.sin(phi)
    if tail.is_type_zero():
        c, s = 1.0, 0.0
    elif tail.is_type_half_pi():
        c, s = 0.0, 1.0
    return (c * M.phi_plus + s * M.phi_minus) / (c * M.theta_plus + s * M.theta_minus)


def weyl_disk(H: Hamiltonian, t: float, z: complex, omega: Optional[float] = 0.0) -> tuple[complex, float]:
    """
    Point of the Weyl disk at horizon t and the certified radius.

    Args:
        H: Hamiltonian
        t: horizon, past any leading type-pi/2 interval
        z: spectral parameter with Im z > 0
        omega: real boundary parameter (None or inf for Phi+/Theta+)

    Returns:
        (point, radius) with |m(z) - point| <= radius
    """
    if not complex(z).imag > 0:
        raise ValueError(f"Weyl disks need Im z > 0, got {z}")
    M = solve(H, t, z)
    denom = (M.theta_plus * M.theta_minus.conjugate()).imag
    if M.theta_minus == 0 or not denom > 0:
        raise HorizonError("horizon too short", point=complex("nan"), radius=INF, t=t)
    return complex(weyl_fraction(M, omega)), 1.0 / denom


def _disk_limit(H: Hamiltonian, z: complex, tol: float, omega: Optional[float]) -> WeylResult:
    t = HORIZON_START
    best = (complex("nan"), INF, t)
    while t <= HORIZON_CAP:
        try:
            point, radius = weyl_disk(H, t, z, omega)
        except HorizonError:
            logger.debug("Weyl disk undefined at t=%g, doubling", t)
            t *= 2
            continue
        best = (point, radius, t)
        if radius < tol:
            logger.debug("Weyl disk radius %.3e < %.1e at t=%g", radius, tol, t)
            return WeylResult(point, radius, DISK_LIMIT, t)
        t *= 2
    raise HorizonError(f"Weyl disk radius did not reach tol={tol:g}", *best)


def m_function(H: Hamiltonian, z: complex, tol: Optional[float] = None,
               route: str = "auto", omega: Optional[float] = 0.0) -> WeylResult:
    """
    Weyl–Titchmarsh function at z.

    route "auto" and "exact" continue the transfer matrix at t_K with the
    constant tail in closed form; "disk" doubles the horizon until the Weyl
    disk radius drops below tol.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"m_function needs Im z > 0, got {z}")
    if route in ("auto", "exact"):
        return WeylResult(complex(_exact(H, z)), 0.0, EXACT_TAIL, float(H.t_end))
    if route == "disk":
        return _disk_limit(H, z, config.weyl_tol() if tol is None else tol, omega)
    raise ValueError(f"unknown route {route!r}")


def density_function(H: Hamiltonian) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized w(x) = Im m_r / |Theta+(t_K, x) + m_r Theta-(t_K, x)|^2."""
    mr = tail_m(H.tail)
    t_end = H.t_end

    def w(x):
        x = np.asarray(x, dtype=float)
        M = solve_array(H, t_end, x.astype(complex))
        F = M[..., 0, 0] + mr * M[..., 1, 0]
        return mr.imag / np.abs(F) ** 2

    return w


def spectral_density(H: Hamiltonian, x, eps: Optional[float] = None):
    """
    Density of the spectral measure at real x (scalar or array).

    Exact when the tail is det-positive; otherwise Im m(x + i*eps) when eps
    is given.
    """
    if H.tail.det > 0:
        value = density_function(H)(x)
        return float(value) if np.ndim(value) == 0 else value
    if eps is None:
        raise UnsupportedError("no det-positive tail: pass eps for the regularized density Im m(x + i*eps)")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    values = np.array([m_function(H, complex(v, eps)).m_value.imag for v in xs])
    return float(values[0]) if np.ndim(x) == 0 else values


def herglotz_b(H: Hamiltonian) -> HerglotzCoefficients:
    """a = 0 and b = integral of h2 over the leading type-pi/2 interval."""
    if not H.is_diagonal:
        raise UnsupportedError("Herglotz coefficients are extracted for diagonal Hamiltonians only")
    b = 0
    for start, end, piece in H.segments():
        if not piece.is_type_half_pi():
            break
        if end == INF:
            raise ValidationError("Hamiltonian is of type pi/2 everywhere (trivial)")
        b += piece.h22 * (end - start)
    return HerglotzCoefficients(a=0.0, b=b)


if __name__ == "__main__":
    from tools.hamiltonian import piecewise_diagonal

    bump = piecewise_diagonal([0, 1], [2, 1], [0.5, 1])
    print("m(i) =", m_function(bump, 1j))
    print("disk  =", m_function(bump, 1j, route="disk"))
    print("w(0) =", spectral_density(bump, 0.0))
