"""Closed-form and semi-analytic reference solutions for the homogeneous tests.

Every oracle here is self-contained: it works with scalar stretches and the
energy density written out by hand, and never calls the finite element code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OracleRangeError(ValueError):
    """Input outside the validity range of a closed-form solution."""


@dataclass(frozen=True)
class OracleValue:
    value: float
    kind: str  # "closed-form" or "derived"


def pure_shear(lam: float, mu: float = 1.0, eps_L: float = 2.0, eps_a: float = 1.0, L0: float = 1.0):
    """Reactions ``(R_x, R_y)`` of the diagonal-fiber square mapped to ``l x h``.

    ``l = lam L0`` and ``h = L0 / lam``.
    """
    if lam <= 0:
        raise OracleRangeError("stretch must be positive")
    h = L0 / lam
    ell = lam * L0
    l2, l4 = lam**2, lam**4
    Rx = h * (mu * (l2 - 1.0) + 0.25 * eps_L * (l4 - 2.0 * l2 + 1.0) + 0.25 * eps_a * (l4 - 1.0))
    Ry = ell * (mu * (1.0 / l2 - 1.0) + eps_L * (l4 - 2.0 * l2 + 1.0) / (4.0 * l4)
                - eps_a * (l4 - 1.0) / (4.0 * l4))
    return Rx, Ry


def picture_frame(phi: float, eps_a: float = 1.0, L0: float = 1.0) -> float:
    """Tangential edge reaction of the trellis-sheared frame; ``phi`` in radians."""
    if not 0.0 < phi < 0.5 * np.pi:
        raise OracleRangeError("phi must lie in (0, 90 deg)")
    return -eps_a * np.cos(2.0 * phi) * L0 / 2.0


def shear_angle(phi: float) -> float:
    """Trellis shear angle ``2 phi - 90 deg`` (radians in, degrees out)."""
    return np.degrees(2.0 * phi) - 90.0


def pure_bending(M_ext: float, mu: float = 10.0, beta_n: float = 1.0, power: int = 4):
    """Mean curvature ``H`` and axial stretch ``lam1`` of the bent sheet.

    ``power`` selects the stretch exponent in ``H = M / (2 beta_n lam1^power)``.
    The default follows the printed relation; a hand energy balance of the
    same model gives ``power = 3`` (see ``pure_bending_energy_balance``).
    """
    disc = 0.25 - M_ext**2 / (mu * beta_n)
    if disc < -1e-15:
        raise OracleRangeError(f"|M_ext| = {abs(M_ext):.6g} exceeds sqrt(mu beta_n)/2")
    lam1 = np.sqrt(0.5 + np.sqrt(max(disc, 0.0)))
    H = M_ext / (2.0 * beta_n * lam1**power)
    return H, lam1


def pure_bending_energy_balance(M_ext: float, mu: float = 10.0, beta_n: float = 1.0):
    """``(H, lam1)`` minimizing the potential of a uniformly bent strip.

    Per unit reference area the strip stores
    ``mu/2 (lam^2 - 1 - 2 ln lam) + beta_n/2 (lam^2 kappa)^2`` and the edge
    moments do work ``M kappa lam``; ``H = kappa / 2``.  The stationarity
    conditions are solved numerically (Newton on the 2x2 gradient).
    """
    def grad(z):
        lam, k = z
        return np.array([mu * (lam - 1.0 / lam) + 2.0 * beta_n * lam**3 * k**2 - M_ext * k,
                         beta_n * lam**4 * k - M_ext * lam])

    def hess(z):
        lam, k = z
        return np.array([[mu * (1.0 + 1.0 / lam**2) + 6.0 * beta_n * lam**2 * k**2,
                          4.0 * beta_n * lam**3 * k - M_ext],
                         [4.0 * beta_n * lam**3 * k - M_ext, beta_n * lam**4]])

    z = np.array([1.0, M_ext / beta_n])
    for _ in range(100):
        dz = np.linalg.solve(hess(z), -grad(z))
        z = z + dz
        if np.linalg.norm(dz) < 1e-15 * max(1.0, np.linalg.norm(z)):
            break
    return 0.5 * z[1], z[0]


# --------------------------------------------------------------------------
# uniaxial tension: homogeneous deformation + bisection


@dataclass(frozen=True)
class UniaxialParams:
    mu: float = 1.0
    eps_L: float = 2.0
    eps_a: float = 1.0
    L0: float = 1.0
    fibers: tuple = ((2.0, 1.0), (2.0, -1.0))


def _uniaxial_energy(l1, l2, p: UniaxialParams):
    """Energy density for ``F = diag(l1, l2)`` (accepts complex input)."""
    dirs = [np.asarray(d, float) / np.linalg.norm(d) for d in p.fibers]
    W = 0.5 * p.mu * (l1 * l1 + l2 * l2 - 2.0 - 2.0 * np.log(l1 * l2))
    stretched = [(l1 * d[0], l2 * d[1]) for d in dirs]
    for s in stretched:
        Lam = s[0] * s[0] + s[1] * s[1]
        W = W + 0.125 * p.eps_L * (Lam - 1.0) ** 2
    for i in range(len(dirs)):
        for j in range(i + 1, len(dirs)):
            g = stretched[i][0] * stretched[j][0] + stretched[i][1] * stretched[j][1]
            g0 = dirs[i] @ dirs[j]
            W = W + 0.25 * p.eps_a * (g - g0) ** 2
    return W


def _dW(l1, l2, p, which, h=1e-30):
    """Complex-step derivative of the energy w.r.t. ``l1`` or ``l2``."""
    if which == 1:
        return float(np.imag(_uniaxial_energy(l1 + 1j * h, l2, p)) / h)
    return float(np.imag(_uniaxial_energy(l1, l2 + 1j * h, p)) / h)


def uniaxial_lateral_stretch(l1: float, p: UniaxialParams = UniaxialParams(), tol: float = 1e-15):
    """Solve ``dW/dl2 = 0`` for the free lateral stretch by bisection."""
    lo, hi = 1e-3, 1.0
    while _dW(l1, hi, p, 2) < 0.0:
        hi *= 2.0
        if hi > 1e3:
            raise OracleRangeError("no bracket for lateral stretch")
    flo = _dW(l1, lo, p, 2)
    if flo > 0:
        raise OracleRangeError("no bracket for lateral stretch")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _dW(l1, mid, p, 2)
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    else:
        raise OracleRangeError("bisection did not converge")
    return 0.5 * (lo + hi)


def uniaxial(u_x: float, p: UniaxialParams = UniaxialParams()):
    """Reaction ``R_x`` on the loaded edge of a ``2 L0 x L0`` sheet.

    Returns ``(R_x, lam2, residual)``, ``residual`` being ``dW/dl2`` at the
    solution (the lateral traction, which must vanish).
    """
    l1 = 1.0 + u_x / (2.0 * p.L0)
    if l1 <= 0:
        raise OracleRangeError("stretch must be positive")
    if u_x == 0.0:
        return 0.0, 1.0, 0.0
    l2 = uniaxial_lateral_stretch(l1, p)
    return p.L0 * _dW(l1, l2, p, 1), l2, _dW(l1, l2, p, 2)


# --------------------------------------------------------------------------
# annulus


def annulus(lam: float, eps_L: float = 2.0, mu: float = 0.0, Ri: float = 0.5, Ro: float = 1.0) -> float:
    """Hoop resultant across a radial cut of the uniformly expanded annulus."""
    if lam <= 0:
        raise OracleRangeError("stretch must be positive")
    return lam * (0.5 * eps_L * (lam**2 - 1.0) * (Ro * np.log(Ro) - Ri * np.log(Ri))
                  + mu * (1.0 - lam**-2) * (Ro - Ri))
