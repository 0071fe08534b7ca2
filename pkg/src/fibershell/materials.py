"""Hyperelastic fabric models.

Each model maps :class:`~fibershell.kinematics.DeformationInvariants` to a
:class:`MaterialResponse` holding the energy density, the stress and moment
components and the material tangents.  Conventions:

* ``tau = 2 dW/da``, ``M0 = dW/db``, ``Mbar_i = dW/dbbar_i``
* ``c = 4 d2W/da da``, ``d = 2 d2W/da db``, ``e = 2 d2W/db da``,
  ``f = d2W/db db``, ``dbar = 2 d2W/da dbbar``, ``ebar = 2 d2W/dbbar da``,
  ``fbar = d2W/dbbar dbbar``, ``gbar = d2W/db dbbar``, ``hbar = d2W/dbbar db``

Four-index tangents are stored with all minor symmetries, shape
``(..., 2, 2, 2, 2)``; per-family blocks carry the family axis first after the
point axes.  ``None`` denotes an identically zero block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .kinematics import DeformationInvariants

VOIGT = ((0, 0), (1, 1), (0, 1))


def voigt_vector(T: np.ndarray) -> np.ndarray:
    """``(..., 2, 2) -> (..., 3)`` as ``(11, 22, 12)``."""
    return np.stack([T[..., 0, 0], T[..., 1, 1], T[..., 0, 1]], axis=-1)


def voigt_matrix(T: np.ndarray) -> np.ndarray:
    """``(..., 2, 2, 2, 2) -> (..., 3, 3)`` with rows/cols ``(11, 22, 12)``."""
    out = np.empty(T.shape[:-4] + (3, 3))
    for i, (a, b) in enumerate(VOIGT):
        for j, (c, d) in enumerate(VOIGT):
            out[..., i, j] = T[..., a, b, c, d]
    return out


def sym_outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``(u^a v^b)^sym``."""
    t = np.einsum("...a,...b->...ab", u, v)
    return 0.5 * (t + np.swapaxes(t, -1, -2))


def outer4(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("...ab,...cd->...abcd", A, B)


def _add(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x + y


@dataclass
class MaterialResponse:
    W: np.ndarray
    tau: np.ndarray
    M0: np.ndarray
    Mbar: np.ndarray
    c: Optional[np.ndarray] = None
    d: Optional[np.ndarray] = None
    e: Optional[np.ndarray] = None
    f: Optional[np.ndarray] = None
    dbar: Optional[np.ndarray] = None
    ebar: Optional[np.ndarray] = None
    fbar: Optional[np.ndarray] = None
    gbar: Optional[np.ndarray] = None
    hbar: Optional[np.ndarray] = None
    parts: dict = field(default_factory=dict)

    def __add__(self, other: "MaterialResponse") -> "MaterialResponse":
        parts = dict(self.parts)
        for k, v in other.parts.items():
            parts[k] = parts[k] + v if k in parts else v
        kw = {k: _add(getattr(self, k), getattr(other, k))
              for k in ("c", "d", "e", "f", "dbar", "ebar", "fbar", "gbar", "hbar")}
        return MaterialResponse(W=self.W + other.W, tau=self.tau + other.tau, M0=self.M0 + other.M0,
                                Mbar=self.Mbar + other.Mbar, parts=parts, **kw)

    # Voigt views used by the element
    @property
    def tau_v(self):
        return voigt_vector(self.tau)

    @property
    def M0_v(self):
        return voigt_vector(self.M0)

    @property
    def Mbar_v(self):
        return voigt_vector(self.Mbar)


class InvalidStateError(ValueError):
    """Non-physical deformation state (e.g. J <= 0)."""


def tension_branch_switch(lam, eps_L, tension_only: bool = True):
    """Effective fiber stiffness: ``eps_L`` for ``lam >= 1``, 0 below when tension-only."""
    if not tension_only:
        return np.full(np.shape(lam), float(eps_L))
    return np.where(np.asarray(lam) >= 1.0, eps_L, 0.0)


def _per_family(value, nf: int) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        return np.full(nf, float(v))
    if v.shape != (nf,):
        raise ValueError(f"expected {nf} per-family values, got {v.shape}")
    return v


def _zero_response(inv: DeformationInvariants) -> MaterialResponse:
    shape = inv.met.shape[:-2]
    nf = inv.n_families
    return MaterialResponse(W=np.zeros(shape), tau=np.zeros(shape + (2, 2)), M0=np.zeros(shape + (2, 2)),
                            Mbar=np.zeros(shape + (nf, 2, 2)))


# --------------------------------------------------------------------------
# simple fabric model


@dataclass
class SimpleFabricParams:
    """Parameters of the simple fabric model (units of ``eps0`` and ``eps0 L0^2``).

    ``K`` is the dilatation modulus of ``U = K/2 (J-1)^2``: ``None`` for
    ``U = 0``, a number, or a callable of the reference radius ``R``.
    ``eps_a`` is either a scalar (all pairs) or an ``nf x nf`` array.
    """

    mu: float = 0.0
    K: Union[None, float, Callable] = None
    eps_L: Union[float, Sequence[float]] = 0.0
    beta_n: Union[float, Sequence[float]] = 0.0
    beta_g: Union[float, Sequence[float]] = 0.0
    beta_tau: Union[float, Sequence[float]] = 0.0
    eps_a: Union[float, np.ndarray] = 0.0
    tension_only: bool = False

    def __post_init__(self):
        for name in ("mu", "eps_L", "beta_n", "beta_g", "beta_tau", "eps_a"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise ValueError(f"{name} must be >= 0")


def graded_bulk_modulus(eps_L: float) -> Callable:
    """``K(R) = (eps_L / 2) ln R`` for the homogeneous annulus expansion."""
    return lambda R: 0.5 * eps_L * np.log(R)


def simple_fabric(inv: DeformationInvariants, p: SimpleFabricParams, tangent: bool = True) -> MaterialResponse:
    nf = inv.n_families
    J = inv.J
    if np.any(J <= 0):
        raise InvalidStateError("non-positive area stretch J")
    a_inv, A_inv = inv.inv, inv.Ainv
    I1 = np.einsum("...ab,...ab->...", A_inv, inv.met)
    lnJ = np.log(J)

    if p.K is None:
        K = np.zeros_like(J)
    elif callable(p.K):
        if inv.R is None:
            raise ValueError("graded modulus needs reference radii")
        K = p.K(inv.R)
    else:
        K = np.full_like(J, float(p.K))
    U = 0.5 * K * (J - 1.0) ** 2
    dU = K * (J - 1.0)
    ddU = K

    W_matrix = U + 0.5 * p.mu * (I1 - 2.0 - 2.0 * lnJ)
    tau = (J * dU)[..., None, None] * a_inv + p.mu * (A_inv - a_inv)

    L = inv.L
    LL = np.einsum("...ia,...ib->...iab", L, L)
    epsL = _per_family(p.eps_L, nf)
    eps_eff = np.stack([tension_branch_switch(inv.lam[..., i], epsL[i], p.tension_only)
                        for i in range(nf)], axis=-1) if nf else np.zeros(J.shape + (0,))
    W_stretch = 0.125 * np.sum(eps_eff * (inv.Lam - 1.0) ** 2, axis=-1)
    tau = tau + 0.5 * np.einsum("...i,...iab->...ab", eps_eff * (inv.Lam - 1.0), LL)

    eps_a = np.asarray(p.eps_a, dtype=float)
    if eps_a.ndim == 0:
        eps_a = np.full((nf, nf), float(eps_a))
    W_angle = np.zeros_like(J)
    pairs = [(i, j) for i in range(nf) for j in range(i + 1, nf)]
    sym_ij = {}
    for i, j in pairs:
        dg = inv.gamma[..., i, j] - inv.gamma0[..., i, j]
        S = sym_outer(L[..., i, :], L[..., j, :])
        sym_ij[i, j] = S
        W_angle = W_angle + 0.25 * eps_a[i, j] * dg**2
        tau = tau + (eps_a[i, j] * dg)[..., None, None] * S

    bn = _per_family(p.beta_n, nf)
    bg = _per_family(p.beta_g, nf)
    bt = _per_family(p.beta_tau, nf)
    W_bend_out = 0.5 * np.sum(bn * inv.Kn**2, axis=-1)
    W_bend_in = 0.5 * np.sum(bg * inv.Kg**2, axis=-1)
    W_torsion = 0.5 * np.sum(bt * inv.Tg**2, axis=-1)
    c0L = sym_outer(inv.c0, L)  # (..., nf, 2, 2)
    M0 = (np.einsum("...i,...iab->...ab", bn * inv.Kn, LL)
          + np.einsum("...i,...iab->...ab", bt * inv.Tg, c0L))
    Mbar = (bg * inv.Kg)[..., None, None] * LL

    W = W_matrix + W_stretch + W_angle + W_bend_out + W_bend_in + W_torsion
    parts = {"matrix": W_matrix, "stretch": W_stretch, "angle": W_angle,
             "bend_out": W_bend_out, "bend_in": W_bend_in, "torsion": W_torsion}
    resp = MaterialResponse(W=W, tau=tau, M0=M0, Mbar=Mbar, parts=parts)
    if not tangent:
        return resp

    ii = np.einsum("...ac,...bd->...abcd", a_inv, a_inv)
    c = (-(J * dU - p.mu))[..., None, None, None, None] * (ii + np.swapaxes(ii, -1, -2)) \
        + (J * (dU + J * ddU))[..., None, None, None, None] * outer4(a_inv, a_inv)
    c = c + np.einsum("...i,...iab,...icd->...abcd", eps_eff, LL, LL)
    for i, j in pairs:
        c = c + 2.0 * eps_a[i, j] * outer4(sym_ij[i, j], sym_ij[i, j])
    f = (np.einsum("...i,...iab,...icd->...abcd", np.broadcast_to(bn, inv.Kn.shape), LL, LL)
         + np.einsum("...i,...iab,...icd->...abcd", np.broadcast_to(bt, inv.Kn.shape), c0L, c0L))
    fbar = np.einsum("...i,...iab,...icd->...iabcd", np.broadcast_to(bg, inv.Kn.shape), LL, LL)
    resp.c, resp.f, resp.fbar = c, f, fbar
    return resp


# --------------------------------------------------------------------------
# woven fabric model


@dataclass
class WovenFabricParams:
    """Woven fabric parameters (N, mm).  Defaults are the fitted values."""

    eps_L: Union[float, Sequence[float]] = 50.0        # N/mm
    beta_g: Union[float, Sequence[float]] = 4.8        # N mm
    mu: float = 1.6e-3                                 # N/mm
    alpha1: float = 305.0
    eta: float = 2.0e-3                                # N/mm
    alpha2: float = 5.4215
    tension_only: bool = False

    def __post_init__(self):
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValueError("alpha1, alpha2 must be positive")
        if self.mu < 0 or self.eta < 0 or np.any(np.asarray(self.eps_L) < 0) \
                or np.any(np.asarray(self.beta_g) < 0):
            raise ValueError("stiffnesses must be non-negative")


def shear_function(gh, p: WovenFabricParams):
    """``S(gh)`` and ``S'(gh)`` of the fiber-angle energy."""
    S = p.mu * np.arcsinh(p.alpha1 * gh) + p.eta * np.sinh(p.alpha2 * gh)
    dS = p.mu * p.alpha1 / np.sqrt(p.alpha1**2 * gh**2 + 1.0) + p.eta * p.alpha2 * np.cosh(p.alpha2 * gh)
    return S, dS


def woven_angle_energy(gh, p: WovenFabricParams):
    """Fiber-angle energy, shifted so that it vanishes at ``gh = 0``."""
    a1, a2 = p.alpha1, p.alpha2
    w = 0.5 * p.mu * (gh * np.arcsinh(a1 * gh) - np.sqrt(a1**2 * gh**2 + 1.0) / a1) \
        + 0.5 * p.eta / a2 * np.cosh(a2 * gh)
    w0 = -0.5 * p.mu / a1 + 0.5 * p.eta / a2
    return w - w0


def woven_fabric(inv: DeformationInvariants, p: WovenFabricParams, tangent: bool = True) -> MaterialResponse:
    nf = inv.n_families
    if nf != 2:
        raise ValueError("the woven model needs exactly two fiber families")
    lam = inv.lam
    L = inv.L
    LL = np.einsum("...ia,...ib->...iab", L, L)
    epsL = _per_family(p.eps_L, 2)
    eps_eff = np.stack([tension_branch_switch(lam[..., i], epsL[i], p.tension_only) for i in range(2)], axis=-1)
    W_stretch = 0.5 * np.sum(eps_eff * (lam - 1.0) ** 2, axis=-1)
    tau = np.einsum("...i,...iab->...ab", eps_eff * (lam - 1.0) / lam, LL)

    gh = inv.gamma_hat
    ell = L / lam[..., None]
    l1l1 = np.einsum("...a,...b->...ab", ell[..., 0, :], ell[..., 0, :])
    l2l2 = np.einsum("...a,...b->...ab", ell[..., 1, :], ell[..., 1, :])
    l12 = sym_outer(ell[..., 0, :], ell[..., 1, :]) - 0.5 * gh[..., None, None] * (l1l1 + l2l2)
    S, dS = shear_function(gh, p)
    W_angle = woven_angle_energy(gh, p)
    tau = tau + S[..., None, None] * l12

    bg = _per_family(p.beta_g, 2)
    W_bend_in = 0.5 * np.sum(bg * inv.Kg**2, axis=-1)
    Mbar = (bg * inv.Kg)[..., None, None] * LL
    shape = lam.shape[:-1]
    W = W_stretch + W_angle + W_bend_in
    parts = {"stretch": W_stretch, "angle": W_angle, "bend_in": W_bend_in}
    resp = MaterialResponse(W=W, tau=tau, M0=np.zeros(shape + (2, 2)), Mbar=Mbar, parts=parts)
    if not tangent:
        return resp
    c = np.einsum("...i,...iab,...icd->...abcd", eps_eff / lam**3, LL, LL)
    s12 = sym_outer(ell[..., 0, :], ell[..., 1, :])
    lsum = l1l1 + l2l2
    l4 = (-0.5 * outer4(s12, lsum) - 0.5 * outer4(lsum, l12)
          + 0.5 * gh[..., None, None, None, None] * (outer4(l1l1, l1l1) + outer4(l2l2, l2l2)))
    c = c + 2.0 * S[..., None, None, None, None] * l4 + 2.0 * dS[..., None, None, None, None] * outer4(l12, l12)
    resp.c = c
    resp.fbar = np.einsum("...i,...iab,...icd->...iabcd", np.broadcast_to(bg, inv.Kg.shape), LL, LL)
    return resp


# --------------------------------------------------------------------------
# compression stabilization


@dataclass
class StabilizationParams:
    eps_e: float = 0.0
    eps_v: float = 0.0

    def __post_init__(self):
        if self.eps_e < 0 or self.eps_v < 0:
            raise ValueError("stabilization parameters must be >= 0")


def stabilize_compression(inv: DeformationInvariants, p: StabilizationParams,
                          active: Optional[np.ndarray] = None, tangent: bool = True) -> MaterialResponse:
    """Additive elastic + viscous-like response for compressed fibers.

    ``active`` marks the (point, family) entries where the stabilization is
    switched on; by default ``lam < 1``.  ``inv.Lpre`` must hold
    ``a^pre_ab L^a L^b`` of the previous accepted step.
    """
    resp = _zero_response(inv)
    nf = inv.n_families
    if nf == 0 or (p.eps_e == 0 and p.eps_v == 0):
        resp.parts = {"stab": resp.W.copy()}
        return resp
    lam = inv.lam
    if active is None:
        active = lam < 1.0
    act = active.astype(float)
    if inv.Lpre is None:
        Lpre = np.ones_like(lam)
    else:
        Lpre = inv.Lpre
    if np.any(Lpre <= 0):
        raise InvalidStateError("non-positive previous-step metric")
    lt = np.sqrt(inv.Lam / Lpre)
    L = inv.L
    LL = np.einsum("...ia,...ib->...iab", L, L)
    lpre = LL / Lpre[..., None, None]
    W = 0.5 * np.sum(act * (p.eps_e * (lam - 1.0) ** 2 + p.eps_v * (lt - 1.0) ** 2), axis=-1)
    tau = (np.einsum("...i,...iab->...ab", act * p.eps_e * (lam - 1.0) / lam, LL)
           + np.einsum("...i,...iab->...ab", act * p.eps_v * (lt - 1.0) / lt, lpre))
    resp.W, resp.tau = W, tau
    resp.parts = {"stab": W}
    if tangent:
        resp.c = (np.einsum("...i,...iab,...icd->...abcd", act * p.eps_e / lam**3, LL, LL)
                  + np.einsum("...i,...iab,...icd->...abcd", act * p.eps_v / lt**3, lpre, lpre))
    return resp


# --------------------------------------------------------------------------
# material bindings used by the solver


class Material:
    """Callable binding of a model and its parameters."""

    def __call__(self, inv: DeformationInvariants, tangent: bool = True) -> MaterialResponse:
        raise NotImplementedError


def _stab_active(lam, eps_L, tension_only: bool) -> np.ndarray:
    """Compressed fibers whose tensile branch is switched off."""
    off = np.asarray(eps_L) == 0.0
    if tension_only:
        off = np.ones_like(off)
    return (lam < 1.0) & off


@dataclass
class SimpleFabric(Material):
    params: SimpleFabricParams
    stab: Optional[StabilizationParams] = None

    def __call__(self, inv, tangent=True):
        r = simple_fabric(inv, self.params, tangent)
        if self.stab is not None:
            act = _stab_active(inv.lam, _per_family(self.params.eps_L, inv.n_families), self.params.tension_only)
            r = r + stabilize_compression(inv, self.stab, act, tangent)
        return r


@dataclass
class WovenFabric(Material):
    params: WovenFabricParams
    stab: Optional[StabilizationParams] = None

    def __call__(self, inv, tangent=True):
        r = woven_fabric(inv, self.params, tangent)
        if self.stab is not None:
            act = _stab_active(inv.lam, _per_family(self.params.eps_L, 2), self.params.tension_only)
            r = r + stabilize_compression(inv, self.stab, act, tangent)
        return r
