"""Surface and fiber kinematics at quadrature points.

All functions are vectorized over arbitrary leading axes: a quantity that is
a 3-vector per point has shape ``(..., 3)``, a surface tensor ``(..., 2, 2)``.
Greek indices map to array axes in the order they are written, e.g.
``gamma[..., g, a, b]`` is the Christoffel symbol with upper index ``g``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class SingularSurfaceError(ValueError):
    """Tangent vectors are (nearly) parallel."""


class CollapsedFiberError(ValueError):
    """Fiber stretch is not positive."""


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


@dataclass
class SurfaceConfig:
    """Differential geometry of a surface at a set of points."""

    a: np.ndarray       # (..., 2, 3) covariant tangents a_alpha
    da: np.ndarray      # (..., 2, 2, 3) parametric derivatives a_{alpha,beta}
    met: np.ndarray     # (..., 2, 2) a_{alpha beta}
    inv: np.ndarray     # (..., 2, 2) a^{alpha beta}
    acon: np.ndarray    # (..., 2, 3) contravariant tangents a^alpha
    n: np.ndarray       # (..., 3) unit normal
    gamma: np.ndarray   # (..., 2, 2, 2) Gamma^g_{ab}
    b: np.ndarray       # (..., 2, 2) b_{alpha beta}
    jac: np.ndarray     # (...) |a_1 x a_2|

    @property
    def mean_curvature(self) -> np.ndarray:
        return 0.5 * np.einsum("...ab,...ab->...", self.inv, self.b)


def surface_config(dN: np.ndarray, ddN: np.ndarray, xe: np.ndarray, tol: float = 1e-12) -> SurfaceConfig:
    """Geometry from basis derivatives and element control points.

    Parameters
    ----------
    dN : (..., 2, n)
    ddN : (..., 2, 2, n)
    xe : (..., n, 3)
        Control point positions (broadcast against the point axes).
    """
    a = np.einsum("...an,...ni->...ai", dN, xe)
    da = np.einsum("...abn,...ni->...abi", ddN, xe)
    return surface_config_from_vectors(a, da, tol)


def surface_config_from_vectors(a: np.ndarray, da: np.ndarray, tol: float = 1e-12) -> SurfaceConfig:
    met = np.einsum("...ai,...bi->...ab", a, a)
    cr = np.cross(a[..., 0, :], a[..., 1, :])
    jac = np.linalg.norm(cr, axis=-1)
    scale = np.linalg.norm(a[..., 0, :], axis=-1) * np.linalg.norm(a[..., 1, :], axis=-1)
    if np.any(~(jac > tol * scale)):
        raise SingularSurfaceError("degenerate surface tangents")
    n = cr / jac[..., None]
    det = jac**2
    inv = np.empty_like(met)
    inv[..., 0, 0] = met[..., 1, 1] / det
    inv[..., 1, 1] = met[..., 0, 0] / det
    inv[..., 0, 1] = -met[..., 0, 1] / det
    inv[..., 1, 0] = inv[..., 0, 1]
    acon = np.einsum("...ab,...bi->...ai", inv, a)
    gamma = np.einsum("...abi,...gi->...gab", da, acon)
    b = np.einsum("...abi,...i->...ab", da, n)
    return SurfaceConfig(a=a, da=da, met=met, inv=inv, acon=acon, n=n, gamma=gamma, b=b, jac=jac)


# --------------------------------------------------------------------------
# fiber direction fields


class FiberField:
    """Reference fiber direction field ``L(X)``.

    Subclasses return the Cartesian unit direction and its spatial gradient
    ``dL_i/dX_j`` at reference points.
    """

    def __call__(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def components(self, ref: SurfaceConfig, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Contravariant components ``L^alpha`` and derivatives ``L^alpha_{,beta}``.

        The Cartesian direction is projected onto the reference tangent plane
        and renormalized; the derivative of this projection is exact.
        """
        Lc, gradL = self(X)
        A, Acon, N = ref.a, ref.acon, ref.n
        lt = np.einsum("...i,...ai->...a", Lc, Acon)
        # d(A^alpha)/d(xi^beta) = -Gamma^alpha_{beta g} A^g + B_{beta g} A^{g alpha} N
        dAcon = (-np.einsum("...abg,...gi->...abi", ref.gamma, Acon)
                 + np.einsum("...bg,...ga,...i->...abi", ref.b, ref.inv, N))
        dLc = np.einsum("...ij,...bj->...bi", gradL, A)  # dL/dxi^beta
        dlt = np.einsum("...bi,...ai->...ab", dLc, Acon) + np.einsum("...i,...abi->...ab", Lc, dAcon)
        s2 = np.einsum("...ab,...a,...b->...", ref.met, lt, lt)
        dmet = np.einsum("...agi,...bi->...abg", ref.da, ref.a)
        dmet = dmet + np.swapaxes(dmet, -3, -2)  # d(A_ab)/d(xi^g)
        ds2 = (np.einsum("...abg,...a,...b->...g", dmet, lt, lt)
               + 2.0 * np.einsum("...ab,...a,...bg->...g", ref.met, lt, dlt))
        s = np.sqrt(s2)
        L = lt / s[..., None]
        dL = dlt / s[..., None, None] - 0.5 * lt[..., :, None] * ds2[..., None, :] / (s2 * s)[..., None, None]
        return L, dL


class ConstantFiber(FiberField):
    """Spatially constant direction (straight fibers on a flat sheet)."""

    def __init__(self, direction):
        d = np.asarray(direction, dtype=float)
        self.direction = d / np.linalg.norm(d)

    def __call__(self, X):
        X = np.asarray(X)
        L = np.broadcast_to(self.direction, X.shape).copy()
        return L, np.zeros(X.shape + (3,))

    def __repr__(self):
        return f"ConstantFiber({self.direction.tolist()})"


class CircumferentialFiber(FiberField):
    """Circles about the e3 axis, counter-clockwise: ``L = e3 x X / |X|``."""

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        x, y = X[..., 0], X[..., 1]
        r2 = x * x + y * y
        r = np.sqrt(r2)
        r3 = r2 * r
        L = np.zeros(X.shape)
        L[..., 0] = -y / r
        L[..., 1] = x / r
        g = np.zeros(X.shape + (3,))
        g[..., 0, 0] = x * y / r3
        g[..., 0, 1] = -x * x / r3
        g[..., 1, 0] = y * y / r3
        g[..., 1, 1] = -x * y / r3
        return L, g

    def __repr__(self):
        return "CircumferentialFiber()"


# --------------------------------------------------------------------------
# fiber state


@dataclass
class FiberState:
    """Fiber frame and in-plane curvature quantities of one family."""

    lam: np.ndarray       # (...) stretch
    L: np.ndarray         # (..., 2) L^alpha (reference data)
    dL: np.ndarray        # (..., 2, 2) L^alpha_{,beta}
    ell: np.ndarray       # (..., 3)
    ell_con: np.ndarray   # (..., 2) ell^alpha
    ell_cov: np.ndarray   # (..., 2) ell_alpha
    c: np.ndarray         # (..., 3) c = n x ell
    c_con: np.ndarray     # (..., 2)
    c_cov: np.ndarray     # (..., 2)
    Lhat: np.ndarray      # (..., 2, 2) Lhat^alpha_{,beta}
    Lhat_cov: np.ndarray  # (..., 2, 2) Lhat_{alpha,beta}
    Gc: np.ndarray        # (..., 2, 2) Gamma^c_{ab} = c . a_{a,b}
    Gl: np.ndarray        # (..., 2, 2) Gamma^ell_{ab}
    cbar_d: np.ndarray    # (..., 2, 3) projected director gradient cbar_{,alpha}
    bbar: np.ndarray      # (..., 2, 2)
    auxL: np.ndarray      # (..., 2, 2) script-L^g_a  [g, a]
    auxC: np.ndarray      # (..., 2, 2) script-C^g_a
    auxN: np.ndarray      # (..., 2, 2) script-N^g_a

    @property
    def geodesic_curvature(self) -> np.ndarray:
        """Current geodesic curvature ``bbar_{ab} ell^a ell^b``."""
        return np.einsum("...ab,...a,...b->...", self.bbar, self.ell_con, self.ell_con)


def fiber_state(cur: SurfaceConfig, L: np.ndarray, dL: np.ndarray, lam_tol: float = 1e-10) -> FiberState:
    """Fiber frame in configuration ``cur`` for reference components ``L, dL``."""
    lam2 = np.einsum("...ab,...a,...b->...", cur.met, L, L)
    if np.any(~(lam2 > lam_tol**2)):
        raise CollapsedFiberError("fiber stretch collapsed")
    lam = np.sqrt(lam2)
    ell_con = L / lam[..., None]
    ell = np.einsum("...a,...ai->...i", ell_con, cur.a)
    ell_cov = np.einsum("...ab,...b->...a", cur.met, ell_con)
    c = np.cross(cur.n, ell)
    c_cov = np.einsum("...i,...ai->...a", c, cur.a)
    c_con = np.einsum("...i,...ai->...a", c, cur.acon)
    Lhat = dL / lam[..., None, None]
    Lhat_cov = np.einsum("...ag,...gb->...ab", cur.met, Lhat)
    Gc = np.einsum("...i,...abi->...ab", c, cur.da)
    Gl = np.einsum("...i,...abi->...ab", ell, cur.da)
    # coef_a = c^g Lhat_{g,a} + ell^g Gamma^c_{ga}
    coef = np.einsum("...g,...ga->...a", c_con, Lhat_cov) + np.einsum("...g,...ga->...a", ell_con, Gc)
    cbar_d = -coef[..., :, None] * ell[..., None, :]
    t = np.einsum("...ai,...bi->...ab", cbar_d, cur.a)
    bbar = -0.5 * (t + np.swapaxes(t, -1, -2))
    auxL = -ell_con[..., :, None] * coef[..., None, :]
    lcoef = np.einsum("...b,...ba->...a", ell_cov, Lhat) + np.einsum("...b,...ba->...a", ell_con, Gl)
    auxC = Lhat - ell_con[..., :, None] * lcoef[..., None, :]
    auxN = c_con[..., :, None] * np.einsum("...b,...ba->...a", ell_con, cur.b)[..., None, :]
    return FiberState(lam=lam, L=L, dL=dL, ell=ell, ell_con=ell_con, ell_cov=ell_cov, c=c,
                      c_con=c_con, c_cov=c_cov, Lhat=Lhat, Lhat_cov=Lhat_cov, Gc=Gc, Gl=Gl,
                      cbar_d=cbar_d, bbar=bbar, auxL=auxL, auxC=auxC, auxN=auxN)


def inplane_curvature(state: FiberState, cur: SurfaceConfig) -> np.ndarray:
    """``bbar_{ab} = -1/2 (cbar_{,a} . a_b + cbar_{,b} . a_a)``."""
    t = np.einsum("...ai,...bi->...ab", state.cbar_d, cur.a)
    return -0.5 * (t + np.swapaxes(t, -1, -2))


# --------------------------------------------------------------------------
# invariants


@dataclass
class DeformationInvariants:
    """Strain measures and the tensor ingredients the materials need.

    Per-family arrays carry the family on axis ``-1`` (scalars) or right
    after the point axes (tensors), e.g. ``L[..., i, alpha]``.
    """

    met: np.ndarray        # (..., 2, 2) a_ab
    inv: np.ndarray        # (..., 2, 2) a^ab
    Amet: np.ndarray       # (..., 2, 2) A_ab
    Ainv: np.ndarray       # (..., 2, 2) A^ab
    J: np.ndarray          # (...) area stretch
    b: np.ndarray          # (..., 2, 2)
    B: np.ndarray
    L: np.ndarray          # (..., nf, 2)
    c0: np.ndarray         # (..., nf, 2) reference director c0^alpha
    lam: np.ndarray        # (..., nf)
    Lam: np.ndarray        # (..., nf) squared stretch
    Kn: np.ndarray         # (..., nf)
    Tg: np.ndarray         # (..., nf)
    Kg: np.ndarray         # (..., nf)
    bbar: np.ndarray       # (..., nf, 2, 2)
    Bbar: np.ndarray       # (..., nf, 2, 2)
    gamma: np.ndarray      # (..., nf, nf) a_ab L_i^a L_j^b
    gamma0: np.ndarray     # (..., nf, nf) A_ab L_i^a L_j^b
    gamma_hat: Optional[np.ndarray]  # (...) ell_1 . ell_2 for two families
    Lpre: Optional[np.ndarray] = None  # (..., nf) a^pre_ab L^ab, for stabilization
    R: Optional[np.ndarray] = None     # (...) reference radius |X| (graded moduli)

    @property
    def n_families(self) -> int:
        return self.L.shape[-2]


def deformation_invariants(ref: SurfaceConfig, ref_fibers: list[FiberState],
                           cur: SurfaceConfig, cur_fibers: list[FiberState]) -> DeformationInvariants:
    if len(ref_fibers) != len(cur_fibers):
        raise ValueError("family count differs between configurations")
    nf = len(cur_fibers)
    shape = cur.met.shape[:-2]
    if nf:
        L = np.stack([f.L for f in ref_fibers], axis=-2)
        c0 = np.stack([f.c_con for f in ref_fibers], axis=-2)
        lam = np.stack([f.lam for f in cur_fibers], axis=-1)
        bbar = np.stack([f.bbar for f in cur_fibers], axis=-3)
        Bbar = np.stack([f.bbar for f in ref_fibers], axis=-3)
    else:
        L = np.zeros(shape + (0, 2))
        c0 = np.zeros(shape + (0, 2))
        lam = np.zeros(shape + (0,))
        bbar = np.zeros(shape + (0, 2, 2))
        Bbar = np.zeros(shape + (0, 2, 2))
    K = cur.b - ref.b
    Kn = np.einsum("...ab,...ia,...ib->...i", K, L, L)
    Tg = np.einsum("...ab,...ia,...ib->...i", K, L, c0)
    Kg = np.einsum("...iab,...ia,...ib->...i", bbar - Bbar, L, L)
    gamma = np.einsum("...ab,...ia,...jb->...ij", cur.met, L, L)
    gamma0 = np.einsum("...ab,...ia,...jb->...ij", ref.met, L, L)
    gh = None
    if nf == 2:
        gh = _dot(cur_fibers[0].ell, cur_fibers[1].ell)
    return DeformationInvariants(
        met=cur.met, inv=cur.inv, Amet=ref.met, Ainv=ref.inv, J=cur.jac / ref.jac,
        b=cur.b, B=ref.b, L=L, c0=c0, lam=lam, Lam=lam**2, Kn=Kn, Tg=Tg, Kg=Kg,
        bbar=bbar, Bbar=Bbar, gamma=gamma, gamma0=gamma0, gamma_hat=gh,
    )
