"""Element-level discrete operators in Voigt form.

Element DOF vectors are node-major: entry ``3*A + i`` is Cartesian
component ``i`` of control point ``A``.  Every routine is vectorized over
leading point axes (typically ``(E, Q)``).  The stiffness routines return
point arrays by default; ``reduce=True`` sums over the quadrature axis
inside a batched matrix product, which is how the solver assembles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .kinematics import FiberState, SurfaceConfig
from .materials import MaterialResponse, voigt_matrix, voigt_vector

_VOIGT = ((0, 0), (1, 1), (0, 1))


def _flat(t: np.ndarray) -> np.ndarray:
    """``(..., n, 3) -> (..., 3n)`` node-major."""
    return t.reshape(t.shape[:-2] + (t.shape[-2] * 3,))


def _flat2(t: np.ndarray) -> np.ndarray:
    """``(..., n, 3, m, 3) -> (..., 3n, 3m)``."""
    s = t.shape
    return t.reshape(s[:-4] + (s[-4] * 3, s[-2] * 3))


def _hat(T: np.ndarray) -> np.ndarray:
    """``(..., 2, 2, k) -> (..., k, 3)`` with columns ``[11, 22, 12+21]``."""
    return np.stack([T[..., 0, 0, :], T[..., 1, 1, :], T[..., 0, 1, :] + T[..., 1, 0, :]], axis=-1)


@dataclass
class ShapeArrays:
    """Discrete operators at a set of points (one entry per quadrature point)."""

    N: np.ndarray          # (..., n)
    dN: np.ndarray         # (..., 2, n)
    ddN: np.ndarray        # (..., 2, 2, n)
    Nsemi: np.ndarray      # (..., 2, 2, n) N;ab = N,ab - Gamma^g_ab N,g
    La: np.ndarray         # (..., 2, 2, 3n) N,a^T a_b
    Ln: np.ndarray         # (..., 2, 3n) N,a^T n
    Gn: np.ndarray         # (..., 2, 2, 3n) N;ab^T n
    C: np.ndarray          # (..., nf, 2, 3, 3n) director-gradient operator C,a
    Ga: np.ndarray         # (..., nf, 2, 2, 3n)
    La_hat: np.ndarray     # (..., 3n, 3)
    Gn_hat: np.ndarray     # (..., 3n, 3)
    Ga_hat: np.ndarray     # (..., nf, 3n, 3)

    @property
    def n_dof(self) -> int:
        return self.La.shape[-1]


def director_operator(dN: np.ndarray, ddN: np.ndarray, cur: SurfaceConfig, fib: FiberState) -> np.ndarray:
    """``C,a`` of one family, shape ``(..., 2, 3, 3n)``; ``dcbar_{,a} = C,a dx``."""
    n, c, ell = cur.n, fib.c, fib.ell
    nn = np.einsum("...i,...j->...ij", n, n)
    cc = np.einsum("...i,...j->...ij", c, c)
    ll = np.einsum("...i,...j->...ij", ell, ell)
    lc = np.einsum("...i,...j->...ij", ell, c)
    ln = np.einsum("...i,...j->...ij", ell, n)
    # M^g_a = L^g_a (nn + cc - ll) - C^g_a (l x c) - N^g_a (l x n)
    M = (np.einsum("...ga,...ij->...gaij", fib.auxL, nn + cc - ll)
         - np.einsum("...ga,...ij->...gaij", fib.auxC, lc)
         - np.einsum("...ga,...ij->...gaij", fib.auxN, ln))
    t1 = np.einsum("...gaij,...gA->...aiAj", M, dN)
    t2 = np.einsum("...g,...ij,...gaA->...aiAj", fib.ell_con, lc, ddN, optimize=True)
    out = t1 - t2
    return out.reshape(out.shape[:-2] + (out.shape[-2] * 3,))


def shape_arrays(N: np.ndarray, dN: np.ndarray, ddN: np.ndarray, cur: SurfaceConfig,
                 fibers: Sequence[FiberState]) -> ShapeArrays:
    nloc = dN.shape[-1]
    Nsemi = ddN - np.einsum("...gab,...gA->...abA", cur.gamma, dN)
    La = _flat(np.einsum("...aA,...bi->...abAi", dN, cur.a))
    Ln = _flat(np.einsum("...aA,...i->...aAi", dN, cur.n))
    Gn = _flat(np.einsum("...abA,...i->...abAi", Nsemi, cur.n))
    shape = dN.shape[:-2]
    if fibers:
        Cs, Gas = [], []
        for fib in fibers:
            Cf = director_operator(dN, ddN, cur, fib)
            # G^a_ab = -N,a^T cbar_{,b} - C,b^T a_a
            g1 = _flat(np.einsum("...aA,...bi->...abAi", dN, fib.cbar_d))
            g2 = np.einsum("...bik,...ai->...abk", Cf, cur.a)
            Cs.append(Cf)
            Gas.append(-g1 - g2)
        C = np.stack(Cs, axis=-4)
        Ga = np.stack(Gas, axis=-4)
    else:
        C = np.zeros(shape + (0, 2, 3, 3 * nloc))
        Ga = np.zeros(shape + (0, 2, 2, 3 * nloc))
    return ShapeArrays(N=N, dN=dN, ddN=ddN, Nsemi=Nsemi, La=La, Ln=Ln, Gn=Gn, C=C, Ga=Ga,
                       La_hat=_hat(La), Gn_hat=_hat(Gn), Ga_hat=_hat(Ga))


# --------------------------------------------------------------------------
# P/Q tensors of the in-plane bending geometric stiffness


@dataclass
class PQTensors:
    P: np.ndarray    # (..., 2, 2, 3, 3) P^{g b}
    Q: np.ndarray    # (..., 2, 2, 2, 3, 3) Q^{b g a}
    Mc: np.ndarray   # (..., 2) Mbar_c^a
    Ml: np.ndarray   # (..., 2) Mbar_l^a


def pq_tensors(Mbar: np.ndarray, cur: SurfaceConfig, fib: FiberState, split_nc: bool = True) -> PQTensors:
    """P and Q for one family with in-plane moment components ``Mbar``.

    The ``Mbar_c N`` part of the normal/director coupling is not symmetric in
    ``(g, b)``: ``Mbar_c^a N^g_a l^b`` multiplies ``n x c`` and its transpose
    ``c x n``.  ``split_nc=False`` puts their sum on the symmetric dyad
    instead, which fails the finite-difference check (regression tests only).
    """
    Mc = -np.einsum("...ab,...b->...a", Mbar, fib.c_cov)
    Ml = -np.einsum("...ab,...b->...a", Mbar, fib.ell_cov)
    lc, cc_ = fib.ell_con, fib.c_con
    sL, sC, sN = fib.auxL, fib.auxC, fib.auxN  # [g, a]

    def pair(coef, aux):
        # coef^a (aux^g_a l^b + aux^b_a l^g)
        t = np.einsum("...a,...ga,...b->...gb", coef, aux, lc, optimize=True)
        return t + np.swapaxes(t, -1, -2)

    Pcc = 1.5 * pair(Ml, sL) + pair(Mc, sC)
    Pll = -pair(Ml, sL)
    Pnn = (np.einsum("...a,...ba,...g->...gb", Ml, sC, cc_, optimize=True)
           + np.einsum("...a,...ba,...g->...gb", Ml, sL, lc, optimize=True)
           - np.einsum("...a,...b,...gad,...d->...gb", Ml, cc_, cur.gamma, lc, optimize=True)
           - np.einsum("...a,...ba,...g->...gb", Mc, sL, cc_, optimize=True)
           - np.einsum("...ga,...ba->...gb", Mbar, sL))
    Plc = -pair(Ml, sC) + pair(Mc, sL)
    Pln = -pair(Ml, sN)
    kap = np.einsum("...a,...ad,...d->...", Ml, cur.b, lc, optimize=True)
    Pnc = -kap[..., None, None] * (np.einsum("...g,...b->...gb", lc, lc) + np.einsum("...g,...b->...gb", cc_, cc_))
    McN = np.einsum("...a,...ga,...b->...gb", Mc, sN, lc, optimize=True)  # on n x c

    n, c, ell = cur.n, fib.c, fib.ell

    def dy(u, v):
        return np.einsum("...i,...j->...ij", u, v)

    cc, ll, nn = dy(c, c), dy(ell, ell), dy(n, n)
    lcs = dy(ell, c) + dy(c, ell)
    lns = dy(ell, n) + dy(n, ell)
    ncs = dy(n, c) + dy(c, n)
    P = (np.einsum("...gb,...ij->...gbij", Pcc, cc) + np.einsum("...gb,...ij->...gbij", Pll, ll)
         + np.einsum("...gb,...ij->...gbij", Pnn, nn) + np.einsum("...gb,...ij->...gbij", Plc, lcs)
         + np.einsum("...gb,...ij->...gbij", Pln, lns) + np.einsum("...gb,...ij->...gbij", Pnc, ncs))
    if split_nc:
        P = P + np.einsum("...gb,...ij->...gbij", McN, dy(n, c)) \
            + np.einsum("...gb,...ij->...gbij", np.swapaxes(McN, -1, -2), dy(c, n))
    else:
        P = P + np.einsum("...gb,...ij->...gbij", McN + np.swapaxes(McN, -1, -2), ncs)
    lbg = np.einsum("...b,...g->...bg", lc, lc)
    Q = (np.einsum("...bg,...a,...ij->...bgaij", lbg, Mc, cc, optimize=True)
         - np.einsum("...bg,...a,...ij->...bgaij", lbg, Ml, lcs, optimize=True)
         + np.einsum("...b,...g,...a,...ij->...bgaij", cc_, lc, Ml, nn, optimize=True))
    return PQTensors(P=P, Q=Q, Mc=Mc, Ml=Ml)


# --------------------------------------------------------------------------
# internal forces and tangents


def internal_force(sa: ShapeArrays, resp: MaterialResponse, wJ: np.ndarray) -> dict:
    """Point contributions ``{'tau', 'M', 'Mbar'}`` each ``(..., 3n)`` (weighted)."""
    w = wJ[..., None]
    f_tau = np.einsum("...ka,...a->...k", sa.La_hat, voigt_vector(resp.tau)) * w
    f_M = np.einsum("...ka,...a->...k", sa.Gn_hat, voigt_vector(resp.M0)) * w
    if sa.Ga_hat.shape[-3]:
        f_Mb = np.einsum("...fka,...fa->...k", sa.Ga_hat, voigt_vector(resp.Mbar)) * w
    else:
        f_Mb = np.zeros_like(f_tau)
    return {"tau": f_tau, "M": f_M, "Mbar": f_Mb}


def tangent_blocks(resp: MaterialResponse, nf: int, shape) -> np.ndarray:
    """Block Voigt tangent ``T`` such that ``k_mat = B T B^T`` with
    ``B = [La_hat, Gn_hat, Ga_hat_1 .. Ga_hat_nf]``."""
    m = 3 * (2 + nf)
    T = np.zeros(tuple(shape) + (m, m))

    def put(i, j, blk):
        if blk is not None:
            T[..., 3 * i:3 * i + 3, 3 * j:3 * j + 3] += voigt_matrix(blk)

    put(0, 0, resp.c)
    put(0, 1, resp.d)
    put(1, 0, resp.e)
    put(1, 1, resp.f)
    for k in range(nf):
        sel = (lambda t: None if t is None else t[..., k, :, :, :, :])
        put(0, 2 + k, sel(resp.dbar))
        put(2 + k, 0, sel(resp.ebar))
        put(2 + k, 2 + k, sel(resp.fbar))
        put(1, 2 + k, sel(resp.gbar))
        put(2 + k, 1, sel(resp.hbar))
    return T


def material_tangent(sa: ShapeArrays, resp: MaterialResponse, wJ: np.ndarray, reduce: bool = False) -> np.ndarray:
    """Weighted ``B T B^T`` contributions ``(..., 3n, 3n)``.

    With ``reduce`` the inputs must be ``(E, Q, ...)`` and the sum over the
    quadrature axis is returned, ``(E, 3n, 3n)``.
    """
    nf = sa.Ga_hat.shape[-3]
    B = np.concatenate([sa.La_hat, sa.Gn_hat] + [sa.Ga_hat[..., k, :, :] for k in range(nf)], axis=-1)
    T = tangent_blocks(resp, nf, B.shape[:-2])
    BT = np.matmul(B, T) * wJ[..., None, None]
    if not reduce:
        return np.matmul(BT, np.swapaxes(B, -1, -2))
    E, Q, K, M = B.shape
    BTr = BT.transpose(0, 2, 1, 3).reshape(E, K, Q * M)
    Br = B.transpose(0, 2, 1, 3).reshape(E, K, Q * M)
    return np.matmul(BTr, np.swapaxes(Br, -1, -2))


def _kron_scalar(S: np.ndarray) -> np.ndarray:
    """``(..., n, n) -> (..., 3n, 3n)`` as ``S (x) I3`` in node-major order."""
    n = S.shape[-1]
    out = np.zeros(S.shape[:-2] + (n, 3, n, 3))
    for i in range(3):
        out[..., :, i, :, i] = S
    return out.reshape(S.shape[:-2] + (3 * n, 3 * n))


def curvature_metric_term(Ln: np.ndarray, ainv: np.ndarray, symmetric: bool = True) -> np.ndarray:
    """``a^{gd} L^n_g L^n_d^T`` in Voigt form.

    ``symmetric=False`` reproduces the superseded variant with
    ``2 a^12 L^n_1 L^n_2^T`` (kept only for regression tests).
    """
    L1, L2 = Ln[..., 0, :], Ln[..., 1, :]
    o = lambda u, v: np.einsum("...i,...j->...ij", u, v)  # noqa: E731
    out = ainv[..., 0, 0, None, None] * o(L1, L1) + ainv[..., 1, 1, None, None] * o(L2, L2)
    if symmetric:
        out = out + ainv[..., 0, 1, None, None] * (o(L1, L2) + o(L2, L1))
    else:
        out = out + 2.0 * ainv[..., 0, 1, None, None] * o(L1, L2)
    return out


def _pair(U: np.ndarray, V: np.ndarray, reduce: bool) -> np.ndarray:
    """``sum_s U[..., s, A] V[..., s, R]``; ``reduce`` also sums the ``Q`` axis of ``(E, Q, ...)``."""
    if not reduce:
        return np.matmul(np.swapaxes(U, -1, -2), V)
    E, Q, S, A = U.shape
    return np.matmul(np.swapaxes(U.reshape(E, Q * S, A), -1, -2), V.reshape(E, Q * S, V.shape[-1]))


def geometric_tangent(sa: ShapeArrays, resp: MaterialResponse, cur: SurfaceConfig,
                      fibers: Sequence[FiberState], wJ: np.ndarray,
                      pq: Optional[Sequence[PQTensors]] = None, symmetric_a12: bool = True,
                      reduce: bool = False) -> np.ndarray:
    """Weighted ``k_tau + k_M + k_Mbar`` contributions ``(..., 3n, 3n)``.

    ``reduce`` sums over the quadrature axis of ``(E, Q, ...)`` inputs.
    """
    dN = sa.dN
    nloc = dN.shape[-1]
    lead = dN.shape[:-2] if not reduce else dN.shape[:1]
    w = wJ[..., None, None]

    def nodal(t):  # (..., A, i, j, B) -> (..., 3n, 3n)
        return _flat2(np.swapaxes(t, -1, -2).reshape(lead + (nloc, 3, nloc, 3)))

    k = _kron_scalar(_pair(w * np.einsum("...ab,...aA->...bA", resp.tau, dN), dN, reduce))

    M0 = resp.M0
    if np.any(M0):
        bM = np.einsum("...ab,...ab->...", cur.b, M0)
        ainv = cur.inv
        if not symmetric_a12:
            ainv = ainv.copy()
            ainv[..., 0, 1] *= 2.0
            ainv[..., 1, 0] = 0.0
        U = (wJ * bM)[..., None, None] * np.einsum("...gd,...gk->...dk", ainv, sa.Ln)
        k = k - _pair(U, sa.Ln, reduce)
        mB = np.einsum("...ab,...abB->...B", M0, sa.Nsemi)
        # N,g^T (n x a^g) N;ab M^ab
        U = np.einsum("...gA,...gj->...Aj", dN, cur.acon).reshape(dN.shape[:-2] + (1, 3 * nloc))
        V = (wJ[..., None, None] * np.einsum("...i,...B->...iB", cur.n, mB)).reshape(U.shape[:-1] + (3 * nloc,))
        t = _pair(U, V, reduce).reshape(lead + (nloc, 3, 3, nloc))  # (A, j, i, B)
        term = _flat2(np.transpose(t, tuple(range(len(lead))) + tuple(len(lead) + i for i in (0, 2, 3, 1))))
        k = k - term - np.swapaxes(term, -1, -2)

    nf = len(fibers)
    for f in range(nf):
        Mb = resp.Mbar[..., f, :, :]
        if not np.any(Mb):
            continue
        fib = fibers[f]
        C = sa.C[..., f, :, :, :]  # (..., b, i, (B j))
        U = w * np.einsum("...ab,...aA->...bA", Mb, dN)
        t = _pair(U, C.reshape(C.shape[:-2] + (9 * nloc,)), reduce).reshape(lead + (nloc, 3, nloc, 3))
        t = _flat2(t)
        k = k - t - np.swapaxes(t, -1, -2)
        P = pq[f] if pq is not None else pq_tensors(Mb, cur, fib)
        V = np.einsum("...gbij,...bB->...gijB", P.P, dN).reshape(dN.shape[:-2] + (2, 9 * nloc))
        k = k - nodal(_pair(w * dN, V, reduce).reshape(lead + (nloc, 3, 3, nloc)))
        V = np.einsum("...bgaij,...gaB->...bijB", P.Q, sa.ddN).reshape(dN.shape[:-2] + (2, 9 * nloc))
        tq = nodal(_pair(w * dN, V, reduce).reshape(lead + (nloc, 3, 3, nloc)))
        k = k - tq - np.swapaxes(tq, -1, -2)
    return k


# --------------------------------------------------------------------------
# external loads


@dataclass
class LoadSpec:
    """External loads; all magnitudes are multiplied by the load factor.

    ``dead`` flags declare ``t ds``, ``m_tau ds`` and ``mbar ds`` constant
    (measured per reference length); otherwise they act per current length.
    Corner twisting loads are ``(corner, m_nu)`` with corners named
    ``'u0v0'``, ``'u1v0'``, ``'u0v1'``, ``'u1v1'``.
    """

    f0: Optional[np.ndarray] = None
    pressure: float = 0.0
    tractions: list = field(default_factory=list)        # (edge, vector t)
    edge_moments: list = field(default_factory=list)     # (edge, m_tau)
    inplane_moments: list = field(default_factory=list)  # (edge, family, mbar)
    corner_moments: list = field(default_factory=list)   # (corner, m_nu)
    dead: bool = True

    def is_empty(self) -> bool:
        return (self.f0 is None and self.pressure == 0.0 and not self.tractions and not self.edge_moments
                and not self.inplane_moments and not self.corner_moments)


def body_force(N: np.ndarray, f0: np.ndarray, wJ0: np.ndarray) -> np.ndarray:
    """``int N^T f0 dA`` point contributions."""
    return _flat(np.einsum("...A,...i->...Ai", N, np.broadcast_to(f0, N.shape[:-1] + (3,)))) * wJ0[..., None]


def pressure_load(N, dN, cur: SurfaceConfig, p: float, w: np.ndarray, tangent: bool = True):
    """Follower pressure: force ``int N^T p n da`` and its tangent.

    ``w`` is the parametric weight; ``da = jac * w``.
    """
    wa = w * cur.jac
    f = _flat(np.einsum("...A,...i->...Ai", N, cur.n)) * (p * wa)[..., None]
    if not tangent:
        return f, None
    X = np.einsum("...i,...aj->...aij", cur.n, cur.acon) - np.einsum("...ai,...j->...aij", cur.acon, cur.n)
    k = _flat2(np.einsum("...A,...aij,...aB->...AiBj", N, X, dN, optimize=True)) * (p * wa)[..., None, None]
    return f, k


def _edge_frame(cur: SurfaceConfig, direction: int, sign: float):
    a_xi = cur.a[..., direction, :]
    axn = np.linalg.norm(a_xi, axis=-1)
    tau = sign * a_xi / axn[..., None]
    nu = np.cross(tau, cur.n)
    return a_xi, axn, tau, nu


def traction_load(N, dN, cur: SurfaceConfig, t: np.ndarray, w: np.ndarray, direction: int,
                  dead: bool, ref_len: Optional[np.ndarray] = None, tangent: bool = True):
    """Edge traction.  Dead: ``t dS`` fixed (``ref_len`` = |A_xi|); live: ``t ds``."""
    a_xi, axn, _, _ = _edge_frame(cur, direction, 1.0)
    ds = (ref_len if dead else axn) * w
    tb = np.broadcast_to(t, N.shape[:-1] + (3,))
    f = _flat(np.einsum("...A,...i->...Ai", N, tb)) * ds[..., None]
    if not tangent:
        return f, None
    if dead:
        return f, np.zeros(f.shape + (f.shape[-1],))
    X = np.einsum("...i,...j->...ij", tb, a_xi) / (axn**2)[..., None, None]
    k = _flat2(np.einsum("...A,...ij,...B->...AiBj", N, X, dN[..., direction, :], optimize=True)) * ds[..., None, None]
    return f, k


def edge_moment_load(N, dN, cur: SurfaceConfig, m_tau: float, w: np.ndarray, direction: int, sign: float,
                     dead: bool, ref_len: Optional[np.ndarray] = None, tangent: bool = True,
                     nu_variation: bool = True):
    """Out-of-plane edge moment ``m_tau``: ``f = -int N,a^T nu^a m_tau n ds``.

    ``nu_variation=False`` drops the term from the variation of ``nu``
    (the superseded form, kept only for regression tests).
    """
    a_xi, axn, tau, nu = _edge_frame(cur, direction, sign)
    ds = (ref_len if dead else axn) * w
    nu_c = np.einsum("...i,...ai->...a", nu, cur.acon)
    tau_c = np.einsum("...i,...ai->...a", tau, cur.acon)
    f = -_flat(np.einsum("...aA,...a,...i->...Ai", dN, nu_c, cur.n, optimize=True)) * (m_tau * ds)[..., None]
    if not tangent:
        return f, None
    X = (np.einsum("...a,...bi,...j->...abij", nu_c, cur.acon, cur.n, optimize=True)
         + np.einsum("...b,...i,...aj->...abij", nu_c, cur.n, cur.acon, optimize=True))
    k = _flat2(np.einsum("...aA,...abij,...bB->...AiBj", dN, X, dN, optimize=True))
    if not dead:
        Y = np.einsum("...a,...i,...j->...aij", nu_c, cur.n, a_xi, optimize=True) / (axn**2)[..., None, None, None]
        k = k - _flat2(np.einsum("...aA,...aij,...B->...AiBj", dN, Y, dN[..., direction, :], optimize=True))
    if nu_variation:
        Z = np.einsum("...a,...i,...j->...aij", tau_c, cur.n, nu, optimize=True) * sign / axn[..., None, None, None]
        k = k + _flat2(np.einsum("...aA,...aij,...B->...AiBj", dN, Z, dN[..., direction, :], optimize=True))
    return f, k * (m_tau * ds)[..., None, None]


def inplane_moment_load(N, dN, cur: SurfaceConfig, fib: FiberState, mbar: float, w: np.ndarray, direction: int,
                        dead: bool, ref_len: Optional[np.ndarray] = None, tangent: bool = True):
    """In-plane edge moment: ``f = int N,a^T l^a mbar c ds``."""
    a_xi, axn, _, _ = _edge_frame(cur, direction, 1.0)
    ds = (ref_len if dead else axn) * w
    lc = fib.ell_con
    f = _flat(np.einsum("...aA,...a,...i->...Ai", dN, lc, fib.c, optimize=True)) * (mbar * ds)[..., None]
    if not tangent:
        return f, None
    o = lambda u, v: np.einsum("...i,...j->...ij", u, v)
    X = (np.einsum("...a,...b,...ij->...abij", lc, fib.c_con, o(cur.n, cur.n), optimize=True)
         - np.einsum("...a,...b,...ij->...abij", lc, lc, o(fib.ell, fib.c) + o(fib.c, fib.ell), optimize=True))
    k = _flat2(np.einsum("...aA,...abij,...bB->...AiBj", dN, X, dN, optimize=True))
    if not dead:
        Y = np.einsum("...a,...i,...j->...aij", lc, fib.c, a_xi, optimize=True) / (axn**2)[..., None, None, None]
        k = k + _flat2(np.einsum("...aA,...aij,...B->...AiBj", dN, Y, dN[..., direction, :], optimize=True))
    return f, k * (mbar * ds)[..., None, None]


def corner_moment_load(dN_pt: np.ndarray, cur: SurfaceConfig, m_nu: float, local: int):
    """Corner force ``m_nu n`` on local node ``local`` and its tangent row block."""
    n_loc = dN_pt.shape[-1]
    f = np.zeros(3 * n_loc)
    f[3 * local:3 * local + 3] = m_nu * cur.n
    k = np.zeros((3 * n_loc, 3 * n_loc))
    blk = -m_nu * np.einsum("ai,j,aB->iBj", cur.acon, cur.n, dN_pt, optimize=True)
    k[3 * local:3 * local + 3, :] = blk.reshape(3, 3 * n_loc)
    return f, k
