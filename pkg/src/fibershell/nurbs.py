"""Tensor-product NURBS surfaces.

Basis evaluation (values plus first and second parametric derivatives),
knot insertion, and construction of the single-patch geometries used by
the benchmarks (rectangles and a quarter annulus).

Conventions
-----------
The control net is stored as an array of shape ``(nu, nv, 3)`` with weights
``(nu, nv)``.  Control point ``(i, j)`` has the global index ``i + nu * j``.
The local basis functions returned by :func:`eval_basis` are ordered the same
way (``u`` index running fastest).  The parametric domain is ``[0, 1]^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when a parametric point lies outside the patch domain."""


@dataclass(frozen=True)
class KnotVector:
    """Clamped (open) knot vector of a given degree."""

    degree: int
    knots: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        object.__setattr__(self, "knots", k)
        p = self.degree
        if p < 1:
            raise ValueError("degree must be >= 1")
        if np.any(np.diff(k) < 0):
            raise ValueError("knots must be non-decreasing")
        if not (np.all(k[: p + 1] == k[0]) and np.all(k[-p - 1:] == k[-1])):
            raise ValueError("knot vector must be clamped (end multiplicity p+1)")
        _, counts = np.unique(k[p + 1: -p - 1], return_counts=True)
        if counts.size and counts.max() > p:
            raise ValueError("interior knot multiplicity exceeds the degree")

    @property
    def n_basis(self) -> int:
        return self.knots.size - self.degree - 1

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def spans(self) -> np.ndarray:
        """Indices ``i`` of the non-empty spans ``[t_i, t_{i+1})``."""
        k = self.knots
        idx = np.arange(self.degree, k.size - self.degree - 1)
        return idx[k[idx + 1] > k[idx]]

    def breakpoints(self) -> np.ndarray:
        return np.unique(self.knots)

    def find_span(self, u: float) -> int:
        lo, hi = self.domain
        tol = 1e-12 * (hi - lo)
        if u < lo - tol or u > hi + tol:
            raise DomainError(f"parameter {u!r} outside [{lo}, {hi}]")
        u = min(max(u, lo), hi)
        n = self.n_basis
        if u >= self.knots[n]:
            return n - 1
        return int(np.searchsorted(self.knots, u, side="right") - 1)

    def greville(self) -> np.ndarray:
        p, k = self.degree, self.knots
        return np.array([k[i + 1: i + p + 1].mean() for i in range(self.n_basis)])


def open_knot_vector(degree: int, n_elements: int, domain=(0.0, 1.0)) -> KnotVector:
    """Uniform clamped knot vector with ``n_elements`` non-empty spans."""
    if degree < 1 or n_elements < 1:
        raise ValueError("degree and n_elements must be >= 1")
    a, b = float(domain[0]), float(domain[1])
    if not b > a:
        raise ValueError("degenerate knot domain")
    inner = np.linspace(a, b, n_elements + 1)
    knots = np.concatenate([np.full(degree, a), inner, np.full(degree, b)])
    return KnotVector(degree, knots)


def basis_funs_ders(kv: KnotVector, span: int, u: float, nders: int = 2) -> np.ndarray:
    """B-spline basis functions and derivatives on one span.

    Returns an array ``ders[k, j]`` holding the ``k``-th derivative of the
    basis function ``span - p + j`` (Cox-de Boor recursion with the
    derivative scheme of Piegl & Tiller, algorithm A2.3).
    """
    p, U = kv.degree, kv.knots
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - U[span + 1 - j]
        right[j] = U[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nders + 1, p + 1))
    ders[0] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, nders + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fac = p
    for k in range(1, nders + 1):
        ders[k] *= fac
        fac *= p - k
    return ders


@dataclass(frozen=True)
class BasisEval:
    """Nonzero rational basis functions at one parametric point.

    Attributes
    ----------
    indices : (n_e,) int
        Global control point indices.
    N : (n_e,)
        Values.
    dN : (2, n_e)
        First derivatives ``N_{,alpha}``.
    ddN : (2, 2, n_e)
        Second derivatives ``N_{,alpha beta}`` (symmetric in the first two axes).
    """

    indices: np.ndarray
    N: np.ndarray
    dN: np.ndarray
    ddN: np.ndarray


@dataclass
class NurbsPatch:
    """Single tensor-product NURBS surface patch."""

    U: KnotVector
    V: KnotVector
    ctrl: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.ctrl = np.asarray(self.ctrl, dtype=float)
        if self.weights is None:
            self.weights = np.ones(self.ctrl.shape[:2])
        self.weights = np.asarray(self.weights, dtype=float)
        nu, nv = self.U.n_basis, self.V.n_basis
        if self.ctrl.shape != (nu, nv, 3):
            raise ValueError(f"control net shape {self.ctrl.shape} != {(nu, nv, 3)}")
        if self.weights.shape != (nu, nv):
            raise ValueError("weights shape inconsistent with control net")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")

    @property
    def degrees(self) -> tuple[int, int]:
        return self.U.degree, self.V.degree

    @property
    def shape(self) -> tuple[int, int]:
        return self.U.n_basis, self.V.n_basis

    @property
    def n_ctrl(self) -> int:
        return self.U.n_basis * self.V.n_basis

    @property
    def n_elements(self) -> tuple[int, int]:
        return len(self.U.spans()), len(self.V.spans())

    def control_points(self) -> np.ndarray:
        """Control points as ``(n_ctrl, 3)`` in global index order."""
        return self.ctrl.transpose(1, 0, 2).reshape(-1, 3).copy()

    def flat_weights(self) -> np.ndarray:
        return self.weights.T.reshape(-1).copy()

    def with_control_points(self, x: np.ndarray) -> "NurbsPatch":
        nu, nv = self.shape
        ctrl = np.asarray(x, dtype=float).reshape(nv, nu, 3).transpose(1, 0, 2)
        return NurbsPatch(self.U, self.V, ctrl.copy(), self.weights.copy())

    def evaluate(self, u: float, v: float) -> np.ndarray:
        be = eval_basis(self, (u, v))
        return be.N @ self.control_points()[be.indices]

    def diameter(self) -> float:
        P = self.control_points()
        return float(np.linalg.norm(P.max(axis=0) - P.min(axis=0)))


def eval_basis(patch: NurbsPatch, xi: Sequence[float], spans=None) -> BasisEval:
    """Rational basis with first and second derivatives at ``xi = (u, v)``.

    ``spans`` may be given to select the knot spans explicitly, which is
    how element-wise quadrature avoids ambiguity on element boundaries.
    """
    u, v = float(xi[0]), float(xi[1])
    U, V = patch.U, patch.V
    p, q = U.degree, V.degree
    if spans is None:
        su, sv = U.find_span(u), V.find_span(v)
    else:
        su, sv = spans
        for kv, t in ((U, u), (V, v)):
            lo, hi = kv.domain
            if t < lo - 1e-12 or t > hi + 1e-12:
                raise DomainError(f"parameter {t!r} outside [{lo}, {hi}]")
    Bu = basis_funs_ders(U, su, u, 2)
    Bv = basis_funs_ders(V, sv, v, 2)

    iu = np.arange(su - p, su + 1)
    iv = np.arange(sv - q, sv + 1)
    nu = U.n_basis
    # local ordering: u fastest
    indices = (iu[None, :] + nu * iv[:, None]).reshape(-1)
    w = patch.weights[np.ix_(iu, iv)].T.reshape(-1)

    def tp(du, dv):
        return np.outer(Bv[dv], Bu[du]).reshape(-1)

    B = tp(0, 0)
    dB = np.array([tp(1, 0), tp(0, 1)])
    ddB = np.array([[tp(2, 0), tp(1, 1)], [tp(1, 1), tp(0, 2)]])

    # rational correction (quotient rule)
    wB = w * B
    W = wB.sum()
    dW = dB @ w
    ddW = ddB @ w
    R = wB / W
    dR = (w * dB - np.outer(dW, R)) / W
    ddR = np.empty_like(ddB)
    for a in range(2):
        for b in range(2):
            ddR[a, b] = (w * ddB[a, b] - dR[a] * dW[b] - dR[b] * dW[a] - R * ddW[a, b]) / W
    return BasisEval(indices, R, dR, ddR)


# --------------------------------------------------------------------------
# knot insertion


def _insert_knot_1d(kv: KnotVector, Pw: np.ndarray, t: float) -> tuple[KnotVector, np.ndarray]:
    """Insert ``t`` once (Boehm).  ``Pw`` holds homogeneous points along axis 0."""
    p, U = kv.degree, kv.knots
    k = kv.find_span(t)
    if t == U[-1]:
        raise ValueError("cannot insert the end knot")
    mult = int(np.sum(U == t))
    if mult + 1 > p:
        raise ValueError(f"inserting {t} would exceed multiplicity {p}")
    n = Pw.shape[0]
    Q = np.empty((n + 1,) + Pw.shape[1:])
    Q[: k - p + 1] = Pw[: k - p + 1]
    Q[k + 1:] = Pw[k:]
    for i in range(k - p + 1, k + 1):
        alpha = (t - U[i]) / (U[i + p] - U[i])
        Q[i] = alpha * Pw[i] + (1.0 - alpha) * Pw[i - 1]
    newU = np.insert(U, k + 1, t)
    return KnotVector(p, newU), Q


def insert_knots(patch: NurbsPatch, new_knots_u=(), new_knots_v=()) -> NurbsPatch:
    """Return a refined patch describing the same geometry."""
    Pw = np.concatenate([patch.ctrl * patch.weights[..., None], patch.weights[..., None]], axis=-1)
    U, V = patch.U, patch.V
    for t in sorted(new_knots_u):
        U, Pw = _insert_knot_1d(U, Pw, float(t))
    Pw = Pw.transpose(1, 0, 2)
    for t in sorted(new_knots_v):
        V, Pw = _insert_knot_1d(V, Pw, float(t))
    Pw = Pw.transpose(1, 0, 2)
    w = Pw[..., 3]
    return NurbsPatch(U, V, Pw[..., :3] / w[..., None], w)


def uniform_refine(patch: NurbsPatch, n_el: tuple[int, int]) -> NurbsPatch:
    """Insert knots so that a single-span patch gets ``n_el`` uniform elements."""
    ku = np.linspace(0.0, 1.0, n_el[0] + 1)[1:-1]
    kv = np.linspace(0.0, 1.0, n_el[1] + 1)[1:-1]
    return insert_knots(patch, ku, kv)


# --------------------------------------------------------------------------
# geometry builders


def build_rect_patch(Lx: float, Ly: float, degrees=(2, 2), n_el=(1, 1), origin=(0.0, 0.0)) -> NurbsPatch:
    """Flat rectangle ``[0, Lx] x [0, Ly]`` in the e1-e2 plane.

    Control points sit at the Greville abscissae, so the map from the
    parametric square is affine (linear precision of B-splines).
    """
    if Lx <= 0 or Ly <= 0:
        raise ValueError("rectangle dimensions must be positive")
    U = open_knot_vector(degrees[0], n_el[0])
    V = open_knot_vector(degrees[1], n_el[1])
    gu, gv = U.greville(), V.greville()
    ctrl = np.zeros((gu.size, gv.size, 3))
    ctrl[..., 0] = origin[0] + Lx * gu[:, None]
    ctrl[..., 1] = origin[1] + Ly * gv[None, :]
    return NurbsPatch(U, V, ctrl)


def build_quarter_annulus(Ri: float, Ro: float, n_el=(1, 1)) -> NurbsPatch:
    """Quarter annulus in the first quadrant, ``u`` radial and ``v`` angular.

    The angular direction uses the exact conic construction (three control
    points, middle weight ``cos 45deg``); the radial direction is a
    degree-elevated straight line, so ``r(u) = Ri + (Ro - Ri) u``.
    """
    if not (0 < Ri < Ro):
        raise ValueError("need 0 < Ri < Ro")
    U = KnotVector(2, [0, 0, 0, 1, 1, 1])
    V = KnotVector(2, [0, 0, 0, 1, 1, 1])
    radii = np.array([Ri, 0.5 * (Ri + Ro), Ro])
    dirs = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    wv = np.array([1.0, np.sqrt(0.5), 1.0])
    ctrl = radii[:, None, None] * dirs[None, :, :]
    weights = np.ones(3)[:, None] * wv[None, :]
    return uniform_refine(NurbsPatch(U, V, ctrl, weights), n_el)


# --------------------------------------------------------------------------
# element-wise quadrature data


@dataclass
class QuadratureData:
    """Basis data at all quadrature points, grouped by element.

    Shapes use ``E`` elements, ``Q`` points per element and ``n`` local
    basis functions.
    """

    conn: np.ndarray      # (E, n) global control point indices
    xi: np.ndarray        # (E, Q, 2) parametric coordinates
    N: np.ndarray         # (E, Q, n)
    dN: np.ndarray        # (E, Q, 2, n)
    ddN: np.ndarray       # (E, Q, 2, 2, n)
    weight: np.ndarray    # (E, Q) Gauss weight times parametric cell area
    element_ij: np.ndarray  # (E, 2) span position of each element

    @property
    def n_elements(self) -> int:
        return self.conn.shape[0]


def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def element_quadrature(patch: NurbsPatch, gauss=None) -> QuadratureData:
    """Tensor Gauss rule on every knot span (default ``(p+1) x (q+1)``)."""
    p, q = patch.degrees
    if gauss is None:
        gauss = (p + 1, q + 1)
    elif np.isscalar(gauss):
        gauss = (int(gauss), int(gauss))
    gu, wu = gauss_rule(gauss[0])
    gv, wv = gauss_rule(gauss[1])
    U, V = patch.U, patch.V
    conn, xis, Ns, dNs, ddNs, ws, ij = [], [], [], [], [], [], []
    for jv, sv in enumerate(V.spans()):
        v0, v1 = V.knots[sv], V.knots[sv + 1]
        for iu, su in enumerate(U.spans()):
            u0, u1 = U.knots[su], U.knots[su + 1]
            area = (u1 - u0) * (v1 - v0)
            pts, n1, d1, dd1, w1 = [], [], [], [], []
            for b, (tv, ov) in enumerate(zip(gv, wv)):
                for a, (tu, ou) in enumerate(zip(gu, wu)):
                    uu, vv = u0 + tu * (u1 - u0), v0 + tv * (v1 - v0)
                    be = eval_basis(patch, (uu, vv), spans=(su, sv))
                    pts.append((uu, vv))
                    n1.append(be.N)
                    d1.append(be.dN)
                    dd1.append(be.ddN)
                    w1.append(ou * ov * area)
            conn.append(be.indices)
            xis.append(pts)
            Ns.append(n1)
            dNs.append(d1)
            ddNs.append(dd1)
            ws.append(w1)
            ij.append((iu, jv))
    return QuadratureData(
        conn=np.array(conn), xi=np.array(xis), N=np.array(Ns), dN=np.array(dNs),
        ddN=np.array(ddNs), weight=np.array(ws), element_ij=np.array(ij),
    )


# patch boundary edges: name -> (fixed parametric direction, fixed value)
EDGES = {
    "u0": (0, 0.0),   # xi1 = 0
    "u1": (0, 1.0),   # xi1 = 1
    "v0": (1, 0.0),   # xi2 = 0
    "v1": (1, 1.0),   # xi2 = 1
}


@dataclass
class EdgeQuadrature:
    """Basis data at Gauss points along one patch boundary edge."""

    name: str
    conn: np.ndarray      # (S, n) control points of the adjacent elements
    N: np.ndarray         # (S, Q, n)
    dN: np.ndarray        # (S, Q, 2, n)
    ddN: np.ndarray       # (S, Q, 2, 2, n)
    weight: np.ndarray    # (S, Q) Gauss weight times parametric segment length
    direction: int        # parametric direction running along the edge
    sign: float           # orientation so that tau x n points outward


def edge_nodes(patch: NurbsPatch, name: str) -> np.ndarray:
    """Global indices of the control points on a boundary edge."""
    nu, nv = patch.shape
    ids = np.arange(nu * nv).reshape(nv, nu)
    if name == "u0":
        return ids[:, 0].copy()
    if name == "u1":
        return ids[:, -1].copy()
    if name == "v0":
        return ids[0, :].copy()
    if name == "v1":
        return ids[-1, :].copy()
    raise KeyError(f"unknown edge {name!r}")


def edge_quadrature(patch: NurbsPatch, name: str, gauss=None) -> EdgeQuadrature:
    """1D Gauss rule along a boundary edge (default order ``p + 1``)."""
    if name not in EDGES:
        raise KeyError(f"unknown edge {name!r}")
    fixed_dir, val = EDGES[name]
    run = 1 - fixed_dir
    kv_run = (patch.U, patch.V)[run]
    kv_fix = (patch.U, patch.V)[fixed_dir]
    if gauss is None:
        gauss = kv_run.degree + 1
    g, w = gauss_rule(int(gauss))
    fix_span = kv_fix.spans()[0 if val == 0.0 else -1]
    conn, Ns, dNs, ddNs, ws = [], [], [], [], []
    for s in kv_run.spans():
        t0, t1 = kv_run.knots[s], kv_run.knots[s + 1]
        n1, d1, dd1, w1 = [], [], [], []
        for tg, og in zip(g, w):
            t = t0 + tg * (t1 - t0)
            xi = [0.0, 0.0]
            xi[run] = t
            xi[fixed_dir] = val
            spans = [0, 0]
            spans[run] = s
            spans[fixed_dir] = fix_span
            be = eval_basis(patch, xi, spans=tuple(spans))
            n1.append(be.N)
            d1.append(be.dN)
            dd1.append(be.ddN)
            w1.append(og * (t1 - t0))
        conn.append(be.indices)
        Ns.append(n1)
        dNs.append(d1)
        ddNs.append(dd1)
        ws.append(w1)
    # outward normal nu = tau x n with n = a1 x a2 / |.|:
    # along v0 (run u, +a1 direction) nu points to -a2 -> outward; similar below.
    sign = {"v0": 1.0, "u1": 1.0, "v1": -1.0, "u0": -1.0}[name]
    return EdgeQuadrature(name, np.array(conn), np.array(Ns), np.array(dNs), np.array(ddNs),
                          np.array(ws), run, sign)
