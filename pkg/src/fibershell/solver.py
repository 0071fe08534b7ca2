"""Global assembly, Dirichlet drivers, Newton-Raphson and load stepping."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import element as el
from .kinematics import (CollapsedFiberError, FiberField, SingularSurfaceError, SurfaceConfig,
                         deformation_invariants, fiber_state, surface_config)
from .materials import InvalidStateError, Material
from .nurbs import (EDGES, NurbsPatch, QuadratureData, edge_nodes, edge_quadrature, element_quadrature,
                    eval_basis)

log = logging.getLogger(__name__)

KINEMATIC_ERRORS = (SingularSurfaceError, CollapsedFiberError, InvalidStateError, FloatingPointError)


class ConvergenceError(RuntimeError):
    """Newton iteration failed within the allowed iterations and halvings."""

    def __init__(self, msg, history=None):
        super().__init__(msg)
        self.history = history or []


class ElementError(RuntimeError):
    """Kinematic failure inside an element batch."""

    def __init__(self, msg, elements):
        super().__init__(msg)
        self.elements = elements


# --------------------------------------------------------------------------
# Dirichlet data


@dataclass
class Dirichlet:
    """Prescribed components of a set of control points.

    ``motion(t, X)`` maps the load parameter ``t`` and reference positions
    ``X`` (k, 3) to prescribed positions; ``None`` keeps them at ``X``.
    Only the components listed in ``comps`` are prescribed.
    """

    nodes: np.ndarray
    comps: tuple = (0, 1, 2)
    motion: Optional[Callable] = None
    name: str = ""

    def __post_init__(self):
        self.nodes = np.atleast_1d(np.asarray(self.nodes, dtype=int))
        self.comps = tuple(int(c) for c in self.comps)

    def values(self, t: float, X: np.ndarray) -> np.ndarray:
        Xn = X[self.nodes]
        return Xn if self.motion is None else np.asarray(self.motion(t, Xn), dtype=float)


def rigid_rotation(axis_point, axis_dir, angle_of_t: Callable, translation_of_t: Optional[Callable] = None):
    """Driver rotating points rigidly about an axis by ``angle_of_t(t)`` [rad]."""
    p = np.asarray(axis_point, dtype=float)
    e = np.asarray(axis_dir, dtype=float)
    e = e / np.linalg.norm(e)

    def motion(t, X):
        phi = angle_of_t(t)
        d = X - p
        par = np.outer(d @ e, e)
        perp = d - par
        out = p + par + np.cos(phi) * perp + np.sin(phi) * np.cross(e, perp)
        if translation_of_t is not None:
            out = out + np.asarray(translation_of_t(t))
        return out

    return motion


def linear_map(F_of_t: Callable, origin=(0.0, 0.0, 0.0)):
    """Driver ``x = origin + F(t) (X - origin)``."""
    o = np.asarray(origin, dtype=float)

    def motion(t, X):
        return o + (X - o) @ np.asarray(F_of_t(t)).T

    return motion


# --------------------------------------------------------------------------
# model


def _slice_dc(dc, sl):
    return type(dc)(**{f.name: (getattr(dc, f.name)[sl] if isinstance(getattr(dc, f.name), np.ndarray)
                                else getattr(dc, f.name)) for f in fields(dc)})


@dataclass
class NewtonSettings:
    rtol: float = 1e-9
    atol: float = 1e-12
    max_iter: int = 30
    max_halvings: int = 4
    viscosity: float = 0.0
    dt: float = 1.0
    fd_tangent: bool = False
    line_search: bool = False
    predictor: str = "constant"   # "constant" or "linear" (extrapolate the last increment)

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.dt <= 0:
            raise ValueError("time step must be positive")
        if self.viscosity < 0:
            raise ValueError("viscosity must be >= 0")
        if self.predictor not in ("constant", "linear"):
            raise ValueError("predictor must be 'constant' or 'linear'")


@dataclass
class Model:
    """Discrete problem on a single NURBS patch.

    ``fibers`` are reference direction fields; ``material`` maps invariants to
    a response; ``loads`` are scaled by the load parameter ``t`` in [0, 1].
    """

    patch: NurbsPatch
    fibers: Sequence[FiberField]
    material: Material
    loads: el.LoadSpec = field(default_factory=el.LoadSpec)
    constraints: list = field(default_factory=list)
    gauss: Optional[object] = None
    edge_gauss: Optional[int] = None
    chunk: int = 256
    load_scale: Optional[Callable] = None

    def __post_init__(self):
        self.X = self.patch.control_points()
        self.n_nodes = len(self.X)
        self.n_dof = 3 * self.n_nodes
        self.quad: QuadratureData = element_quadrature(self.patch, self.gauss)
        q = self.quad
        Xe = self.X[q.conn][:, None]  # (E, 1, n, 3)
        self.ref = surface_config(q.dN, q.ddN, Xe)
        self.Xq = np.einsum("eqn,eqni->eqi", q.N, np.broadcast_to(Xe, q.N.shape + (3,)))
        self.R = np.linalg.norm(self.Xq[..., :2], axis=-1)
        self.fiber_L, self.fiber_dL, self.ref_fibers = [], [], []
        for ff in self.fibers:
            L, dL = ff.components(self.ref, self.Xq)
            self.fiber_L.append(L)
            self.fiber_dL.append(dL)
            self.ref_fibers.append(fiber_state(self.ref, L, dL))
        self.wJ0 = q.weight * self.ref.jac
        nloc = q.conn.shape[1]
        self.edofs = (3 * q.conn[:, :, None] + np.arange(3)).reshape(len(q.conn), 3 * nloc)
        self._edges = {}
        self.Lpre = None
        self._mass = None

    # -- helpers ---------------------------------------------------------

    @property
    def n_families(self) -> int:
        return len(self.fibers)

    def edge_data(self, name: str):
        if name not in self._edges:
            eq = edge_quadrature(self.patch, name, self.edge_gauss)
            Xe = self.X[eq.conn][:, None]
            ref = surface_config(eq.dN, eq.ddN, Xe)
            Xq = np.einsum("sqn,sqni->sqi", eq.N, np.broadcast_to(Xe, eq.N.shape + (3,)))
            comps = [ff.components(ref, Xq) for ff in self.fibers]
            ref_len = np.linalg.norm(ref.a[..., eq.direction, :], axis=-1)
            self._edges[name] = (eq, ref, comps, ref_len)
        return self._edges[name]

    def edge_nodes(self, name: str) -> np.ndarray:
        return edge_nodes(self.patch, name)

    def dirichlet_map(self, t: float) -> dict:
        """``{dof: value}`` for the load parameter ``t`` (later entries win)."""
        out = {}
        for c in self.constraints:
            vals = c.values(t, self.X)
            for k, node in enumerate(c.nodes):
                for comp in c.comps:
                    out[3 * int(node) + comp] = float(vals[k, comp])
        return out

    def scale(self, t: float) -> float:
        return t if self.load_scale is None else float(self.load_scale(t))

    def set_previous(self, x_pre: np.ndarray) -> None:
        """Store ``a^pre_ab L^a L^b`` at quadrature points for stabilization."""
        q = self.quad
        cur = surface_config(q.dN, q.ddN, x_pre.reshape(-1, 3)[q.conn][:, None])
        if self.n_families:
            self.Lpre = np.stack([np.einsum("...ab,...a,...b->...", cur.met, L, L) for L in self.fiber_L], axis=-1)
        else:
            self.Lpre = None

    # -- point evaluation ------------------------------------------------

    def evaluate_points(self, x: np.ndarray, sl=slice(None), tangent: bool = False):
        """Current kinematics, invariants and response on an element slice."""
        q = self.quad
        xe = x.reshape(-1, 3)[q.conn[sl]][:, None]
        cur = surface_config(q.dN[sl], q.ddN[sl], xe)
        fibs = [fiber_state(cur, L[sl], dL[sl]) for L, dL in zip(self.fiber_L, self.fiber_dL)]
        ref = _slice_dc(self.ref, sl)
        ref_f = [_slice_dc(f, sl) for f in self.ref_fibers]
        inv = deformation_invariants(ref, ref_f, cur, fibs)
        inv.R = self.R[sl]
        if self.Lpre is not None:
            inv.Lpre = self.Lpre[sl]
        resp = self.material(inv, tangent)
        return cur, fibs, inv, resp

    def evaluate_edge(self, x: np.ndarray, name: str):
        """Kinematics and response at the Gauss points of a boundary edge.

        Returns ``(eq, cur, inv, resp)``.  Stabilization history is not
        available on edges, so ``Lpre`` is left unset.
        """
        eq, ref, comps, _ = self.edge_data(name)
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        cur = surface_config(eq.dN, eq.ddN, x[eq.conn][:, None])
        fibs = [fiber_state(cur, L, dL) for L, dL in comps]
        ref_f = [fiber_state(ref, L, dL) for L, dL in comps]
        inv = deformation_invariants(ref, ref_f, cur, fibs)
        Xq = np.einsum("sqn,sqni->sqi", eq.N, np.broadcast_to(self.X[eq.conn][:, None], eq.N.shape + (3,)))
        inv.R = np.linalg.norm(Xq[..., :2], axis=-1)
        return eq, cur, inv, self.material(inv, tangent=False)

    # -- assembly --------------------------------------------------------

    def assemble(self, x: np.ndarray, t: float = 1.0, tangent: bool = True):
        """Residual ``f_int - f_ext`` and tangent ``K`` (CSR) at positions ``x``.

        Returns ``(r, K, info)``; ``info`` holds ``f_int``, ``f_ext`` and the
        integrated energy parts.
        """
        x = np.asarray(x, dtype=float).reshape(-1, 3)
        q = self.quad
        E = len(q.conn)
        ndof = self.n_dof
        f_int = np.zeros(ndof)
        f_ext = np.zeros(ndof)
        energies: dict = {}
        rows, cols, vals = [], [], []
        s = self.scale(t)
        loads = self.loads
        for e0 in range(0, E, self.chunk):
            sl = slice(e0, min(E, e0 + self.chunk))
            try:
                cur, fibs, inv, resp = self.evaluate_points(x, sl, tangent)
            except KINEMATIC_ERRORS as exc:
                raise ElementError(f"{type(exc).__name__} in elements {sl.start}..{sl.stop - 1}: {exc}",
                                   list(range(sl.start, sl.stop))) from exc
            wJ = self.wJ0[sl]
            sa = el.shape_arrays(q.N[sl], q.dN[sl], q.ddN[sl], cur, fibs)
            fp = el.internal_force(sa, resp, wJ)
            fe = (fp["tau"] + fp["M"] + fp["Mbar"]).sum(axis=1)
            for k, v in resp.parts.items():
                energies[k] = energies.get(k, 0.0) + float(np.sum(v * wJ))
            energies["total"] = energies.get("total", 0.0) + float(np.sum(resp.W * wJ))
            ke = None
            if tangent:
                ke = (el.material_tangent(sa, resp, wJ, reduce=True)
                      + el.geometric_tangent(sa, resp, cur, fibs, wJ, reduce=True))
            fx = np.zeros_like(fe)
            if loads.f0 is not None and s != 0.0:
                fx += el.body_force(q.N[sl], s * np.asarray(loads.f0, float), wJ).sum(axis=1)
            if loads.pressure != 0.0 and s != 0.0:
                fpv, kp = el.pressure_load(q.N[sl], q.dN[sl], cur, s * loads.pressure, q.weight[sl], tangent)
                fx += fpv.sum(axis=1)
                if tangent:
                    ke = ke - kp.sum(axis=1)
            dofs = self.edofs[sl]
            np.add.at(f_int, dofs, fe)
            np.add.at(f_ext, dofs, fx)
            if tangent:
                rows.append(np.repeat(dofs, dofs.shape[1], axis=1).ravel())
                cols.append(np.tile(dofs, (1, dofs.shape[1])).ravel())
                vals.append(ke.ravel())
        if s != 0.0:
            self._edge_loads(x, s, tangent, f_ext, rows, cols, vals)
        r = f_int - f_ext
        K = None
        if tangent:
            K = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(ndof, ndof)).tocsr()
        return r, K, {"f_int": f_int, "f_ext": f_ext, "energies": energies}

    def _edge_loads(self, x, s, tangent, f_ext, rows, cols, vals):
        loads = self.loads

        def scatter(conn, fe, ke):
            dofs = (3 * conn[:, :, None] + np.arange(3)).reshape(len(conn), -1)
            np.add.at(f_ext, dofs, fe)
            if tangent and ke is not None:
                rows.append(np.repeat(dofs, dofs.shape[1], axis=1).ravel())
                cols.append(np.tile(dofs, (1, dofs.shape[1])).ravel())
                vals.append(-ke.ravel())

        for name, tvec in loads.tractions:
            eq, ref, comps, ref_len = self.edge_data(name)
            cur = surface_config(eq.dN, eq.ddN, x[eq.conn][:, None])
            f, k = el.traction_load(eq.N, eq.dN, cur, s * np.asarray(tvec, float), eq.weight, eq.direction,
                                    loads.dead, ref_len, tangent)
            scatter(eq.conn, f.sum(1), None if k is None else k.sum(1))
        for name, m in loads.edge_moments:
            eq, ref, comps, ref_len = self.edge_data(name)
            cur = surface_config(eq.dN, eq.ddN, x[eq.conn][:, None])
            f, k = el.edge_moment_load(eq.N, eq.dN, cur, s * m, eq.weight, eq.direction, eq.sign,
                                       loads.dead, ref_len, tangent)
            scatter(eq.conn, f.sum(1), None if k is None else k.sum(1))
        for name, fam, m in loads.inplane_moments:
            eq, ref, comps, ref_len = self.edge_data(name)
            cur = surface_config(eq.dN, eq.ddN, x[eq.conn][:, None])
            fib = fiber_state(cur, *comps[fam])
            f, k = el.inplane_moment_load(eq.N, eq.dN, cur, fib, s * m, eq.weight, eq.direction,
                                          loads.dead, ref_len, tangent)
            scatter(eq.conn, f.sum(1), None if k is None else k.sum(1))
        for corner, m in loads.corner_moments:
            uv = {"u0v0": (0.0, 0.0), "u1v0": (1.0, 0.0), "u0v1": (0.0, 1.0), "u1v1": (1.0, 1.0)}[corner]
            be = eval_basis(self.patch, uv)
            cur = surface_config(be.dN, be.ddN, x[be.indices])
            local = int(np.argmax(be.N))
            f, k = el.corner_moment_load(be.dN, cur, s * m, local)
            scatter(be.indices[None], f[None], k[None] if tangent else None)

    # -- auxiliary operators -------------------------------------------

    def mass_matrix(self) -> sp.csr_matrix:
        """``int N^T N dA`` expanded to 3 components (reference area)."""
        if self._mass is None:
            q = self.quad
            m = np.einsum("eqA,eqB,eq->eAB", q.N, q.N, self.wJ0)
            n = q.conn.shape[1]
            rows = np.repeat(q.conn, n, axis=1).ravel()
            cols = np.tile(q.conn, (1, n)).ravel()
            M1 = sp.coo_matrix((m.ravel(), (rows, cols)), shape=(self.n_nodes, self.n_nodes)).tocsr()
            self._mass = sp.kron(M1, sp.identity(3), format="csr")
        return self._mass

    def energy(self, x: np.ndarray) -> float:
        _, _, info = self.assemble(x, 0.0, tangent=False)
        return info["energies"]["total"]


def viscous_regularization(model: Model, x: np.ndarray, x_pre: np.ndarray, eps: float, dt: float):
    """Force ``(eps/dt) M (x - x_pre)`` and its tangent ``(eps/dt) M``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    M = model.mass_matrix()
    c = eps / dt
    return c * (M @ (np.ravel(x) - np.ravel(x_pre))), c * M


def seed_imperfection(patch: NurbsPatch, sigma: float, seed: int, fixed_nodes=()) -> NurbsPatch:
    """Add N(0, sigma) noise to X3 of every control point not in ``fixed_nodes``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    X = patch.control_points()
    if sigma == 0:
        return patch.with_control_points(X)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=len(X))
    mask = np.ones(len(X), bool)
    mask[np.asarray(list(fixed_nodes), dtype=int)] = False
    X[mask, 2] += noise[mask]
    return patch.with_control_points(X)


# --------------------------------------------------------------------------
# Newton and load stepping


@dataclass
class SolveState:
    x: np.ndarray
    x_pre: np.ndarray
    t: float = 0.0
    step: int = 0
    history: list = field(default_factory=list)


def apply_constraints(K: sp.spmatrix, r: np.ndarray, fixed: np.ndarray):
    """Reduced system on the free DOFs; returns ``(K_ff, r_f, free)``."""
    n = len(r)
    mask = np.ones(n, bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    if len(fixed) == 0:
        log.warning("no Dirichlet constraints: system singular up to rigid modes")
    Kff = K[free][:, free] if K is not None else None
    return Kff, r[free], free


def fd_tangent(model: Model, x: np.ndarray, t: float, h: float = 1e-6) -> sp.csr_matrix:
    """Central-difference tangent of the residual (dense columns)."""
    xf = np.ravel(x).copy()
    cols = []
    for j in range(len(xf)):
        xp = xf.copy(); xp[j] += h
        xm = xf.copy(); xm[j] -= h
        rp = model.assemble(xp, t, tangent=False)[0]
        rm = model.assemble(xm, t, tangent=False)[0]
        cols.append((rp - rm) / (2 * h))
    return sp.csr_matrix(np.array(cols).T)


def _system(model, x, t, settings, x_pre):
    r, K, info = model.assemble(x, t, tangent=not settings.fd_tangent)
    if settings.fd_tangent:
        K = fd_tangent(model, x, t)
    if settings.viscosity > 0:
        fv, Kv = viscous_regularization(model, x, x_pre, settings.viscosity, settings.dt)
        r = r + fv
        K = K + Kv
    return r, K, info


def newton_solve(model: Model, x0: np.ndarray, t: float, settings: NewtonSettings,
                 x_pre: Optional[np.ndarray] = None):
    """Solve ``r(x) = 0`` at load parameter ``t`` from the guess ``x0``.

    Prescribed DOFs are set to their values at ``t`` before iterating.
    Returns ``(x, info)`` with residual history and reactions.
    """
    x = np.ravel(np.asarray(x0, dtype=float)).copy()
    x_pre = x.copy() if x_pre is None else np.ravel(x_pre)
    dmap = model.dirichlet_map(t)
    fixed = np.array(sorted(dmap), dtype=int)
    if len(fixed):
        x[fixed] = [dmap[d] for d in fixed]
    hist = []
    r_ref = None
    for it in range(settings.max_iter + 1):
        r, K, info = _system(model, x, t, settings, x_pre)
        Kff, rf, free = apply_constraints(K, r, fixed)
        nr = float(np.linalg.norm(rf))
        scale = max(np.linalg.norm(info["f_int"]), np.linalg.norm(info["f_ext"]), 1e-300)
        if r_ref is None:
            r_ref = max(nr, scale)
        r_ref = max(r_ref, scale)
        hist.append(nr)
        if nr <= settings.atol or nr <= settings.rtol * r_ref:
            react = np.zeros_like(r)
            react[fixed] = r[fixed]
            return x, {"iterations": it, "history": hist, "reactions": react, "residual": r,
                       "energies": info["energies"], "fixed": fixed}
        if it == settings.max_iter:
            break
        try:
            du = spla.spsolve(Kff.tocsc(), -rf)
        except Exception as exc:  # singular factorization
            raise ConvergenceError(f"linear solve failed: {exc}", hist) from exc
        if not np.all(np.isfinite(du)):
            raise ConvergenceError("linear solve produced non-finite increment", hist)
        step = 1.0
        for _ in range(settings.max_halvings + 1):
            xt = x.copy()
            xt[free] += step * du
            try:
                rt = model.assemble(xt, t, tangent=False)[0] if settings.line_search else None
            except ElementError:
                step *= 0.5
                continue
            if rt is not None:
                if settings.viscosity > 0:
                    rt = rt + viscous_regularization(model, xt, x_pre, settings.viscosity, settings.dt)[0]
                if np.linalg.norm(rt[free]) > nr and step > 0.5 ** settings.max_halvings:
                    step *= 0.5
                    continue
            break
        x = xt
    raise ConvergenceError(f"no convergence in {settings.max_iter} iterations (|r| = {hist[-1]:.3e})", hist)


@dataclass
class StepResult:
    step: int
    t: float
    x: np.ndarray
    iterations: int
    history: list
    reactions: np.ndarray
    edge_reactions: dict
    energies: dict


def edge_resultants(model: Model, reactions: np.ndarray) -> dict:
    R = reactions.reshape(-1, 3)
    return {name: R[model.edge_nodes(name)].sum(axis=0) for name in EDGES}


def run_steps(model: Model, n_steps: int, settings: Optional[NewtonSettings] = None,
              x0: Optional[np.ndarray] = None, callback: Optional[Callable] = None,
              t_end: float = 1.0) -> list:
    """March ``t`` from 0 to ``t_end`` in ``n_steps`` equal increments.

    A failing increment is retried with halved size (at most
    ``settings.max_halvings`` times).  Stabilization data and the viscous
    reference state are updated on acceptance only.  On failure the partial
    trajectory is attached to the raised ``ConvergenceError``.
    """
    if n_steps < 1:
        raise ValueError("need at least one step")
    settings = settings or NewtonSettings()
    x = model.X.ravel().copy() if x0 is None else np.ravel(x0).copy()
    model.set_previous(x)
    traj: list = []
    dt_full = t_end / n_steps
    t = 0.0
    k = 0
    dx_last, dt_last = None, None
    while t < t_end - 1e-14:
        dt = min(dt_full, t_end - t)
        for h in range(settings.max_halvings + 1):
            t_new = t + dt
            try:
                st = replace(settings, dt=settings.dt * dt / dt_full)
                guess = x + (dt / dt_last) * dx_last if dx_last is not None else x + 0.0
                x_new, info = newton_solve(model, guess, t_new, st, x_pre=x)
                break
            except (ConvergenceError, ElementError) as exc:
                log.info("step to t=%.6g failed (%s); halving", t_new, exc)
                if h == settings.max_halvings:
                    err = ConvergenceError(f"step to t={t_new:.6g} failed after {h} halvings: {exc}",
                                           getattr(exc, "history", []))
                    err.trajectory = traj
                    raise err from exc
                dt *= 0.5
        if settings.predictor == "linear":
            dx_last, dt_last = x_new - x, dt
        x = x_new
        t = t_new
        model.set_previous(x)
        k += 1
        res = StepResult(step=k, t=t, x=x.reshape(-1, 3).copy(), iterations=info["iterations"],
                         history=info["history"], reactions=info["reactions"],
                         edge_reactions=edge_resultants(model, info["reactions"]), energies=info["energies"])
        traj.append(res)
        if callback is not None:
            callback(res)
    return traj
