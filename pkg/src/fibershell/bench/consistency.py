"""Global consistency checks: FD tangent, symmetry and rigid-motion invariance."""

from __future__ import annotations

import itertools

import numpy as np

from .. import element as el
from .. import materials as mt
from ..kinematics import ConstantFiber
from ..nurbs import build_rect_patch
from ..solver import Model, fd_tangent
from .report import BenchReport
from .runners import runner
from .scenario import Scenario, parse_mesh

LOAD_CASES = {
    "none": lambda: el.LoadSpec(),
    "pressure": lambda: el.LoadSpec(pressure=0.7, dead=False),
    "edge_moment_dead": lambda: el.LoadSpec(edge_moments=[("u1", 0.3), ("v0", -0.2)], dead=True),
    "edge_moment_live": lambda: el.LoadSpec(edge_moments=[("u1", 0.3), ("v1", 0.2)], dead=False),
    "inplane_moment_live": lambda: el.LoadSpec(inplane_moments=[("u1", 0, 0.3), ("v1", 1, 0.2)],
                                               tractions=[("u1", [0.3, 0.2, 0.1])], dead=False),
}


def make_material(kind: str, inplane: bool):
    if kind == "simple":
        p = mt.SimpleFabricParams(mu=1.0, K=2.0, eps_L=[2.0, 3.0], beta_n=[0.5, 0.7],
                                  beta_g=[0.3, 0.4] if inplane else 0.0, beta_tau=[0.2, 0.1], eps_a=1.0)
        return mt.SimpleFabric(p)
    p = mt.WovenFabricParams(beta_g=[4.8, 2.0] if inplane else 0.0, tension_only=True)
    return mt.WovenFabric(p, mt.StabilizationParams(5.0, 25.0))


def perturbed_model(material, loads, seed: int, mesh=(2, 2)):
    """Slightly curved patch and a random current state around it."""
    rng = np.random.default_rng(seed)
    patch = build_rect_patch(1.0, 1.0, (2, 2), mesh)
    X = patch.control_points()
    X[:, 2] += 0.05 * rng.standard_normal(len(X))
    patch = patch.with_control_points(X)
    fibers = [ConstantFiber([1.0, 0.2, 0.0]), ConstantFiber([-0.3, 1.0, 0.0])]
    m = Model(patch, fibers, material, loads)
    x0 = X.ravel() + 0.02 * rng.standard_normal(X.size)
    m.set_previous(x0)
    x = x0 + 0.03 * rng.standard_normal(X.size)
    return m, x


def random_rotation(rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def tangent_error(model: Model, x: np.ndarray, h: float = 1e-6) -> float:
    K = model.assemble(x, 1.0)[1].toarray()
    Kfd = fd_tangent(model, x, 1.0, h).toarray()
    return float(np.linalg.norm(K - Kfd) / np.linalg.norm(Kfd))


@runner("consistency")
def run_consistency(sc: Scenario) -> BenchReport:
    mesh = sc.get("geometry", "mesh", parse_mesh, (2, 2))
    seed0 = sc.get("geometry", "seed", int, 0)
    tol_fd = sc.get("output", "tol", float, 1e-6)
    rep = BenchReport(sc.name, sc.kind, "L0, eps0",
                      columns=["case [-]", "seed [-]", "fd_error [-]", "symmetry_error [-]"])
    cases = list(itertools.product(("simple", "woven"), (True, False), LOAD_CASES))
    worst_fd = worst_sym = 0.0
    for k, (kind, inplane, load) in enumerate(cases):
        m, x = perturbed_model(make_material(kind, inplane), LOAD_CASES[load](), seed0 + k, mesh)
        err = tangent_error(m, x)
        K = m.assemble(x, 1.0)[1].toarray()
        # edge moments and follower loads have non-symmetric load stiffness
        conservative = load == "none"
        sym = float(np.linalg.norm(K - K.T) / np.linalg.norm(K)) if conservative else np.nan
        rep.rows.append([k + 1, seed0 + k, err, sym])
        rep.metrics[f"{kind}{'+inplane' if inplane else ''}+{load}"] = err
        worst_fd = max(worst_fd, err)
        if conservative:
            worst_sym = max(worst_sym, sym)
    rep.add(f"global tangent vs central FD ({len(cases)} states, worst)", worst_fd, 0.0, tol_fd, "derived",
            mode="abs")
    rep.add("internal tangent symmetry (worst)", worst_sym, 0.0, 1e-12, "property", mode="abs")

    rng = np.random.default_rng(seed0 + 1000)
    worst_tr = worst_Kt = worst_E = 0.0
    for kind, inplane in itertools.product(("simple", "woven"), (True, False)):
        m, x = perturbed_model(make_material(kind, inplane), el.LoadSpec(), int(rng.integers(1 << 30)), mesh)
        r, K, info = m.assemble(x, 1.0)
        scale = np.linalg.norm(info["f_int"])
        c = rng.standard_normal(3)
        xr = (x.reshape(-1, 3) + c).ravel()
        worst_tr = max(worst_tr, np.linalg.norm(m.assemble(xr, 1.0, tangent=False)[0] - r) / scale)
        for i in range(3):
            t = np.zeros((m.n_nodes, 3))
            t[:, i] = 1.0
            worst_Kt = max(worst_Kt, np.linalg.norm(K @ t.ravel()) / np.linalg.norm(K.data))
        Q = random_rotation(rng)
        xq = (x.reshape(-1, 3) @ Q.T + c).ravel()
        E0, E1 = info["energies"]["total"], m.assemble(xq, 1.0, tangent=False)[2]["energies"]["total"]
        worst_E = max(worst_E, abs(E1 - E0) / abs(E0))
    rep.metrics.update(translation_residual=worst_tr, translation_tangent=worst_Kt, rotation_energy=worst_E)
    rep.add("residual change under rigid translation", worst_tr, 0.0, 1e-10, "property", mode="abs")
    rep.add("tangent times rigid translation", worst_Kt, 0.0, 1e-10, "property", mode="abs")
    rep.add("energy change under finite rigid motion", worst_E, 0.0, 1e-12, "property", mode="abs")
    return rep
