"""Construct patches, fiber fields and materials from a scenario."""

from __future__ import annotations

import numpy as np

from ..kinematics import CircumferentialFiber, ConstantFiber
from ..materials import (SimpleFabric, SimpleFabricParams, StabilizationParams, WovenFabric,
                         WovenFabricParams, graded_bulk_modulus)
from ..nurbs import build_quarter_annulus, build_rect_patch
from ..solver import seed_imperfection
from .scenario import Scenario, ScenarioError, parse_bool, parse_floats, parse_mesh, parse_vectors, vector_or_scalar


def rotation_z(deg: float) -> np.ndarray:
    c, s = np.cos(np.radians(deg)), np.sin(np.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def build_patch(sc: Scenario):
    shape = sc.get("geometry", "shape")
    mesh = sc.get("geometry", "mesh", parse_mesh)
    if shape == "rect":
        p = sc.get("geometry", "degree", int, 2)
        origin = sc.get("geometry", "origin", parse_floats, [0.0, 0.0])
        patch = build_rect_patch(sc.get("geometry", "Lx", float), sc.get("geometry", "Ly", float),
                                 (p, p), mesh, origin=tuple(origin[:2]))
        rot = sc.get("geometry", "rotate_deg", float, 0.0)
        if rot != 0.0:
            patch = patch.with_control_points(patch.control_points() @ rotation_z(rot).T)
    elif shape == "quarter_annulus":
        patch = build_quarter_annulus(sc.get("geometry", "Ri", float), sc.get("geometry", "Ro", float), mesh)
    else:
        raise ScenarioError(f"bad value for 'geometry.shape': {shape!r}")
    return patch


def imperfect(sc: Scenario, patch, fixed_nodes=()):
    sigma = sc.get("geometry", "imperfection", float, 0.0)
    if sigma == 0.0:
        return patch
    return seed_imperfection(patch, sigma, sc.get("geometry", "seed", int, 0), fixed_nodes)


def build_fibers(sc: Scenario) -> list:
    kind = sc.get("fibers", "field", str, "constant")
    if kind == "circumferential":
        return [CircumferentialFiber()]
    if kind != "constant":
        raise ScenarioError(f"bad value for 'fibers.field': {kind!r}")
    dirs = sc.get("fibers", "directions", parse_vectors, [])
    rot = sc.get("geometry", "rotate_deg", float, 0.0)
    out = []
    for d in dirs:
        v = np.zeros(3)
        v[:len(d)] = d
        out.append(ConstantFiber(rotation_z(rot) @ v))
    return out


def _stab(sc: Scenario):
    e = sc.get("material", "stab_eps_e", float, 0.0)
    v = sc.get("material", "stab_eps_v", float, 0.0)
    return StabilizationParams(e, v) if (e or v) else None


def build_material(sc: Scenario):
    model = sc.get("material", "model")
    g = lambda k, d=0.0: sc.get("material", k, vector_or_scalar, d)  # noqa: E731
    try:
        if model == "simple":
            K = sc.get("material", "K", str, "none")
            if K == "none":
                K = None
            elif K == "graded":
                K = graded_bulk_modulus(g("eps_L"))
            else:
                K = float(K)
            p = SimpleFabricParams(mu=g("mu"), K=K, eps_L=g("eps_L"), beta_n=g("beta_n"), beta_g=g("beta_g"),
                                   beta_tau=g("beta_tau"), eps_a=g("eps_a"),
                                   tension_only=sc.get("material", "tension_only", parse_bool, False))
            return SimpleFabric(p, _stab(sc))
        if model == "woven":
            d = WovenFabricParams()
            p = WovenFabricParams(eps_L=g("eps_L", d.eps_L), beta_g=g("beta_g", d.beta_g), mu=g("mu", d.mu),
                                  alpha1=g("alpha1", d.alpha1), eta=g("eta", d.eta), alpha2=g("alpha2", d.alpha2),
                                  tension_only=sc.get("material", "tension_only", parse_bool, False))
            return WovenFabric(p, _stab(sc))
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad material parameters: {exc}") from None
    raise ScenarioError(f"bad value for 'material.model': {model!r}")
