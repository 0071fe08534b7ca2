"""Derived quantities at quadrature points and on edges."""

from __future__ import annotations

import numpy as np

from ..solver import Model


def point_fields(model: Model, x: np.ndarray) -> dict:
    """Per-quadrature-point fields, flattened to ``(P,)`` or ``(P, k)``.

    Keys: ``X``, ``x`` (positions), ``J``, ``H``, ``W`` and ``W_<part>``,
    ``Lambda<i>``, ``Kn<i>``, ``Kg<i>``, ``Tg<i>``, ``kappa_g<i>`` (current
    geodesic curvature), ``kg_sum``, ``theta`` (two families, degrees),
    ``tr_tau`` (``tau^ab a_ab``) and ``tr_Mbar`` (``sum_i Mbar_i^ab a_ab``).
    """
    q = model.quad
    x3 = np.asarray(x, float).reshape(-1, 3)
    cur, fibs, inv, resp = model.evaluate_points(x3, slice(None), tangent=False)
    xe = x3[q.conn][:, None]
    xq = np.einsum("eqn,eqni->eqi", q.N, np.broadcast_to(xe, q.N.shape + (3,)))
    P = xq.shape[0] * xq.shape[1]
    flat = lambda a: np.asarray(a).reshape((P,) + np.shape(a)[2:])  # noqa: E731
    out = {"X": flat(model.Xq), "x": flat(xq), "J": flat(inv.J), "H": flat(cur.mean_curvature),
           "W": flat(resp.W), "tr_tau": flat(np.einsum("...ab,...ab->...", resp.tau, cur.met))}
    for k, v in resp.parts.items():
        out[f"W_{k}"] = flat(v)
    nf = inv.n_families
    kg_sum = np.zeros(P)
    for i in range(nf):
        out[f"Lambda{i + 1}"] = flat(inv.Lam[..., i])
        out[f"Kn{i + 1}"] = flat(inv.Kn[..., i])
        out[f"Kg{i + 1}"] = flat(inv.Kg[..., i])
        out[f"Tg{i + 1}"] = flat(inv.Tg[..., i])
        kg = flat(fibs[i].geodesic_curvature)
        out[f"kappa_g{i + 1}"] = kg
        kg_sum = kg_sum + np.abs(kg)
    if nf:
        out["kg_sum"] = kg_sum
        out["tr_Mbar"] = flat(np.einsum("...iab,...ab->...", resp.Mbar, cur.met))
    if inv.gamma_hat is not None:
        out["theta"] = flat(np.degrees(np.arccos(np.clip(inv.gamma_hat, -1.0, 1.0))) - 90.0)
    return out


def edge_normal_resultant(model: Model, x: np.ndarray, name: str) -> float:
    """``int nu . sigma nu ds`` along an edge, ``sigma = tau / J``.

    ``nu`` is the in-plane unit normal to the edge in the current
    configuration and ``ds`` the current line element.
    """
    eq, cur, inv, resp = model.evaluate_edge(x, name)
    t = cur.a[..., eq.direction, :]
    ds = np.linalg.norm(t, axis=-1)
    nu = np.cross(t / ds[..., None], cur.n)
    nu_cov = np.einsum("...ai,...i->...a", cur.a, nu)
    s = np.einsum("...ab,...a,...b->...", resp.tau, nu_cov, nu_cov) / inv.J
    return float(np.sum(s * ds * eq.weight))


def edge_reaction(model: Model, reactions: np.ndarray, name: str) -> np.ndarray:
    """Sum of nodal reaction vectors on an edge."""
    return reactions.reshape(-1, 3)[model.edge_nodes(name)].sum(axis=0)
