import numpy as np
import pytest
from numpy.testing import assert_allclose

from fibershell import element as el
from fibershell import kinematics as km
from fibershell import materials as mt
from fibershell import nurbs
from conftest import fd_jacobian, rel

FIELDS = (km.ConstantFiber([1.0, 0.3, 0.0]), km.ConstantFiber([-0.2, 1.0, 0.1]))


def simple_mat(inplane=True, stab=False):
    p = mt.SimpleFabricParams(mu=1.0, K=2.0, eps_L=[2.0, 3.0], beta_n=[0.5, 0.7],
                              beta_g=[0.3, 0.4] if inplane else 0.0, beta_tau=[0.2, 0.1], eps_a=1.0,
                              tension_only=stab)
    return mt.SimpleFabric(p, mt.StabilizationParams(5.0, 0.0) if stab else None)


def woven_mat(inplane=True):
    return mt.WovenFabric(mt.WovenFabricParams(beta_g=[4.8, 2.0] if inplane else 0.0))


class Element:
    """Single-element evaluation with the reference state of ``wavy_element``."""

    def __init__(self, q, Xe, material):
        self.N, self.dN, self.ddN, self.w = q.N[0], q.dN[0], q.ddN[0], q.weight[0]
        self.ref = km.surface_config(self.dN, self.ddN, Xe)
        Xq = self.N @ Xe
        self.comps = [f.components(self.ref, Xq) for f in FIELDS]
        self.ref_f = [km.fiber_state(self.ref, L, dL) for L, dL in self.comps]
        self.wJ = self.w * self.ref.jac
        self.material = material

    def state(self, xe):
        cur = km.surface_config(self.dN, self.ddN, np.reshape(xe, (-1, 3)))
        fibs = [km.fiber_state(cur, L, dL) for L, dL in self.comps]
        inv = km.deformation_invariants(self.ref, self.ref_f, cur, fibs)
        return cur, fibs, self.material(inv)

    def energy(self, xe):
        return float(np.sum(self.state(xe)[2].W * self.wJ))

    def force(self, xe):
        cur, fibs, resp = self.state(xe)
        sa = el.shape_arrays(self.N, self.dN, self.ddN, cur, fibs)
        parts = el.internal_force(sa, resp, self.wJ)
        return sum(p.sum(0) for p in parts.values())

    def tangents(self, xe, **kw):
        cur, fibs, resp = self.state(xe)
        sa = el.shape_arrays(self.N, self.dN, self.ddN, cur, fibs)
        km_ = el.material_tangent(sa, resp, self.wJ).sum(0)
        kg = el.geometric_tangent(sa, resp, cur, fibs, self.wJ, **kw).sum(0)
        return km_, kg


@pytest.fixture(params=["simple", "simple_no_inplane", "simple_stab", "woven", "woven_no_inplane"])
def element(request, wavy_element):
    mat = {"simple": simple_mat(), "simple_no_inplane": simple_mat(False), "simple_stab": simple_mat(True, True),
           "woven": woven_mat(), "woven_no_inplane": woven_mat(False)}[request.param]
    q, Xe = wavy_element
    return Element(q, Xe, mat), Xe


def current(Xe, seed=7, s=0.06):
    return Xe + s * np.random.default_rng(seed).standard_normal(Xe.shape)


class TestInternalForce:
    def test_force_is_energy_gradient(self, element):
        e, Xe = element
        x = current(Xe)
        g = fd_jacobian(lambda y: [e.energy(y)], x.ravel())[0]
        assert rel(e.force(x), g) < 1e-7

    def test_zero_force_in_reference(self, element):
        e, Xe = element
        if isinstance(e.material, mt.WovenFabric):
            pytest.skip("woven shear is measured from orthogonal reference fibers")
        assert_allclose(e.force(Xe), 0.0, atol=1e-12)

    def test_woven_zero_force_orthogonal_fibers(self):
        patch = nurbs.build_rect_patch(1.0, 0.7, (2, 2), (1, 1))
        q = nurbs.element_quadrature(patch)
        Xe = patch.control_points()[q.conn[0]]
        e = Element(q, Xe, woven_mat())
        e.comps = [km.ConstantFiber(d).components(e.ref, e.N @ Xe) for d in ([1, 0, 0], [0, 1, 0])]
        e.ref_f = [km.fiber_state(e.ref, L, dL) for L, dL in e.comps]
        assert_allclose(e.force(Xe), 0.0, atol=1e-12)


class TestTangent:
    def test_tangent_matches_fd(self, element):
        e, Xe = element
        x = current(Xe, 11)
        km_, kg = e.tangents(x)
        K_fd = fd_jacobian(e.force, x.ravel())
        assert rel(km_ + kg, K_fd) < 1e-6

    def test_blocks_symmetric(self, element):
        e, Xe = element
        km_, kg = e.tangents(current(Xe, 12))
        assert rel(km_, km_.T) < 1e-12 or np.linalg.norm(km_ - km_.T) < 1e-12
        assert np.linalg.norm(kg - kg.T) <= 1e-12 * np.linalg.norm(kg)

    def test_reduce_equals_point_sum(self, element):
        e, Xe = element
        x = current(Xe, 13)
        dN, ddN = e.dN[None], e.ddN[None]   # (E=1, Q, ...)
        ref = km.surface_config(dN, ddN, Xe[None, None])
        cur = km.surface_config(dN, ddN, x[None, None])
        ref_f = [km.fiber_state(ref, L[None], dL[None]) for L, dL in e.comps]
        fibs = [km.fiber_state(cur, L[None], dL[None]) for L, dL in e.comps]
        resp = e.material(km.deformation_invariants(ref, ref_f, cur, fibs))
        sa = el.shape_arrays(e.N[None], dN, ddN, cur, fibs)
        wJ = e.wJ[None]
        for fn in (lambda r: el.material_tangent(sa, resp, wJ, reduce=r),
                   lambda r: el.geometric_tangent(sa, resp, cur, fibs, wJ, reduce=r)):
            assert_allclose(fn(True)[0], fn(False)[0].sum(0), rtol=1e-12, atol=1e-12)


class TestErrata:
    """Superseded variants of two tangent terms must fail the FD check."""

    def test_symmetric_a12_term(self, wavy_element):
        q, Xe = wavy_element
        # pure out-of-plane bending material on a skewed, curved element (a^12 != 0)
        mat = mt.SimpleFabric(mt.SimpleFabricParams(beta_n=[1.0, 0.5], beta_tau=[0.3, 0.2]))
        e = Element(q, Xe, mat)
        x = current(Xe, 21, 0.1)
        cur, _, _ = e.state(x)
        assert np.min(np.abs(cur.inv[:, 0, 1])) > 1e-3
        K_fd = fd_jacobian(e.force, x.ravel())
        good = sum(e.tangents(x, symmetric_a12=True))
        bad = sum(e.tangents(x, symmetric_a12=False))
        assert rel(good, K_fd) < 1e-6
        assert rel(bad, K_fd) > 1e-3

    def test_curvature_metric_term(self, rng):
        Ln = rng.standard_normal((2, 9))
        ainv = np.array([[1.2, 0.3], [0.3, 0.8]])
        good = el.curvature_metric_term(Ln, ainv, symmetric=True)
        bad = el.curvature_metric_term(Ln, ainv, symmetric=False)
        assert_allclose(good, good.T, atol=1e-14)
        assert_allclose(good, Ln.T @ ainv @ Ln, atol=1e-13)
        assert np.linalg.norm(bad - bad.T) > 1e-3

    def test_inplane_moment_nc_split(self, wavy_element, rng):
        # a general symmetric Mbar: material models give Mbar ~ l x l, for which Mbar c = 0
        q, Xe = wavy_element
        N, dN, ddN, w = q.N[0], q.dN[0], q.ddN[0], q.weight[0]
        ref = km.surface_config(dN, ddN, Xe)
        L, dL = FIELDS[0].components(ref, N @ Xe)
        Mb = rng.standard_normal((len(N), 2, 2))
        Mb = Mb + np.swapaxes(Mb, -1, -2)
        nq = len(N)
        resp = mt.MaterialResponse(W=np.zeros(nq), tau=np.zeros((nq, 2, 2)), M0=np.zeros((nq, 2, 2)),
                                   Mbar=Mb[:, None])

        def parts(y):
            cur = km.surface_config(dN, ddN, np.reshape(y, (-1, 3)))
            fib = km.fiber_state(cur, L, dL)
            return cur, fib, el.shape_arrays(N, dN, ddN, cur, [fib])

        def force(y):
            return el.internal_force(parts(y)[2], resp, w)["Mbar"].sum(0)

        x = current(Xe, 22, 0.15)
        cur, fib, sa = parts(x)
        K_fd = fd_jacobian(force, x.ravel())
        for split, ok in ((True, True), (False, False)):
            pq = [el.pq_tensors(resp.Mbar[:, 0], cur, fib, split_nc=split)]
            K = el.geometric_tangent(sa, resp, cur, [fib], w, pq=pq).sum(0)
            assert (rel(K, K_fd) < 1e-6) == ok

    @pytest.mark.parametrize("dead", [True, False])
    @pytest.mark.parametrize("edge", ["u0", "u1", "v0", "v1"])
    def test_edge_moment_nu_variation(self, edge, dead, rng):
        patch = nurbs.build_rect_patch(1.0, 0.7, (2, 2), (1, 1))
        X = patch.control_points()
        X[:, 2] += 0.1 * rng.standard_normal(len(X))
        eq = nurbs.edge_quadrature(patch.with_control_points(X), edge)
        Xe = X[eq.conn[0]]
        ref = km.surface_config(eq.dN[0], eq.ddN[0], Xe)
        ref_len = np.linalg.norm(ref.a[:, eq.direction], axis=-1)
        x = Xe + 0.08 * rng.standard_normal(Xe.shape)

        def load(y, **kw):
            cur = km.surface_config(eq.dN[0], eq.ddN[0], np.reshape(y, (-1, 3)))
            return el.edge_moment_load(eq.N[0], eq.dN[0], cur, 0.7, eq.weight[0], eq.direction, eq.sign,
                                       dead, ref_len, **kw)

        K_fd = fd_jacobian(lambda y: load(y, tangent=False)[0].sum(0), x.ravel())
        good = load(x)[1].sum(0)
        bad = load(x, nu_variation=False)[1].sum(0)
        assert rel(good, K_fd) < 1e-6
        assert rel(bad, K_fd) > 1e-3


class TestExternalLoads:
    def test_pressure_tangent(self, wavy_element):
        q, Xe = wavy_element
        x = current(Xe, 31)

        def load(y, tangent=True):
            cur = km.surface_config(q.dN[0], q.ddN[0], np.reshape(y, (-1, 3)))
            return el.pressure_load(q.N[0], q.dN[0], cur, 0.8, q.weight[0], tangent)

        assert rel(load(x)[1].sum(0), fd_jacobian(lambda y: load(y, False)[0].sum(0), x.ravel())) < 1e-7

    @pytest.mark.parametrize("dead", [True, False])
    def test_traction_and_inplane_moment(self, rng, dead):
        patch = nurbs.build_rect_patch(1.0, 0.7, (2, 2), (1, 1))
        X = patch.control_points()
        X[:, 2] += 0.1 * rng.standard_normal(len(X))
        eq = nurbs.edge_quadrature(patch.with_control_points(X), "u1")
        Xe = X[eq.conn[0]]
        ref = km.surface_config(eq.dN[0], eq.ddN[0], Xe)
        ref_len = np.linalg.norm(ref.a[:, eq.direction], axis=-1)
        L, dL = FIELDS[0].components(ref, eq.N[0] @ Xe)
        x = Xe + 0.08 * rng.standard_normal(Xe.shape)

        def trac(y, tangent=True):
            cur = km.surface_config(eq.dN[0], eq.ddN[0], np.reshape(y, (-1, 3)))
            return el.traction_load(eq.N[0], eq.dN[0], cur, np.array([0.3, -0.2, 0.5]), eq.weight[0],
                                    eq.direction, dead, ref_len, tangent)

        def mbar(y, tangent=True):
            cur = km.surface_config(eq.dN[0], eq.ddN[0], np.reshape(y, (-1, 3)))
            fib = km.fiber_state(cur, L, dL)
            return el.inplane_moment_load(eq.N[0], eq.dN[0], cur, fib, 0.4, eq.weight[0], eq.direction, dead,
                                          ref_len, tangent)

        for fn in (trac, mbar):
            K_fd = fd_jacobian(lambda y: fn(y, False)[0].sum(0), x.ravel())
            K = fn(x)[1].sum(0)
            assert np.linalg.norm(K - K_fd) <= 1e-7 * max(1.0, np.linalg.norm(K_fd))

    def test_body_force_total(self, wavy_element):
        q, Xe = wavy_element
        ref = km.surface_config(q.dN[0], q.ddN[0], Xe)
        f = el.body_force(q.N[0], np.array([0.0, 0.0, -2.0]), q.weight[0] * ref.jac).sum(0).reshape(-1, 3)
        assert_allclose(f.sum(0), [0, 0, -2.0 * np.sum(q.weight[0] * ref.jac)], rtol=1e-14)
