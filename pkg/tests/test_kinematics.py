import numpy as np
import pytest
from numpy.testing import assert_allclose

from fibershell import kinematics as km
from fibershell import nurbs


def point_geometry(patch, xi, X=None):
    be = nurbs.eval_basis(patch, xi)
    X = patch.control_points() if X is None else X
    cfg = km.surface_config(be.dN, be.ddN, X[be.indices])
    return cfg, be.N @ X[be.indices]


def cylinder(R=2.0, length=1.0):
    """Quarter cylinder of radius R about e2: exact NURBS circle in (x, z)."""
    arc = nurbs.build_quarter_annulus(R - 0.1, R, (1, 1))
    c = arc.ctrl[-1]  # outer circle control points (3, 3) in the x-y plane
    ctrl = np.zeros((3, 2, 3))
    for j, y in enumerate((0.0, length)):
        ctrl[:, j, 0] = c[:, 0]
        ctrl[:, j, 2] = c[:, 1]
        ctrl[:, j, 1] = y
    w = np.repeat(arc.weights[-1][:, None], 2, axis=1)
    return nurbs.NurbsPatch(nurbs.KnotVector(2, [0, 0, 0, 1, 1, 1]), nurbs.KnotVector(1, [0, 0, 1, 1]), ctrl, w)


class TestSurfaceConfig:
    def test_flat_metric(self):
        p = nurbs.build_rect_patch(2.0, 1.0)
        cfg, _ = point_geometry(p, (0.3, 0.4))
        assert_allclose(cfg.met, np.diag([4.0, 1.0]), atol=1e-14)
        assert_allclose(cfg.n, [0, 0, 1], atol=1e-15)
        assert_allclose(cfg.b, 0.0, atol=1e-14)
        assert_allclose(np.einsum("ai,bi->ab", cfg.acon, cfg.a), np.eye(2), atol=1e-14)

    @pytest.mark.parametrize("xi", [(0.1, 0.2), (0.5, 0.9), (0.85, 0.5)])
    def test_cylinder_mean_curvature(self, xi):
        R = 2.0
        cfg, x = point_geometry(cylinder(R), xi)
        assert_allclose(np.hypot(x[0], x[2]), R, rtol=1e-14)
        assert_allclose(abs(cfg.mean_curvature), 0.5 / R, rtol=1e-12)
        K = np.linalg.det(cfg.b) / np.linalg.det(cfg.met)
        assert_allclose(K, 0.0, atol=1e-12)

    def test_christoffel_symbols_match_fd_of_metric(self):
        p = cylinder()
        xi = np.array([0.3, 0.6])
        cfg, _ = point_geometry(p, xi)
        h = 1e-6
        dmet = []
        for g in range(2):
            e = np.zeros(2)
            e[g] = h
            dmet.append((point_geometry(p, xi + e)[0].met - point_geometry(p, xi - e)[0].met) / (2 * h))
        dmet = np.array(dmet)  # [g, a, b]
        # Gamma_{d,ab} = 1/2 (a_da,b + a_db,a - a_ab,d)
        G_low = 0.5 * (np.einsum("bda->dab", dmet) + np.einsum("adb->dab", dmet) - dmet)
        assert_allclose(np.einsum("gd,dab->gab", cfg.inv, G_low), cfg.gamma, atol=1e-8)

    def test_degenerate_raises(self):
        a = np.array([[1.0, 0, 0], [2.0, 0, 0]])
        with pytest.raises(km.SingularSurfaceError):
            km.surface_config_from_vectors(a, np.zeros((2, 2, 3)))


class TestFiberFields:
    def test_constant_fiber_projection(self):
        p = cylinder()
        cfg, x = point_geometry(p, (0.4, 0.5))
        L, dL = km.ConstantFiber([0, 1, 0]).components(cfg, x)
        t = L @ cfg.a
        assert_allclose(np.linalg.norm(t), 1.0, rtol=1e-14)
        assert_allclose(t, [0, 1, 0], atol=1e-14)

    @pytest.mark.parametrize("field", [km.CircumferentialFiber(), km.ConstantFiber([1.0, 0.3, 0.2])])
    def test_components_derivative_matches_fd(self, field):
        p = nurbs.build_quarter_annulus(0.5, 1.0)
        X = p.control_points()
        X[:, 2] = 0.3 * X[:, 0] ** 2
        p = p.with_control_points(X)
        xi = np.array([0.4, 0.3])
        cfg, x = point_geometry(p, xi)
        _, dL = field.components(cfg, x)
        h = 1e-6
        for b in range(2):
            e = np.zeros(2)
            e[b] = h
            Lp = field.components(*point_geometry(p, xi + e))[0]
            Lm = field.components(*point_geometry(p, xi - e))[0]
            assert_allclose((Lp - Lm) / (2 * h), dL[:, b], atol=1e-8)

    def test_circumferential_direction(self):
        L, _ = km.CircumferentialFiber()(np.array([[3.0, 4.0, 0.0]]))
        assert_allclose(L, [[-0.8, 0.6, 0.0]])


class TestFiberState:
    def setup_method(self):
        p = cylinder()
        self.p = p
        X = p.control_points()
        self.X = X
        self.x = X + 0.05 * np.random.default_rng(3).standard_normal(X.shape)
        self.field = km.ConstantFiber([1.0, 0.7, 0.0])

    def state(self, xi, current=True):
        ref, Xp = point_geometry(self.p, xi)
        L, dL = self.field.components(ref, Xp)
        cfg = point_geometry(self.p, xi, self.x)[0] if current else ref
        return km.fiber_state(cfg, L, dL), cfg

    def test_frame_is_orthonormal(self):
        fs, cfg = self.state((0.3, 0.4))
        assert_allclose(np.linalg.norm(fs.ell), 1.0, rtol=1e-14)
        assert_allclose(np.dot(fs.ell, fs.c), 0.0, atol=1e-15)
        assert_allclose(np.dot(cfg.n, fs.c), 0.0, atol=1e-15)
        assert_allclose(np.cross(cfg.n, fs.ell), fs.c, atol=1e-15)

    def test_projected_director_gradient_matches_fd(self):
        xi = np.array([0.35, 0.55])
        fs, cfg = self.state(xi)
        h = 1e-6
        P = np.eye(3) - np.outer(cfg.n, cfg.n)
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            dc = (self.state(xi + e)[0].c - self.state(xi - e)[0].c) / (2 * h)
            assert_allclose(P @ dc, fs.cbar_d[a], atol=1e-7)

    def test_collapsed_fiber(self):
        cfg = km.surface_config_from_vectors(np.array([[1e-12, 0, 0], [0, 1.0, 0]]), np.zeros((2, 2, 3)), tol=0)
        with pytest.raises(km.CollapsedFiberError):
            km.fiber_state(cfg, np.array([1.0, 0.0]), np.zeros((2, 2)))


class TestInvariants:
    def test_reference_state_is_unstrained(self):
        p = cylinder()
        ref, X = point_geometry(p, (0.2, 0.7))
        fibs = [km.fiber_state(ref, *f.components(ref, X)) for f in (km.ConstantFiber([1, 1, 0]),
                                                                     km.ConstantFiber([1, -1, 0]))]
        inv = km.deformation_invariants(ref, fibs, ref, fibs)
        assert_allclose(inv.J, 1.0)
        assert_allclose(inv.Lam, 1.0, rtol=1e-14)
        assert_allclose([inv.Kn, inv.Tg, inv.Kg], 0.0, atol=1e-14)
        assert_allclose(inv.gamma, inv.gamma0)
        assert inv.gamma_hat is not None

    def test_circle_geodesic_curvature(self):
        p = nurbs.build_quarter_annulus(0.5, 1.0)
        ref, X = point_geometry(p, (0.5, 0.3))
        fs = km.fiber_state(ref, *km.CircumferentialFiber().components(ref, X))
        assert_allclose(abs(fs.geodesic_curvature), 1.0 / 0.75, rtol=1e-12)

    def test_family_count_mismatch(self):
        p = nurbs.build_rect_patch(1.0, 1.0)
        ref, X = point_geometry(p, (0.5, 0.5))
        fs = km.fiber_state(ref, *km.ConstantFiber([1, 0, 0]).components(ref, X))
        with pytest.raises(ValueError):
            km.deformation_invariants(ref, [fs], ref, [])
