import numpy as np
import pytest
from numpy.testing import assert_allclose

from fibershell import nurbs
from conftest import fd_jacobian


def curved_patch():
    p = nurbs.build_quarter_annulus(0.5, 1.0, (2, 3))
    X = p.control_points()
    X[:, 2] = 0.2 * X[:, 0] * X[:, 1]
    return p.with_control_points(X)


class TestKnotVector:
    def test_open_knot_vector(self):
        kv = nurbs.open_knot_vector(2, 3)
        assert_allclose(kv.knots, [0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1])
        assert kv.n_basis == 5
        assert len(kv.spans()) == 3

    def test_find_span_end_of_domain(self):
        kv = nurbs.open_knot_vector(2, 3)
        assert kv.find_span(1.0) == kv.spans()[-1]
        assert kv.find_span(0.0) == kv.spans()[0]

    def test_rejects_decreasing_knots(self):
        with pytest.raises(ValueError):
            nurbs.KnotVector(2, [0, 0, 0, 0.6, 0.4, 1, 1, 1])

    @pytest.mark.parametrize("degree", [1, 2, 3])
    def test_partition_of_unity(self, degree):
        kv = nurbs.open_knot_vector(degree, 4)
        for u in np.linspace(0, 1, 17):
            B = nurbs.basis_funs_ders(kv, kv.find_span(u), u, 2)
            assert_allclose(B[0].sum(), 1.0, atol=1e-14)
            assert_allclose(B[1].sum(), 0.0, atol=1e-12)
            assert_allclose(B[2].sum(), 0.0, atol=1e-10)


class TestRationalBasis:
    @pytest.mark.parametrize("xi", [(0.13, 0.71), (0.5, 0.5), (0.9, 0.05)])
    def test_derivatives_match_fd(self, xi):
        p = curved_patch()
        be = nurbs.eval_basis(p, xi)
        spans = (p.U.find_span(xi[0]), p.V.find_span(xi[1]))
        N = lambda t: nurbs.eval_basis(p, t, spans=spans).N  # noqa: E731
        dN = lambda t: nurbs.eval_basis(p, t, spans=spans).dN.ravel()  # noqa: E731
        assert_allclose(fd_jacobian(N, xi, 1e-6), be.dN.T, atol=1e-8)
        assert_allclose(fd_jacobian(dN, xi, 1e-6).reshape(2, -1, 2).transpose(2, 0, 1), be.ddN, atol=1e-6)
        assert_allclose(be.N.sum(), 1.0, atol=1e-14)

    def test_quarter_annulus_is_exact_circle(self):
        p = nurbs.build_quarter_annulus(0.5, 1.0)
        for v in np.linspace(0, 1, 11):
            for u, r in ((0.0, 0.5), (1.0, 1.0), (0.5, 0.75)):
                assert_allclose(np.linalg.norm(p.evaluate(u, v)[:2]), r, rtol=1e-14)

    def test_rect_patch_is_affine(self):
        p = nurbs.build_rect_patch(2.0, 1.0, (2, 2), (3, 2), origin=(1.0, -1.0))
        assert_allclose(p.evaluate(0.3, 0.8), [1.0 + 0.6, -1.0 + 0.8, 0.0], atol=1e-14)


class TestRefinement:
    def test_knot_insertion_preserves_geometry(self):
        p = curved_patch()
        r = nurbs.insert_knots(p, [0.3, 0.3], [0.77])
        for uv in [(0.1, 0.2), (0.31, 0.9), (0.7, 0.77)]:
            assert_allclose(r.evaluate(*uv), p.evaluate(*uv), atol=1e-14)

    def test_uniform_refine_counts(self):
        p = nurbs.uniform_refine(nurbs.build_quarter_annulus(0.5, 1.0), (4, 3))
        assert p.n_elements == (4, 3)
        assert p.shape == (6, 5)


class TestQuadrature:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_gauss_exactness(self, n):
        x, w = nurbs.gauss_rule(n)
        for k in range(2 * n):
            assert_allclose(np.sum(w * x**k), 1.0 / (k + 1), rtol=1e-13)

    def test_area_of_quarter_annulus(self):
        p = nurbs.build_quarter_annulus(0.5, 1.0, (2, 2))
        q = nurbs.element_quadrature(p, 6)
        from fibershell.kinematics import surface_config
        X = p.control_points()
        geo = surface_config(q.dN, q.ddN, X[q.conn][:, None])
        assert_allclose(np.sum(q.weight * geo.jac), np.pi / 4 * (1 - 0.25), rtol=1e-9)

    @pytest.mark.parametrize("edge", ["u0", "u1", "v0", "v1"])
    def test_edge_length(self, edge):
        p = nurbs.build_rect_patch(2.0, 1.0, (2, 2), (3, 2))
        eq = nurbs.edge_quadrature(p, edge)
        X = p.control_points()
        t = np.einsum("sqn,sni->sqi", eq.dN[..., eq.direction, :], X[eq.conn])
        length = np.sum(np.linalg.norm(t, axis=-1) * eq.weight)
        assert_allclose(length, 2.0 if edge[0] == "v" else 1.0, rtol=1e-14)

    def test_edge_nodes_lie_on_edge(self):
        p = nurbs.build_rect_patch(2.0, 1.0, (2, 2), (3, 2))
        X = p.control_points()
        assert_allclose(X[nurbs.edge_nodes(p, "u1"), 0], 2.0)
        assert_allclose(X[nurbs.edge_nodes(p, "v0"), 1], 0.0)
        with pytest.raises(KeyError):
            nurbs.edge_nodes(p, "w0")

    def test_outside_domain(self):
        p = nurbs.build_rect_patch(1.0, 1.0)
        with pytest.raises(nurbs.DomainError):
            nurbs.eval_basis(p, (1.5, 0.5), spans=(2, 2))
