import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mvquad.caratheodory import ConvexCombination
from mvquad.domain import DiscreteMeasure, box, interval, make_path
from mvquad.errors import ReductionError
from mvquad.expr import evaluate_system, parse
from mvquad.path_reduce import BarycentricFrame, barycentric, first_zero_crossing, reduce


def fns(*srcs):
    return [parse(s) for s in srcs]


def combination(f, points, weights):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    imgs = evaluate_system(f, pts)
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    target = (w[:, None] * imgs).sum(axis=0)
    return ConvexCombination.build(pts, w, imgs, target)


class TestBarycentric:
    def setup_method(self):
        ang = 2 * np.pi * np.arange(3) / 3
        self.imgs = np.column_stack([np.cos(ang), np.sin(ang)])
        self.frame = BarycentricFrame.from_images(self.imgs[1:], self.imgs[0], [0.0, 0.0])

    def test_basis_vector(self):
        np.testing.assert_allclose(barycentric(self.frame, self.imgs[1]), [1, 0], atol=1e-15)

    def test_origin(self):
        assert barycentric(self.frame, [0.0, 0.0]).tolist() == [0.0, 0.0]

    def test_symmetric_negative_point(self):
        # equal weights v_j: coordinates -v_j/v_0 = -1; oracle is a direct solve
        direct = np.linalg.solve(self.imgs[1:].T, self.imgs[0])
        got = barycentric(self.frame, self.imgs[0])
        np.testing.assert_allclose(got, [-1, -1], atol=1e-14)
        np.testing.assert_allclose(got, direct, atol=1e-14)

    def test_singular_frame(self):
        with pytest.raises(ReductionError):
            BarycentricFrame.from_images([[1.0, 0.0], [2.0, 0.0]], [-1.0, -1.0], [0.0, 0.0])

    def test_negative_point_required(self):
        with pytest.raises(ReductionError):
            BarycentricFrame.from_images([[1.0, 0.0], [0.0, 1.0]], [1.0, -1.0], [0.0, 0.0])


class TestFirstZeroCrossing:
    def test_linear_root(self):
        frame = BarycentricFrame.from_images([[1.0]], [-1.0], [0.0])
        tr = first_zero_crossing(frame, fns("t"), make_path(interval(-1, 1), -1, 1))
        assert tr.lambda_zero == 0.5
        assert tr.vanished_index == 0

    def test_minimum_of_root_set(self):
        f = fns("(t-0.3)/0.7", "t-0.7")
        frame = BarycentricFrame.from_images(np.eye(2), evaluate_system(f, [[0.0]])[0], [0.0, 0.0])
        tr = first_zero_crossing(frame, f, make_path(interval(0, 1), 0, 1))
        assert abs(tr.lambda_zero - 0.3) <= 1e-13
        assert tr.vanished_index == 0
        assert tr.coords[1] < 0

    def test_crossing_tolerance(self):
        f = fns("sin(3*t)", "cos(2*t)")
        c = combination(f, [0.1, 1.2, 2.9], [0.3, 0.3, 0.4])
        frame = BarycentricFrame.from_images(c.images[1:], c.images[0], c.target)
        tr = first_zero_crossing(frame, f, make_path(interval(0, 3), 0.1, 1.2))
        assert 0 < tr.lambda_zero <= 1
        tol_zero = 1e-11 * (1 + np.abs(tr.coords).max())
        assert abs(tr.coords[tr.vanished_index]) <= max(tol_zero, 1e-12)
        assert np.all(np.delete(tr.coords, tr.vanished_index) <= tol_zero)


class TestReduce:
    def test_mvt_linear(self):
        c = combination(fns("t"), [0.25, 0.75], [0.5, 0.5])
        out = reduce(c, fns("t"), interval(0, 1))
        assert out.size == 1
        assert abs(out.points[0, 0] - 0.5) <= 1e-12
        assert out.weights.tolist() == [1.0]

    def test_mvt_symmetric(self):
        # mean of t over [-1,1] is attained at t = 0
        c = combination(fns("t"), [-0.5, 0.5], [0.5, 0.5])
        out = reduce(c, fns("t"), interval(-1, 1))
        assert out.size == 1 and abs(out.points[0, 0]) <= 1e-12

    def test_circle(self):
        f = fns("cos(t)", "sin(t)")
        ang = np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3]) + 0.2
        c = combination(f, ang, [1, 1, 1])
        c.target = np.zeros(2)
        c.residual = float(np.abs(c.weighted_sum()).max())
        out = reduce(c, f, interval(0, 2 * np.pi))
        assert out.size == 2
        assert out.residual <= 1e-8
        # direct evaluation oracle
        direct = evaluate_system(f, out.points).T @ out.weights
        assert np.abs(direct).max() <= 1e-8

    def test_already_small(self):
        c = combination(fns("t", "t^2"), [0.2, 0.8], [0.5, 0.5])
        assert reduce(c, fns("t", "t^2"), interval(0, 1)) is c

    def test_hyperplane_branch(self):
        f = fns("t", "2*t")
        c = combination(f, [-1.0, 0.5, 1.0], [0.3, 0.4, 0.3])
        out = reduce(c, f, interval(-1, 1))
        assert out.size <= 2
        assert out.residual <= 1e-12
        assert any(r.get("degenerate") for r in out.trace)

    def test_discrete_flagged(self):
        m = DiscreteMeasure.from_atoms([([0.0], 1), ([1.0], 1)])
        c = combination(fns("t"), [0.0, 1.0], [0.5, 0.5])
        out = reduce(c, fns("t"), m)
        assert out.not_reduced and out.size == 2

    def test_box_domain(self):
        f = fns("x1", "x2", "x1*x2")
        c = combination(f, [[0, 0], [1, 0], [0, 1], [1, 1]], [0.1, 0.2, 0.3, 0.4])
        out = reduce(c, f, box([0, 0], [1, 1]))
        assert out.size <= 3 and out.residual <= 1e-8
        assert all(box([0, 0], [1, 1]).contains(p) for p in out.points)


_TERMS = ["t", "t^2", "t^3", "sin(t)", "cos(2*t)", "exp(t/2)", "sin(3*t)", "t^4", "cos(t)"]


@given(st.integers(1, 4), st.integers(0, 2**31))
def test_reduce_invariants(n, seed):
    rng = np.random.default_rng(seed)
    srcs = list(rng.choice(_TERMS, size=n, replace=False))
    f = fns(*srcs)
    a = rng.uniform(-2, 0)
    b = a + rng.uniform(0.5, 3)
    pts = np.sort(rng.uniform(a, b, n + 1))
    c = combination(f, pts, rng.uniform(0.05, 1, n + 1))
    out = reduce(c, f, interval(a, b))
    assert out.not_reduced or out.size <= n
    assert out.weights.min() >= -1e-12
    assert abs(math.fsum(out.weights) - 1) <= 1e-12
    assert out.residual <= c.residual + 1e-8 * (1 + np.abs(c.target).max())
