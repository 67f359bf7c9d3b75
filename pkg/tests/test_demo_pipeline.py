import math

import numpy as np
import pytest

from canalpilot.demo_pipeline import (
    AlignedPair,
    Demonstration,
    arc_lengths,
    dtw_align,
    preprocess,
    resample_uniform,
    spline_smooth,
)
from canalpilot.geometry import quat_from_axis_angle, QUAT_IDENTITY

from conftest import make_demo, pair_from_curves
from oracles import dtw_cost_oracle, resample_polyline_oracle


class TestDemonstration:
    def test_requires_two_samples(self):
        with pytest.raises(ValueError):
            make_demo([[0, 0, 0]])

    def test_requires_increasing_time(self):
        with pytest.raises(ValueError):
            Demonstration(np.array([0.0, 0.0]), np.zeros((2, 3)),
                          np.tile(QUAT_IDENTITY, (2, 1)))


class TestDtwAlign:
    def test_identical_demos_align_on_diagonal(self):
        points = np.column_stack([np.linspace(0, 1, 10), np.zeros(10), np.zeros(10)])
        pair = dtw_align(make_demo(points, "a"), make_demo(points, "b"))
        assert pair.cost == 0.0
        assert len(pair) == 10
        assert pair.path == [(i, i) for i in range(10)]

    def test_line_resampled_with_repeats_costs_zero(self):
        # b holds a's positions with interior points doubled: a valid
        # warping path can match every pair exactly.
        a_pts = np.column_stack([np.linspace(0, 1, 5), np.zeros(5), np.zeros(5)])
        idx = [0, 1, 1, 2, 2, 3, 3, 4, 4]
        b_pts = a_pts[idx]
        pair = dtw_align(make_demo(a_pts, "a"), make_demo(b_pts, "b"))
        assert pair.cost < 1e-9
        assert pair.cost == pytest.approx(
            dtw_cost_oracle([tuple(p) for p in a_pts], [tuple(p) for p in b_pts]),
            abs=1e-12)

    def test_two_versus_three_points(self):
        # Hand-computed 2x3 table: optimal path (0,0),(0,1),(1,2), cost 0.5.
        a = make_demo([[0, 0, 0], [1, 0, 0]], "a")
        b = make_demo([[0, 0, 0], [0.5, 0, 0], [1, 0, 0]], "b")
        pair = dtw_align(a, b)
        assert len(pair) == 3
        assert pair.cost == pytest.approx(0.5, abs=1e-12)
        assert [p[0] for p in pair.path] == [0, 0, 1]

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(30):
            n, m = rng.integers(2, 7, size=2)
            a_pts = rng.uniform(-1, 1, size=(n, 3))
            b_pts = rng.uniform(-1, 1, size=(m, 3))
            pair = dtw_align(make_demo(a_pts, "a"), make_demo(b_pts, "b"))
            expected = dtw_cost_oracle([tuple(p) for p in a_pts],
                                       [tuple(p) for p in b_pts])
            assert pair.cost == pytest.approx(expected, abs=1e-12)

    def test_cost_never_beats_diagonal(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 8))
            a_pts = rng.uniform(-1, 1, size=(n, 3))
            b_pts = rng.uniform(-1, 1, size=(n, 3))
            pair = dtw_align(make_demo(a_pts, "a"), make_demo(b_pts, "b"))
            diagonal = sum(float(np.linalg.norm(a_pts[i] - b_pts[i]))
                           for i in range(n))
            assert pair.cost <= diagonal + 1e-12


class TestSplineSmooth:
    def test_collinear_points_unchanged(self):
        points = np.column_stack([np.linspace(0, 2, 30), np.zeros(30), np.zeros(30)])
        for smoothing in (0.0, 1e-4, 1e-2):
            out = spline_smooth(points, smoothing)
            assert np.allclose(out, points, atol=1e-6)

    def test_zero_smoothing_interpolates(self, rng):
        points = np.cumsum(rng.normal(size=(25, 3)) * 0.05, axis=0)
        out = spline_smooth(points, 0.0)
        assert np.allclose(out, points, atol=1e-9)

    def test_outlier_residual_halved(self):
        # Straight x line, 41 samples, single 5 cm step in z at index 20.
        # Reference smoothing-spline computation pinned the smoothed
        # outlier deviation at 0.0174837 with the default budget.
        n = 41
        points = np.column_stack([np.linspace(0, 1, n), np.zeros(n), np.zeros(n)])
        points[20, 2] += 0.05
        arc = arc_lengths(points)[-1]
        out = spline_smooth(points, 1e-4 * arc ** 2)
        residual = abs(out[20, 2])
        assert residual == pytest.approx(0.0174837, abs=1e-6)
        assert residual <= 0.5 * 0.05

    def test_rigid_equivariance(self, rng):
        points = np.cumsum(rng.normal(size=(20, 3)) * 0.1, axis=0)
        smoothing = 5e-4
        theta = 0.7
        rot = np.array([
            [math.cos(theta), -math.sin(theta), 0.0],
            [math.sin(theta), math.cos(theta), 0.0],
            [0.0, 0.0, 1.0],
        ])
        shift = np.array([1.0, -2.0, 0.5])
        direct = spline_smooth(points, smoothing) @ rot.T + shift
        transformed = spline_smooth(points @ rot.T + shift, smoothing)
        assert np.allclose(direct, transformed, atol=1e-6)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            spline_smooth(np.zeros((3, 3)), 0.0)

    def test_duplicate_points_deduplicated(self):
        points = np.column_stack([np.linspace(0, 1, 12), np.zeros(12), np.zeros(12)])
        points[5] = points[4]  # coincident consecutive samples
        out = spline_smooth(points, 1e-5)
        assert out.shape == points.shape
        assert np.allclose(out[:, 1:], 0.0, atol=1e-6)


class TestResampleUniform:
    def test_straight_segment_five_states(self):
        pair = pair_from_curves([[0, 0, 0], [1, 0, 0]], [[0, 0.1, 0], [1, 0.1, 0]])
        out = resample_uniform(pair, 5)
        assert np.allclose(out.pos_a[:, 0], [0.0, 0.25, 0.5, 0.75, 1.0])
        assert np.allclose(out.pos_b[:, 1], 0.1)

    def test_already_uniform_is_fixed_point(self):
        xs = np.linspace(0, 1, 9)
        a = np.column_stack([xs, np.zeros(9), np.zeros(9)])
        b = np.column_stack([xs, np.ones(9), np.zeros(9)])
        out = resample_uniform(pair_from_curves(a, b), 9)
        assert np.allclose(out.pos_a, a, atol=1e-9)
        assert np.allclose(out.pos_b, b, atol=1e-9)

    def test_quarter_circle_midpoint_matches_table_oracle(self):
        angles = np.linspace(0.0, math.pi / 2, 201)
        arc = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(201)])
        other = arc + np.array([0.0, 0.0, 0.1])
        out = resample_uniform(pair_from_curves(arc, other), 3)
        expected = resample_polyline_oracle([tuple(p) for p in arc], 3)
        assert np.allclose(out.pos_a, expected, atol=1e-6)
        # middle point sits at 45 degrees up to polyline chord error
        assert np.allclose(out.pos_a[1, :2], [math.cos(math.pi / 4)] * 2, atol=1e-4)

    def test_orientations_slerped(self):
        quats = np.array([QUAT_IDENTITY,
                          quat_from_axis_angle([0, 0, 1], math.pi / 2)])
        a = np.array([[0.0, 0, 0], [1.0, 0, 0]])
        pair = AlignedPair(pos_a=a, pos_b=a + [0, 1, 0],
                           quat_a=quats, quat_b=quats)
        out = resample_uniform(pair, 3)
        expected = quat_from_axis_angle([0, 0, 1], math.pi / 4)
        assert np.allclose(out.quat_a[1], expected, atol=1e-9)

    def test_zero_length_rejected(self):
        pair = pair_from_curves([[0, 0, 0], [0, 0, 0]], [[0, 1, 0], [0, 1, 0]])
        with pytest.raises(ValueError):
            resample_uniform(pair, 5)

    def test_n_states_too_small_rejected(self):
        pair = pair_from_curves([[0, 0, 0], [1, 0, 0]], [[0, 1, 0], [1, 1, 0]])
        with pytest.raises(ValueError):
            resample_uniform(pair, 1)


class TestPreprocess:
    def test_equal_lengths_and_distinct_directrix_inputs(self, rng):
        t = np.linspace(0, 1, 80)
        a_pts = np.column_stack([t, np.sin(t * 3) * 0.1, np.zeros(80)])
        b_pts = np.column_stack([t, np.sin(t * 3) * 0.1 + 0.08, np.zeros(80)])
        b_pts = b_pts[::2]  # different sampling density
        pair = preprocess(make_demo(a_pts, "a"), make_demo(b_pts, "b"), n_states=50)
        assert len(pair) == 50
        mid = 0.5 * (pair.pos_a + pair.pos_b)
        steps = np.linalg.norm(np.diff(mid, axis=0), axis=1)
        assert np.all(steps > 1e-9)
