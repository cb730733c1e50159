import math
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poisson_cutset import percolation as pc
from poisson_cutset.config import D_CRITICAL
from poisson_cutset.errors import ParameterError


def bfs_components(points, x):
    """Oracle: component id per node by BFS over the O(n^2) distance matrix."""
    n = len(points)
    d = np.hypot(points[:, None, 0] - points[None, :, 0], points[:, None, 1] - points[None, :, 1])
    adj = (d <= x) & ~np.eye(n, dtype=bool)
    comp = -np.ones(n, dtype=int)
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in np.flatnonzero(adj[u] & (comp < 0)):
                comp[v] = c
                queue.append(v)
        c += 1
    return comp


def bfs_crossing(points, x, near_a, near_b):
    comp = bfs_components(points, x)
    return bool(set(comp[near_a]) & set(comp[near_b]))


class TestGraph:
    def test_closed_ball(self):
        g = pc.gilbert_graph(np.array([[0.0, 0.0], [1.0, 0.0], [2.5, 0.0]]), 1.0)
        assert {tuple(e) for e in g.edges.tolist()} == {(0, 1)}

    def test_no_self_loops_and_symmetric_distance(self):
        pts = np.random.default_rng(0).uniform(0, 10, size=(300, 2))
        g = pc.gilbert_graph(pts, 0.8)
        assert np.all(g.edges[:, 0] != g.edges[:, 1])
        d = np.hypot(*(pts[g.edges[:, 0]] - pts[g.edges[:, 1]]).T)
        assert np.all(d <= 0.8)

    def test_bad_distance(self):
        with pytest.raises(ParameterError):
            pc.gilbert_graph(np.zeros((2, 2)), 0.0)

    def test_union_find_matches_bfs(self):
        rng = np.random.default_rng(1)
        for _ in range(120):
            n = int(rng.integers(0, 60))
            pts = rng.uniform(0, 6, size=(n, 2))
            x = rng.uniform(0.3, 1.5)
            labels = pc.gilbert_graph(pts, x).labels()
            comp = bfs_components(pts, x)
            # same partition: labels and comp define the same equivalence classes
            for i in range(n):
                np.testing.assert_array_equal(labels == labels[i], comp == comp[i])

    def test_crossings_match_bfs(self):
        rng = np.random.default_rng(2)
        for _ in range(120):
            pts = rng.uniform(-6, 6, size=(int(rng.integers(1, 120)), 2))
            x = rng.uniform(0.5, 2.0)
            g = pc.gilbert_graph(pts, x)
            rho = np.hypot(pts[:, 0], pts[:, 1])
            inner, outer = 1.5, 5.0
            want = bfs_crossing(pts, x, np.abs(rho - inner) <= x / 2, np.abs(rho - outer) <= x / 2)
            assert pc.has_occupied_crossing(g, inner, outer) == want
            box = rng.uniform(0, 12, size=(int(rng.integers(1, 120)), 2))
            gb = pc.gilbert_graph(box, x)
            want_lr = bfs_crossing(box, x, box[:, 0] <= x / 2, box[:, 0] >= 12 - x / 2)
            assert pc.has_left_right_crossing(gb, 12.0) == want_lr


class TestCrossing:
    def test_empty(self):
        g = pc.gilbert_graph(np.empty((0, 2)), 1.0)
        assert not pc.has_occupied_crossing(g, 1.0, 2.0)
        assert not pc.has_left_right_crossing(g, 5.0)

    def test_single_edge(self):
        g = pc.gilbert_graph(np.array([[2.0, 0.0], [2.9, 0.0]]), 1.0)
        assert pc.has_occupied_crossing(g, 2.0, 2.9)

    def test_radial_chain(self):
        x = 1.0
        r = np.arange(5.0, 10.0 + 1e-9, 0.9 * x)
        chain = np.column_stack([r, np.zeros_like(r)])
        assert pc.has_occupied_crossing(pc.gilbert_graph(chain, x), 5.0, 10.0)
        broken = chain.copy()
        broken[3:, 0] += 1.5 * x - 0.9 * x  # one gap of 1.5x
        assert not pc.has_occupied_crossing(pc.gilbert_graph(broken, x), 5.0, broken[-1, 0])

    def test_boundary_convention(self):
        # a node within x/2 of a circle touches it; one just outside does not
        x = 1.0
        g = pc.gilbert_graph(np.array([[5.5, 0.0], [6.4, 0.0]]), x)
        assert pc.has_occupied_crossing(g, 5.0, 6.9)
        assert not pc.has_occupied_crossing(g, 4.9, 6.9)


class TestVacantLoop:
    def test_zero_density(self):
        exp = pc.CrossingExperiment(0.0, 10.0, 5.0, 1.0, 20)
        est = pc.vacant_loop_probability(exp, 0)
        assert est.probability == 1.0
        assert est.std_error == 0.0

    def test_large_x_dense(self):
        exp = pc.CrossingExperiment(4.0, 10.0, 3.0, 6.0, 20)
        assert pc.vacant_loop_probability(exp, 0).probability == 0.0

    def test_complement_of_crossing(self):
        exp = pc.CrossingExperiment(1.0, 20.0, 6.0, 1.1, 60)
        crossings = pc.annulus_crossing_trials(exp, 3)
        est = pc.vacant_loop_probability(exp, 3)
        assert est.probability + crossings.mean() == 1.0

    def test_invalid(self):
        for args in [(1.0, 0.0, 1.0, 1.0, 1), (1.0, 1.0, 0.0, 1.0, 1), (1.0, 1.0, 1.0, 0.0, 1), (-1.0, 1, 1, 1, 1)]:
            with pytest.raises(ParameterError):
                pc.CrossingExperiment(*args)
        with pytest.raises(ParameterError):
            pc.CrossingExperiment(1.0, 1.0, 1.0, 1.0, 0)

    def test_scaled(self):
        exp = pc.CrossingExperiment.scaled(4.0, 200.0, 1.0, 2.0, 3)
        assert exp.R == 100.0
        assert exp.x == 0.5
        assert exp.m == pytest.approx(2.0 * math.log(200.0) / 2.0)

    def test_nondecreasing_along_radius_ladder(self):
        k = 0.9 * D_CRITICAL
        ests = [pc.vacant_loop_probability(pc.CrossingExperiment.scaled(1.0, R, k, 15.0, 60), 9) for R in (10, 30, 100)]
        for a, b in zip(ests, ests[1:]):
            assert b.probability >= a.probability - 3 * math.hypot(a.std_error, b.std_error)


class TestOriginToBox:
    def test_zero_density(self):
        for m in (1.0, 3.0, 10.0):
            assert pc.origin_to_box_probability(0.0, 1.0, m, 10, 0).probability == 0.0

    def test_box_smaller_than_a_hop(self):
        x = 0.9 * D_CRITICAL
        assert pc.origin_to_box_probability(1.0, x, 0.4 * x, 10, 0).probability == 1.0
        assert pc.origin_to_box_probability(1.0, x, 0.8 * x, 400, 0).probability >= 0.9

    def test_supercritical_flag(self):
        assert pc.origin_to_box_probability(1.0, 1.3, 3.0, 5, 0).supercritical
        assert not pc.origin_to_box_probability(1.0, 1.0, 3.0, 5, 0).supercritical

    def test_invalid(self):
        with pytest.raises(ParameterError):
            pc.origin_to_box_probability(1.0, 1.0, 0.0, 5, 0)

    def test_decay_fit(self):
        scan = pc.decay_scan(1.0, 0.9 * D_CRITICAL, [2, 4, 6, 8, 10], 1000, 1)
        fit = pc.fit_log_linear([m for m, _ in scan], [e.probability for _, e in scan])
        assert fit.slope < 0
        assert fit.r_squared >= 0.9

    def test_fit_exact_exponential(self):
        ms = np.array([1.0, 2.0, 3.0])
        fit = pc.fit_log_linear(ms, 0.7 * np.exp(-0.4 * ms))
        assert fit.slope == pytest.approx(-0.4)
        assert fit.intercept == pytest.approx(math.log(0.7))
        assert fit.r_squared == pytest.approx(1.0)
        with pytest.raises(ParameterError):
            pc.fit_log_linear(ms, [0.5, 0.0, 0.1])


class TestThreshold:
    def test_bracket_sanity(self):
        assert pc.crossing_probability(1.0, 50.0, 0.5, 100, 0).probability < 0.05
        assert pc.crossing_probability(1.0, 50.0, 2.0, 100, 0).probability > 0.95

    def test_monotone_in_x_per_trial(self):
        prev = None
        for x in (0.9, 1.1, 1.2, 1.3, 1.6):
            cur = pc.box_crossing_trials(1.0, 30.0, x, 50, 4)
            if prev is not None:
                assert np.all(cur >= prev)
            prev = cur

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), x1=st.floats(0.5, 2.0), x2=st.floats(0.5, 2.0))
    def test_monotone_in_x_property(self, seed, x1, x2):
        lo, hi = sorted((x1, x2))
        a = pc.box_crossing_trials(1.0, 15.0, lo, 3, seed)
        b = pc.box_crossing_trials(1.0, 15.0, hi, 3, seed)
        assert np.all(b >= a)

    def test_monotone_in_density(self):
        lo = pc.crossing_probability(0.8, 40.0, 1.2, 150, 5)
        hi = pc.crossing_probability(1.2, 40.0, 1.2, 150, 5)
        assert hi.probability >= lo.probability - 3 * math.hypot(lo.std_error, hi.std_error)

    def test_preconditions(self):
        with pytest.raises(ParameterError, match="50"):
            pc.estimate_critical_radius(1.0, 40.0, 10, 0.01, 0)
        with pytest.raises(ParameterError):
            pc.estimate_critical_radius(1.0, 60.0, 10, 0.0, 0)
        with pytest.raises(ParameterError, match="straddle"):
            pc.estimate_critical_radius(1.0, 60.0, 20, 0.01, 0, bracket=(1.5, 2.0))

    def test_estimate_small_box(self):
        est = pc.estimate_critical_radius(1.0, 50.0, 100, 0.01, 0)
        assert 1.10 <= est.d_estimate <= 1.30
        xs = [row[0] for row in est.scan]
        assert xs == sorted(xs)
        assert est.scan[0][1] < 0.5 < est.scan[-1][1]

    @pytest.mark.slow
    def test_transition_sharpens_with_box_size(self):
        # At this box size the bias of the crossing-probability-1/2 estimator is
        # already below the bisection resolution, so finite-size scaling shows up
        # as a narrowing transition window around d.
        def window(side):
            below = pc.crossing_probability(1.0, side, 1.15, 300, 2).probability
            above = pc.crossing_probability(1.0, side, 1.25, 300, 2).probability
            return below, above

        b50, a50 = window(50.0)
        b100, a100 = window(100.0)
        assert b100 < b50
        assert a100 > a50
        est50 = pc.estimate_critical_radius(1.0, 50.0, 200, 0.004, 3).d_estimate
        est100 = pc.estimate_critical_radius(1.0, 100.0, 200, 0.004, 3).d_estimate
        resolution = 1.5 / 2**9
        assert abs(est100 - D_CRITICAL) <= abs(est50 - D_CRITICAL) + 2 * resolution
