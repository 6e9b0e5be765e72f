import math
from fractions import Fraction

import numpy as np
import pytest

from slotcsma import (
    InterferenceGraph,
    InvalidRate,
    Schedule,
    capacity_margin,
    path_graph,
    sample_arrivals,
    update_queues,
)
from slotcsma import rng
from slotcsma.graph import complete_graph, maximal_independent_masks
from slotcsma.queueing import EXACT_LP_CAP


class TestUpdateQueues:
    def test_empty_queue_serves_dummy(self, k2):
        out = update_queues([0, 0], Schedule.from_nodes([0]), [1, 0])
        assert out.tolist() == [1, 0]

    def test_depart_and_arrive(self, k2):
        out = update_queues([3, 1], Schedule.from_nodes([0]), [0, 1])
        assert out.tolist() == [2, 2]

    def test_depart_before_arrival(self):
        out = update_queues([1], Schedule.from_nodes([0]), [1])
        assert out.tolist() == [1]

    def test_arrivals_must_be_binary(self):
        with pytest.raises(ValueError):
            update_queues([1], Schedule(0), [2])

    def test_conservation_over_random_trace(self):
        gen = np.random.default_rng(11)
        g = path_graph(4)
        q = np.zeros(4, dtype=np.int64)
        total_arr = np.zeros(4, dtype=np.int64)
        total_dep = np.zeros(4, dtype=np.int64)
        sets = [0b0000, 0b0001, 0b0100, 0b0101, 0b1001]
        for _ in range(500):
            sched = Schedule(int(gen.choice(sets)))
            arr = gen.integers(0, 2, size=4)
            before = q.copy()
            q = update_queues(q, sched, arr)
            dep = before + arr - q
            total_dep += dep
            total_arr += arr
            assert np.all(q >= 0)
        assert np.array_equal(q, total_arr - total_dep)


class TestSampleArrivals:
    def test_zero_rate_never_arrives(self):
        u = rng.uniform_array(5, 0, np.arange(64, dtype=np.uint64), rng.ARRIVAL)
        assert sample_arrivals(np.zeros(64), u).sum() == 0

    def test_unit_rate_always_arrives(self):
        u = rng.uniform_array(5, 1, np.arange(64, dtype=np.uint64), rng.ARRIVAL)
        assert sample_arrivals(np.ones(64), u).sum() == 64

    def test_empirical_rate(self):
        # one million iid coins: mean within 0.002 of 0.3
        u = rng.uniform_array(17, 0, np.arange(10**6, dtype=np.uint64), rng.ARRIVAL)
        lam = np.full(10**6, 0.3)
        assert sample_arrivals(lam, u).mean() == pytest.approx(0.3, abs=0.002)

    def test_rejects_bad_rates(self):
        with pytest.raises(InvalidRate):
            sample_arrivals([-0.1], [0.5])
        with pytest.raises(InvalidRate):
            sample_arrivals([1.5], [0.5])


def brute_force_margin(g, lam, refinements=60):
    """Independent oracle: adaptive grid search over mixtures of maximal sets.

    The margin objective t(alpha) = min_i service_i / lam_i is concave and
    piecewise linear over the mixture simplex, so zooming a local grid around
    the best point converges to the optimum.
    """
    lam = np.asarray(lam, dtype=np.float64)
    masks = maximal_independent_masks(g)
    service = np.array(
        [[(m >> i) & 1 for i in range(g.n)] for m in masks], dtype=np.float64
    )
    active = lam > 0

    def value(alpha):
        served = alpha @ service
        return (served[active] / lam[active]).min()

    k = len(masks)
    if k == 1:
        return value(np.ones(1))
    center = np.full(k, 1.0 / k)
    radius = 1.0
    best = value(center)
    steps = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    for _ in range(refinements):
        grids = np.meshgrid(*[center[i] + radius * steps for i in range(k - 1)])
        pts = np.stack([x.ravel() for x in grids], axis=1)
        last = 1.0 - pts.sum(axis=1)
        pts = np.concatenate([pts, last[:, None]], axis=1)
        ok = (pts >= 0).all(axis=1)
        pts = pts[ok]
        vals = np.array([value(p) for p in pts])
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = float(vals[j])
            center = pts[j]
        radius *= 0.6
    return best


class TestCapacityMargin:
    def test_k2_interior_point(self, k2):
        t = capacity_margin(k2, [0.4, 0.4])
        assert float(t) == pytest.approx(1.25, abs=1e-9)
        assert isinstance(t, Fraction)

    def test_k2_exterior_point(self, k2):
        t = capacity_margin(k2, [0.6, 0.6])
        assert float(t) == pytest.approx(5.0 / 6.0, abs=1e-9)
        assert float(t) < 1

    def test_path_singleton_schedule(self):
        t = capacity_margin(path_graph(3), [0.5, 0.0, 0.5])
        assert t == 2

    def test_zero_rates_unbounded(self, k2):
        assert capacity_margin(k2, [0.0, 0.0]) == math.inf

    def test_negative_rate_rejected(self, k2):
        with pytest.raises(InvalidRate):
            capacity_margin(k2, [-0.1, 0.2])

    def test_positive_homogeneity(self, k2):
        base = capacity_margin(k2, [0.25, 0.5])
        for c in (0.5, 1.5, 2.0):
            scaled = capacity_margin(k2, [0.25 * c, 0.5 * c])
            assert float(scaled) == pytest.approx(float(base) / c, rel=1e-9)

    def test_double_precision_path_beyond_exact_cap(self):
        g = path_graph(EXACT_LP_CAP + 1)
        t = capacity_margin(g, [0.25] * (EXACT_LP_CAP + 1))
        assert isinstance(t, float)
        # half mixture on evens {0,2,4,6}, half on odds {1,3,5}
        assert t == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize(
        "g,lam",
        [
            (InterferenceGraph.from_edges(2, [(0, 1)]), [0.4, 0.4]),
            (InterferenceGraph.from_edges(2, [(0, 1)]), [0.7, 0.1]),
            (path_graph(3), [0.3, 0.2, 0.3]),
            (complete_graph(3), [0.2, 0.3, 0.25]),
            (path_graph(4), [0.25, 0.25, 0.25, 0.25]),
        ],
    )
    def test_matches_brute_force_mixture_search(self, g, lam):
        t = float(capacity_margin(g, lam))
        assert t == pytest.approx(brute_force_margin(g, lam), abs=1e-6)
