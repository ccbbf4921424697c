from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osaas_plan.errors import CapacityExceeded, MissingProfile, UnknownService
from osaas_plan.formats import load_scenario
from osaas_plan.planner import (
    EXHAUSTED,
    FEASIBLE,
    contour_grid,
    place_channels,
    plan_with_fallback,
    profile_check,
    selection_label,
    sweep_launch_power,
)
from osaas_plan.qot import GsnrProfile, QotTargets
from osaas_plan.scenario import MeasuredQ, PowerCurve


class _Svc:
    def __init__(self, sid, cost, value=100.0, mod="16QAM"):
        self.id, self.bin_cost, self.throughput_gbps, self.modulation = sid, cost, value, mod


class TestPlacement:
    def test_left_packed(self):
        plan = place_channels([_Svc("a", 8)] * 4, 32)
        assert [p.start_bin for p in plan.placements] == [0, 8, 16, 24]
        assert plan.bins_used == 32 and plan.trx_used == 4

    def test_empty(self):
        plan = place_channels([], 32)
        assert plan.placements == () and plan.label == "none"

    def test_overflow(self):
        with pytest.raises(CapacityExceeded):
            place_channels([_Svc("a", 20)] * 2, 32)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.sampled_from("abcd"), st.integers(1, 12)), max_size=6), st.integers(0, 60))
    def test_disjoint_cover(self, spec, capacity):
        costs = {}
        services = []
        for sid, k in spec:
            costs.setdefault(sid, k)
            services.append(_Svc(sid, costs[sid]))
        need = sum(s.bin_cost for s in services)
        if need > capacity:
            with pytest.raises(CapacityExceeded):
                place_channels(services, capacity)
            return
        plan = place_channels(services, capacity)
        occupied = np.zeros(capacity, dtype=int)
        for p in plan.placements:
            occupied[p.start_bin:p.end_bin] += 1
        assert occupied.max(initial=0) <= 1 and occupied.sum() == need
        assert plan.total_gross_gbps == pytest.approx(100.0 * len(services))

    def test_label(self):
        assert selection_label([_Svc("64QAM-42G", 8)] * 4) == "4x64QAM-42G"
        assert selection_label([_Svc("a", 1), _Svc("a", 1), _Svc("b", 1)]) == "2xa+1xb"


@pytest.fixture(scope="module")
def s200():
    return load_scenario("table1_200ghz")


@pytest.fixture(scope="module")
def s300():
    return load_scenario("table1_300ghz")


class TestLaunchSweep:
    def _plan(self, scenario, curve):
        measured = MeasuredQ({}, {"64QAM-42G": curve})
        sc = replace(scenario, measured=measured)
        outcome = plan_with_fallback(replace(sc, targets=QotTargets(margin_db=0)))
        return sc, outcome.plan

    def test_symmetric_surrogate_peaks_at_zero(self, s200):
        sc = replace(s200, measured=None)
        plan = plan_with_fallback(replace(sc, targets=QotTargets(margin_db=0))).plan
        p, q = sweep_launch_power(plan, sc)
        assert p == 0.0 and len(q) == plan.trx_used

    def test_fixture_peak(self, s200):
        curve = PowerCurve((-2.0, -1.0, 0.0, 1.0, 2.0), (6.0, 6.5, 6.8, 7.1, 6.9))
        sc, plan = self._plan(s200, curve)
        assert sweep_launch_power(plan, sc)[0] == 1.0

    def test_offset_invariant(self, s200):
        q = (6.0, 6.5, 6.8, 7.1, 6.9)
        powers = (-2.0, -1.0, 0.0, 1.0, 2.0)
        sc, plan = self._plan(s200, PowerCurve(powers, q))
        shifted = replace(sc, measured=MeasuredQ({}, {"64QAM-42G": PowerCurve(powers, tuple(v + 3 for v in q))}))
        assert sweep_launch_power(plan, sc)[0] == sweep_launch_power(plan, shifted)[0]


class TestFallback:
    def test_reference_walk(self, s200):
        out = plan_with_fallback(s200)
        assert out.status == FEASIBLE
        first, last = out.log[0], out.log[-1]
        assert first.label == "4x64QAM-42G" and first.total_gross_gbps == 2016
        assert not first.report.feasible and first.report.channels[0].q_value_db == 6.87
        assert last.label == "4x32QAM-37G" and last.total_gross_gbps == 1480
        assert last.report.feasible and last.report.channels[0].q_value_db == 9.05
        assert out.plan.label == "4x32QAM-37G"
        assert len(out.log) <= len(s200.catalog) + 1

    def test_single_exclusion_same_here(self, s200):
        assert plan_with_fallback(s200, single_exclusion=True).plan.label == "4x32QAM-37G"

    def test_all_feasible_one_iteration(self, s300):
        out = plan_with_fallback(s300)
        assert len(out.log) == 1 and out.plan.total_gross_gbps == 2520

    def test_nothing_above_threshold(self, s200):
        sc = replace(s200, profile=GsnrProfile.flat(200, -20))
        out = plan_with_fallback(sc)
        assert out.status == EXHAUSTED and out.plan.placements == () and len(out.log) == 1

    def test_all_fail_exhausts(self, s200):
        sc = replace(s200, measured=MeasuredQ({c.id: 1.0 for c in s200.catalog}))
        out = plan_with_fallback(sc)
        assert out.status == EXHAUSTED
        # feasible set shrinks every iteration
        sizes = [len(r.feasible_ids) for r in out.log]
        assert all(b < a for a, b in zip(sizes, sizes[1:]))
        assert len(out.log) <= len(sc.catalog) + 1

    def test_simulated_path(self, s300):
        out = plan_with_fallback(replace(s300, measured=None))
        assert out.report.channels and all(c.source == "simulated" for c in out.report.channels)


@pytest.fixture(scope="module")
def scenario():
    return load_scenario("contour_300ghz_4wss")


class TestContour:
    def test_dimensions(self, scenario):
        g = contour_grid(scenario, "32QAM-50G")
        assert g.mean_q_db.shape == (12, 21)
        assert g.rolloffs[0] == 0.05 and g.rolloffs[-1] == 0.6

    def test_power_optimum_interior(self, scenario):
        g = contour_grid(scenario, "16QAM-63G")
        j = np.argmax(g.mean_q_db, axis=1)
        assert np.all((j > 0) & (j < g.powers_db.size - 1))

    def test_unknown_service(self, scenario):
        with pytest.raises(UnknownService):
            contour_grid(scenario, "nope")

    def test_needs_profile(self, scenario):
        with pytest.raises(MissingProfile):
            contour_grid(replace(scenario, profile=None), "32QAM-50G")


class TestProfileCheck:
    def test_high_and_low(self, s200):
        assert all(r.feasible for r in profile_check(replace(s200, profile=GsnrProfile.flat(200, 99))))
        assert not any(r.feasible for r in profile_check(replace(s200, profile=GsnrProfile.flat(200, -99))))

    def test_missing(self, s200):
        with pytest.raises(MissingProfile):
            profile_check(replace(s200, profile=None))
