import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from oracles import dense_half_power_width
from osaas_plan.errors import NoFeasibleBandwidth, PassbandCollapsed
from osaas_plan.wss_cascade import (
    CascadeSpec,
    WssModelParams,
    cascade_transfer,
    effective_3db_bandwidth,
    minimum_wss_bandwidth,
    wss_power_transfer,
)

SHARP = WssModelParams(otf_bandwidth_3db=1e-6)
DEFAULT = WssModelParams()


def test_sigma_from_fwhm():
    w = WssModelParams(8.5)
    assert w.sigma == pytest.approx(8.5 / (2 * math.sqrt(2 * math.log(2))))


@pytest.mark.parametrize("kw", [dict(otf_bandwidth_3db=0), dict(granularity=-1)])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        WssModelParams(**kw)


def test_cascade_spec_validated():
    with pytest.raises(ValueError):
        CascadeSpec(0, 50)
    with pytest.raises(ValueError):
        CascadeSpec(1, 0)
    with pytest.raises(ValueError):
        CascadeSpec(1, 51).check_grid(DEFAULT)
    CascadeSpec(1, 50).check_grid(DEFAULT)


class TestSingleFilter:
    def test_ideal_center(self):
        assert wss_power_transfer(SHARP, 50, 0.0) == pytest.approx(1.0)

    def test_edges_half_power(self):
        assert wss_power_transfer(DEFAULT, 50, [25.0, -25.0]) == pytest.approx([0.5, 0.5], abs=1e-9)

    def test_far_out_of_band(self):
        s = wss_power_transfer(DEFAULT, 50, 100.0)
        direct = 0.5 * (erf((25 - 100) / (math.sqrt(2) * DEFAULT.sigma))
                        + erf((25 + 100) / (math.sqrt(2) * DEFAULT.sigma)))
        assert s == pytest.approx(direct, abs=1e-15)
        assert s < 1e-6

    @given(st.floats(-200, 200), st.floats(6.25, 300))
    def test_symmetric_and_bounded(self, f, b):
        a, c = wss_power_transfer(DEFAULT, b, [f, -f])
        assert a == pytest.approx(c, abs=1e-12)
        assert 0.0 <= a <= 1.0


class TestCascade:
    def test_one_wss_identity(self):
        f = np.linspace(-40, 40, 101)
        assert np.array_equal(cascade_transfer(DEFAULT, CascadeSpec(1, 50), f), wss_power_transfer(DEFAULT, 50, f))

    def test_power_of_center(self):
        s0 = wss_power_transfer(DEFAULT, 50, 0.0)
        s6 = cascade_transfer(DEFAULT, CascadeSpec(6, 50), 0.0)
        assert s6 == pytest.approx(s0 ** 6)
        # at 50 GHz S(0) rounds to 1.0; a narrow slot shows the strict drop
        n0 = wss_power_transfer(DEFAULT, 12.5, 0.0)
        assert cascade_transfer(DEFAULT, CascadeSpec(6, 12.5), 0.0) < n0

    def test_half_power_point_to_the_fourth(self):
        assert cascade_transfer(DEFAULT, CascadeSpec(4, 50), 25.0) == pytest.approx(0.0625, abs=1e-9)


class TestEffectiveBandwidth:
    def test_ideal_filters_do_not_narrow(self):
        for n in (1, 3, 6, 10):
            assert effective_3db_bandwidth(SHARP, CascadeSpec(n, 75)) == pytest.approx(75, abs=1e-3)

    def test_strictly_narrows(self):
        widths = [effective_3db_bandwidth(DEFAULT, CascadeSpec(n, 75)) for n in range(1, 7)]
        assert np.all(np.diff(widths) < 0)

    def test_dense_grid_oracle(self):
        spec = CascadeSpec(4, 50)
        oracle = dense_half_power_width(lambda f: cascade_transfer(DEFAULT, spec, f), 40)
        assert effective_3db_bandwidth(DEFAULT, spec) == pytest.approx(oracle, abs=2e-4)
        # regression constant from the dense scan
        assert effective_3db_bandwidth(DEFAULT, spec) == pytest.approx(45.7612, abs=2e-3)

    def test_collapsed_passband(self):
        with pytest.raises(PassbandCollapsed):
            effective_3db_bandwidth(WssModelParams(40), CascadeSpec(8, 6.25))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 10), st.integers(4, 48))
    def test_never_wider_than_slot(self, n, k):
        b = 6.25 * k
        assert effective_3db_bandwidth(DEFAULT, CascadeSpec(n, b)) <= b + 1e-3


class TestMinimumBandwidth:
    def test_grid_rounding_ideal(self):
        assert minimum_wss_bandwidth(SHARP, 1, 49) == 50

    def test_cascade_needs_more(self):
        one = minimum_wss_bandwidth(DEFAULT, 1, 74)
        six = minimum_wss_bandwidth(DEFAULT, 6, 74)
        assert six >= 74 and six >= one

    def test_is_smallest(self):
        b = minimum_wss_bandwidth(DEFAULT, 6, 60)
        assert effective_3db_bandwidth(DEFAULT, CascadeSpec(6, b)) >= 60
        assert effective_3db_bandwidth(DEFAULT, CascadeSpec(6, b - 6.25)) < 60

    def test_ceiling(self):
        with pytest.raises(NoFeasibleBandwidth):
            minimum_wss_bandwidth(DEFAULT, 6, 200, ceiling=100)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            minimum_wss_bandwidth(DEFAULT, 1, 0)
