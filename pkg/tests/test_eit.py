import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from eitlab.eit import (
    absolute_delay,
    eit_bandwidth,
    eit_transmission_profile,
    group_velocity,
    group_velocity_slow_limit,
    recommended_scan_grid,
    slow_light_delay,
)
from eitlab.medium import MediumParams


class TestBandwidth:
    def test_unit_point(self):
        assert eit_bandwidth(1.0, MediumParams(d=1.0)) == pytest.approx(1.0)

    def test_quadratic_in_control(self):
        m = MediumParams(d=9.0)
        assert eit_bandwidth(2.0, m) == pytest.approx(4.0 * eit_bandwidth(1.0, m))

    def test_inverse_sqrt_in_depth(self):
        assert eit_bandwidth(1.0, MediumParams(d=16.0)) == pytest.approx(
            0.5 * eit_bandwidth(1.0, MediumParams(d=4.0))
        )

    def test_zero_depth_rejected(self):
        with pytest.raises(ValueError):
            eit_bandwidth(1.0, MediumParams(d=0.0))

    @given(
        d1=st.floats(0.1, 1e4),
        ratio=st.floats(1.1, 100.0),
        omega=st.floats(0.1, 10.0),
    )
    def test_loglog_slope_is_minus_half(self, d1, ratio, omega):
        b1 = eit_bandwidth(omega, MediumParams(d=d1))
        b2 = eit_bandwidth(omega, MediumParams(d=d1 * ratio))
        slope = math.log(b2 / b1) / math.log(ratio)
        assert slope == pytest.approx(-0.5, abs=1e-9)


class TestGroupVelocity:
    def test_empty_medium_is_vacuum(self):
        assert group_velocity(1.0, MediumParams(d=0.0), c_dim=100.0) == 1.0

    def test_equal_coupling_halves_speed(self):
        # g^2 N = d * c_dim; pick them so g^2 N / Omega^2 == 1
        assert group_velocity(2.0, MediumParams(d=0.04), c_dim=100.0) == pytest.approx(0.5)

    def test_slow_limit_branch_agreement(self):
        # g^2 N / Omega^2 = 1e4: exact and approximate forms within 1e-4
        medium = MediumParams(d=100.0)
        exact = group_velocity(1.0, medium, c_dim=100.0)
        approx = group_velocity_slow_limit(1.0, medium, c_dim=100.0)
        assert abs(approx - exact) / exact <= 1e-4

    def test_slow_limit_1pct_above_ratio_100(self):
        # agreement within 1% once g^2 N / Omega^2 exceeds 100
        medium = MediumParams(d=1.0)
        exact = group_velocity(1.0, medium, c_dim=150.0)
        approx = group_velocity_slow_limit(1.0, medium, c_dim=150.0)
        assert abs(approx - exact) / exact <= 0.01


class TestDelay:
    def test_vacuum_transit(self):
        # d = 0: only the (negligible) vacuum transit L/c remains
        assert absolute_delay(MediumParams(d=0.0), 1.0, c_dim=1e6) == pytest.approx(1e-6)

    def test_slow_limit_identity(self):
        # Delta_T * Omega^2 = d within 1% once g^2 N / Omega^2 >= 100
        for d, om in ((1.0, 1.0), (50.0, 2.0)):
            delay = absolute_delay(MediumParams(d=d), om, c_dim=100.0 * om**2 / d * 100)
            assert delay * om**2 == pytest.approx(d, rel=0.01)

    def test_doubling_power_halves_slow_delay(self):
        # the two control powers of the linewidth/delay scan differ by ~2x
        m = MediumParams(d=40.0)
        low = slow_light_delay(m, 1.0)
        high = slow_light_delay(m, math.sqrt(2.0))
        assert low / high == pytest.approx(2.0, rel=1e-12)


class TestTransmissionProfile:
    def test_dark_state_is_transparent(self):
        m = MediumParams(d=25.0, gamma_s=0.0)
        prof = eit_transmission_profile(m, 1.0, np.linspace(-0.2, 0.2, 101))
        mid = np.argmin(np.abs(prof.delta))
        assert prof.transmission[mid] == pytest.approx(1.0, abs=1e-12)

    def test_zero_depth_transparent_everywhere(self):
        prof = eit_transmission_profile(
            MediumParams(d=0.0), 1.0, np.linspace(-3, 3, 101)
        )
        assert np.all(prof.transmission == 1.0)

    def test_two_level_floor_matches_beer_convention(self):
        # far outside the window the medium absorbs like exp(-2d)
        d = 3.0
        prof = eit_transmission_profile(
            MediumParams(d=d), 0.05, np.linspace(-1.0, 1.0, 201)
        )
        edge = prof.transmission[0]
        expected = math.exp(-2.0 * d / (1.0 + 1.0))  # Lorentzian wing at delta=1
        assert edge == pytest.approx(expected, rel=0.05)

    def test_fwhm_tracks_bandwidth_within_20pct(self):
        for d in (10.0, 50.0, 200.0):
            for om in (0.5, 1.0, 2.0):
                m = MediumParams(d=d)
                prof = eit_transmission_profile(m, om, recommended_scan_grid(m, om))
                assert prof.fit_ok, (d, om)
                ratio = prof.fwhm / eit_bandwidth(om, m)
                assert abs(ratio - 1.0) <= 0.20, (d, om, ratio)

    def test_asymmetric_grid_rejected(self):
        with pytest.raises(ValueError):
            eit_transmission_profile(
                MediumParams(d=10.0), 1.0, np.linspace(-0.1, 0.2, 31)
            )

    def test_even_in_delta_on_resonance(self):
        m = MediumParams(d=40.0, gamma_s=1e-4)
        grid = np.linspace(-0.5, 0.5, 81)
        prof = eit_transmission_profile(m, 1.0, grid)
        assert np.allclose(prof.transmission, prof.transmission[::-1], rtol=1e-12)

    def test_nonincreasing_near_center(self):
        m = MediumParams(d=40.0)
        prof = eit_transmission_profile(m, 1.0, np.linspace(-0.1, 0.1, 201))
        mid = prof.transmission.size // 2
        right = prof.transmission[mid:]
        assert np.all(np.diff(right) <= 1e-12)

    def test_spin_decay_lowers_peak(self):
        m = MediumParams(d=50.0, gamma_s=1e-3)
        prof = eit_transmission_profile(m, 1.0, np.linspace(-0.1, 0.1, 101))
        peak = prof.transmission[prof.transmission.size // 2]
        expected = math.exp(-2.0 * 50.0 * 1e-3 / (1e-3 + 1.0))
        assert peak == pytest.approx(expected, rel=1e-6)
        assert peak < 1.0

    def test_non_unimodal_flagged(self):
        # scanning past the Autler-Townes sidebands makes the profile multimodal
        m = MediumParams(d=10.0)
        prof = eit_transmission_profile(m, 1.0, np.linspace(-3.0, 3.0, 301))
        assert not prof.unimodal
        assert not prof.fit_ok
