"""Solar geometry, power bound, and verdict tests.

Frozen expected values were computed ahead of time with an independent NOAA
solar-position script and plain spreadsheet arithmetic of the bound formula;
they are asserted here, not re-derived from the implementation.
"""
from __future__ import annotations

import math
from dataclasses import replace
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from solarchain import physics
from solarchain.physics import (
    BoundConfig,
    NodeSpec,
    PowerBound,
    ValidationError,
    WeatherSample,
    clear_sky_irradiance,
    compute_p_max,
    residual_stats,
    solar_elevation,
    verify_record,
)

CST = timezone(timedelta(hours=8))

SAMPLE_NODE = NodeSpec(
    node_id="BEI-001",
    city="Beijing",
    latitude=39.8876,
    longitude=116.3810,
    panel_area=43.39,
    efficiency=0.2055,
    temp_coefficient=-0.00379,
    install_date=date(2022, 3, 29),
)


def weather(irradiance=929.0, air_temp=20.0, daily_min=20.0, hour=12):
    return WeatherSample(
        timestamp=datetime(2026, 5, 1, hour, tzinfo=CST),
        irradiance=irradiance,
        air_temp=air_temp,
        daily_min_temp=daily_min,
    )


class TestSolarElevation:
    def test_equator_equinox_solar_noon_is_overhead(self):
        # True solar noon at lon 0 on the 2026 equinox is ~12:07Z.
        best = max(
            solar_elevation(0.0, 0.0, datetime(2026, 3, 20, 12, minute, tzinfo=timezone.utc))
            for minute in range(0, 20)
        )
        assert best == pytest.approx(90.0, abs=1.0)

    def test_polar_winter_midnight_is_dark(self):
        elevation = solar_elevation(89.9, 0.0, datetime(2026, 12, 21, 0, 0, tzinfo=timezone.utc))
        assert elevation < 0.0

    def test_beijing_noon_matches_ephemeris(self):
        # NOAA solar-position oracle: 65.0512 degrees.
        elevation = solar_elevation(
            39.8876, 116.3810, datetime(2026, 5, 1, 12, 0, tzinfo=CST)
        )
        assert elevation == pytest.approx(65.0512, abs=0.75)

    def test_rejects_naive_timestamp(self):
        with pytest.raises(ValidationError):
            solar_elevation(0.0, 0.0, datetime(2026, 5, 1, 12, 0))

    def test_rejects_bad_coordinates(self):
        ts = datetime(2026, 5, 1, 12, 0, tzinfo=CST)
        with pytest.raises(ValidationError):
            solar_elevation(91.0, 0.0, ts)
        with pytest.raises(ValidationError):
            solar_elevation(0.0, 181.0, ts)

    @given(
        lat=st.floats(-90, 90),
        lon=st.floats(-180, 180),
        hour=st.integers(0, 23),
        day=st.integers(0, 364),
    )
    def test_elevation_in_range(self, lat, lon, hour, day):
        ts = datetime(2026, 1, 1, hour, tzinfo=timezone.utc) + timedelta(days=day)
        assert -90.0 <= solar_elevation(lat, lon, ts) <= 90.0


class TestClearSkyIrradiance:
    def test_horizon_is_zero(self):
        assert clear_sky_irradiance(0.0) == 0.0

    def test_zenith_default(self):
        assert clear_sky_irradiance(90.0) == pytest.approx(1020.75)

    def test_thirty_degrees(self):
        assert clear_sky_irradiance(30.0) == pytest.approx(510.375)

    @given(st.floats(-90, 0))
    def test_night_side_always_zero(self, elevation):
        assert clear_sky_irradiance(elevation) == 0.0

    def test_out_of_range_rejected(self):
        with pytest.raises(ValidationError):
            clear_sky_irradiance(90.1)


class TestComputePMax:
    def test_zero_irradiance_means_zero_bound(self):
        bound = compute_p_max(SAMPLE_NODE, weather(irradiance=0.0, daily_min=-5.0, air_temp=0.0))
        assert bound.p_max == 0.0

    def test_reference_case(self):
        # Independent arithmetic: 43.39 * 0.2055 * 929 * (1 + 0.00379 * 5).
        bound = compute_p_max(SAMPLE_NODE, weather(daily_min=20.0))
        assert bound.p_max == pytest.approx(8440.536727734749, rel=1e-9)
        assert bound.thermal_factor == pytest.approx(1.01895)

    def test_reference_temperature_gives_unit_factor(self):
        bound = compute_p_max(SAMPLE_NODE, weather(air_temp=25.0, daily_min=25.0))
        assert bound.thermal_factor == 1.0
        assert bound.p_max == pytest.approx(8283.563205, rel=1e-9)

    def test_product_invariant(self):
        bound = compute_p_max(SAMPLE_NODE, weather())
        expected = SAMPLE_NODE.panel_area * SAMPLE_NODE.efficiency * bound.g_used * bound.thermal_factor
        assert bound.p_max == pytest.approx(expected, rel=1e-9)

    def test_hourly_temperature_mode(self):
        config = BoundConfig(temperature_mode="hourly")
        bound = compute_p_max(SAMPLE_NODE, weather(air_temp=24.0, daily_min=10.0), config)
        assert bound.t_used == 24.0

    def test_clear_sky_mode_ignores_observed(self):
        config = BoundConfig(irradiance_mode="clear_sky")
        bound = compute_p_max(SAMPLE_NODE, weather(irradiance=0.0), config)
        assert bound.g_used > 500.0  # Beijing mid-day ceiling

    def test_max_mode_takes_larger(self):
        observed = compute_p_max(SAMPLE_NODE, weather(irradiance=1399.0),
                                 BoundConfig(irradiance_mode="max"))
        assert observed.g_used == 1399.0

    def test_non_finite_weather_rejected(self):
        # NaN irradiance never forms a sample; NaN temperatures slip past the
        # ordering check and must be caught by the bound computation.
        with pytest.raises(ValidationError):
            weather(irradiance=float("nan"))
        bad = weather(air_temp=float("nan"), daily_min=float("nan"))
        with pytest.raises(ValidationError):
            compute_p_max(SAMPLE_NODE, bad)

    @given(
        g1=st.floats(0, 1400),
        g2=st.floats(0, 1400),
        t=st.floats(-20, 40),
    )
    def test_monotone_in_irradiance(self, g1, g2, t):
        lo, hi = sorted((g1, g2))
        w_lo = weather(irradiance=lo, air_temp=max(t, -10.0), daily_min=t if t <= max(t, -10.0) else t)
        w_hi = replace(w_lo, irradiance=hi)
        assert compute_p_max(SAMPLE_NODE, w_lo).p_max <= compute_p_max(SAMPLE_NODE, w_hi).p_max

    @given(t1=st.floats(-20, 40), t2=st.floats(-20, 40))
    def test_monotone_in_cold(self, t1, t2):
        lo, hi = sorted((t1, t2))
        w_cold = weather(air_temp=40.0, daily_min=lo)
        w_warm = weather(air_temp=40.0, daily_min=hi)
        assert compute_p_max(SAMPLE_NODE, w_cold).p_max >= compute_p_max(SAMPLE_NODE, w_warm).p_max


class TestVerifyRecord:
    def bound(self, p_max, g=500.0):
        return PowerBound(p_max=p_max, g_used=g, t_used=20.0, thermal_factor=1.0)

    def test_night_claim_rejected(self):
        verdict = verify_record(50.0, self.bound(0.0, g=0.0))
        assert verdict.status == "rejected"
        assert verdict.anomaly_class == "night_time"
        assert verdict.ratio is None

    def test_above_bound(self):
        verdict = verify_record(1035.0, self.bound(1000.0), tau=1.0)
        assert verdict.status == "rejected"
        assert verdict.anomaly_class == "above_bound"
        assert verdict.residual == pytest.approx(-35.0)

    def test_typical_honest_report(self):
        verdict = verify_record(978.3, self.bound(1000.0))
        assert verdict.status == "verified"
        assert verdict.anomaly_class == "none"
        assert verdict.ratio == pytest.approx(0.9783)

    def test_exact_boundary_is_verified(self):
        # Soundness: the comparison is strict, p_reported == tau * p_max passes.
        verdict = verify_record(1000.0, self.bound(1000.0), tau=1.0)
        assert verdict.status == "verified"

    def test_negative_report_is_corrupted_even_at_night(self):
        verdict = verify_record(-5.0, self.bound(0.0, g=0.0))
        assert verdict.anomaly_class == "corrupted"

    def test_nan_report_is_corrupted(self):
        verdict = verify_record(float("nan"), self.bound(1000.0))
        assert verdict.anomaly_class == "corrupted"
        assert math.isnan(verdict.residual)

    def test_zero_report_at_night_is_verified(self):
        verdict = verify_record(0.0, self.bound(0.0, g=0.0))
        assert verdict.status == "verified"

    def test_tau_scales_the_boundary(self):
        assert verify_record(1100.0, self.bound(1000.0), tau=1.2).status == "verified"
        assert verify_record(901.0, self.bound(1000.0), tau=0.9).status == "rejected"

    def test_invalid_tau(self):
        with pytest.raises(ValidationError):
            verify_record(1.0, self.bound(10.0), tau=0.0)

    def test_status_iff_no_anomaly(self):
        for p in (-1.0, 0.0, 500.0, 1000.0, 1500.0, float("nan")):
            verdict = verify_record(p, self.bound(1000.0))
            assert (verdict.status == "verified") == (verdict.anomaly_class == "none")

    def test_deterministic(self):
        a = verify_record(978.3, self.bound(1000.0))
        b = verify_record(978.3, self.bound(1000.0))
        assert a == b


class TestResidualStats:
    def test_perfect_reports(self):
        stats = residual_stats([(1000.0, 1000.0), (500.0, 500.0), (750.0, 750.0)])
        assert stats.pearson_r == pytest.approx(1.0)
        assert stats.mae == 0.0
        assert stats.rmse == 0.0
        assert stats.mean_ratio == 1.0

    def test_two_point_hand_computation(self):
        stats = residual_stats([(900.0, 1000.0), (450.0, 500.0)])
        assert stats.mean_ratio == pytest.approx(0.9)
        assert stats.pearson_r == pytest.approx(1.0)
        assert stats.mae == pytest.approx(75.0)  # (100 + 50) / 2

    def test_requires_two_eligible_records(self):
        with pytest.raises(ValidationError):
            residual_stats([(900.0, 1000.0)])
        with pytest.raises(ValidationError):
            residual_stats([(900.0, 1000.0), (0.0, 0.0)])  # zero bound excluded


class TestDomainValidation:
    def test_node_spec_ranges(self):
        with pytest.raises(ValidationError):
            replace(SAMPLE_NODE, panel_area=0.5)
        with pytest.raises(ValidationError):
            replace(SAMPLE_NODE, efficiency=0.4)
        with pytest.raises(ValidationError):
            replace(SAMPLE_NODE, temp_coefficient=0.001)
        with pytest.raises(ValidationError):
            replace(SAMPLE_NODE, latitude=95.0)

    def test_weather_ranges(self):
        with pytest.raises(ValidationError):
            weather(irradiance=1500.0)
        with pytest.raises(ValidationError):
            weather(air_temp=10.0, daily_min=15.0)
        with pytest.raises(ValidationError):
            WeatherSample(datetime(2026, 5, 1, 12), 100.0, 20.0, 15.0)

    def test_bound_config_modes(self):
        with pytest.raises(ValidationError):
            BoundConfig(temperature_mode="weekly")
        with pytest.raises(ValidationError):
            BoundConfig(irradiance_mode="guess")
