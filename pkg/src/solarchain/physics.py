"""Stateless solar-physics engine.

Computes solar elevation from geometry, a clear-sky irradiance ceiling, the
thermodynamic upper bound on a panel's power output, and the verification
verdict for a single reported generation value. All functions are pure and
deterministic; identical inputs yield bit-identical outputs.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Iterable, Optional, Sequence

SOLAR_CONSTANT_WM2 = 1361.0
DEFAULT_ATMOSPHERIC_TRANSMITTANCE = 0.75
DEFAULT_T_REF_C = 25.0
DEFAULT_TAU = 1.0

STATUS_VERIFIED = "verified"
STATUS_REJECTED = "rejected"

ANOMALY_NONE = "none"
ANOMALY_NIGHT = "night_time"
ANOMALY_ABOVE_BOUND = "above_bound"
ANOMALY_CORRUPTED = "corrupted"


class ValidationError(ValueError):
    """Raised when domain inputs violate their declared constraints."""


@dataclass(frozen=True)
class NodeSpec:
    """Static registry entry for one PV asset."""

    node_id: str
    city: str
    latitude: float
    longitude: float
    panel_area: float        # m^2
    efficiency: float        # dimensionless, (0, 0.35)
    temp_coefficient: float  # per degC, stored negative
    install_date: date

    def __post_init__(self) -> None:
        if not self.node_id:
            raise ValidationError("node_id is required")
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError(f"latitude out of range: {self.latitude}")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValidationError(f"longitude out of range: {self.longitude}")
        if not 1.0 <= self.panel_area <= 500.0:
            raise ValidationError(f"panel_area out of range [1, 500]: {self.panel_area}")
        if not 0.0 < self.efficiency < 0.35:
            raise ValidationError(f"efficiency out of range (0, 0.35): {self.efficiency}")
        if not -0.01 <= self.temp_coefficient < 0.0:
            raise ValidationError(
                f"temp_coefficient must be in [-0.01, 0): {self.temp_coefficient}"
            )

    @property
    def capacity_kw(self) -> float:
        """Nameplate capacity at 1000 W/m^2 reference irradiance."""
        return self.panel_area * self.efficiency


@dataclass(frozen=True)
class WeatherSample:
    """One node-hour weather observation."""

    timestamp: datetime
    irradiance: float       # W/m^2
    air_temp: float         # degC
    daily_min_temp: float   # degC

    def __post_init__(self) -> None:
        if self.timestamp.tzinfo is None:
            raise ValidationError("timestamp must carry an explicit UTC offset")
        if not 0.0 <= self.irradiance <= 1400.0:
            raise ValidationError(f"irradiance out of range [0, 1400]: {self.irradiance}")
        if self.daily_min_temp > self.air_temp:
            raise ValidationError(
                f"daily_min_temp {self.daily_min_temp} exceeds air_temp {self.air_temp}"
            )


@dataclass(frozen=True)
class BoundConfig:
    """Knobs for the power-bound computation."""

    t_ref: float = DEFAULT_T_REF_C
    temperature_mode: str = "daily_min"    # "daily_min" | "hourly"
    irradiance_mode: str = "observed"      # "observed" | "clear_sky" | "max"
    atmospheric_transmittance: float = DEFAULT_ATMOSPHERIC_TRANSMITTANCE

    def __post_init__(self) -> None:
        if self.temperature_mode not in ("daily_min", "hourly"):
            raise ValidationError(f"unknown temperature_mode: {self.temperature_mode}")
        if self.irradiance_mode not in ("observed", "clear_sky", "max"):
            raise ValidationError(f"unknown irradiance_mode: {self.irradiance_mode}")
        if not 0.0 < self.atmospheric_transmittance <= 1.0:
            raise ValidationError(
                f"atmospheric_transmittance out of (0, 1]: {self.atmospheric_transmittance}"
            )


@dataclass(frozen=True)
class PowerBound:
    """Thermodynamic ceiling on one node-hour power output."""

    p_max: float           # W
    g_used: float          # W/m^2
    t_used: float          # degC
    thermal_factor: float  # dimensionless


@dataclass(frozen=True)
class Verdict:
    """Verification outcome for a single reported power value."""

    status: str          # "verified" | "rejected"
    anomaly_class: str   # "none" | "night_time" | "above_bound" | "corrupted"
    residual: float      # W, p_max - p_reported
    ratio: Optional[float]  # p_reported / p_max, None when p_max == 0


@dataclass(frozen=True)
class ResidualStats:
    pearson_r: float
    mean_ratio: float
    ratio_std: float
    mae: float   # W
    rmse: float  # W


def solar_elevation(latitude: float, longitude: float, timestamp: datetime) -> float:
    """Solar elevation angle in degrees for a location and aware timestamp.

    Day-of-year declination (Cooper) with the Spencer equation-of-time
    correction; accurate to well under one degree against ephemeris values,
    which is ample for an irradiance ceiling.
    """
    if not -90.0 <= latitude <= 90.0:
        raise ValidationError(f"latitude out of range: {latitude}")
    if not -180.0 <= longitude <= 180.0:
        raise ValidationError(f"longitude out of range: {longitude}")
    if timestamp.tzinfo is None:
        raise ValidationError("timestamp must carry an explicit UTC offset")

    utc = timestamp.astimezone(timezone.utc)
    day_of_year = utc.timetuple().tm_yday
    frac_hour = utc.hour + utc.minute / 60.0 + utc.second / 3600.0

    declination = 23.45 * math.sin(math.radians(360.0 * (284 + day_of_year) / 365.0))

    b = 2.0 * math.pi * (day_of_year - 1) / 365.0
    eot_minutes = 229.18 * (
        0.000075
        + 0.001868 * math.cos(b)
        - 0.032077 * math.sin(b)
        - 0.014615 * math.cos(2 * b)
        - 0.04089 * math.sin(2 * b)
    )

    solar_minutes = frac_hour * 60.0 + 4.0 * longitude + eot_minutes
    hour_angle = (solar_minutes / 4.0 - 180.0 + 180.0) % 360.0 - 180.0

    lat_r = math.radians(latitude)
    dec_r = math.radians(declination)
    ha_r = math.radians(hour_angle)
    sin_elevation = (
        math.sin(lat_r) * math.sin(dec_r)
        + math.cos(lat_r) * math.cos(dec_r) * math.cos(ha_r)
    )
    return math.degrees(math.asin(max(-1.0, min(1.0, sin_elevation))))


def clear_sky_irradiance(
    elevation: float,
    transmittance: float = DEFAULT_ATMOSPHERIC_TRANSMITTANCE,
) -> float:
    """Clear-sky horizontal irradiance ceiling in W/m^2.

    Single-factor atmospheric attenuation of the extraterrestrial constant;
    zero at and below the horizon.
    """
    if not -90.0 <= elevation <= 90.0:
        raise ValidationError(f"elevation out of range [-90, 90]: {elevation}")
    if elevation <= 0.0:
        return 0.0
    return SOLAR_CONSTANT_WM2 * transmittance * math.sin(math.radians(elevation))


def compute_p_max(
    spec: NodeSpec,
    weather: WeatherSample,
    config: BoundConfig = BoundConfig(),
) -> PowerBound:
    """Upper bound on the node's power output for one weather sample.

    p_max = area * efficiency * G_used * (1 + |beta| * (T_ref - T_used)),
    with the thermal factor clamped below at zero. Lower temperatures raise
    the bound, keeping it conservative for verification.
    """
    for name, value in (
        ("irradiance", weather.irradiance),
        ("air_temp", weather.air_temp),
        ("daily_min_temp", weather.daily_min_temp),
    ):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite weather input {name}: {value}")

    if config.irradiance_mode == "observed":
        g_used = weather.irradiance
    else:
        elevation = solar_elevation(spec.latitude, spec.longitude, weather.timestamp)
        ceiling = clear_sky_irradiance(elevation, config.atmospheric_transmittance)
        if config.irradiance_mode == "clear_sky":
            g_used = ceiling
        else:
            g_used = max(weather.irradiance, ceiling)

    t_used = weather.daily_min_temp if config.temperature_mode == "daily_min" else weather.air_temp
    thermal_factor = max(0.0, 1.0 + abs(spec.temp_coefficient) * (config.t_ref - t_used))
    p_max = spec.panel_area * spec.efficiency * g_used * thermal_factor
    return PowerBound(p_max=p_max, g_used=g_used, t_used=t_used, thermal_factor=thermal_factor)


def verify_record(p_reported: float, bound: PowerBound, tau: float = DEFAULT_TAU) -> Verdict:
    """Classify one reported power value against its thermodynamic bound.

    Classification order: corrupted (non-finite or negative report), then
    night-time (positive report against a zero bound), then above-bound
    (report exceeds tau * p_max), else verified.
    """
    if not 0.0 < tau <= 2.0:
        raise ValidationError(f"tau out of (0, 2]: {tau}")

    ratio = p_reported / bound.p_max if bound.p_max > 0.0 else None
    residual = bound.p_max - p_reported

    if not math.isfinite(p_reported) or p_reported < 0.0:
        return Verdict(STATUS_REJECTED, ANOMALY_CORRUPTED, residual, ratio)
    if bound.p_max == 0.0 and p_reported > 0.0:
        return Verdict(STATUS_REJECTED, ANOMALY_NIGHT, residual, ratio)
    if p_reported > tau * bound.p_max:
        return Verdict(STATUS_REJECTED, ANOMALY_ABOVE_BOUND, residual, ratio)
    return Verdict(STATUS_VERIFIED, ANOMALY_NONE, residual, ratio)


def residual_stats(records: Iterable[Sequence[float]]) -> ResidualStats:
    """Fit statistics over verified (p_reported, p_max) pairs with p_max > 0.

    Returns Pearson correlation, sample mean and standard deviation of the
    reported-to-bound ratio, and MAE/RMSE of the residual p_max - p_reported.
    """
    reported = []
    bounds = []
    for p_reported, p_max in records:
        if p_max > 0.0:
            reported.append(p_reported)
            bounds.append(p_max)
    if len(reported) < 2:
        raise ValidationError("residual_stats needs at least 2 records with p_max > 0")

    ratios = [p / m for p, m in zip(reported, bounds)]
    residuals = [m - p for p, m in zip(reported, bounds)]
    return ResidualStats(
        pearson_r=statistics.correlation(reported, bounds),
        mean_ratio=statistics.fmean(ratios),
        ratio_std=statistics.stdev(ratios),
        mae=statistics.fmean(abs(r) for r in residuals),
        rmse=math.sqrt(statistics.fmean(r * r for r in residuals)),
    )
