"""Seeded synthetic hourly load and wind years for tests and demos.

The load year has a winter-peaking seasonal cycle, a two-peak daily shape,
lower weekends and noise; one cold, windless day is lifted to the annual
peak so it is clearly the maximum net-load day. Wind is an AR(1) daily mean
with hourly noise, clipped to [0, 1].
"""

from __future__ import annotations

import numpy as np

from .data_ingest import DAYS_PER_YEAR, HOURS_PER_DAY, HourlySeries


def _daily_shape(hours: np.ndarray) -> np.ndarray:
    return (
        0.80
        + 0.10 * np.exp(-(((hours - 8.0) / 2.5) ** 2))
        + 0.16 * np.exp(-(((hours - 18.5) / 2.5) ** 2))
        - 0.14 * np.exp(-(((hours - 3.5) / 3.0) ** 2))
    )


def synthetic_year(
    seed: int = 2019,
    peak_mw: float = 1000.0,
    extreme_day: int = 20,
    normal_ceiling: float = 0.88,
    extreme_wind: float = 0.03,
    mean_wind: float = 0.35,
    year: int = 2019,
) -> tuple[HourlySeries, HourlySeries]:
    """Return ``(load_mw, wind_pu)`` series of 8760 hours.

    All days except ``extreme_day`` peak at or below ``normal_ceiling`` of
    the annual maximum; the extreme day peaks at exactly 1.0 with wind held
    near ``extreme_wind``.
    """
    rng = np.random.default_rng(seed)
    days = np.arange(DAYS_PER_YEAR)
    hours = np.arange(HOURS_PER_DAY)
    season = 1.0 + 0.12 * np.cos(2 * np.pi * (days - 15) / DAYS_PER_YEAR)
    weekend = np.where(days % 7 >= 5, 0.92, 1.0)
    day_level = season * weekend * (1.0 + rng.normal(0.0, 0.025, DAYS_PER_YEAR))
    hourly_noise = rng.normal(0.0, 0.012, (DAYS_PER_YEAR, HOURS_PER_DAY))
    load = day_level[:, None] * _daily_shape(hours)[None, :] * (1.0 + hourly_noise)
    load *= normal_ceiling / load.max()
    load[extreme_day] = _daily_shape(hours) / _daily_shape(hours).max()

    wind_daily = np.empty(DAYS_PER_YEAR)
    level = 0.0
    for d in days:
        level = 0.75 * level + rng.normal(0.0, 0.14)
        wind_daily[d] = mean_wind + 0.1 * np.cos(2 * np.pi * (days[d] - 15) / DAYS_PER_YEAR) + level
    diurnal = 0.04 * np.cos(2 * np.pi * (hours - 3) / HOURS_PER_DAY)
    wind = wind_daily[:, None] + diurnal[None, :] + rng.normal(0.0, 0.05, (DAYS_PER_YEAR, HOURS_PER_DAY))
    wind[extreme_day] = extreme_wind + rng.normal(0.0, 0.005, HOURS_PER_DAY)
    wind = np.clip(wind, 0.0, 1.0)

    return (
        HourlySeries((load * peak_mw).ravel(), label="synthetic_load", year=year),
        HourlySeries(wind.ravel(), label="synthetic_wind", year=year),
    )
