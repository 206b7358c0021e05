"""Hourly series ingestion, day reshaping and per-day feature vectors.

Every series is reduced to 8760 hourly values (leap days dropped), reshaped
into a 365 x 24 day matrix, and combined into 72-value day features
(24 load + 24 wind + 24 net-load), each block min-max normalized over the
whole year.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import BadValue, LengthMismatch, MissingHours, WrongYear

HOURS_PER_YEAR = 8760
DAYS_PER_YEAR = 365
HOURS_PER_DAY = 24
FEATURES = ("load", "wind", "net")
WIND_TOL = 1e-9


@dataclass(frozen=True)
class HourlySeries:
    values: np.ndarray
    label: str = ""
    year: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise BadValue("hourly series must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise BadValue(f"{self.label or 'series'}: non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)


def _parse_timestamp(text: str, lineno: int) -> datetime:
    try:
        return datetime.fromisoformat(text.strip())
    except ValueError as exc:
        raise BadValue(f"line {lineno}: bad timestamp {text!r}") from exc


def load_hourly_csv(path, expected_year: int, kind: str = "load") -> HourlySeries:
    """Read a ``timestamp,value`` CSV into an 8760-hour series.

    ``kind`` selects the value check: ``"wind"`` requires per-unit values in
    [0, 1], ``"load"`` requires non-negative values. Feb 29 rows are dropped.
    """
    path = Path(path)
    if kind not in ("load", "wind"):
        raise ValueError(f"unknown series kind {kind!r}")
    stamps: list[datetime] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["timestamp", "value"]:
            raise BadValue(f"{path}: header must be 'timestamp,value', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise BadValue(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            ts = _parse_timestamp(row[0], lineno)
            try:
                v = float(row[1])
            except ValueError as exc:
                raise BadValue(f"{path}:{lineno}: non-numeric value {row[1]!r}") from exc
            if not math.isfinite(v):
                raise BadValue(f"{path}:{lineno}: non-finite value {row[1]!r}")
            if kind == "wind" and not (-WIND_TOL <= v <= 1.0 + WIND_TOL):
                raise BadValue(f"{path}:{lineno}: wind factor {v} outside [0, 1]")
            if kind == "load" and v < 0:
                raise BadValue(f"{path}:{lineno}: negative load {v}")
            if ts.year != expected_year:
                raise WrongYear(f"{path}:{lineno}: timestamp {ts} not in year {expected_year}")
            stamps.append(ts)
            values.append(min(max(v, 0.0), 1.0) if kind == "wind" else v)

    one_hour = timedelta(hours=1)
    for i in range(1, len(stamps)):
        step = stamps[i] - stamps[i - 1]
        # a leap-year file may already omit Feb 29
        skips_leap_day = step == timedelta(hours=25) and stamps[i].month == 3 and stamps[i].day == 1 and stamps[i].hour == 0
        if skips_leap_day:
            continue
        if step > one_hour:
            raise MissingHours(f"{path}: gap between {stamps[i - 1]} and {stamps[i]}")
        if step != one_hour:
            raise BadValue(f"{path}: timestamps not hourly/increasing at {stamps[i]}")

    kept = [v for ts, v in zip(stamps, values) if not (ts.month == 2 and ts.day == 29)]
    if len(kept) < HOURS_PER_YEAR:
        raise MissingHours(f"{path}: {len(kept)} hours after leap-day removal, expected {HOURS_PER_YEAR}")
    if len(kept) > HOURS_PER_YEAR:
        raise BadValue(f"{path}: {len(kept)} hours after leap-day removal, expected {HOURS_PER_YEAR}")
    return HourlySeries(np.array(kept), label=path.stem, year=expected_year)


def write_hourly_csv(path, series: HourlySeries, year: int | None = None) -> None:
    """Write a series as ``timestamp,value`` rows for a non-leap calendar.

    The timestamps skip Feb 29 when ``year`` is a leap year, so the file
    re-reads to the same 8760 values.
    """
    year = year or series.year or 2019
    t = datetime(year, 1, 1)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "value"])
        for v in series.values:
            if t.month == 2 and t.day == 29:
                t += timedelta(days=1)
            writer.writerow([t.isoformat(timespec="seconds"), repr(float(v))])
            t += timedelta(hours=1)


def to_day_matrix(series) -> np.ndarray:
    """Reshape an 8760-hour series into a 365 x 24 matrix (row d = day d)."""
    values = series.values if isinstance(series, HourlySeries) else np.asarray(series, dtype=float)
    if values.size != HOURS_PER_YEAR:
        raise LengthMismatch(f"expected {HOURS_PER_YEAR} hourly values, got {values.size}")
    return values.reshape(DAYS_PER_YEAR, HOURS_PER_DAY)


def per_unit(load: HourlySeries) -> np.ndarray:
    peak = float(np.max(load.values)) if len(load) else 0.0
    if peak <= 0:
        return np.zeros_like(load.values)
    return load.values / peak


def compute_net_load(load: HourlySeries, wind: HourlySeries, wind_scale: float = 1.0) -> HourlySeries:
    """Per-unit net-load ``load/peak(load) - wind_scale * wind``; may be negative."""
    if len(load) != len(wind):
        raise LengthMismatch(f"load has {len(load)} hours, wind has {len(wind)}")
    if wind_scale < 0:
        raise ValueError("wind_scale must be >= 0")
    net = per_unit(load) - wind_scale * wind.values
    return HourlySeries(net, label="net_load", year=load.year)


def minmax_normalize(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    span = hi - lo
    if span <= 0:
        return np.zeros_like(x, dtype=float)
    return (x - lo) / span


def minmax_denormalize(z: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return lo + np.asarray(z, dtype=float) * (hi - lo)


@dataclass(frozen=True)
class FeatureDays:
    """Normalized day features plus everything needed to undo the scaling.

    ``matrix`` is 365 x 72; ``raw_net_load`` is the unnormalized per-unit
    net-load day matrix used to locate extreme days; ``norms`` maps each
    feature name to its ``(min, max)`` over the year.
    """

    matrix: np.ndarray
    raw_net_load: np.ndarray
    norms: dict[str, tuple[float, float]]
    wind_scale: float = 1.0
    hours: int = HOURS_PER_DAY
    raw_load_pu: np.ndarray | None = field(default=None, repr=False)
    raw_wind: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_days(self) -> int:
        return self.matrix.shape[0]

    def block(self, name: str) -> slice:
        k = FEATURES.index(name)
        return slice(k * self.hours, (k + 1) * self.hours)

    def denormalize(self, vector: np.ndarray) -> dict[str, np.ndarray]:
        """Map a 72-vector (or stack of them) back to physical profiles."""
        vector = np.asarray(vector, dtype=float)
        return {
            name: minmax_denormalize(vector[..., self.block(name)], *self.norms[name]) for name in FEATURES
        }

    def normalize(self, profiles: dict[str, np.ndarray]) -> np.ndarray:
        parts = [minmax_normalize(np.asarray(profiles[name], dtype=float), *self.norms[name]) for name in FEATURES]
        return np.concatenate(parts, axis=-1)


def features_from_day_matrices(load_pu: np.ndarray, wind: np.ndarray, wind_scale: float = 1.0) -> FeatureDays:
    """Build features from already reshaped per-unit day matrices (any day count)."""
    load_pu = np.asarray(load_pu, dtype=float)
    wind = np.asarray(wind, dtype=float)
    if load_pu.shape != wind.shape or load_pu.ndim != 2:
        raise LengthMismatch(f"day matrices differ in shape: {load_pu.shape} vs {wind.shape}")
    net = load_pu - wind_scale * wind
    norms = {}
    blocks = []
    for name, days in zip(FEATURES, (load_pu, wind, net)):
        lo, hi = float(days.min()), float(days.max())
        norms[name] = (lo, hi)
        blocks.append(minmax_normalize(days, lo, hi))
    matrix = np.hstack(blocks)
    return FeatureDays(
        matrix=matrix,
        raw_net_load=net,
        norms=norms,
        wind_scale=wind_scale,
        hours=load_pu.shape[1],
        raw_load_pu=load_pu,
        raw_wind=wind,
    )


def build_feature_days(load: HourlySeries, wind: HourlySeries, wind_scale: float = 1.0) -> FeatureDays:
    if len(load) != len(wind):
        raise LengthMismatch(f"load has {len(load)} hours, wind has {len(wind)}")
    if wind_scale < 0:
        raise ValueError("wind_scale must be >= 0")
    return features_from_day_matrices(to_day_matrix(per_unit(load)), to_day_matrix(wind), wind_scale)
