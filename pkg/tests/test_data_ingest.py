from datetime import datetime, timedelta

import numpy as np
import pytest

from rdplan.data_ingest import (
    HourlySeries,
    build_feature_days,
    compute_net_load,
    load_hourly_csv,
    minmax_denormalize,
    minmax_normalize,
    to_day_matrix,
    write_hourly_csv,
)
from rdplan.errors import BadValue, LengthMismatch, MissingHours, WrongYear


def _write_csv(path, year, values, skip=None):
    t = datetime(year, 1, 1)
    rows = ["timestamp,value"]
    for k, v in enumerate(values):
        if k != skip:
            rows.append(f"{t.isoformat()},{v}")
        t += timedelta(hours=1)
    path.write_text("\n".join(rows) + "\n")
    return path


def test_constant_file_loads_as_ones(tmp_path):
    p = _write_csv(tmp_path / "demand_nl.csv", 2019, [1.0] * 8760)
    s = load_hourly_csv(p, 2019)
    assert len(s) == 8760
    assert np.all(s.values == 1.0)
    assert s.label == "demand_nl"


def test_leap_year_drops_feb_29(tmp_path):
    values = np.arange(8784, dtype=float)
    p = _write_csv(tmp_path / "leap.csv", 2020, values)
    s = load_hourly_csv(p, 2020)
    assert len(s) == 8760
    # Feb 29 occupies hours 59*24 .. 60*24-1 of 2020
    expected = np.r_[values[: 59 * 24], values[60 * 24 :]]
    np.testing.assert_array_equal(s.values, expected)


def test_short_file_is_missing_hours(tmp_path):
    p = _write_csv(tmp_path / "short.csv", 2019, [1.0] * 8759)
    with pytest.raises(MissingHours):
        load_hourly_csv(p, 2019)


def test_gap_is_missing_hours(tmp_path):
    p = _write_csv(tmp_path / "gap.csv", 2019, [1.0] * 8760, skip=100)
    with pytest.raises(MissingHours):
        load_hourly_csv(p, 2019)


def test_bad_values(tmp_path):
    p = _write_csv(tmp_path / "w.csv", 2019, [0.5] * 8759 + [1.2])
    with pytest.raises(BadValue):
        load_hourly_csv(p, 2019, kind="wind")
    p = _write_csv(tmp_path / "x.csv", 2019, ["abc"] + [0.5] * 8759)
    with pytest.raises(BadValue):
        load_hourly_csv(p, 2019)


def test_wind_tolerance_is_clipped(tmp_path):
    p = _write_csv(tmp_path / "w.csv", 2019, [1.0 + 5e-10] + [0.5] * 8759)
    s = load_hourly_csv(p, 2019, kind="wind")
    assert s.values[0] == 1.0


def test_wrong_year(tmp_path):
    p = _write_csv(tmp_path / "y.csv", 2018, [1.0] * 8760)
    with pytest.raises(WrongYear):
        load_hourly_csv(p, 2019)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    s = HourlySeries(rng.random(8760), year=2020)
    write_hourly_csv(tmp_path / "r.csv", s, year=2020)
    back = load_hourly_csv(tmp_path / "r.csv", 2020, kind="wind")
    np.testing.assert_array_equal(back.values, s.values)


def test_net_load_examples():
    ones = HourlySeries(np.ones(8760))
    half = HourlySeries(np.full(8760, 0.5))
    np.testing.assert_array_equal(compute_net_load(ones, half, 1.0).values, 0.5)
    rng = np.random.default_rng(0)
    load = HourlySeries(rng.random(8760) * 100)
    np.testing.assert_array_equal(compute_net_load(load, half, 0.0).values, load.values / load.values.max())

    lv = np.full(8760, 0.5)
    lv[:2] = [1.0, 0.8]
    wv = np.zeros(8760)
    wv[:2] = [0.2, 0.9]
    net = compute_net_load(HourlySeries(lv), HourlySeries(wv), 1.0).values
    np.testing.assert_allclose(net[:2], [0.8, -0.1], rtol=0, atol=1e-15)


def test_net_load_length_mismatch():
    with pytest.raises(LengthMismatch):
        compute_net_load(HourlySeries(np.ones(8760)), HourlySeries(np.ones(10)))


def test_day_matrix_round_trip():
    values = np.arange(8760.0)
    days = to_day_matrix(HourlySeries(values))
    assert days.shape == (365, 24)
    assert days[3, 5] == values[24 * 3 + 5]
    np.testing.assert_array_equal(days.ravel(), values)


def test_constant_features_are_zero():
    f = build_feature_days(HourlySeries(np.full(8760, 7.0)), HourlySeries(np.full(8760, 0.3)))
    assert f.matrix.shape == (365, 72)
    assert np.all(f.matrix == 0.0)


def test_unique_load_max_normalizes_to_one():
    rng = np.random.default_rng(1)
    load = rng.random(8760) * 0.5 + 0.2
    load[10 * 24 + 12] = 3.0
    f = build_feature_days(HourlySeries(load), HourlySeries(rng.random(8760)))
    assert f.matrix[10, 12] == 1.0
    assert np.all((f.matrix >= 0) & (f.matrix <= 1))


def test_raw_net_argmax_matches_series():
    rng = np.random.default_rng(2)
    load, wind = HourlySeries(rng.random(8760)), HourlySeries(rng.random(8760))
    f = build_feature_days(load, wind, 0.7)
    net = compute_net_load(load, wind, 0.7).values
    assert np.argmax(f.raw_net_load) == np.argmax(net)
    np.testing.assert_array_equal(f.raw_net_load.ravel(), net)


def test_normalization_invertible():
    rng = np.random.default_rng(4)
    load, wind = HourlySeries(rng.random(8760) * 900), HourlySeries(rng.random(8760))
    f = build_feature_days(load, wind)
    prof = f.denormalize(f.matrix)
    np.testing.assert_allclose(prof["load"], f.raw_load_pu, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(prof["wind"], f.raw_wind, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(prof["net"], f.raw_net_load, rtol=1e-12, atol=1e-14)
    x = np.linspace(-3, 5, 11)
    np.testing.assert_allclose(minmax_denormalize(minmax_normalize(x, -3, 5), -3, 5), x, rtol=1e-12)
