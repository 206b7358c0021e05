"""Squeeze a synthetic year into a handful of representative days.

Run with ``python demos/aggregate_a_year.py``. Nothing is solved here; the
script only shows what the aggregation keeps and what it throws away.
"""

import numpy as np

from rdplan.aggregation import mark_extreme_days
from rdplan.data_ingest import build_feature_days, compute_net_load
from rdplan.evaluation import aggregate_year
from rdplan.linking import weight_report
from rdplan.synthetic import synthetic_year

load, wind = synthetic_year(seed=2019, peak_mw=760.0)
features = build_feature_days(load, wind)
(peak_day,) = mark_extreme_days(features)
net = compute_net_load(load, wind).values
print(f"peak net-load {net.max():.3f} pu on day {peak_day}, hour {int(net.argmax()) % 24}")

# Both methods get the same budget of 14 days. The Ward-based one may join
# any two days of the year; the contiguous one only neighbours in time.
for method in ("proposed", "ctpc"):
    reps, slds = aggregate_year(load, wind, 14, method)
    report = weight_report(reps, slds)
    print(f"\n{method}: {reps.nrd} days stand for {int(reps.weights.sum())}, {slds.n_sld} linked blocks")
    print("  weights", reps.weights.astype(int).tolist())
    print(f"  largest remaining net-load {(reps.lf - reps.wf).max():.3f} pu (year: {net.max():.3f})")
    print(f"  days moved by nearest-day mapping: {report['max_abs_difference']:.0f}")

# The pinned cluster carries the peak day's own profile, so a plan built on
# these days has to cover the worst hour of the year.
reps, _ = aggregate_year(load, wind, 14)
k = int(np.flatnonzero(reps.extreme)[0])
print(f"\npinned day {k}: load profile equals day {peak_day}:", np.allclose(reps.lf[k], features.raw_load_pu[peak_day]))
