"""Optional SVG charts (needs matplotlib, installed with the ``plots`` extra)."""

from __future__ import annotations

import numpy as np

from .data_ingest import HourlySeries, build_feature_days


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError("plotting needs matplotlib: pip install 'artifact[plots]'") from exc
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "rdplan"
    import matplotlib.pyplot as plt

    return plt


def plot_year_profiles(load: HourlySeries, wind: HourlySeries, reps, sld_plan, path) -> None:
    """Daily peak net-load of the real year against the representative-day stand-in."""
    plt = _pyplot()
    f = build_feature_days(load, wind)
    real = f.raw_net_load.max(axis=1)
    rep_net = np.asarray(reps.lf) - np.asarray(reps.wf)
    stand_in = rep_net.max(axis=1)[sld_plan.expand()]
    fig, ax = plt.subplots(figsize=(9, 3.5))
    ax.plot(real, lw=0.8, label="real day")
    ax.step(np.arange(len(stand_in)), stand_in, where="mid", lw=0.8, label="representative day")
    ax.set_xlabel("day of year")
    ax.set_ylabel("peak net-load (p.u.)")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_comparison(rows, path) -> None:
    """Planning error against the number of representative days, one line per method."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for method in sorted({r.method for r in rows}):
        pts = sorted((r.nrd, 100 * r.error) for r in rows if r.method == method)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=method)
    ax.set_xlabel("representative days")
    ax.set_ylabel("error (%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
