"""Plan the bundled six-bus system on 14 days and replay its storage.

The reduced plan takes a few seconds. Pass ``--benchmark`` to also solve the
whole year (about six minutes on one CPU, cached in ``.rdplan_cache``) and
score the plan against it.
"""

import sys

import numpy as np

from rdplan.cli import format_plan_report
from rdplan.evaluation import cost_breakdown, evaluate_error, reconstruct_soc, solve_benchmark, solve_reduced
from rdplan.solver_io import SolverConfig
from rdplan.synthetic import synthetic_year
from rdplan.system_model import load_bundled

network, params = load_bundled("garver6_synthetic")
load, wind = synthetic_year(seed=2019, peak_mw=network.total_peak_load)
config = SolverConfig(mip_gap=params.mip_gap)

run = solve_reduced(network, params, load, wind, nrd=14, config=config)
costs = cost_breakdown(run.model, run.solution.vector(run.model))
print(format_plan_report(costs, run.plan, network, run.solution.status, f"six-bus plan on 14 days, {run.wall_time:.1f} s"))

# Chain the representative days back into 365 real days and check that each
# store stays between empty and full the whole year.
traj = reconstruct_soc(run.solution, run.sld_plan, run.model)
for k, bus in enumerate(traj.buses):
    level = traj.soc[k]
    print(f"storage at bus {bus}: {level.min():.2f} to {level.max():.2f} MWh of {traj.capacity[k]:.2f}")
    if traj.capacity[k] > 0:
        month_end = level.reshape(365, -1)[[30, 58, 89, 119, 150, 180, 211, 242, 272, 303, 333, 364], -1]
        print("  end-of-month levels:", np.round(month_end, 1).tolist())
print(f"violations: {len(traj.violations)}")

if "--benchmark" in sys.argv:
    bench = solve_benchmark(network, params, load, wind, config, cache_dir=".rdplan_cache")
    report = evaluate_error(run.plan, network, params, load, wind, config, bench, reduced_objective=run.objective)
    print(f"\nfull-year optimum {bench.objective * 1e-6:.3f} M$ ({bench.wall_time:.0f} s)")
    print(f"14-day plan re-run over the year: {report.fixed_full_objective * 1e-6:.3f} M$, error {report.error:.3%}")
