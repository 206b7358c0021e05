"""What happens when the aggregation forgets the worst day.

The year below is flat at half load except for one full-load hour. Merging
only neighbouring days blends that hour into a long quiet stretch, the plan
built on the blend is too small, and re-running it over the real year has no
feasible dispatch. Such a plan is scored as a 100% error. Keeping the peak
day as its own representative avoids it.
"""

import numpy as np

from rdplan.data_ingest import HourlySeries
from rdplan.evaluation import aggregate_year, evaluate_error, solve_benchmark, solve_reduced
from rdplan.solver_io import SolverConfig
from rdplan.system_model import load_bundled

network, params = load_bundled("two_bus")
mw = np.full(8760, 50.0)
mw[200 * 24 + 18] = 100.0
load = HourlySeries(mw, "load", 2019)
wind = HourlySeries(np.full(8760, 0.3), "wind", 2019)
config = SolverConfig(mip_gap=0.0)

bench = solve_benchmark(network, params, load, wind, config)
for method in ("ctpc", "proposed"):
    reps, _ = aggregate_year(load, wind, 2, method)
    run = solve_reduced(network, params, load, wind, 2, method=method, config=config)
    report = evaluate_error(run.plan, network, params, load, wind, config, bench, reduced_objective=run.objective)
    print(f"{method:9s} highest load seen {reps.lf.max():.3f} pu, lines {sorted(run.plan.built_lines)}, "
          f"storage {run.plan.ess_power}, infeasible {report.infeasible}, error {report.error:.1%}")
