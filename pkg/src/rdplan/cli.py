"""Command-line driver: ``rdplan <command> [options]``.

Commands: aggregate, plan, benchmark, evaluate, compare, export-lp.
Settings come from an optional TOML or JSON file (``--config``); command-line
flags override it. Exit codes: 0 success, 1 infeasible plan or flagged
evaluation, 2 input error, 3 solver error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .aggregation import mark_extreme_days
from .data_ingest import HourlySeries, build_feature_days, load_hourly_csv
from .errors import NotSolved, ParseError, RdplanError, SolverCrashed, SolverTimeout
from .evaluation import (
    BenchmarkResult,
    aggregate_year,
    compare_methods,
    cost_breakdown,
    evaluate_error,
    extract_decisions,
    format_comparison,
    solve_benchmark,
    solve_model,
    write_comparison_csv,
)
from .linking import weight_report
from .planner_milp import InvestmentPlan, build_full_space_model, build_plan_model
from .solver_io import SolverConfig, write_model
from .synthetic import synthetic_year
from .system_model import PolicyParams, bundled_instance_path, load_system

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger("rdplan")

EXIT_OK, EXIT_FLAG, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
SOLVER_ERRORS = (SolverCrashed, SolverTimeout, ParseError, NotSolved)


class InputError(RdplanError):
    pass


@dataclass
class RunConfig:
    load: str | None = None
    wind: str | None = None
    year: int = 2019
    synthetic_seed: int | None = None
    system: str = "bundled:garver6_synthetic"
    output: str = "rdplan_out"
    nrd: int = 14
    method: str = "proposed"
    seed: int | None = None
    wind_scale: float = 1.0
    extra_extremes: list = field(default_factory=list)
    solver_cmd: str | None = None
    solver_format: str = "mps"
    mip_gap: float | None = None
    time_limit: float = 3600.0
    threads: int = 1
    relax_first: bool = True
    policy: dict = field(default_factory=dict)
    runs: list = field(default_factory=list)
    jobs: int = 1
    shed_cost: float | None = None
    plots: bool = False

    def validate(self) -> None:
        if not isinstance(self.nrd, int) or not 1 <= self.nrd <= 365:
            raise InputError(f"nrd must be an integer in [1, 365], got {self.nrd!r}")
        if self.method not in ("proposed", "ctpc"):
            raise InputError(f"method must be 'proposed' or 'ctpc', got {self.method!r}")
        if self.synthetic_seed is None:
            for label, p in (("load", self.load), ("wind", self.wind)):
                if not p:
                    raise InputError(f"no {label} CSV given (set data.{label} or data.synthetic_seed)")
                if not Path(p).exists():
                    raise InputError(f"{label} CSV not found: {p}")
        if not self.system.startswith("bundled:") and not Path(self.system).exists():
            raise InputError(f"system file not found: {self.system}")
        if self.jobs < 1:
            raise InputError("jobs must be >= 1")


# config file sections -> RunConfig fields
_SECTIONS = {
    "data": {"load": "load", "wind": "wind", "year": "year", "synthetic_seed": "synthetic_seed", "system": "system"},
    "output": {"dir": "output", "plots": "plots"},
    "aggregation": {
        "nrd": "nrd",
        "method": "method",
        "seed": "seed",
        "wind_scale": "wind_scale",
        "extra_extremes": "extra_extremes",
    },
    "solver": {
        "command": "solver_cmd",
        "format": "solver_format",
        "mip_gap": "mip_gap",
        "time_limit": "time_limit",
        "threads": "threads",
        "relax_first": "relax_first",
    },
    "compare": {"runs": "runs", "jobs": "jobs", "shed_cost": "shed_cost"},
}


def read_config_file(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix.lower() == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    cfg = RunConfig()
    base = path.parent
    for section, keys in data.items():
        if section == "policy":
            cfg.policy = dict(keys)
            continue
        if section not in _SECTIONS or not isinstance(keys, dict):
            raise InputError(f"{path}: unknown config section [{section}]")
        for key, value in keys.items():
            if key not in _SECTIONS[section]:
                raise InputError(f"{path}: unknown key {section}.{key}")
            setattr(cfg, _SECTIONS[section][key], value)
    # relative data paths are taken relative to the config file
    for name in ("load", "wind", "output"):
        value = getattr(cfg, name)
        if value and not Path(value).is_absolute():
            setattr(cfg, name, str(base / value))
    if not cfg.system.startswith("bundled:") and not Path(cfg.system).is_absolute():
        cfg.system = str(base / cfg.system)
    return cfg


def build_config(args) -> RunConfig:
    cfg = read_config_file(args.config) if args.config else RunConfig()
    overrides = {
        "nrd": args.nrd,
        "method": args.method,
        "seed": args.seed,
        "jobs": args.jobs,
        "solver_cmd": args.solver_cmd,
        "output": args.output,
        "load": args.load,
        "wind": args.wind,
        "system": args.system,
        "synthetic_seed": args.synthetic,
        "time_limit": args.time_limit,
        "mip_gap": args.gap,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.plots:
        cfg.plots = True
    if args.mip_only:
        cfg.relax_first = False
    cfg.validate()
    return cfg


# ------------------------------------------------------------------ helpers


def load_inputs(cfg: RunConfig):
    if cfg.system.startswith("bundled:"):
        network, params = load_system(bundled_instance_path(cfg.system.split(":", 1)[1]))
    else:
        network, params = load_system(cfg.system)
    if cfg.policy:
        unknown = set(cfg.policy) - set(PolicyParams.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown policy overrides {sorted(unknown)}")
        params = params.replace(**cfg.policy)
    if cfg.mip_gap is not None:
        params = params.replace(mip_gap=float(cfg.mip_gap))
    if cfg.synthetic_seed is not None:
        load, wind = synthetic_year(seed=int(cfg.synthetic_seed), peak_mw=network.total_peak_load, year=cfg.year)
    else:
        load = load_hourly_csv(cfg.load, cfg.year, kind="load")
        wind = load_hourly_csv(cfg.wind, cfg.year, kind="wind")
    return network, params, load, wind


def solver_config(cfg: RunConfig, params: PolicyParams) -> SolverConfig:
    return SolverConfig(
        command_template=cfg.solver_cmd or "",
        format=cfg.solver_format,
        mip_gap=params.mip_gap,
        time_limit=float(cfg.time_limit),
        threads=int(cfg.threads),
        relax_first=bool(cfg.relax_first),
    )


def _out(cfg: RunConfig) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def _aggregate(cfg: RunConfig, load: HourlySeries, wind: HourlySeries):
    kw = {}
    if cfg.method == "proposed":
        kw = {"extra_extremes": cfg.extra_extremes, "conflict": "random" if cfg.seed is not None else "earliest", "seed": cfg.seed}
    return aggregate_year(load, wind, cfg.nrd, cfg.method, cfg.wind_scale, **kw)


def format_plan_report(breakdown: dict, plan: InvestmentPlan, network, status: str, title: str) -> str:
    m = 1e-6
    lines = [f"# {title}", f"# status: {status}"]
    if network.assumed:
        lines.append("# assumed (not from the instance file): " + ", ".join(network.assumed))
    lines += [
        "",
        "Costs (x10^6 $)",
        f"  TC     {breakdown['TC'] * m:12.3f}   total capital cost",
        f"  TO     {breakdown['TO'] * m:12.3f}   discounted operation cost",
        f"  TESSC  {breakdown['TESSC'] * m:12.3f}   storage investment cost",
        f"  Z      {breakdown['Z'] * m:12.3f}   objective",
        "",
        "New lines: " + (", ".join(_line_label(network, l) for l in sorted(plan.built_lines)) or "none"),
        "Storage:",
    ]
    techs = {s.bus: s.tech for s in network.storage_candidates}
    if plan.ess_power or plan.ess_energy:
        for bus in sorted(set(plan.ess_power) | set(plan.ess_energy)):
            lines.append(
                f"  bus {bus} ({techs.get(bus, '?')}): {plan.ess_power.get(bus, 0.0):.3f} MW, {plan.ess_energy.get(bus, 0.0):.3f} MWh"
            )
    else:
        lines.append("  none")
    lines.append("Wind:")
    if plan.wind_capacity:
        for bus, mw in sorted(plan.wind_capacity.items()):
            lines.append(f"  bus {bus}: {mw:.3f} MW")
    else:
        lines.append("  none")
    return "\n".join(lines) + "\n"


def _line_label(network, lid: int) -> str:
    for l in network.candidate_lines:
        if l.id == lid:
            return f"{l.from_bus}-{l.to_bus} (#{lid})"
    return f"#{lid}"


# ------------------------------------------------------------------ commands


def cmd_aggregate(cfg: RunConfig) -> int:
    network, params, load, wind = load_inputs(cfg)
    reps, plan = _aggregate(cfg, load, wind)
    out = _out(cfg)
    reps.save(out / "rds.json")
    plan.save(out / "slds.json")
    _dump(out / "weights.json", weight_report(reps, plan))
    extremes = mark_extreme_days(build_feature_days(load, wind, cfg.wind_scale), cfg.extra_extremes)
    print(f"method {cfg.method}: {reps.nrd} representative days, {plan.n_sld} linked day blocks")
    print(f"extreme day(s): {', '.join(str(d) for d in extremes)}")
    if cfg.plots:
        from .plots import plot_year_profiles

        plot_year_profiles(load, wind, reps, plan, out / "net_load_year.svg")
    return EXIT_OK


def cmd_plan(cfg: RunConfig, export_only: bool = False) -> int:
    network, params, load, wind = load_inputs(cfg)
    reps, sld_plan = _aggregate(cfg, load, wind)
    out = _out(cfg)
    reps.save(out / "rds.json")
    sld_plan.save(out / "slds.json")
    model = build_plan_model(network, params, reps, sld_plan, name=f"{cfg.method}_{cfg.nrd}")
    if export_only:
        path = write_model(model, out / f"{model.name}.{cfg.solver_format}", cfg.solver_format)
        print(f"wrote {path} ({model.n_vars} variables, {model.n_rows} rows)")
        return EXIT_OK
    sol = solve_model(model, solver_config(cfg, params))
    if sol.status == "infeasible":
        print(f"plan model is infeasible: {sol.message}", file=sys.stderr)
        _dump(out / "solution.json", {"status": sol.status, "message": sol.message})
        return EXIT_FLAG
    if not sol.has_solution:
        raise NotSolved(f"solver ended with status {sol.status}: {sol.message}")
    plan = extract_decisions(sol, model)
    breakdown = cost_breakdown(model, sol.vector(model))
    _dump(
        out / "solution.json",
        {
            "status": sol.status,
            "objective": sol.objective,
            "gap": None if math.isnan(sol.gap) else sol.gap,
            "method": cfg.method,
            "nrd": cfg.nrd,
            "n_sld": sld_plan.n_sld,
            "plan": plan.to_json(),
            "costs_usd": breakdown,
            "wall_time_s": sol.wall_time,
        },
    )
    report = format_plan_report(breakdown, plan, network, sol.status, f"{cfg.method} plan, {cfg.nrd} representative days, {sld_plan.n_sld} linked blocks")
    (out / "plan_report.txt").write_text(report, encoding="utf-8")
    print(report, end="")
    return EXIT_OK


def _benchmark(cfg, network, params, load, wind) -> BenchmarkResult:
    return solve_benchmark(network, params, load, wind, solver_config(cfg, params), cache_dir=_out(cfg) / "cache")


def cmd_benchmark(cfg: RunConfig) -> int:
    network, params, load, wind = load_inputs(cfg)
    bench = _benchmark(cfg, network, params, load, wind)
    out = _out(cfg)
    _dump(out / "benchmark.json", bench.to_json())
    print(f"full-space optimum {bench.objective * 1e-6:.4f} M$ ({bench.status}, {bench.wall_time:.1f} s)")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, plan_path: str | None = None) -> int:
    network, params, load, wind = load_inputs(cfg)
    out = _out(cfg)
    path = Path(plan_path) if plan_path else out / "solution.json"
    if not path.exists():
        raise InputError(f"plan file not found: {path} (run 'plan' first or pass --plan)")
    data = json.loads(path.read_text())
    plan = InvestmentPlan.from_json(data.get("plan", data))
    bench = _benchmark(cfg, network, params, load, wind)
    report = evaluate_error(
        plan,
        network,
        params,
        load,
        wind,
        solver_config(cfg, params),
        bench,
        reduced_objective=float(data.get("objective", math.nan)),
        shed_cost=cfg.shed_cost,
    )
    _dump(out / "error_report.json", report.to_json())
    if report.infeasible:
        print("fixed plan is infeasible over the full year: error reported as 100%")
        return EXIT_FLAG
    print(f"error {100 * report.error:.3f}%  (ESS cost error {100 * report.ess_cost_error:.3f}%)")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    network, params, load, wind = load_inputs(cfg)
    runs = cfg.runs or [[cfg.method, cfg.nrd]]
    for r in runs:
        if len(r) != 2:
            raise InputError(f"compare runs must be [method, nrd] pairs, got {r!r}")
    bench = _benchmark(cfg, network, params, load, wind)
    rows = compare_methods(
        runs,
        network,
        params,
        load,
        wind,
        solver_config(cfg, params),
        benchmark=bench,
        jobs=cfg.jobs,
        wind_scale=cfg.wind_scale,
        shed_cost=cfg.shed_cost,
    )
    out = _out(cfg)
    write_comparison_csv(rows, out / "comparison.csv")
    text = format_comparison(rows)
    (out / "comparison.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    if cfg.plots:
        from .plots import plot_comparison

        plot_comparison(rows, out / "comparison.svg")
    return EXIT_FLAG if any(r.infeasible for r in rows) else EXIT_OK


def cmd_export_lp(cfg: RunConfig, full: bool = False, fmt: str = "lp") -> int:
    network, params, load, wind = load_inputs(cfg)
    if full:
        model = build_full_space_model(network, params, load, wind)
    else:
        reps, sld_plan = _aggregate(cfg, load, wind)
        model = build_plan_model(network, params, reps, sld_plan, name=f"{cfg.method}_{cfg.nrd}")
    path = write_model(model, _out(cfg) / f"{model.name}.{fmt}", fmt)
    print(f"wrote {path} ({model.n_vars} variables, {model.n_rows} rows)")
    return EXIT_OK


# ------------------------------------------------------------------ entry point


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--config", help="TOML or JSON run configuration")
    g.add_argument("--nrd", type=int, help="number of representative days")
    g.add_argument("--method", choices=("proposed", "ctpc"), help="aggregation method")
    g.add_argument("--seed", type=int, help="seed for random tie-breaking between pinned extreme days")
    g.add_argument("--jobs", type=int, help="parallel evaluations in 'compare'")
    g.add_argument("--solver-cmd", help="solver command template with {model} and {solution}")
    g.add_argument("--output", "-o", help="output directory")
    g.add_argument("--load", help="hourly load CSV")
    g.add_argument("--wind", help="hourly wind capacity-factor CSV")
    g.add_argument("--system", help="instance JSON, or bundled:NAME")
    g.add_argument("--synthetic", type=int, metavar="SEED", help="use a seeded synthetic year instead of CSVs")
    g.add_argument("--time-limit", type=float, help="solver time limit in seconds")
    g.add_argument("--gap", type=float, help="relative MIP gap")
    g.add_argument("--mip-only", action="store_true", help="skip the LP-relaxation shortcut and always branch")
    g.add_argument("--plots", action="store_true", help="also write SVG charts (needs matplotlib)")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rdplan", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"rdplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("aggregate", parents=[common], help="representative days and linked day blocks")
    p = sub.add_parser("plan", parents=[common], help="solve the reduced co-planning model")
    p.add_argument("--export-only", action="store_true", help="write the model file without solving")
    sub.add_parser("benchmark", parents=[common], help="solve the full-space model (cached)")
    p = sub.add_parser("evaluate", parents=[common], help="fix a plan in the full-space model")
    p.add_argument("--plan", help="solution.json or plan JSON (default: OUTPUT/solution.json)")
    p.add_argument("--shed-cost", type=float, help="allow load shedding at this $/MWh to size shortfalls")
    p = sub.add_parser("compare", parents=[common], help="error/timing table over methods and nrd values")
    p.add_argument("--run", action="append", metavar="METHOD:NRD", help="add a run, e.g. proposed:14 (repeatable)")
    p = sub.add_parser("export-lp", parents=[common], help="write the model in LP (or MPS) format")
    p.add_argument("--full", action="store_true", help="export the full-space model")
    p.add_argument("--format", choices=("lp", "mps"), default="lp")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        if args.command == "compare" and args.run:
            cfg.runs = [_parse_run(r) for r in args.run]
        if args.command == "evaluate" and args.shed_cost is not None:
            cfg.shed_cost = args.shed_cost
        if args.command == "aggregate":
            return cmd_aggregate(cfg)
        if args.command == "plan":
            return cmd_plan(cfg, export_only=args.export_only)
        if args.command == "benchmark":
            return cmd_benchmark(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.plan)
        if args.command == "compare":
            return cmd_compare(cfg)
        return cmd_export_lp(cfg, full=args.full, fmt=args.format)
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (RdplanError, OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _parse_run(text: str):
    method, _, nrd = text.partition(":")
    try:
        return [method, int(nrd)]
    except ValueError:
        raise InputError(f"bad --run value {text!r}; expected METHOD:NRD") from None


if __name__ == "__main__":
    sys.exit(main())
