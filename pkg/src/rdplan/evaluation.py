"""Benchmarking of reduced-space plans against the full-year model.

A plan solved on representative days is judged by fixing its investments in
the full-space model and re-optimizing operation over all 8760 hours. The
relative gap to the full-space optimum is the planning error; a fixed model
without a feasible dispatch counts as a 100% error.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .aggregation import representative_days
from .data_ingest import HourlySeries, build_feature_days
from .errors import MissingVariables, NotSolved
from .linking import SldPlan, build_slds, map_days
from .planner_milp import (
    InvestmentPlan,
    INVESTMENT_FAMILIES,
    MilpModel,
    build_full_space_model,
    build_plan_model,
    fix_investments,
    investment_costs,
    relaxation,
    repair_integrality,
)
from .solver_io import SolutionRecord, SolverConfig, solve
from .system_model import Network, PolicyParams, system_to_json

logger = logging.getLogger(__name__)

SNAP = 0.5
CAPACITY_FLOOR = 1e-9
SOC_TOL = 1e-6
FEAS_TOL = 1e-6
CSV_COLUMNS = (
    "method",
    "nrd",
    "n_sld",
    "reduced_obj",
    "fixed_full_obj",
    "benchmark_obj",
    "error",
    "ess_error",
    "infeasible",
    "t_reduced_s",
    "t_full_s",
    "time_saving",
)


def relative_error(value: float, reference: float) -> float:
    """``|value - reference| / |reference|``; 0 when both are zero."""
    if reference == 0:
        return 0.0 if value == 0 else math.inf
    return abs(value - reference) / abs(reference)


# ------------------------------------------------------------ decisions


def _bus_of(name: str) -> int:
    return int(name.split("_")[1][1:])


def extract_decisions(sol: SolutionRecord, model: MilpModel) -> InvestmentPlan:
    """Investment plan of a solved model; line binaries are snapped at 0.5."""
    if sol.status not in ("optimal", "feasible-gap") or not sol.values:
        raise NotSolved(f"no usable solution (status {sol.status})")
    plan = InvestmentPlan()
    for name in model.var_names:
        head = name.split("_", 1)[0]
        if head not in ("Y", "C", "S", "PW"):
            continue
        v = float(sol.values.get(name, 0.0))
        if head == "Y":
            if v >= SNAP:
                plan.built_lines.add(_bus_of(name))
        elif v > CAPACITY_FLOOR:
            target = {"C": plan.ess_power, "S": plan.ess_energy, "PW": plan.wind_capacity}[head]
            target[_bus_of(name)] = v
    return plan


# ------------------------------------------------------------ benchmark


def cost_breakdown(model: MilpModel, x) -> dict:
    """Objective split in $: capital ``TC``, storage capital ``TESSC``, operation ``TO``, total ``Z``."""
    x = np.asarray(x, dtype=float)
    part = {}
    for fam in INVESTMENT_FAMILIES:
        if fam in model.families:
            idx = model.var_family(fam).ravel()
            part[fam] = float(model.obj[idx] @ x[idx])
        else:
            part[fam] = 0.0
    total = model.objective_value(x)
    tc = sum(part.values())
    return {"TC": tc, "TESSC": part["C"] + part["S"], "TO": total - tc, "Z": total}


@dataclass
class BenchmarkResult:
    objective: float
    plan: InvestmentPlan
    wall_time: float
    status: str
    gap: float = math.nan

    def to_json(self) -> dict:
        return {
            "objective": self.objective,
            "plan": self.plan.to_json(),
            "wall_time": self.wall_time,
            "status": self.status,
            "gap": self.gap,
        }

    @classmethod
    def from_json(cls, data: dict) -> BenchmarkResult:
        return cls(
            objective=float(data["objective"]),
            plan=InvestmentPlan.from_json(data["plan"]),
            wall_time=float(data["wall_time"]),
            status=data["status"],
            gap=float(data.get("gap", math.nan)),
        )


def solve_model(model: MilpModel, config: SolverConfig) -> SolutionRecord:
    """Solve a planning model, trying its LP relaxation first.

    When the relaxed optimum can be made integral without leaving the
    feasible set and without costing more than the allowed gap, it is an
    optimal MILP solution and the branch-and-bound run is skipped. An
    infeasible relaxation proves the MILP infeasible. Otherwise the MILP is
    solved as usual.
    """
    if not config.relax_first or not model.is_int.any():
        return solve(model, config)
    lp = solve(relaxation(model), config)
    if lp.status == "infeasible":
        return lp
    spent = lp.wall_time
    if lp.has_solution:
        x = repair_integrality(model, lp.vector(model))
        if x is not None and model.max_violation(x) <= FEAS_TOL:
            obj = model.objective_value(x)
            gap = max(obj - lp.objective, 0.0) / max(abs(obj), 1e-10)
            if gap <= max(config.mip_gap, 1e-9):
                logger.info("%s: relaxation repaired to an integral optimum (gap %.2e)", model.name, gap)
                values = dict(zip(model.var_names, x.tolist()))
                return SolutionRecord("optimal", obj, values, wall_time=spent, gap=gap, message="relaxation")
        logger.info("%s: relaxation not integral, solving the MILP", model.name)
    sol = solve(model, config)
    sol.wall_time += spent
    return sol


def instance_hash(network: Network, params: PolicyParams, load: HourlySeries, wind: HourlySeries, mip_gap: float) -> str:
    h = hashlib.sha256()
    h.update(json.dumps(system_to_json(network, params), sort_keys=True).encode())
    h.update(np.ascontiguousarray(load.values, dtype=float).tobytes())
    h.update(np.ascontiguousarray(wind.values, dtype=float).tobytes())
    h.update(repr(float(mip_gap)).encode())
    return h.hexdigest()[:16]


def solve_benchmark(
    network: Network,
    params: PolicyParams,
    load: HourlySeries,
    wind: HourlySeries,
    config: SolverConfig | None = None,
    cache_dir=None,
) -> BenchmarkResult:
    """Full-space optimum, cached on disk by instance hash when ``cache_dir`` is set."""
    config = config or SolverConfig(mip_gap=params.mip_gap)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"benchmark_{instance_hash(network, params, load, wind, config.mip_gap)}.json"
        if path.exists():
            logger.info("benchmark read from cache %s", path)
            return BenchmarkResult.from_json(json.loads(path.read_text()))
    t0 = time.perf_counter()
    model = build_full_space_model(network, params, load, wind)
    build_time = time.perf_counter() - t0
    sol = solve_model(model, config)
    if not sol.has_solution:
        raise NotSolved(f"full-space benchmark has no solution (status {sol.status}: {sol.message})")
    result = BenchmarkResult(
        objective=sol.objective,
        plan=extract_decisions(sol, model),
        wall_time=build_time + sol.wall_time,
        status=sol.status,
        gap=sol.gap,
    )
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(result.to_json(), indent=1) + "\n")
    return result


# ------------------------------------------------------------ error report


@dataclass
class ErrorReport:
    reduced_objective: float
    fixed_full_objective: float
    benchmark_objective: float
    error: float
    infeasible: bool
    ess_cost_error: float
    timings: dict = field(default_factory=dict)
    plan: InvestmentPlan | None = None
    shed_mwh: float | None = None

    def to_json(self) -> dict:
        d = asdict(self)
        d["plan"] = self.plan.to_json() if self.plan is not None else None
        return d


def evaluate_error(
    plan: InvestmentPlan,
    network: Network,
    params: PolicyParams,
    load: HourlySeries,
    wind: HourlySeries,
    config: SolverConfig | None = None,
    benchmark: BenchmarkResult | None = None,
    reduced_objective: float = math.nan,
    shed_cost: float | None = None,
    cache_dir=None,
) -> ErrorReport:
    """Fix ``plan`` in the full-space model and compare with the benchmark.

    With ``shed_cost`` set, unserved load is allowed at that price so the
    depth of a shortfall can be measured; any shedding still marks the plan
    infeasible and the error stays at 1.0.
    """
    config = config or SolverConfig(mip_gap=params.mip_gap)
    if benchmark is None:
        benchmark = solve_benchmark(network, params, load, wind, config, cache_dir)
    t0 = time.perf_counter()
    model = fix_investments(build_full_space_model(network, params, load, wind, shed_cost=shed_cost), plan)
    build_time = time.perf_counter() - t0
    sol = solve_model(model, config)
    timings = {"fixed_build_s": build_time, "fixed_solve_s": sol.wall_time, "benchmark_s": benchmark.wall_time}

    bench_ess = investment_costs(network, benchmark.plan)["ess"]
    plan_ess = investment_costs(network, plan)["ess"]
    shed = None
    if sol.status == "infeasible":
        infeasible, fixed_obj = True, math.nan
    elif sol.has_solution:
        fixed_obj = sol.objective
        infeasible = False
        if shed_cost is not None:
            shed = float(model.values(sol.vector(model), "LS").sum())
            infeasible = shed > 1e-6
    else:
        raise NotSolved(f"fixed full-space model ended with status {sol.status}: {sol.message}")

    if infeasible:
        error, ess_error = 1.0, 1.0
    else:
        error = relative_error(fixed_obj, benchmark.objective)
        ess_error = relative_error(plan_ess, bench_ess)
    return ErrorReport(
        reduced_objective=reduced_objective,
        fixed_full_objective=fixed_obj,
        benchmark_objective=benchmark.objective,
        error=error,
        infeasible=infeasible,
        ess_cost_error=ess_error,
        timings=timings,
        plan=plan,
        shed_mwh=shed,
    )


# ------------------------------------------------------------ state of charge


@dataclass
class SocTrajectory:
    """Hourly stored energy rebuilt from a solved plan model.

    ``soc`` has shape ``(n_storage, n_days * hours)`` and holds the level at
    the end of every hour; ``boundary`` holds the rebuilt level at the end of
    every linked day block and ``e_values`` the model's own block energies.
    """

    buses: list[int]
    soc: np.ndarray
    boundary: np.ndarray
    e_values: np.ndarray
    year_start: np.ndarray
    capacity: np.ndarray
    violations: list = field(default_factory=list)
    boundary_mismatch: float = 0.0
    step_residual: float = 0.0
    max_simultaneous: float = 0.0

    @property
    def annual_buildup(self) -> np.ndarray:
        """Energy gained over the year; the cyclic closure keeps it >= 0."""
        return self.e_values[:, -1] - self.year_start

    @property
    def ok(self) -> bool:
        return not self.violations


def reconstruct_soc(sol: SolutionRecord, sld_plan: SldPlan, model: MilpModel) -> SocTrajectory:
    """Replay each block's representative-day charging across its member days.

    The year starts at ``E_1 - rho_1 * dlam`` of the first block; every later
    block starts from the model's energy of the block before it. Levels
    outside ``[0, S]`` by more than ``1e-6 * S`` are reported as violations.
    """
    meta = model.meta
    buses = list(meta["storage_buses"])
    needed = ("PCH", "PDH", "LAM", "LAMZ", "DLAM", "E", "S")
    if buses:
        missing = [n for n in needed if n not in model.families]
        if missing:
            raise MissingVariables(f"model lacks variable families {missing}")
        absent = [model.var_names[k] for fam in needed for k in model.var_family(fam).ravel() if model.var_names[k] not in sol.values]
        if absent:
            raise MissingVariables(f"{len(absent)} storage variables missing from the solution, e.g. {absent[0]}")
    if sld_plan.n_sld != meta["n_sld"] or sld_plan.nrd != meta["nrd"]:
        raise MissingVariables("SLD plan does not match the model it is replayed on")

    H = meta["hours"]
    n_days = int(sld_plan.weights.sum())
    n_st = len(buses)
    if n_st == 0:
        empty = np.zeros((0, sld_plan.n_sld))
        return SocTrajectory([], np.zeros((0, n_days * H)), empty, empty, np.zeros(0), np.zeros(0))

    x = sol.vector(model)
    eta_c = np.array(meta["eta_c"])[:, None, None]
    eta_d = np.array(meta["eta_d"])[:, None, None]
    pch, pdh = model.values(x, "PCH"), model.values(x, "PDH")
    lam, lamz = model.values(x, "LAM"), model.values(x, "LAMZ")
    dlam, e = model.values(x, "DLAM"), model.values(x, "E")
    cap = model.values(x, "S")
    net = eta_c * pch - pdh / eta_d  # (storage, rd, hour)

    prev = np.concatenate([lamz[..., None], lam[..., :-1]], axis=2)
    step_residual = float(np.max(np.abs(lam - prev - net), initial=0.0))
    max_simultaneous = float(np.max(pch * pdh, initial=0.0))

    rd_of, rho = sld_plan.rd_of_block, sld_plan.weights.astype(int)
    year_start = e[:, 0] - rho[0] * dlam[:, rd_of[0]]
    tol = SOC_TOL * np.maximum(cap, 1.0)
    soc = np.empty((n_st, n_days * H))
    boundary = np.empty((n_st, sld_plan.n_sld))
    violations = []
    pos = 0
    for b, (rd, w) in enumerate(zip(rd_of, rho)):
        start = year_start if b == 0 else e[:, b - 1]
        day_path = np.cumsum(net[:, rd, :], axis=1)  # (storage, hour)
        offsets = start[:, None] + np.arange(w)[None, :] * day_path[:, -1:]  # level entering each day
        block = (offsets[:, :, None] + day_path[:, None, :]).reshape(n_st, w * H)
        soc[:, pos : pos + w * H] = block
        boundary[:, b] = block[:, -1]
        entering = np.concatenate([start[:, None], block[:, :-1]], axis=1)
        levels = np.concatenate([entering, block], axis=1)
        lo, hi = levels.min(axis=1), levels.max(axis=1)
        for k in range(n_st):
            if lo[k] < -tol[k]:
                violations.append({"bus": buses[k], "block": b, "kind": "below_zero", "level": float(lo[k])})
            if hi[k] > cap[k] + tol[k]:
                violations.append({"bus": buses[k], "block": b, "kind": "above_capacity", "level": float(hi[k])})
        pos += w * H
    mismatch = float(np.max(np.abs(boundary - e) / np.maximum(cap, 1.0)[:, None], initial=0.0))
    for k in range(n_st):
        worst = np.abs(boundary[k] - e[k])
        if worst.max() > tol[k]:
            b = int(worst.argmax())
            violations.append({"bus": buses[k], "block": b, "kind": "boundary_mismatch", "level": float(boundary[k, b])})
    return SocTrajectory(
        buses=buses,
        soc=soc,
        boundary=boundary,
        e_values=e,
        year_start=year_start,
        capacity=cap,
        violations=violations,
        boundary_mismatch=mismatch,
        step_residual=step_residual,
        max_simultaneous=max_simultaneous,
    )


# ------------------------------------------------------------ method comparison


@dataclass
class ReducedRun:
    method: str
    nrd: int
    n_sld: int
    objective: float
    plan: InvestmentPlan
    wall_time: float
    solution: SolutionRecord = field(repr=False, default=None)
    model: MilpModel = field(repr=False, default=None)
    sld_plan: SldPlan = field(repr=False, default=None)


def aggregate_year(load: HourlySeries, wind: HourlySeries, nrd: int, method: str = "proposed", wind_scale: float = 1.0, **kw):
    """Representative days and linked blocks for one aggregation method.

    CTPC clusters are contiguous day ranges, so their blocks come straight
    from cluster membership instead of a nearest-centroid remapping.
    """
    features = build_feature_days(load, wind, wind_scale)
    reps = representative_days(features, nrd, method=method, **kw)
    if method == "ctpc":
        assignment = np.empty(features.n_days, dtype=int)
        for k, members in enumerate(reps.members):
            assignment[members] = k
    else:
        assignment = map_days(features, reps)
    return reps, build_slds(assignment, reps.nrd)


def solve_reduced(
    network: Network,
    params: PolicyParams,
    load: HourlySeries,
    wind: HourlySeries,
    nrd: int,
    method: str = "proposed",
    config: SolverConfig | None = None,
    wind_scale: float = 1.0,
) -> ReducedRun:
    config = config or SolverConfig(mip_gap=params.mip_gap)
    t0 = time.perf_counter()
    reps, sld_plan = aggregate_year(load, wind, nrd, method, wind_scale)
    model = build_plan_model(network, params, reps, sld_plan, name=f"{method}_{nrd}")
    prep = time.perf_counter() - t0
    sol = solve_model(model, config)
    if not sol.has_solution:
        raise NotSolved(f"reduced model {model.name} ended with status {sol.status}: {sol.message}")
    return ReducedRun(
        method=method,
        nrd=nrd,
        n_sld=sld_plan.n_sld,
        objective=sol.objective,
        plan=extract_decisions(sol, model),
        wall_time=prep + sol.wall_time,
        solution=sol,
        model=model,
        sld_plan=sld_plan,
    )


@dataclass
class ComparisonRow:
    method: str
    nrd: int
    n_sld: int
    reduced_obj: float
    fixed_full_obj: float
    benchmark_obj: float
    error: float
    ess_error: float
    infeasible: bool
    t_reduced_s: float
    t_full_s: float
    time_saving: float


def _compare_one(method, nrd, network, params, load, wind, config, benchmark, wind_scale, shed_cost):
    run = solve_reduced(network, params, load, wind, nrd, method, config, wind_scale)
    report = evaluate_error(
        run.plan, network, params, load, wind, config, benchmark, reduced_objective=run.objective, shed_cost=shed_cost
    )
    return ComparisonRow(
        method=method,
        nrd=nrd,
        n_sld=run.n_sld,
        reduced_obj=run.objective,
        fixed_full_obj=report.fixed_full_objective,
        benchmark_obj=benchmark.objective,
        error=report.error,
        ess_error=report.ess_cost_error,
        infeasible=report.infeasible,
        t_reduced_s=run.wall_time,
        t_full_s=benchmark.wall_time,
        time_saving=1.0 - run.wall_time / benchmark.wall_time if benchmark.wall_time > 0 else math.nan,
    )


def compare_methods(
    configs,
    network: Network,
    params: PolicyParams,
    load: HourlySeries,
    wind: HourlySeries,
    config: SolverConfig | None = None,
    benchmark: BenchmarkResult | None = None,
    cache_dir=None,
    jobs: int = 1,
    wind_scale: float = 1.0,
    shed_cost: float | None = None,
) -> list[ComparisonRow]:
    """Error and timing of every ``(method, nrd)`` pair against one benchmark."""
    config = config or SolverConfig(mip_gap=params.mip_gap)
    configs = [(str(m), int(n)) for m, n in configs]
    for m, _ in configs:
        if m not in ("proposed", "ctpc"):
            raise ValueError(f"unknown aggregation method {m!r}")
    if benchmark is None:
        benchmark = solve_benchmark(network, params, load, wind, config, cache_dir)
    args = (network, params, load, wind, config, benchmark, wind_scale, shed_cost)
    if jobs <= 1:
        return [_compare_one(m, n, *args) for m, n in configs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda mn: _compare_one(mn[0], mn[1], *args), configs))


def write_comparison_csv(rows, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([getattr(r, c) for c in CSV_COLUMNS])


def format_comparison(rows) -> str:
    head = f"{'method':<10}{'nrd':>5}{'SLDs':>6}{'error %':>10}{'ESS err %':>11}{'infeasible':>12}{'t_red s':>10}{'t_full s':>10}{'saving %':>10}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r.method:<10}{r.nrd:>5}{r.n_sld:>6}{100 * r.error:>10.3f}{100 * r.ess_error:>11.3f}"
            f"{str(r.infeasible):>12}{r.t_reduced_s:>10.1f}{r.t_full_s:>10.1f}{100 * r.time_saving:>10.1f}"
        )
    return "\n".join(lines)
