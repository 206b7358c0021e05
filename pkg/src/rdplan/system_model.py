"""Planning-instance data: network, candidates and policy parameters.

Instances are JSON files with snake_case keys and units in the key names
(``pmax_mw``, ``invest_cost_usd_per_km`` ...). Internally everything is in
MW, MWh and $. Values not given in an instance fall back to documented
defaults; the ones that are guesses rather than published figures are listed
in ``Network.assumed`` and echoed in every report.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DanglingBusRef, DisconnectedLoadBus, SchemaError

# $/kW and $/kWh figures are converted to $/MW and $/MWh on load
STORAGE_TECH_DEFAULTS = {
    "bess": {"eta_c": 0.9, "eta_d": 0.9, "ratio_h": 4.0, "cost_power_usd_per_kw": 500.0, "cost_energy_usd_per_kwh": 50.0},
    "phess": {"eta_c": 0.548, "eta_d": 0.548, "ratio_h": 1000.0, "cost_power_usd_per_kw": 30.0, "cost_energy_usd_per_kwh": 1.5},
}

POLICY_DEFAULTS = {
    "load_growth": 0.05,
    "interest_rate": 0.05,
    "wind_share": 0.3,
    "max_curtail_share": 0.05,
    "reserve_wind_frac": 0.05,
    "reserve_load_frac": 0.03,
    "cost_segments": 3,
    "theta_bound_rad": 0.5,
    "mip_gap": 1e-4,
    "reference_bus": None,
    "weighted_curtailment": False,
}
ASSUMED_POLICY = ("wind_share", "max_curtail_share")
DEFAULT_CURTAILMENT_COST = 50.0
DEFAULT_RESERVE_COST = 10.0


@dataclass(frozen=True)
class Bus:
    id: int
    peak_load_mw: float = 0.0


@dataclass(frozen=True)
class ExistingLine:
    id: int
    from_bus: int
    to_bus: int
    susceptance_pu: float
    pmax_mw: float


@dataclass(frozen=True)
class CandidateLine:
    id: int
    from_bus: int
    to_bus: int
    susceptance_pu: float
    pmax_mw: float
    length_km: float
    invest_cost_usd_per_km: float
    row_cost_usd_per_km: float = 0.0

    @property
    def cost_usd(self) -> float:
        return (self.invest_cost_usd_per_km + self.row_cost_usd_per_km) * self.length_km


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    pmax_mw: float
    segment_costs_usd_per_mwh: tuple[float, ...]
    reserve_cost_usd_per_mwh: float = DEFAULT_RESERVE_COST


@dataclass(frozen=True)
class WindCandidate:
    bus: int
    pmax_mw: float
    invest_cost_usd_per_mw: float
    curtailment_cost_usd_per_mwh: float = DEFAULT_CURTAILMENT_COST


@dataclass(frozen=True)
class StorageCandidate:
    bus: int
    tech: str
    eta_c: float
    eta_d: float
    ratio_h: float
    cost_power_usd_per_mw: float
    cost_energy_usd_per_mwh: float
    cmax_mw: float
    smax_mwh: float


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    existing_lines: tuple[ExistingLine, ...]
    candidate_lines: tuple[CandidateLine, ...]
    generators: tuple[Generator, ...]
    wind_candidates: tuple[WindCandidate, ...] = ()
    storage_candidates: tuple[StorageCandidate, ...] = ()
    base_power_mva: float = 100.0
    name: str = ""
    synthetic: bool = False
    assumed: tuple[str, ...] = ()

    @property
    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    @property
    def total_peak_load(self) -> float:
        return float(sum(b.peak_load_mw for b in self.buses))


@dataclass(frozen=True)
class PolicyParams:
    load_growth: float = 0.05
    interest_rate: float = 0.05
    wind_share: float = 0.3
    max_curtail_share: float = 0.05
    reserve_wind_frac: float = 0.05
    reserve_load_frac: float = 0.03
    cost_segments: int = 3
    theta_bound_rad: float = 0.5
    mip_gap: float = 1e-4
    reference_bus: int | None = None
    weighted_curtailment: bool = False

    def replace(self, **changes) -> PolicyParams:
        data = asdict(self)
        data.update(changes)
        return PolicyParams(**data)


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    location: str
    message: str
    code: str = "invalid"

    def __str__(self):
        return f"{self.severity}: {self.location}: {self.message}"


# ---------------------------------------------------------------- parsing


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _num(obj: dict, key: str, where: str, default=None) -> float:
    value = obj.get(key, default) if default is not None else _require(obj, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def _int(obj: dict, key: str, where: str) -> int:
    value = _require(obj, key, where)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def _storage_from_json(item: dict, where: str) -> StorageCandidate:
    tech = str(item.get("tech", "bess")).lower()
    defaults = STORAGE_TECH_DEFAULTS.get(tech, {})
    if not defaults and any(k not in item for k in ("eta_c", "eta_d", "ratio_h")):
        raise SchemaError(f"{where}: unknown storage tech {tech!r} without explicit parameters")

    def pick(key, kw_key):
        if key in item:
            return _num(item, key, where)
        if kw_key in item:
            return _num(item, kw_key, where) * 1000.0
        if kw_key in defaults:
            return defaults[kw_key] * 1000.0
        raise SchemaError(f"{where}: missing {key!r}")

    return StorageCandidate(
        bus=_int(item, "bus", where),
        tech=tech,
        eta_c=_num(item, "eta_c", where, defaults.get("eta_c")),
        eta_d=_num(item, "eta_d", where, defaults.get("eta_d")),
        ratio_h=_num(item, "ratio_h", where, defaults.get("ratio_h")),
        cost_power_usd_per_mw=pick("cost_power_usd_per_mw", "cost_power_usd_per_kw"),
        cost_energy_usd_per_mwh=pick("cost_energy_usd_per_mwh", "cost_energy_usd_per_kwh"),
        cmax_mw=_num(item, "cmax_mw", where),
        smax_mwh=_num(item, "smax_mwh", where),
    )


def parse_system(data: dict) -> tuple[Network, PolicyParams]:
    """Build (Network, PolicyParams) from a decoded JSON instance without validation."""
    if not isinstance(data, dict):
        raise SchemaError("instance must be a JSON object")
    assumed = list(data.get("assumed", []))
    buses = tuple(
        Bus(id=_int(b, "id", f"buses[{k}]"), peak_load_mw=_num(b, "peak_load_mw", f"buses[{k}]", 0.0))
        for k, b in enumerate(_require(data, "buses", "instance"))
    )
    existing = tuple(
        ExistingLine(
            id=_int(l, "id", f"existing_lines[{k}]"),
            from_bus=_int(l, "from_bus", f"existing_lines[{k}]"),
            to_bus=_int(l, "to_bus", f"existing_lines[{k}]"),
            susceptance_pu=_num(l, "susceptance_pu", f"existing_lines[{k}]"),
            pmax_mw=_num(l, "pmax_mw", f"existing_lines[{k}]"),
        )
        for k, l in enumerate(data.get("existing_lines", []))
    )
    candidates = tuple(
        CandidateLine(
            id=_int(l, "id", f"candidate_lines[{k}]"),
            from_bus=_int(l, "from_bus", f"candidate_lines[{k}]"),
            to_bus=_int(l, "to_bus", f"candidate_lines[{k}]"),
            susceptance_pu=_num(l, "susceptance_pu", f"candidate_lines[{k}]"),
            pmax_mw=_num(l, "pmax_mw", f"candidate_lines[{k}]"),
            length_km=_num(l, "length_km", f"candidate_lines[{k}]"),
            invest_cost_usd_per_km=_num(l, "invest_cost_usd_per_km", f"candidate_lines[{k}]"),
            row_cost_usd_per_km=_num(l, "row_cost_usd_per_km", f"candidate_lines[{k}]", 0.0),
        )
        for k, l in enumerate(data.get("candidate_lines", []))
    )
    generators = []
    for k, g in enumerate(_require(data, "generators", "instance")):
        where = f"generators[{k}]"
        if "reserve_cost_usd_per_mwh" not in g:
            assumed.append(f"{where}.reserve_cost_usd_per_mwh")
        costs = _require(g, "segment_costs_usd_per_mwh", where)
        if not isinstance(costs, list) or not costs:
            raise SchemaError(f"{where}.segment_costs_usd_per_mwh: expected a non-empty list")
        generators.append(
            Generator(
                id=_int(g, "id", where),
                bus=_int(g, "bus", where),
                pmax_mw=_num(g, "pmax_mw", where),
                segment_costs_usd_per_mwh=tuple(float(c) for c in costs),
                reserve_cost_usd_per_mwh=_num(g, "reserve_cost_usd_per_mwh", where, DEFAULT_RESERVE_COST),
            )
        )
    winds = []
    for k, w in enumerate(data.get("wind_candidates", [])):
        where = f"wind_candidates[{k}]"
        if "curtailment_cost_usd_per_mwh" not in w:
            assumed.append(f"{where}.curtailment_cost_usd_per_mwh")
        winds.append(
            WindCandidate(
                bus=_int(w, "bus", where),
                pmax_mw=_num(w, "pmax_mw", where),
                invest_cost_usd_per_mw=_num(w, "invest_cost_usd_per_mw", where),
                curtailment_cost_usd_per_mwh=_num(w, "curtailment_cost_usd_per_mwh", where, DEFAULT_CURTAILMENT_COST),
            )
        )
    storages = tuple(
        _storage_from_json(s, f"storage_candidates[{k}]") for k, s in enumerate(data.get("storage_candidates", []))
    )

    policy_in = dict(data.get("policy", {}))
    unknown = set(policy_in) - set(POLICY_DEFAULTS)
    if unknown:
        raise SchemaError(f"policy: unknown fields {sorted(unknown)}")
    for key in ASSUMED_POLICY:
        if key not in policy_in:
            assumed.append(f"policy.{key}")
    merged = {**POLICY_DEFAULTS, **policy_in}
    if merged["reference_bus"] is None and buses:
        merged["reference_bus"] = buses[0].id
    try:
        params = PolicyParams(
            load_growth=float(merged["load_growth"]),
            interest_rate=float(merged["interest_rate"]),
            wind_share=float(merged["wind_share"]),
            max_curtail_share=float(merged["max_curtail_share"]),
            reserve_wind_frac=float(merged["reserve_wind_frac"]),
            reserve_load_frac=float(merged["reserve_load_frac"]),
            cost_segments=int(merged["cost_segments"]),
            theta_bound_rad=float(merged["theta_bound_rad"]),
            mip_gap=float(merged["mip_gap"]),
            reference_bus=None if merged["reference_bus"] is None else int(merged["reference_bus"]),
            weighted_curtailment=bool(merged["weighted_curtailment"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"policy: {exc}") from exc

    network = Network(
        buses=buses,
        existing_lines=existing,
        candidate_lines=candidates,
        generators=tuple(generators),
        wind_candidates=tuple(winds),
        storage_candidates=storages,
        base_power_mva=_num(data, "base_power_mva", "instance", 100.0),
        name=str(data.get("name", "")),
        synthetic=bool(data.get("synthetic", False)),
        assumed=tuple(dict.fromkeys(assumed)),
    )
    return network, params


def system_to_json(network: Network, params: PolicyParams) -> dict:
    """Serialize an instance; ``parse_system`` of the result is field-for-field equal."""

    def clean(obj):
        d = asdict(obj)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    return {
        "name": network.name,
        "synthetic": network.synthetic,
        "assumed": list(network.assumed),
        "base_power_mva": network.base_power_mva,
        "buses": [clean(b) for b in network.buses],
        "existing_lines": [clean(l) for l in network.existing_lines],
        "candidate_lines": [clean(l) for l in network.candidate_lines],
        "generators": [clean(g) for g in network.generators],
        "wind_candidates": [clean(w) for w in network.wind_candidates],
        "storage_candidates": [clean(s) for s in network.storage_candidates],
        "policy": asdict(params),
    }


# ------------------------------------------------------------- validation


def validate(network: Network, params: PolicyParams) -> list[Diagnostic]:
    """Check instance invariants; returns diagnostics instead of raising."""
    diags: list[Diagnostic] = []

    def err(loc, msg, code="invalid"):
        diags.append(Diagnostic("error", loc, msg, code))

    ids = network.bus_ids
    if len(set(ids)) != len(ids):
        err("buses", "duplicate bus ids", "duplicate")
    known = set(ids)
    for b in network.buses:
        if b.peak_load_mw < 0:
            err(f"bus {b.id}", "negative peak load")

    def check_ids(items, kind):
        seen = [x.id for x in items]
        if len(set(seen)) != len(seen):
            err(kind, "duplicate ids", "duplicate")

    check_ids(network.existing_lines, "existing_lines")
    check_ids(network.candidate_lines, "candidate_lines")
    check_ids(network.generators, "generators")

    for kind, lines in (("existing line", network.existing_lines), ("candidate line", network.candidate_lines)):
        for l in lines:
            for end in (l.from_bus, l.to_bus):
                if end not in known:
                    err(f"{kind} {l.id}", f"unknown bus {end}", "dangling_bus_ref")
            if l.from_bus == l.to_bus:
                err(f"{kind} {l.id}", "line connects a bus to itself")
            if l.susceptance_pu <= 0:
                err(f"{kind} {l.id}", "susceptance must be > 0")
            if l.pmax_mw < 0:
                err(f"{kind} {l.id}", "negative capacity")
    for l in network.candidate_lines:
        if l.length_km < 0 or l.invest_cost_usd_per_km < 0 or l.row_cost_usd_per_km < 0:
            err(f"candidate line {l.id}", "negative length or cost")

    for g in network.generators:
        if g.bus not in known:
            err(f"generator {g.id}", f"unknown bus {g.bus}", "dangling_bus_ref")
        if g.pmax_mw < 0:
            err(f"generator {g.id}", "negative capacity")
        if len(g.segment_costs_usd_per_mwh) != params.cost_segments:
            err(
                f"generator {g.id}",
                f"{len(g.segment_costs_usd_per_mwh)} segment costs but cost_segments={params.cost_segments}",
            )
        if any(b < a for a, b in zip(g.segment_costs_usd_per_mwh, g.segment_costs_usd_per_mwh[1:])):
            err(f"generator {g.id}", "segment costs must be non-decreasing")
        if g.reserve_cost_usd_per_mwh < 0:
            err(f"generator {g.id}", "negative reserve cost")

    for kind, items in (("wind", network.wind_candidates), ("storage", network.storage_candidates)):
        buses = [x.bus for x in items]
        if len(set(buses)) != len(buses):
            err(f"{kind}_candidates", "at most one candidate per bus", "duplicate")
        for x in items:
            if x.bus not in known:
                err(f"{kind} candidate at bus {x.bus}", f"unknown bus {x.bus}", "dangling_bus_ref")
    for w in network.wind_candidates:
        if w.pmax_mw < 0 or w.invest_cost_usd_per_mw < 0 or w.curtailment_cost_usd_per_mwh < 0:
            err(f"wind candidate at bus {w.bus}", "negative capacity or cost")
    for s in network.storage_candidates:
        loc = f"storage candidate at bus {s.bus}"
        for name in ("eta_c", "eta_d"):
            eta = getattr(s, name)
            if not 0 < eta <= 1:
                err(loc, f"{name}={eta} outside (0, 1]")
        if s.ratio_h <= 0:
            err(loc, "energy-to-power ratio must be > 0")
        if min(s.cmax_mw, s.smax_mwh, s.cost_power_usd_per_mw, s.cost_energy_usd_per_mwh) < 0:
            err(loc, "negative capacity or cost")

    for name in ("load_growth", "interest_rate", "wind_share", "max_curtail_share", "reserve_wind_frac", "reserve_load_frac"):
        v = getattr(params, name)
        if not 0 <= v <= 1:
            err(f"policy.{name}", f"{v} outside [0, 1]")
    if params.cost_segments < 1:
        err("policy.cost_segments", "must be >= 1")
    if params.theta_bound_rad <= 0:
        err("policy.theta_bound_rad", "must be > 0")
    if params.mip_gap < 0:
        err("policy.mip_gap", "must be >= 0")
    if params.reference_bus not in known:
        err("policy.reference_bus", f"unknown bus {params.reference_bus}", "dangling_bus_ref")
    if params.wind_share > 0 and not network.wind_candidates:
        err("policy.wind_share", "positive wind share but no wind candidates")

    if not any(d.code == "dangling_bus_ref" for d in diags) and network.buses:
        diags.extend(_connectivity(network))
    return diags


def _connectivity(network: Network) -> list[Diagnostic]:
    index = {b: k for k, b in enumerate(network.bus_ids)}
    edges = [(index[l.from_bus], index[l.to_bus]) for l in (*network.existing_lines, *network.candidate_lines)]
    n = len(index)
    if edges:
        rows, cols = zip(*edges)
        graph = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
    else:
        graph = coo_matrix((n, n))
    _, comp = connected_components(graph, directed=False)
    supplied = {comp[index[g.bus]] for g in network.generators if g.pmax_mw > 0}
    supplied |= {comp[index[w.bus]] for w in network.wind_candidates if w.pmax_mw > 0}
    return [
        Diagnostic("error", f"bus {b.id}", "load bus not connected to any generation", "disconnected_load_bus")
        for b in network.buses
        if b.peak_load_mw > 0 and comp[index[b.id]] not in supplied
    ]


def load_system(path) -> tuple[Network, PolicyParams]:
    """Read, default and validate an instance file; raise on the first error class found."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    network, params = parse_system(data)
    diags = [d for d in validate(network, params) if d.severity == "error"]
    for code, exc in (("dangling_bus_ref", DanglingBusRef), ("disconnected_load_bus", DisconnectedLoadBus)):
        hits = [d for d in diags if d.code == code]
        if hits:
            raise exc("; ".join(map(str, hits)))
    if diags:
        raise SchemaError("; ".join(map(str, diags)))
    return network, params


def bundled_instance_path(name: str = "garver6_synthetic") -> Path:
    return Path(str(resources.files("rdplan") / "data" / f"{name}.json"))


def load_bundled(name: str = "garver6_synthetic") -> tuple[Network, PolicyParams]:
    return load_system(bundled_instance_path(name))
