"""Co-planning MILP over representative days and linked day blocks.

The model co-optimizes candidate transmission lines (binary), wind capacity
and storage power/energy capacity against one year of operation, with
thermal units on piecewise-linear costs, spinning reserve and DC power flow.
Storage is operated per representative day and chained across the year
through one energy variable per linked day block.

Models are stored as flat arrays (bounds, costs, a sparse constraint
matrix) plus canonical names; index families give shaped views of the
variable and row numbering, e.g. ``model.var_family("LAM")`` has shape
``(n_storage, nrd, hours)``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import scipy.sparse as sp

from .aggregation import RepresentativeDaySet
from .data_ingest import HourlySeries, per_unit, to_day_matrix
from .errors import BigMOverflow, DimensionMismatch, PlanOutOfBounds
from .linking import SldPlan, identity_plan
from .system_model import Network, PolicyParams

BIG_M_LIMIT = 1e9
MAX_NAME_LEN = 255
INVESTMENT_FAMILIES = ("Y", "C", "S", "PW")


@dataclass
class MilpModel:
    """A minimization MILP in row form ``lhs_row(x) <sense> rhs``.

    ``sense`` holds ``'L'``, ``'G'`` or ``'E'`` per row. ``families`` and
    ``row_families`` map a family prefix to ``(offset, shape)``.
    """

    var_names: list[str]
    lb: np.ndarray
    ub: np.ndarray
    is_int: np.ndarray
    obj: np.ndarray
    A: sp.csr_matrix
    row_names: list[str]
    sense: np.ndarray
    rhs: np.ndarray
    obj_offset: float = 0.0
    name: str = "model"
    families: dict = field(default_factory=dict)
    row_families: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    _index: dict | None = field(default=None, repr=False, compare=False)

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def var_index(self, name: str) -> int:
        if self._index is None:
            self._index = {n: k for k, n in enumerate(self.var_names)}
        return self._index[name]

    def has_var(self, name: str) -> bool:
        if self._index is None:
            self._index = {n: k for k, n in enumerate(self.var_names)}
        return name in self._index

    def var_family(self, prefix: str) -> np.ndarray:
        offset, shape = self.families[prefix]
        return offset + np.arange(int(np.prod(shape)), dtype=int).reshape(shape)

    def row_family(self, prefix: str) -> np.ndarray:
        offset, shape = self.row_families[prefix]
        return offset + np.arange(int(np.prod(shape)), dtype=int).reshape(shape)

    def values(self, x, prefix: str) -> np.ndarray:
        """Shaped solution values of a variable family from a full vector ``x``."""
        return np.asarray(x, dtype=float)[self.var_family(prefix)]

    def copy(self) -> MilpModel:
        new = copy.copy(self)
        new.lb = self.lb.copy()
        new.ub = self.ub.copy()
        new.meta = copy.deepcopy(self.meta)
        return new

    def row_activity(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float)

    def objective_value(self, x) -> float:
        return float(self.obj @ np.asarray(x, dtype=float) + self.obj_offset)

    def max_violation(self, x) -> float:
        """Largest bound or row violation of a candidate point (absolute)."""
        x = np.asarray(x, dtype=float)
        act = self.row_activity(x)
        viol = np.zeros(self.n_rows)
        viol = np.where(self.sense == "L", act - self.rhs, viol)
        viol = np.where(self.sense == "G", self.rhs - act, viol)
        viol = np.where(self.sense == "E", np.abs(act - self.rhs), viol)
        bound = np.maximum(self.lb - x, x - self.ub)
        return float(max(viol.max(initial=0.0), bound.max(initial=0.0), 0.0))


class _Builder:
    def __init__(self):
        self.names: list[str] = []
        self.lb, self.ub, self.int, self.cost = [], [], [], []
        self.n = 0
        self.families = {}
        self.row_names: list[str] = []
        self.sense, self.rhs = [], []
        self.m = 0
        self.row_families = {}
        self.ri, self.ci, self.vi = [], [], []

    @staticmethod
    def _names(prefix: str, labels) -> list[str]:
        if not labels:
            return [prefix]
        return [prefix + "".join(t) for t in product(*labels)]

    def vars(self, prefix, labels, lb=0.0, ub=np.inf, binary=False, cost=0.0) -> np.ndarray:
        shape = tuple(len(l) for l in labels)
        size = int(np.prod(shape))
        idx = self.n + np.arange(size).reshape(shape)
        self.names.extend(self._names(prefix, labels))
        self.lb.append(np.broadcast_to(np.asarray(lb, float), shape).ravel())
        self.ub.append(np.broadcast_to(np.asarray(ub, float), shape).ravel())
        self.int.append(np.full(size, bool(binary)))
        self.cost.append(np.broadcast_to(np.asarray(cost, float), shape).ravel())
        self.families[prefix] = (self.n, shape)
        self.n += size
        return idx

    def rows(self, prefix, labels, sense, rhs=0.0) -> np.ndarray:
        shape = tuple(len(l) for l in labels)
        size = int(np.prod(shape))
        idx = self.m + np.arange(size).reshape(shape)
        self.row_names.extend(self._names(prefix, labels))
        self.sense.append(np.full(size, sense, dtype="<U1"))
        self.rhs.append(np.broadcast_to(np.asarray(rhs, float), shape).ravel())
        self.row_families[prefix] = (self.m, shape)
        self.m += size
        return idx

    def terms(self, rows, cols, vals=1.0) -> None:
        r, c, v = np.broadcast_arrays(np.asarray(rows), np.asarray(cols), np.asarray(vals, dtype=float))
        self.ri.append(r.ravel())
        self.ci.append(c.ravel())
        self.vi.append(v.ravel())

    def finish(self, name: str, meta: dict) -> MilpModel:
        cat = lambda parts, dtype=float: np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype)
        A = sp.coo_matrix(
            (cat(self.vi), (cat(self.ri, int), cat(self.ci, int))), shape=(self.m, self.n)
        ).tocsr()
        A.sum_duplicates()
        A.eliminate_zeros()
        return MilpModel(
            var_names=self.names,
            lb=cat(self.lb),
            ub=cat(self.ub),
            is_int=cat(self.int, bool),
            obj=cat(self.cost),
            A=A,
            row_names=self.row_names,
            sense=cat(self.sense, "<U1"),
            rhs=cat(self.rhs),
            name=name,
            families=self.families,
            row_families=self.row_families,
            meta=meta,
        )


def _tags(tag: str, ids, width: int | None = None) -> list[str]:
    ids = list(ids)
    if width is None:
        width = max(2, len(str(max(ids)))) if ids else 2
    return [f"_{tag}{int(i):0{width}d}" for i in ids]


@dataclass
class InvestmentPlan:
    built_lines: set = field(default_factory=set)
    ess_power: dict = field(default_factory=dict)
    ess_energy: dict = field(default_factory=dict)
    wind_capacity: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "built_lines": sorted(int(l) for l in self.built_lines),
            "ess_power_mw": {str(k): float(v) for k, v in sorted(self.ess_power.items())},
            "ess_energy_mwh": {str(k): float(v) for k, v in sorted(self.ess_energy.items())},
            "wind_capacity_mw": {str(k): float(v) for k, v in sorted(self.wind_capacity.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> InvestmentPlan:
        return cls(
            built_lines=set(map(int, data.get("built_lines", []))),
            ess_power={int(k): float(v) for k, v in data.get("ess_power_mw", {}).items()},
            ess_energy={int(k): float(v) for k, v in data.get("ess_energy_mwh", {}).items()},
            wind_capacity={int(k): float(v) for k, v in data.get("wind_capacity_mw", {}).items()},
        )


def investment_costs(network: Network, plan: InvestmentPlan) -> dict:
    """Capital cost split into line, storage and wind parts ($)."""
    lines = sum(l.cost_usd for l in network.candidate_lines if l.id in plan.built_lines)
    ess = sum(
        s.cost_energy_usd_per_mwh * plan.ess_energy.get(s.bus, 0.0) + s.cost_power_usd_per_mw * plan.ess_power.get(s.bus, 0.0)
        for s in network.storage_candidates
    )
    wind = sum(w.invest_cost_usd_per_mw * plan.wind_capacity.get(w.bus, 0.0) for w in network.wind_candidates)
    return {"lines": lines, "ess": ess, "wind": wind, "total": lines + ess + wind}


def build_plan_model(
    network: Network,
    params: PolicyParams,
    reps: RepresentativeDaySet,
    sld_plan: SldPlan,
    name: str = "reduced",
    shed_cost: float | None = None,
) -> MilpModel:
    """Assemble the co-planning MILP for the given representatives and blocks."""
    lf = np.asarray(reps.lf, dtype=float)
    wf = np.asarray(reps.wf, dtype=float)
    rho = np.asarray(reps.weights, dtype=float)
    if lf.ndim != 2 or lf.shape != wf.shape or rho.shape != (lf.shape[0],):
        raise DimensionMismatch(f"lf {lf.shape}, wf {wf.shape}, weights {rho.shape} are inconsistent")
    nrd, H = lf.shape
    if sld_plan.nrd != nrd:
        raise DimensionMismatch(f"SLD plan built for {sld_plan.nrd} RDs, representatives have {nrd}")
    if sld_plan.n_sld < 1:
        raise DimensionMismatch("SLD plan has no blocks")
    P = params.cost_segments
    for g in network.generators:
        if len(g.segment_costs_usd_per_mwh) != P:
            raise DimensionMismatch(f"generator {g.id} has {len(g.segment_costs_usd_per_mwh)} cost segments, expected {P}")

    psi = network.base_power_mva
    theta = params.theta_bound_rad
    for l in network.candidate_lines:
        if psi * l.susceptance_pu * 2 * theta > BIG_M_LIMIT:
            raise BigMOverflow(f"big-M of candidate line {l.id} exceeds {BIG_M_LIMIT:g}")

    bus_ids = network.bus_ids
    bpos = {b: k for k, b in enumerate(bus_ids)}
    gens, winds, stors = network.generators, network.wind_candidates, network.storage_candidates
    elines, nlines = network.existing_lines, network.candidate_lines
    nsld = sld_plan.n_sld
    rd_of = sld_plan.rd_of_block
    rho_sld = sld_plan.weights
    growth = 1.0 + params.load_growth
    disc = rho / (1.0 + params.interest_rate)  # per-RD weight in the operating cost
    peak = np.array([b.peak_load_mw for b in network.buses])

    D = _tags("D", range(nrd), max(3, len(str(nrd - 1))))
    Hh = _tags("H", range(H), 2)
    B = _tags("B", range(nsld), max(3, len(str(nsld - 1))))
    K = _tags("K", range(1, P + 1), 1 if P < 10 else 2)
    Gt = _tags("G", [g.id for g in gens])
    Wt = _tags("W", [w.bus for w in winds])
    St = _tags("S", [s.bus for s in stors])
    Bt = _tags("B", bus_ids)
    Et = _tags("L", [l.id for l in elines])
    Nt = _tags("L", [l.id for l in nlines])

    b = _Builder()
    # ---- investment variables (capital cost, objective TC)
    Y = b.vars("Y", [Nt], 0, 1, binary=True, cost=[l.cost_usd for l in nlines])
    Cmax = np.array([s.cmax_mw for s in stors])
    Smax = np.array([s.smax_mwh for s in stors])
    C = b.vars("C", [St], 0, Cmax, cost=[s.cost_power_usd_per_mw for s in stors])
    S = b.vars("S", [St], 0, Smax, cost=[s.cost_energy_usd_per_mwh for s in stors])
    PW = b.vars("PW", [Wt], 0, [w.pmax_mw for w in winds], cost=[w.invest_cost_usd_per_mw for w in winds])

    # ---- thermal units
    gmax = np.array([g.pmax_mw for g in gens])[:, None, None]
    chi = np.array([g.reserve_cost_usd_per_mwh for g in gens])[:, None, None]
    cg = np.array([g.segment_costs_usd_per_mwh for g in gens]).reshape(len(gens), 1, 1, P)
    Pg = b.vars("P", [Gt, D, Hh], 0, gmax)
    Ps = b.vars("PS", [Gt, D, Hh, K], 0, gmax[..., None] / P, cost=disc[None, :, None, None] * cg)
    R = b.vars("R", [Gt, D, Hh], 0, gmax, cost=disc[None, :, None] * chi)
    I = b.vars("I", [Gt, D, Hh], 0, 1, binary=True)

    # ---- wind
    cwc = np.array([w.curtailment_cost_usd_per_mwh for w in winds])[:, None, None]
    PC = b.vars("PC", [Wt, D, Hh], 0, np.array([w.pmax_mw for w in winds])[:, None, None], cost=disc[None, :, None] * cwc)

    # ---- storage
    eta_c = np.array([s.eta_c for s in stors])[:, None, None]
    eta_d = np.array([s.eta_d for s in stors])[:, None, None]
    Pch = b.vars("PCH", [St, D, Hh], 0, Cmax[:, None, None] / eta_c)
    Pdh = b.vars("PDH", [St, D, Hh], 0, Cmax[:, None, None] * eta_d)
    U = b.vars("U", [St, D, Hh], 0, 1, binary=True)
    LAM = b.vars("LAM", [St, D, Hh], 0, Smax[:, None, None])
    LAMZ = b.vars("LAMZ", [St, D], 0, Smax[:, None])
    DLAM = b.vars("DLAM", [St, D], -np.inf, np.inf)
    E = b.vars("E", [St, B], 0, Smax[:, None])
    LMIN = b.vars("LMIN", [St, D], 0, Smax[:, None])
    LMAX = b.vars("LMAX", [St, D], 0, Smax[:, None])

    # ---- network
    th_lb = np.full((len(bus_ids), 1, 1), -theta)
    th_ub = np.full((len(bus_ids), 1, 1), theta)
    if params.reference_bus in bpos:
        th_lb[bpos[params.reference_bus]] = 0.0
        th_ub[bpos[params.reference_bus]] = 0.0
    TH = b.vars("TH", [Bt, D, Hh], th_lb, th_ub)
    e_pmax = np.array([l.pmax_mw for l in elines])[:, None, None]
    PE = b.vars("PE", [Et, D, Hh], -e_pmax, e_pmax)
    n_pmax = np.array([l.pmax_mw for l in nlines])[:, None, None]
    PL = b.vars("PL", [Nt, D, Hh], -n_pmax, n_pmax)

    # ---- power balance per bus, RD and hour
    bal = b.rows("BAL", [Bt, D, Hh], "E", growth * lf[None, :, :] * peak[:, None, None])
    for k, g in enumerate(gens):
        b.terms(bal[bpos[g.bus]], Pg[k], 1.0)
    for k, w in enumerate(winds):
        b.terms(bal[bpos[w.bus]], PW[k], wf)
        b.terms(bal[bpos[w.bus]], PC[k], -1.0)
    for k, s in enumerate(stors):
        b.terms(bal[bpos[s.bus]], Pdh[k], 1.0)
        b.terms(bal[bpos[s.bus]], Pch[k], -1.0)
    for lines, flow in ((elines, PE), (nlines, PL)):
        for k, l in enumerate(lines):
            b.terms(bal[bpos[l.from_bus]], flow[k], -1.0)
            b.terms(bal[bpos[l.to_bus]], flow[k], 1.0)
    if shed_cost is not None:
        # diagnostic only: unserved load at a value of lost load
        demand = growth * lf[None, :, :] * peak[:, None, None]
        LS = b.vars("LS", [Bt, D, Hh], 0, demand, cost=disc[None, :, None] * float(shed_cost))
        b.terms(bal, LS, 1.0)

    # ---- thermal units: on/off bound and cost segments
    r = b.rows("GMAX", [Gt, D, Hh], "L")
    b.terms(r, Pg, 1.0)
    b.terms(r, I, -gmax)
    r = b.rows("GSEG", [Gt, D, Hh], "E")
    b.terms(r, Pg, 1.0)
    b.terms(r[..., None], Ps, -1.0)
    r = b.rows("GSEGMAX", [Gt, D, Hh, K], "L")
    b.terms(r, Ps, 1.0)
    b.terms(r, I[..., None], -gmax[..., None] / P)

    # ---- wind share and curtailment
    if winds:
        r = b.rows("WSHARE", [], "G", params.wind_share * growth * network.total_peak_load)
        b.terms(r, PW, 1.0)
        r = b.rows("WCURT", [Wt, D, Hh], "L")
        b.terms(r, PC, 1.0)
        b.terms(r, PW[:, None, None], -wf[None])
        r = b.rows("WCURTSUM", [], "L")
        wsum = float((rho[:, None] * wf).sum()) if params.weighted_curtailment else float(wf.sum())
        pc_coef = rho[None, :, None] if params.weighted_curtailment else 1.0
        b.terms(r, PC, np.broadcast_to(pc_coef, PC.shape))
        b.terms(r, PW, -params.max_curtail_share * wsum)

    # ---- spinning reserve
    r = b.rows("RESP", [Gt, D, Hh], "L")
    b.terms(r, R, 1.0)
    b.terms(r, Pg, -1.0)
    r = b.rows("RESCAP", [Gt, D, Hh], "L", gmax)
    b.terms(r, R, 1.0)
    b.terms(r, Pg, 1.0)
    r = b.rows("RESREQ", [D, Hh], "G", params.reserve_load_frac * growth * lf * network.total_peak_load)
    for k in range(len(gens)):
        b.terms(r, R[k], 1.0)
    for k in range(len(winds)):
        b.terms(r, PW[k], -params.reserve_wind_frac * wf)

    # ---- DC flows
    if elines:
        r = b.rows("FLOWE", [Et, D, Hh], "E")
        b.terms(r, PE, 1.0)
        for k, l in enumerate(elines):
            coef = psi * l.susceptance_pu
            b.terms(r[k], TH[bpos[l.from_bus]], -coef)
            b.terms(r[k], TH[bpos[l.to_bus]], coef)
    if nlines:
        big_m = np.array([psi * l.susceptance_pu * 2 * theta for l in nlines])
        up = b.rows("FLOWNU", [Nt, D, Hh], "L", big_m[:, None, None])
        lo = b.rows("FLOWNL", [Nt, D, Hh], "G", -big_m[:, None, None])
        for rr, sign in ((up, 1.0), (lo, -1.0)):
            b.terms(rr, PL, 1.0)
            for k, l in enumerate(nlines):
                coef = psi * l.susceptance_pu
                b.terms(rr[k], TH[bpos[l.from_bus]], -coef)
                b.terms(rr[k], TH[bpos[l.to_bus]], coef)
            b.terms(rr, Y[:, None, None], sign * big_m[:, None, None])
        up = b.rows("CAPNU", [Nt, D, Hh], "L")
        b.terms(up, PL, 1.0)
        b.terms(up, Y[:, None, None], -n_pmax)
        lo = b.rows("CAPNL", [Nt, D, Hh], "G")
        b.terms(lo, PL, 1.0)
        b.terms(lo, Y[:, None, None], n_pmax)

    # ---- storage
    if stors:
        Cm = Cmax[:, None, None]
        r = b.rows("SCH", [St, D, Hh], "L")
        b.terms(r, Pch, eta_c)
        b.terms(r, C[:, None, None], -1.0)
        r = b.rows("SDIS", [St, D, Hh], "L")
        b.terms(r, Pdh, 1.0 / eta_d)
        b.terms(r, C[:, None, None], -1.0)
        r = b.rows("SRATIO", [St], "L")
        b.terms(r, C, [s.ratio_h for s in stors])
        b.terms(r, S, -1.0)
        r = b.rows("SUCH", [St, D, Hh], "L")
        b.terms(r, Pch, eta_c)
        b.terms(r, U, -Cm)
        r = b.rows("SUDIS", [St, D, Hh], "L", Cm)
        b.terms(r, Pdh, 1.0 / eta_d)
        b.terms(r, U, Cm)
        # intra-day state of charge
        r = b.rows("SOC", [St, D, Hh], "E")
        b.terms(r, LAM, 1.0)
        b.terms(r[:, :, 1:], LAM[:, :, :-1], -1.0)
        b.terms(r[:, :, 0], LAMZ, -1.0)
        b.terms(r, Pch, -eta_c)
        b.terms(r, Pdh, 1.0 / eta_d)
        r = b.rows("SOCMAX", [St, D, Hh], "L")
        b.terms(r, LAM, 1.0)
        b.terms(r, S[:, None, None], -1.0)
        r = b.rows("SOCZMAX", [St, D], "L")
        b.terms(r, LAMZ, 1.0)
        b.terms(r, S[:, None], -1.0)
        r = b.rows("DLAMDEF", [St, D], "E")
        b.terms(r, DLAM, 1.0)
        b.terms(r[..., None], Pch, -eta_c)
        b.terms(r[..., None], Pdh, 1.0 / eta_d)
        # energy chained across linked day blocks
        if nsld > 1:
            r = b.rows("ECHAIN", [St, B[1:]], "E")
            b.terms(r, E[:, 1:], 1.0)
            b.terms(r, E[:, :-1], -1.0)
            b.terms(r, DLAM[:, rd_of[1:]], -rho_sld[None, 1:])
        r = b.rows("ECYC", [St], "L")
        b.terms(r, E[:, 0], 1.0)
        b.terms(r, E[:, -1], -1.0)
        b.terms(r, DLAM[:, rd_of[0]], -rho_sld[0])
        # energy envelope inside every block; the first block starts from the
        # chained start-of-year level E_1 - rho_1 * dlam
        r = b.rows("ENVEND", [St, B], "L")
        b.terms(r, E, 1.0)
        b.terms(r, LMAX[:, rd_of], 1.0)
        b.terms(r, DLAM[:, rd_of], -1.0)
        b.terms(r, S[:, None], -1.0)
        lo = b.rows("ENVSTARTLO", [St, B], "G")
        up = b.rows("ENVSTARTUP", [St, B], "L")
        for rr in (lo, up):
            b.terms(rr[:, 1:], E[:, :-1], 1.0)
            b.terms(rr[:, 0], E[:, 0], 1.0)
            b.terms(rr[:, 0], DLAM[:, rd_of[0]], -rho_sld[0])
        b.terms(lo, LMIN[:, rd_of], -1.0)
        b.terms(up, LMAX[:, rd_of], 1.0)
        b.terms(up, S[:, None], -1.0)
        r = b.rows("ENVENDLO", [St, B], "G")
        b.terms(r, E, 1.0)
        b.terms(r, LMIN[:, rd_of], -1.0)
        b.terms(r, DLAM[:, rd_of], 1.0)
        r = b.rows("LMINDEF", [St, D, Hh], "G")
        b.terms(r, LMIN[..., None], 1.0)
        b.terms(r, LAMZ[..., None], -1.0)
        b.terms(r, LAM, 1.0)
        r = b.rows("LMAXDEF", [St, D, Hh], "G")
        b.terms(r, LMAX[..., None], 1.0)
        b.terms(r, LAM, -1.0)
        b.terms(r, LAMZ[..., None], 1.0)

    meta = {
        "nrd": nrd,
        "hours": H,
        "n_sld": nsld,
        "bus_ids": list(bus_ids),
        "generator_ids": [g.id for g in gens],
        "wind_buses": [w.bus for w in winds],
        "storage_buses": [s.bus for s in stors],
        "existing_line_ids": [l.id for l in elines],
        "candidate_line_ids": [l.id for l in nlines],
        "rd_weights": rho.tolist(),
        "sld_blocks": sld_plan.blocks.tolist(),
        "eta_c": [s.eta_c for s in stors],
        "eta_d": [s.eta_d for s in stors],
        "discount": 1.0 / (1.0 + params.interest_rate),
        "base_power_mva": psi,
        "shed_cost": shed_cost,
    }
    model = b.finish(name, meta)
    too_long = [n for n in model.var_names + model.row_names if len(n) > MAX_NAME_LEN]
    if too_long:
        raise DimensionMismatch(f"name longer than {MAX_NAME_LEN} characters: {too_long[0][:40]}...")
    return model


def full_space_inputs(load: HourlySeries, wind: HourlySeries) -> tuple[RepresentativeDaySet, SldPlan]:
    """Every real day as its own representative, chained chronologically."""
    lf = to_day_matrix(per_unit(load))
    wf = to_day_matrix(wind)
    n = lf.shape[0]
    reps = RepresentativeDaySet(
        lf=lf.copy(),
        wf=np.clip(wf, 0.0, 1.0),
        weights=np.ones(n),
        centroids=np.zeros((n, 0)),
        extreme=np.zeros(n, dtype=bool),
        members=[[d] for d in range(n)],
        method="full",
    )
    return reps, identity_plan(n)


def build_full_space_model(
    network: Network,
    params: PolicyParams,
    load: HourlySeries,
    wind: HourlySeries,
    shed_cost: float | None = None,
) -> MilpModel:
    reps, plan = full_space_inputs(load, wind)
    return build_plan_model(network, params, reps, plan, name="full_space", shed_cost=shed_cost)


def _investment_targets(model: MilpModel, plan: InvestmentPlan) -> dict[str, float]:
    m = model.meta
    targets = {}
    width = lambda ids: max(2, len(str(max(ids)))) if ids else 2
    lw = width(m["candidate_line_ids"])
    for lid in plan.built_lines:
        if int(lid) not in m["candidate_line_ids"]:
            raise PlanOutOfBounds(f"line {lid} is not a candidate of this model")
    for lid in m["candidate_line_ids"]:
        targets[f"Y_L{lid:0{lw}d}"] = 1.0 if lid in plan.built_lines else 0.0
    sw = width(m["storage_buses"])
    for key, values in (("C", plan.ess_power), ("S", plan.ess_energy)):
        extra = set(values) - set(m["storage_buses"])
        if any(values[k] > 0 for k in extra):
            raise PlanOutOfBounds(f"storage capacity at non-candidate buses {sorted(extra)}")
        for bus in m["storage_buses"]:
            targets[f"{key}_S{bus:0{sw}d}"] = float(values.get(bus, 0.0))
    ww = width(m["wind_buses"])
    extra = set(plan.wind_capacity) - set(m["wind_buses"])
    if any(plan.wind_capacity[k] > 0 for k in extra):
        raise PlanOutOfBounds(f"wind capacity at non-candidate buses {sorted(extra)}")
    for bus in m["wind_buses"]:
        targets[f"PW_W{bus:0{ww}d}"] = float(plan.wind_capacity.get(bus, 0.0))
    return targets


def fix_investments(model: MilpModel, plan: InvestmentPlan, tol: float = 1e-6) -> MilpModel:
    """Copy of ``model`` with all investment variables pinned to ``plan``.

    Values within ``tol`` (relative to the bound) outside a variable's bounds
    are clipped; anything further out raises :class:`PlanOutOfBounds`.
    """
    fixed = model.copy()
    for name, value in _investment_targets(model, plan).items():
        k = model.var_index(name)
        lo, hi = model.lb[k], model.ub[k]
        slack = tol * max(1.0, abs(hi) if np.isfinite(hi) else 1.0)
        if value < lo - slack or value > hi + slack:
            raise PlanOutOfBounds(f"{name}={value} outside [{lo}, {hi}]")
        value = min(max(value, lo), hi)
        fixed.lb[k] = fixed.ub[k] = value
    fixed.name = model.name + "_fixed"
    fixed.meta["fixed_plan"] = plan.to_json()
    return fixed


def relaxation(model: MilpModel) -> MilpModel:
    """Copy of ``model`` with every integrality requirement dropped."""
    lp = model.copy()
    lp.is_int = np.zeros(model.n_vars, dtype=bool)
    lp.name = model.name + "_relaxed"
    return lp


def repair_integrality(model: MilpModel, x, tol: float = 1e-6) -> np.ndarray | None:
    """Integral point derived from a relaxed solution ``x``, or None.

    The storage mode follows the charging direction and unit on/off flags
    round up (they only gate upper limits and carry no cost). Every other
    integer must already be integral. The caller still has to check the
    result against the rows.
    """
    y = np.array(x, dtype=float)
    if "U" in model.families:
        y[model.var_family("U")] = (y[model.var_family("PCH")] > tol).astype(float)
    if "I" in model.families:
        k = model.var_family("I")
        y[k] = np.ceil(y[k] - tol)
    ints = np.flatnonzero(model.is_int)
    rounded = np.round(y[ints])
    if np.any(np.abs(y[ints] - rounded) > tol):
        return None
    y[ints] = rounded
    return np.clip(y, model.lb, model.ub)
