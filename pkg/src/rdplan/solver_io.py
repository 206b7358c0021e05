"""Exchange files and the external-solver driver.

Models are written as MPS (one entry per line, names separated by blanks, so
names longer than eight characters survive) or CPLEX-style LP. A solver is
any command line containing ``{model}`` and ``{solution}`` placeholders; it
must leave a solution file in the generic format::

    # status optimal
    # objective 1234.5
    # gap 0.0001
    Y_L01 1
    P_G01_D000_H00 52.25

``status`` is one of ``optimal``, ``feasible-gap``, ``infeasible``,
``timeout`` or ``error``. Adapters for HiGHS and CBC ship in
:mod:`rdplan.solvers`.

Adapter exit codes: 0 solution file written (whatever the status),
2 unreadable model or bad arguments, 3 solver failure.
"""

from __future__ import annotations

import math
import os
import shlex
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import NameTooLong, ParseError, SolverCrashed, SolverTimeout, UnknownVariable
from .planner_milp import MAX_NAME_LEN, MilpModel

STATUSES = ("optimal", "feasible-gap", "infeasible", "timeout", "error")
BOUND_TOL = 1e-5
INT_TOL = 1e-5
ENV_SOLVER_CMD = "RDPLAN_SOLVER_CMD"


def default_command() -> str:
    return (
        f"{shlex.quote(sys.executable)} -m rdplan.solvers.highs "
        "--gap {gap} --time-limit {time_limit} --threads {threads} {model} {solution}"
    )


@dataclass
class SolverConfig:
    command_template: str = ""
    format: str = "mps"
    mip_gap: float = 1e-4
    time_limit: float = 3600.0
    threads: int = 1
    workdir: str | None = None
    keep_files: bool = False
    relax_first: bool = True

    def __post_init__(self):
        if not self.command_template:
            self.command_template = os.environ.get(ENV_SOLVER_CMD) or default_command()
        for ph in ("{model}", "{solution}"):
            if ph not in self.command_template:
                raise ValueError(f"solver command template lacks {ph}: {self.command_template!r}")
        self.format = self.format.lower()
        if self.format not in ("mps", "lp"):
            raise ValueError(f"unknown model format {self.format!r}")
        if self.mip_gap < 0:
            raise ValueError("mip_gap must be >= 0")


@dataclass
class SolutionRecord:
    status: str
    objective: float = math.nan
    values: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    gap: float = math.nan
    message: str = ""

    @property
    def has_solution(self) -> bool:
        return self.status in ("optimal", "feasible-gap") and bool(self.values)

    def vector(self, model: MilpModel) -> np.ndarray:
        """Values in model column order (missing names read as 0)."""
        get = self.values.get
        return np.fromiter((get(n, 0.0) for n in model.var_names), dtype=float, count=model.n_vars)


# ------------------------------------------------------------------ writers


def _fmt(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _check_names(model: MilpModel) -> None:
    for name in (*model.var_names, *model.row_names):
        if len(name) > MAX_NAME_LEN:
            raise NameTooLong(f"name of {len(name)} characters: {name[:40]}...")
        if not name or any(ch.isspace() for ch in name):
            raise NameTooLong(f"name {name!r} is empty or contains whitespace")
    if len(set(model.var_names)) != model.n_vars or len(set(model.row_names)) != model.n_rows:
        raise ValueError("variable and row names must be unique")


def _is_binary(model: MilpModel, j: int) -> bool:
    return bool(model.is_int[j]) and model.lb[j] == 0.0 and model.ub[j] == 1.0


def _mps_lines(model: MilpModel):
    yield f"NAME          {model.name}"
    yield "ROWS"
    yield " N  OBJ"
    for name, s in zip(model.row_names, model.sense):
        yield f" {s}  {name}"
    yield "COLUMNS"
    A = model.A.tocsc()
    A.sort_indices()
    indptr, indices, data = A.indptr, A.indices, A.data
    rnames = model.row_names
    in_marker = False
    marker = 0
    for j, cname in enumerate(model.var_names):
        general_int = bool(model.is_int[j]) and not _is_binary(model, j)
        if general_int and not in_marker:
            yield f"    MARKER{marker:04d}  'MARKER'  'INTORG'"
            in_marker = True
        elif not general_int and in_marker:
            yield f"    MARKER{marker:04d}  'MARKER'  'INTEND'"
            marker += 1
            in_marker = False
        lo, hi = indptr[j], indptr[j + 1]
        if model.obj[j] != 0.0 or lo == hi:
            yield f"    {cname}  OBJ  {_fmt(model.obj[j])}"
        for k in range(lo, hi):
            yield f"    {cname}  {rnames[indices[k]]}  {_fmt(data[k])}"
    if in_marker:
        yield f"    MARKER{marker:04d}  'MARKER'  'INTEND'"
    yield "RHS"
    if model.obj_offset != 0.0:
        yield f"    RHS  OBJ  {_fmt(-model.obj_offset)}"
    for name, v in zip(rnames, model.rhs):
        if v != 0.0:
            yield f"    RHS  {name}  {_fmt(v)}"
    yield "BOUNDS"
    for j, cname in enumerate(model.var_names):
        lo, hi = model.lb[j], model.ub[j]
        if _is_binary(model, j):
            yield f" BV BND  {cname}"
        elif lo == hi:
            yield f" FX BND  {cname}  {_fmt(lo)}"
        elif lo == -np.inf and hi == np.inf:
            yield f" FR BND  {cname}"
        else:
            if lo == -np.inf:
                yield f" MI BND  {cname}"
            elif lo != 0.0 or hi < 0 or model.is_int[j]:
                yield f" LO BND  {cname}  {_fmt(lo)}"
            if hi != np.inf:
                yield f" UP BND  {cname}  {_fmt(hi)}"
            elif model.is_int[j]:
                yield f" PL BND  {cname}"
    yield "ENDATA"


def _lp_expr(pairs, width=200):
    line, out = "", []
    for coef, name in pairs:
        term = f"{'-' if coef < 0 else '+'} {_fmt(abs(coef))} {name}"
        if len(line) + len(term) + 1 > width:
            out.append(line)
            line = ""
        line = f"{line} {term}" if line else term
    out.append(line or "0")
    return out


def _lp_lines(model: MilpModel):
    yield f"\\ {model.name}"
    yield "Minimize"
    nz = np.flatnonzero(model.obj)
    parts = _lp_expr([(model.obj[j], model.var_names[j]) for j in nz])
    if len(nz) == 0:
        parts = [f"0 {model.var_names[0]}"] if model.n_vars else ["0"]
    yield " obj: " + parts[0]
    yield from ("   " + p for p in parts[1:])
    yield "Subject To"
    A = model.A.tocsr()
    A.sort_indices()
    ops = {"L": "<=", "G": ">=", "E": "="}
    for i, rname in enumerate(model.row_names):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        pairs = [(A.data[k], model.var_names[A.indices[k]]) for k in range(lo, hi)]
        if not pairs:
            pairs = [(0.0, model.var_names[0])]
        parts = _lp_expr(pairs)
        parts[-1] += f" {ops[model.sense[i]]} {_fmt(model.rhs[i])}"
        yield f" {rname}: " + parts[0]
        yield from ("   " + p for p in parts[1:])
    yield "Bounds"
    for j, cname in enumerate(model.var_names):
        lo, hi = model.lb[j], model.ub[j]
        if _is_binary(model, j):
            continue
        if lo == hi:
            yield f" {cname} = {_fmt(lo)}"
        elif lo == -np.inf and hi == np.inf:
            yield f" {cname} free"
        elif lo == 0.0 and hi == np.inf:
            continue
        else:
            los = "-inf" if lo == -np.inf else _fmt(lo)
            his = "+inf" if hi == np.inf else _fmt(hi)
            yield f" {los} <= {cname} <= {his}"
    bins = [model.var_names[j] for j in range(model.n_vars) if _is_binary(model, j)]
    gens = [model.var_names[j] for j in range(model.n_vars) if model.is_int[j] and not _is_binary(model, j)]
    if bins:
        yield "Binaries"
        yield from (" " + n for n in bins)
    if gens:
        yield "Generals"
        yield from (" " + n for n in gens)
    yield "End"


def write_model(model: MilpModel, path, format: str = "mps") -> Path:
    """Write ``model`` in declaration order; identical models give identical bytes."""
    _check_names(model)
    path = Path(path)
    lines = _mps_lines(model) if format.lower() == "mps" else _lp_lines(model)
    if format.lower() not in ("mps", "lp"):
        raise ValueError(f"unknown model format {format!r}")
    with path.open("w", encoding="ascii", newline="\n") as fh:
        chunk = []
        for line in lines:
            chunk.append(line)
            if len(chunk) >= 100_000:
                fh.write("\n".join(chunk) + "\n")
                chunk.clear()
        if chunk:
            fh.write("\n".join(chunk) + "\n")
    return path


# ------------------------------------------------------------------ reader


def read_mps(path) -> MilpModel:
    """Parse an MPS file written by :func:`write_model` (free-form fields)."""
    section = None
    name = "model"
    obj_row = None
    row_names, senses = [], []
    row_index = {}
    col_names, col_index = [], {}
    entries_r, entries_c, entries_v = [], [], []
    obj = {}
    rhs = {}
    offset = 0.0
    bounds = {}
    int_cols = set()
    binary_cols = set()
    in_int = False

    def col(cname):
        if cname not in col_index:
            col_index[cname] = len(col_names)
            col_names.append(cname)
            if in_int:
                int_cols.add(cname)
        return col_index[cname]

    with Path(path).open(encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip() or raw.startswith("*"):
                continue
            tokens = raw.split()
            if not raw[0].isspace():
                section = tokens[0].upper()
                if section == "NAME" and len(tokens) > 1:
                    name = tokens[1]
                if section == "ENDATA":
                    break
                continue
            try:
                if section == "ROWS":
                    s, rname = tokens[0].upper(), tokens[1]
                    if s == "N":
                        if obj_row is None:
                            obj_row = rname
                        continue
                    if s not in ("L", "G", "E"):
                        raise ParseError(f"line {lineno}: bad row type {s}")
                    row_index[rname] = len(row_names)
                    row_names.append(rname)
                    senses.append(s)
                elif section == "COLUMNS":
                    if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                        in_int = tokens[2] == "'INTORG'"
                        continue
                    j = col(tokens[0])
                    for rname, val in zip(tokens[1::2], tokens[2::2]):
                        v = float(val)
                        if rname == obj_row:
                            obj[j] = v
                        else:
                            entries_r.append(row_index[rname])
                            entries_c.append(j)
                            entries_v.append(v)
                elif section == "RHS":
                    pairs = tokens[1:] if len(tokens) % 2 == 1 else tokens
                    for rname, val in zip(pairs[0::2], pairs[1::2]):
                        if rname == obj_row:
                            offset = -float(val)
                        else:
                            rhs[row_index[rname]] = float(val)
                elif section == "BOUNDS":
                    kind, cname = tokens[0].upper(), tokens[2]
                    value = float(tokens[3]) if len(tokens) > 3 else None
                    lo, hi = bounds.get(cname, (0.0, np.inf))
                    if kind == "UP":
                        hi = value
                    elif kind == "LO":
                        lo = value
                    elif kind == "FX":
                        lo = hi = value
                    elif kind == "FR":
                        lo, hi = -np.inf, np.inf
                    elif kind == "MI":
                        lo = -np.inf
                    elif kind == "PL":
                        hi = np.inf
                    elif kind == "BV":
                        lo, hi = 0.0, 1.0
                        binary_cols.add(cname)
                    else:
                        raise ParseError(f"line {lineno}: unsupported bound type {kind}")
                    bounds[cname] = (lo, hi)
                elif section in ("RANGES",):
                    raise ParseError(f"line {lineno}: RANGES are not supported")
            except (IndexError, KeyError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc

    n, m = len(col_names), len(row_names)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    is_int = np.zeros(n, dtype=bool)
    for cname, (lo, hi) in bounds.items():
        j = col_index[cname]
        lb[j], ub[j] = lo, hi
    for cname in int_cols | binary_cols:
        is_int[col_index[cname]] = True
    c = np.zeros(n)
    for j, v in obj.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    A = sp.coo_matrix((entries_v, (entries_r, entries_c)), shape=(m, n)).tocsr()
    return MilpModel(
        var_names=col_names,
        lb=lb,
        ub=ub,
        is_int=is_int,
        obj=c,
        A=A,
        row_names=row_names,
        sense=np.array(senses, dtype="<U1"),
        rhs=b,
        obj_offset=offset,
        name=name,
    )


# --------------------------------------------------------------- solutions


def write_solution(path, status: str, values=None, objective=None, gap=None, message: str = "") -> None:
    """Write the generic solution format (used by the adapters)."""
    if status not in STATUSES:
        raise ValueError(f"unknown status {status!r}")
    lines = [f"# status {status}"]
    if objective is not None and math.isfinite(objective):
        lines.append(f"# objective {objective!r}")
    if gap is not None and math.isfinite(gap):
        lines.append(f"# gap {gap!r}")
    if message:
        lines.append(f"# message {' '.join(message.split())}")
    for name, v in (values or {}).items():
        lines.append(f"{name} {float(v)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def parse_solution(path, model: MilpModel) -> SolutionRecord:
    """Read a generic solution file and check it against ``model``.

    Values within 1e-5 of a bound are clipped onto it, integer values are
    snapped; anything further out raises :class:`ParseError`.
    """
    header = {}
    values = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split(None, 1)
                if parts:
                    header[parts[0].lower()] = parts[1].strip() if len(parts) > 1 else ""
                continue
            tokens = line.split()
            if len(tokens) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'name value', got {line!r}")
            try:
                values[tokens[0]] = float(tokens[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad value {tokens[1]!r}") from exc

    status = header.get("status", "optimal" if "objective" in header else "error")
    if status not in STATUSES:
        raise ParseError(f"{path}: unknown status {status!r}")
    try:
        objective = float(header["objective"]) if "objective" in header else math.nan
        gap = float(header["gap"]) if "gap" in header else math.nan
    except ValueError as exc:
        raise ParseError(f"{path}: bad header value ({exc})") from exc

    for name in values:
        if not model.has_var(name):
            raise UnknownVariable(f"{path}: variable {name!r} is not in the model")
    if status == "optimal" and len(values) != model.n_vars:
        missing = [n for n in model.var_names if n not in values]
        raise UnknownVariable(f"{path}: {len(missing)} model variables missing, e.g. {missing[0]!r}")

    checked = {}
    for name, v in values.items():
        j = model.var_index(name)
        lo, hi = model.lb[j], model.ub[j]
        if v < lo - BOUND_TOL or v > hi + BOUND_TOL:
            raise ParseError(f"{name}={v} violates bounds [{lo}, {hi}]")
        v = min(max(v, lo), hi)
        if model.is_int[j]:
            r = round(v)
            if abs(v - r) > INT_TOL:
                raise ParseError(f"integer variable {name} has fractional value {v}")
            v = float(r)
        checked[name] = v
    return SolutionRecord(status=status, objective=objective, values=checked, gap=gap, message=header.get("message", ""))


# ------------------------------------------------------------------- solve


def solve(model: MilpModel, config: SolverConfig | None = None) -> SolutionRecord:
    """Write ``model``, run the configured solver command and read its answer."""
    config = config or SolverConfig()
    own_dir = config.workdir is None
    workdir = Path(tempfile.mkdtemp(prefix="rdplan_")) if own_dir else Path(config.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    model_path = workdir / f"{model.name}.{config.format}"
    sol_path = workdir / f"{model.name}.sol"
    if sol_path.exists():
        sol_path.unlink()
    try:
        write_model(model, model_path, config.format)
        cmd = config.command_template.format(
            model=shlex.quote(str(model_path)),
            solution=shlex.quote(str(sol_path)),
            gap=repr(float(config.mip_gap)),
            time_limit=repr(float(config.time_limit)),
            threads=int(config.threads),
        )
        start = time.perf_counter()
        try:
            proc = subprocess.run(
                shlex.split(cmd), capture_output=True, text=True, timeout=config.time_limit + 120.0
            )
        except subprocess.TimeoutExpired as exc:
            raise SolverTimeout(f"solver exceeded {config.time_limit + 120.0:.0f} s: {cmd}") from exc
        except OSError as exc:
            raise SolverCrashed(f"could not start solver: {exc}") from exc
        elapsed = time.perf_counter() - start
        if not sol_path.exists():
            raise SolverCrashed(
                f"solver exited with code {proc.returncode} without a solution file\n{proc.stderr[-2000:]}"
            )
        if proc.returncode != 0:
            raise SolverCrashed(f"solver exited with code {proc.returncode}\n{proc.stderr[-2000:]}")
        record = parse_solution(sol_path, model)
        record.wall_time = elapsed
        return record
    finally:
        if own_dir and not config.keep_files:
            for p in (model_path, sol_path):
                if p.exists():
                    p.unlink()
            try:
                workdir.rmdir()
            except OSError:
                pass
