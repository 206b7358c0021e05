import math
import sys

import highspy
import numpy as np
import pytest
import scipy.sparse as sp

from rdplan.errors import NameTooLong, ParseError, SolverCrashed, UnknownVariable
from rdplan.planner_milp import MilpModel
from rdplan.solver_io import SolverConfig, parse_solution, read_mps, solve, write_model, write_solution


def random_model(seed, n=None, m=None):
    rng = np.random.default_rng(seed)
    n = n or int(rng.integers(1, 12))
    m = m or int(rng.integers(1, 10))
    is_int = rng.random(n) < 0.3
    lb = rng.choice([0.0, -np.inf, -5.5, 1 / 3], n)
    ub = np.where(np.isinf(lb), rng.choice([2.5, np.inf], n), np.nan_to_num(lb, neginf=0.0) + rng.choice([0.0, 1.0, 7.25, np.inf, 1e6 / 7], n))
    lb[is_int], ub[is_int] = 0.0, 1.0
    dense = np.where(rng.random((m, n)) < 0.5, rng.normal(0, 10, (m, n)) * rng.choice([1, 1e-7, 1e5], (m, n)), 0.0)
    obj = np.where(rng.random(n) < 0.7, rng.normal(0, 100, n), 0.0)
    return MilpModel(
        var_names=[f"X{j:03d}_D{j % 3:03d}" for j in range(n)],
        lb=lb,
        ub=ub,
        is_int=is_int,
        obj=obj,
        A=sp.csr_matrix(dense),
        row_names=[f"ROW{i:03d}" for i in range(m)],
        sense=rng.choice(["L", "G", "E"], m),
        rhs=np.where(rng.random(m) < 0.8, rng.normal(0, 50, m), 0.0),
        name=f"rand{seed}",
    )


def _same(a: MilpModel, b: MilpModel):
    assert b.var_names == a.var_names and b.row_names == a.row_names
    np.testing.assert_array_equal(b.lb, a.lb)
    np.testing.assert_array_equal(b.ub, a.ub)
    np.testing.assert_array_equal(b.is_int, a.is_int)
    np.testing.assert_array_equal(b.obj, a.obj)
    np.testing.assert_array_equal(b.sense, a.sense)
    np.testing.assert_array_equal(b.rhs, a.rhs)
    np.testing.assert_array_equal(b.A.toarray(), a.A.toarray())


@pytest.mark.parametrize("seed", range(100))
def test_mps_round_trip_exact(tmp_path, seed):
    model = random_model(seed)
    path = write_model(model, tmp_path / "m.mps")
    _same(model, read_mps(path))


def test_write_is_deterministic(tmp_path):
    model = random_model(3)
    for fmt in ("mps", "lp"):
        a = write_model(model, tmp_path / f"a.{fmt}", fmt).read_bytes()
        b = write_model(model, tmp_path / f"b.{fmt}", fmt).read_bytes()
        assert a == b


def _highs_arrays(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    lp = h.getLp()
    a = lp.a_matrix_
    mat = sp.csc_matrix((a.value_, a.index_, a.start_), shape=(lp.num_row_, lp.num_col_)).toarray()
    cols = {n: k for k, n in enumerate(lp.col_names_)}
    rows = {n: k for k, n in enumerate(lp.row_names_)}
    return lp, mat, cols, rows


@pytest.mark.parametrize("seed", range(0, 100, 7))
@pytest.mark.parametrize("fmt", ["mps", "lp"])
def test_files_read_by_highs_match(tmp_path, seed, fmt):
    # an independent reader must see the same numbers in both formats
    model = random_model(seed, n=6, m=5)
    lp, mat, cols, rows = _highs_arrays(write_model(model, tmp_path / f"m.{fmt}", fmt))
    dense = model.A.toarray()
    inf = highspy.kHighsInf
    for j, name in enumerate(model.var_names):
        k = cols[name]
        assert lp.col_cost_[k] == model.obj[j]
        lo, hi = model.lb[j], model.ub[j]
        assert lp.col_lower_[k] == (-inf if lo == -np.inf else lo)
        assert lp.col_upper_[k] == (inf if hi == np.inf else hi)
        for i, rname in enumerate(model.row_names):
            if rname in rows:
                assert mat[rows[rname], k] == dense[i, j]
    for i, rname in enumerate(model.row_names):
        if rname not in rows:
            assert not dense[i].any()  # an empty row may be dropped by the reader
            continue
        r = rows[rname]
        lo, hi = lp.row_lower_[r], lp.row_upper_[r]
        expected = {"L": (-inf, model.rhs[i]), "G": (model.rhs[i], inf), "E": (model.rhs[i], model.rhs[i])}[model.sense[i]]
        assert (lo, hi) == expected


def test_long_name_rejected(tmp_path):
    model = random_model(1, n=2, m=1)
    model.var_names[0] = "X" * 256
    with pytest.raises(NameTooLong):
        write_model(model, tmp_path / "m.mps")


def test_solution_parse_and_clip(tmp_path):
    model = random_model(5, n=3, m=1)
    model.lb[:] = 0.0
    model.ub[:] = 1.0
    model.is_int[:] = [True, False, False]
    p = tmp_path / "s.sol"
    write_solution(p, "optimal", {model.var_names[0]: 0.999999, model.var_names[1]: -1e-7, model.var_names[2]: 0.5}, 12.5, 1e-4)
    rec = parse_solution(p, model)
    assert rec.status == "optimal" and rec.objective == 12.5 and rec.gap == 1e-4
    assert rec.values == {model.var_names[0]: 1.0, model.var_names[1]: 0.0, model.var_names[2]: 0.5}


def test_solution_errors(tmp_path):
    model = random_model(5, n=2, m=1)
    model.lb[:] = 0.0
    model.ub[:] = 1.0
    model.is_int[:] = [True, False]
    a, b = model.var_names
    p = tmp_path / "s.sol"
    write_solution(p, "optimal", {a: 1.0, "NOPE": 1.0}, 1.0)
    with pytest.raises(UnknownVariable):
        parse_solution(p, model)
    write_solution(p, "optimal", {a: 1.0}, 1.0)
    with pytest.raises(UnknownVariable, match="missing"):
        parse_solution(p, model)
    write_solution(p, "optimal", {a: 0.5, b: 0.0}, 1.0)
    with pytest.raises(ParseError, match="fractional"):
        parse_solution(p, model)
    write_solution(p, "optimal", {a: 1.0, b: 2.0}, 1.0)
    with pytest.raises(ParseError, match="bounds"):
        parse_solution(p, model)
    p.write_text("# status optimal\nX one two\n")
    with pytest.raises(ParseError):
        parse_solution(p, model)
    p.write_text("# status weird\n")
    with pytest.raises(ParseError, match="weird"):
        parse_solution(p, model)


def test_status_defaults(tmp_path):
    model = random_model(5, n=1, m=1)
    p = tmp_path / "s.sol"
    p.write_text("")
    assert parse_solution(p, model).status == "error"
    write_solution(p, "infeasible", message="no  feasible\npoint")
    rec = parse_solution(p, model)
    assert rec.status == "infeasible" and not rec.has_solution and math.isnan(rec.objective)
    assert rec.message == "no feasible point"


def _knapsack():
    # max 5a + 4b + 3c  s.t. 2a + 3b + c <= 5 (binaries) -> a = b = 1, objective -9
    return MilpModel(
        var_names=["A", "B", "C"],
        lb=np.zeros(3),
        ub=np.ones(3),
        is_int=np.ones(3, bool),
        obj=np.array([-5.0, -4.0, -3.0]),
        A=sp.csr_matrix([[2.0, 3.0, 1.0]]),
        row_names=["CAP"],
        sense=np.array(["L"]),
        rhs=np.array([5.0]),
        name="knap",
    )


@pytest.mark.parametrize("fmt", ["mps", "lp"])
def test_solve_with_highs_adapter(fmt):
    rec = solve(_knapsack(), SolverConfig(format=fmt, mip_gap=0.0))
    assert rec.status == "optimal"
    assert rec.objective == pytest.approx(-9.0)
    assert rec.values == {"A": 1.0, "B": 1.0, "C": 0.0}
    assert rec.wall_time > 0


def test_solve_infeasible():
    model = _knapsack()
    model.sense[:] = "G"
    model.rhs[:] = 10.0
    rec = solve(model, SolverConfig(mip_gap=0.0))
    assert rec.status == "infeasible" and not rec.has_solution


def test_solver_options_pass_through():
    cmd = f"{sys.executable} -m rdplan.solvers.highs --option presolve=off --option mip_feasibility_tolerance=1e-7 {{model}} {{solution}}"
    assert solve(_knapsack(), SolverConfig(command_template=cmd)).objective == pytest.approx(-9.0)
    bad = f"{sys.executable} -m rdplan.solvers.highs --option no_such_option=1 {{model}} {{solution}}"
    with pytest.raises(SolverCrashed):
        solve(_knapsack(), SolverConfig(command_template=bad))


def test_env_overrides_default_command(monkeypatch):
    monkeypatch.setenv("RDPLAN_SOLVER_CMD", f"{sys.executable} -c pass {{model}} {{solution}}")
    with pytest.raises(SolverCrashed, match="without a solution"):
        solve(_knapsack())


def test_template_needs_placeholders():
    with pytest.raises(ValueError, match="solution"):
        SolverConfig(command_template="highs {model}")
    with pytest.raises(ValueError):
        SolverConfig(format="xml")


def test_cbc_adapter_agrees_with_highs():
    pytest.importorskip("pulp")
    from rdplan.solvers.cbc import find_cbc

    if find_cbc() is None:
        pytest.skip("no cbc binary")
    cmd = f"{sys.executable} -m rdplan.solvers.cbc --gap {{gap}} {{model}} {{solution}}"
    rec = solve(_knapsack(), SolverConfig(command_template=cmd, mip_gap=0.0))
    assert rec.status == "optimal"
    assert rec.objective == pytest.approx(-9.0)
    assert rec.values == {"A": 1.0, "B": 1.0, "C": 0.0}
