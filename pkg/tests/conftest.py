import numpy as np
import pytest

from rdplan.aggregation import RepresentativeDaySet
from rdplan.linking import build_slds
from rdplan.planner_milp import build_plan_model
from rdplan.solver_io import SolverConfig, solve
from rdplan.system_model import load_bundled


def two_rd_reps(lf=((0.3, 0.85), (0.4, 0.7)), wf=((0.1, 0.05), (0.6, 0.3)), weights=(200, 165)):
    lf = np.asarray(lf, float)
    return RepresentativeDaySet(
        lf=lf,
        wf=np.asarray(wf, float),
        weights=np.asarray(weights, float),
        centroids=np.zeros((len(lf), 1)),
        extreme=np.arange(len(lf)) == 0,
    )


def two_block_plan(weights=(200, 165)):
    return build_slds([0] * weights[0] + [1] * weights[1], 2)


def coef(model, row, var):
    return model.A[model.row_names.index(row), model.var_index(var)]


@pytest.fixture(scope="session")
def two_bus():
    return load_bundled("two_bus")


@pytest.fixture(scope="session")
def two_bus_model(two_bus):
    net, par = two_bus
    return build_plan_model(net, par, two_rd_reps(), two_block_plan(), name="two_bus")


@pytest.fixture(scope="session")
def two_bus_solution(two_bus_model):
    sol = solve(two_bus_model, SolverConfig(mip_gap=0.0))
    assert sol.status == "optimal"
    return sol


VERDICTS = []


def verdict(number, ok, detail):
    """Record and print one acceptance outcome; the summary repeats them all."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    VERDICTS.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
