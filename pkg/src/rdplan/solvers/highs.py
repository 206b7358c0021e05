"""HiGHS adapter: ``python -m rdplan.solvers.highs [options] MODEL SOLUTION``."""

from __future__ import annotations

import argparse
import sys

from rdplan.solver_io import write_solution


def _option_value(text: str):
    text = text.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rdplan.solvers.highs")
    parser.add_argument("model")
    parser.add_argument("solution")
    parser.add_argument("--gap", type=float, default=1e-4)
    parser.add_argument("--time-limit", type=float, default=3600.0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--option", action="append", default=[], metavar="NAME=VALUE", help="extra HiGHS option")
    args = parser.parse_args(argv)

    try:
        import highspy
    except ImportError:
        print("highspy is not installed", file=sys.stderr)
        return 3

    h = highspy.Highs()
    h.setOptionValue("output_flag", bool(args.verbose))
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("threads", args.threads)
    for item in args.option:
        name, _, text = item.partition("=")
        value = _option_value(text)
        if h.setOptionValue(name.strip(), value) == highspy.HighsStatus.kError:
            print(f"bad HiGHS option {item!r}", file=sys.stderr)
            return 2
    if h.readModel(args.model) == highspy.HighsStatus.kError:
        print(f"HiGHS could not read {args.model}", file=sys.stderr)
        return 2
    run = h.run()
    status = h.getModelStatus()
    info = h.getInfo()
    ms = highspy.HighsModelStatus
    has_sol = info.primal_solution_status == 2  # kSolutionStatusFeasible

    if status == ms.kOptimal:
        label = "optimal"
    elif status in (ms.kInfeasible, ms.kUnboundedOrInfeasible):
        label = "infeasible"
    elif status in (ms.kTimeLimit, ms.kIterationLimit, ms.kSolutionLimit, ms.kInterrupt):
        label = "feasible-gap" if has_sol else "timeout"
    else:
        label = "error"
    if run == highspy.HighsStatus.kError and label == "optimal":
        label = "error"

    values = None
    objective = None
    gap = None
    if label in ("optimal", "feasible-gap"):
        names = h.getLp().col_names_
        values = dict(zip(names, h.getSolution().col_value))
        objective = info.objective_function_value
        gap = info.mip_gap if h.getLp().integrality_ else 0.0
    write_solution(args.solution, label, values, objective, gap, message=h.modelStatusToString(status))
    return 0


if __name__ == "__main__":
    sys.exit(main())
