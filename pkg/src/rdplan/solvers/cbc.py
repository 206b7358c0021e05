"""CBC adapter: ``python -m rdplan.solvers.cbc [options] MODEL SOLUTION``.

Runs a CBC executable (``--cbc PATH``, else ``cbc`` on PATH, else the binary
bundled with PuLP) and converts its solution listing to the generic format.
"""

from __future__ import annotations

import argparse
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

from rdplan.solver_io import write_solution


def find_cbc(explicit: str | None = None) -> str | None:
    if explicit:
        return explicit
    found = shutil.which("cbc")
    if found:
        return found
    try:
        from pulp.apis.coin_api import pulp_cbc_path as path
    except ImportError:
        return None
    return path if path and Path(path).exists() else None


def read_cbc_solution(path) -> tuple[str, float | None, dict[str, float], str]:
    """Parse CBC's ``-solution`` listing into ``(status, objective, values, message)``."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        return "error", None, {}, "empty CBC solution file"
    head = lines[0].strip()
    low = head.lower()
    objective = None
    if "objective value" in low:
        try:
            objective = float(head.rsplit(None, 1)[-1])
        except ValueError:
            objective = None
    # with "-printingOptions all" rows are listed first; every block restarts at index 0
    blocks: list[dict[str, float]] = []
    for line in lines[1:]:
        parts = line.replace("**", " ").split()
        if len(parts) < 3:
            continue
        if parts[0] == "0" or not blocks:
            blocks.append({})
        blocks[-1][parts[1]] = float(parts[2])
    values = blocks[-1] if blocks else {}
    if low.startswith("optimal"):
        status = "optimal"
    elif "infeasible" in low:
        status = "infeasible"
    elif low.startswith("stopped"):
        status = "feasible-gap" if values and objective is not None and math.isfinite(objective) else "timeout"
    else:
        status = "error"
    return status, objective, values, head


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rdplan.solvers.cbc")
    parser.add_argument("model")
    parser.add_argument("solution")
    parser.add_argument("--gap", type=float, default=1e-4)
    parser.add_argument("--time-limit", type=float, default=3600.0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--cbc", default=None, help="path to the cbc executable")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    exe = find_cbc(args.cbc)
    if exe is None:
        print("no cbc executable found (install pulp or put cbc on PATH)", file=sys.stderr)
        return 3
    if not Path(args.model).exists():
        print(f"model file {args.model} not found", file=sys.stderr)
        return 2

    with tempfile.TemporaryDirectory(prefix="rdplan_cbc_") as tmp:
        raw = Path(tmp) / "cbc.sol"
        cmd = [
            exe,
            args.model,
            "-ratioGap", repr(args.gap),
            "-seconds", repr(args.time_limit),
            "-threads", str(args.threads),
            "-timeMode", "elapsed",
            "-solve",
            "-printingOptions", "all",
            "-solution", str(raw),
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if args.verbose:
            print(proc.stdout)
        if not raw.exists():
            print(f"cbc exited with code {proc.returncode} and no solution\n{proc.stdout[-2000:]}", file=sys.stderr)
            return 3
        status, objective, values, message = read_cbc_solution(raw)

    # CBC reports the gap only in its log; a proven optimum is within the requested ratio
    gap = 0.0 if status == "optimal" else None
    if status in ("optimal", "feasible-gap"):
        write_solution(args.solution, status, values, objective, gap, message)
    else:
        write_solution(args.solution, status, message=message)
    return 0


if __name__ == "__main__":
    sys.exit(main())
