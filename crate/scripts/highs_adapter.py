#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and write a milq solution file.

Usage: highs_adapter.py MODEL.lp SOLUTION.txt [--gap G] [--time-limit S]
                        [--start START.txt] [--threads N] [--seed N]

The solution file starts with `status`, `objective` and `gap` lines,
followed by one `name value` line per non-zero column.
"""

import argparse
import math
import sys

import highspy


def status_of(h, model_status, has_incumbent, gap):
    ms = highspy.HighsModelStatus
    if model_status == ms.kOptimal:
        return "optimal" if gap <= 1e-9 else "gap_terminated"
    if model_status in (ms.kInfeasible, ms.kUnboundedOrInfeasible):
        return "infeasible"
    if model_status in (ms.kTimeLimit, ms.kInterrupt, ms.kIterationLimit,
                        ms.kSolutionLimit, ms.kObjectiveBound):
        return "timeout"
    if has_incumbent:
        return "timeout"
    raise RuntimeError("solver stopped with " + h.modelStatusToString(model_status))


def read_start(path, names):
    values = {}
    with open(path) as f:
        for line in f:
            parts = line.split()
            if len(parts) == 2:
                values[parts[0]] = float(parts[1])
    return [values.get(n, 0.0) for n in names]


def main(argv):
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--gap", type=float, default=0.2)
    ap.add_argument("--time-limit", type=float, default=60.0)
    ap.add_argument("--start")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("threads", args.threads)
    h.setOptionValue("random_seed", args.seed)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print("cannot read " + args.model, file=sys.stderr)
        return 1
    lp = h.getLp()
    names = list(lp.col_names_)
    if args.start:
        sol = highspy.HighsSolution()
        sol.col_value = read_start(args.start, names)
        sol.value_valid = True
        h.setSolution(sol)
    h.run()

    info = h.getInfo()
    has_incumbent = info.primal_solution_status == 2
    gap = info.mip_gap if has_incumbent and math.isfinite(info.mip_gap) else 0.0
    status = status_of(h, h.getModelStatus(), has_incumbent, gap)
    with open(args.solution, "w") as out:
        out.write("status %s\n" % status)
        if has_incumbent and status != "infeasible":
            out.write("objective %.10g\n" % info.objective_function_value)
            out.write("gap %.10g\n" % (0.0 if status == "optimal" else gap))
            for name, value in zip(names, h.getSolution().col_value):
                if abs(value) > 1e-9:
                    out.write("%s %.10g\n" % (name, value))
        else:
            out.write("objective none\n")
            out.write("gap none\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
