#!/usr/bin/env python3
"""Solve an LP-format MIQP with SCIP and write a tbt solution file.

usage: scip_solve.py MODEL.lp SOLUTION.sol [TIME_LIMIT_SECONDS]

The solution file starts with `status <word>` (optimal, feasible,
infeasible, unbounded, error) followed by one `name value` line per
variable when a primal solution is available. A run that stops at the time
limit with an incumbent reports `feasible`.

When the first quarter of the time budget passes without an incumbent, the
remaining time goes to a feasibility-emphasis search with the objective
dropped; its solution is then re-optimized over the continuous variables
with the integer assignment fixed and reported as `feasible`.

SCIP's NLP heuristics are disabled: their Ipopt/MUMPS backend aborts the
process on large models.
"""

import sys
import time

NLP_HEURISTICS = ("subnlp", "nlpdiving", "mpec", "multistart")


def write(path, status, values=None):
    with open(path, "w") as out:
        out.write(f"status {status}\n")
        for name, value in values or []:
            out.write(f"{name} {value:.17g}\n")


def polish(lp_path, values, solved):
    """Re-solves the continuous part with the integer variables fixed and a
    tight feasibility tolerance. The best point found within a short budget
    is kept; returns None when there is none."""
    from pyscipopt import Model

    kinds = {v.name: v.vtype() for v in solved.getVars()}
    by_name = dict(values)
    fixed = Model()
    fixed.hideOutput()
    fixed.readProblem(lp_path)
    for name in NLP_HEURISTICS:
        fixed.setParam(f"heuristics/{name}/freq", -1)
    for v in fixed.getVars():
        if kinds.get(v.name) in ("BINARY", "INTEGER", "IMPLINT"):
            value = by_name.get(v.name)
            if value is None:
                return None
            r = float(round(value))
            fixed.chgVarLb(v, r)
            fixed.chgVarUb(v, r)
    fixed.setParam("numerics/feastol", 1e-9)
    fixed.setParam("limits/gap", 1e-6)
    fixed.setParam("limits/time", 20)
    try:
        fixed.optimize()
    except Exception:
        return None
    if fixed.getNSols() == 0:
        return None
    best = fixed.getBestSol()
    return [(v.name, fixed.getSolVal(best, v)) for v in fixed.getVars()
            if v.name != "quadobjvar"]


def load(lp_path, time_limit):
    from pyscipopt import Model

    model = Model()
    model.hideOutput()
    model.readProblem(lp_path)
    model.setParam("randomization/randomseedshift", 0)
    for name in NLP_HEURISTICS:
        model.setParam(f"heuristics/{name}/freq", -1)
    if time_limit is not None:
        model.setParam("limits/time", max(1.0, time_limit))
    return model


def classify(model):
    status = model.getStatus()
    if status == "optimal":
        return "optimal"
    if status == "infeasible":
        return "infeasible"
    if status in ("unbounded", "inforunbd"):
        return "unbounded"
    if model.getNSols() > 0:
        return "feasible"
    return "error"


def solution_values(model):
    best = model.getBestSol()
    return [(v.name, model.getSolVal(best, v)) for v in model.getVars()
            if v.name != "quadobjvar"]


def main(argv):
    if len(argv) < 3:
        sys.stderr.write(__doc__)
        return 2
    lp_path, sol_path = argv[1], argv[2]
    time_limit = float(argv[3]) if len(argv) > 3 else None
    try:
        from pyscipopt import SCIP_PARAMEMPHASIS
    except ImportError as exc:
        sys.stderr.write(f"pyscipopt unavailable: {exc}\n")
        return 3

    start = time.monotonic()
    first = None if time_limit is None else max(10.0, 0.25 * time_limit)
    model = load(lp_path, first)
    model.optimize()
    word = classify(model)
    staged = time_limit is not None and word == "error" and model.getStatus() == "timelimit"
    if staged:
        remaining = time_limit - (time.monotonic() - start)
        model = load(lp_path, remaining)
        model.setObjective(0)
        model.setEmphasis(SCIP_PARAMEMPHASIS.FEASIBILITY)
        model.optimize()
        word = classify(model)
        if word == "optimal":
            word = "feasible"

    values = None
    if word in ("optimal", "feasible"):
        values = solution_values(model)
        polished = polish(lp_path, values, model)
        if polished is not None:
            values = polished
    write(sol_path, word, values)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
