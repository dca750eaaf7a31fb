#!/usr/bin/env python3
"""Solve an LP file written by `inttsp` with scipy's HiGHS MILP solver.

Usage: scipy_milp.py MODEL.lp SOLUTION.sol [TIME_LIMIT]

Only the LP subset produced by `inttsp` is understood: one objective row,
labelled constraint rows over binaries, and a Binary section. The solution
file lists `=status=`, `=obj=` and the variables set to one.
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def parse_expr(tokens):
    terms, sign, coef = [], 1, None
    for tok in tokens:
        if tok == "+":
            sign = 1
        elif tok == "-":
            sign = -1
        else:
            try:
                coef = int(tok)
                continue
            except ValueError:
                pass
            terms.append((tok, sign * (1 if coef is None else coef)))
            sign, coef = 1, None
    return terms


def split_rows(tokens):
    rows = []
    for tok in tokens:
        if tok.endswith(":"):
            rows.append((tok[:-1], []))
        else:
            rows[-1][1].append(tok)
    return rows


def read_lp(path):
    sections = {"obj": [], "rows": [], "bin": []}
    current = None
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("\\"):
                continue
            low = line.lower()
            if low in ("minimize", "minimum", "min"):
                current = "obj"
            elif low in ("subject to", "st", "s.t."):
                current = "rows"
            elif low in ("binary", "binaries", "bin"):
                current = "bin"
            elif low == "end":
                current = None
            elif current is not None:
                sections[current].extend(line.split())
    names = sections["bin"]
    col = {name: j for j, name in enumerate(names)}
    c = np.zeros(len(names))
    for name, coef in parse_expr(split_rows(sections["obj"])[0][1]):
        c[col[name]] += coef
    data, ri, ci, lo, hi = [], [], [], [], []
    for i, (_, toks) in enumerate(split_rows(sections["rows"])):
        k = next(j for j, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>"))
        rhs = float("".join(toks[k + 1:]))
        for name, coef in parse_expr(toks[:k]):
            data.append(coef)
            ri.append(i)
            ci.append(col[name])
        rel = toks[k]
        lo.append(-np.inf if rel in ("<=", "=<") else rhs)
        hi.append(np.inf if rel in (">=", "=>") else rhs)
    a = coo_matrix((data, (ri, ci)), shape=(len(lo), len(names))).tocsr()
    return names, c, LinearConstraint(a, lo, hi)


def main(argv):
    lp, sol = argv[1], argv[2]
    time_limit = float(argv[3]) if len(argv) > 3 and float(argv[3]) > 0 else None
    names, c, cons = read_lp(lp)
    options = {"disp": False}
    if time_limit is not None:
        options["time_limit"] = time_limit
    res = milp(c, constraints=[cons], integrality=np.ones(len(c)),
               bounds=Bounds(0, 1), options=options)
    with open(sol, "w") as out:
        if res.status == 0:
            out.write("=status= optimal\n")
        elif res.status == 2:
            out.write("=status= infeasible\n")
            return 0
        elif res.status == 1:
            out.write("=status= limit\n")
        else:
            sys.stderr.write("milp failed: %s\n" % res.message)
            return 1
        if res.x is None:
            return 0
        out.write("=obj= %.0f\n" % round(res.fun))
        for name, x in zip(names, res.x):
            if round(x) == 1:
                out.write("%s 1\n" % name)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
