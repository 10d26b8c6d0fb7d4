#!/usr/bin/env python3
"""Minimal stand-in for the `highs` command-line solver, built on SciPy.

Reads a free-format MPS file, solves it with scipy.optimize (which wraps
HiGHS), and writes the result in HiGHS' raw solution-file format. Only the
MPS subset written by reserve-market is understood. Intended for exercising
the subprocess backend where the real executable is not installed:

    RESERVE_MARKET_SOLVER=crates/core/tools/scipy_solver.py \
        reserve-market simulate --backend subprocess ...
"""

import argparse
import math
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog, milp


def parse_mps(path):
    rows = {}  # name -> type (N/E/L/G)
    row_order = []
    obj_name = None
    cols = []  # names in order
    col_index = {}
    integer = []
    entries = []  # (row, col, value)
    cost = {}
    rhs = {}
    ranges = {}
    lower = {}
    upper = {}
    section = None
    in_int = False
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line.startswith(" "):
                section = line.split()[0]
                continue
            f = line.split()
            if section == "ROWS":
                kind, name = f
                if kind == "N" and obj_name is None:
                    obj_name = name
                elif kind != "N":
                    rows[name] = kind
                    row_order.append(name)
            elif section == "COLUMNS":
                if len(f) >= 3 and f[1] == "'MARKER'":
                    in_int = f[2] == "'INTORG'"
                    continue
                name = f[0]
                if name not in col_index:
                    col_index[name] = len(cols)
                    cols.append(name)
                    integer.append(in_int)
                for r, v in zip(f[1::2], f[2::2]):
                    if r == obj_name:
                        cost[name] = float(v)
                    elif r in rows:
                        entries.append((r, name, float(v)))
            elif section == "RHS":
                for r, v in zip(f[1::2], f[2::2]):
                    rhs[r] = float(v)
            elif section == "RANGES":
                for r, v in zip(f[1::2], f[2::2]):
                    ranges[r] = float(v)
            elif section == "BOUNDS":
                kind, name = f[0], f[2]
                value = float(f[3]) if len(f) > 3 else None
                if kind == "BV":
                    lower[name], upper[name] = 0.0, 1.0
                elif kind == "FX":
                    lower[name] = upper[name] = value
                elif kind == "FR":
                    lower[name], upper[name] = -math.inf, math.inf
                elif kind == "MI":
                    lower[name] = -math.inf
                elif kind == "PL":
                    upper[name] = math.inf
                elif kind == "LO":
                    lower[name] = value
                elif kind == "UP":
                    upper[name] = value
                else:
                    raise ValueError(f"unsupported bound type {kind}")

    n = len(cols)
    row_pos = {r: i for i, r in enumerate(row_order)}
    data, ri, ci = [], [], []
    for r, c, v in entries:
        ri.append(row_pos[r])
        ci.append(col_index[c])
        data.append(v)
    a = sparse.csr_matrix((data, (ri, ci)), shape=(len(row_order), n))

    row_lo = np.empty(len(row_order))
    row_hi = np.empty(len(row_order))
    for i, r in enumerate(row_order):
        b = rhs.get(r, 0.0)
        kind = rows[r]
        rng = ranges.get(r)
        if kind == "E":
            if rng is None:
                lo = hi = b
            elif rng >= 0:
                lo, hi = b, b + rng
            else:
                lo, hi = b + rng, b
        elif kind == "L":
            lo, hi = (-math.inf if rng is None else b - abs(rng)), b
        else:  # G
            lo, hi = b, (math.inf if rng is None else b + abs(rng))
        row_lo[i], row_hi[i] = lo, hi

    c = np.array([cost.get(name, 0.0) for name in cols])
    col_lo = np.array([lower.get(name, 0.0) for name in cols])
    col_hi = np.array([upper.get(name, math.inf) for name in cols])
    return {
        "cols": cols,
        "rows": row_order,
        "a": a,
        "c": c,
        "row_lo": row_lo,
        "row_hi": row_hi,
        "col_lo": col_lo,
        "col_hi": col_hi,
        "integer": np.array(integer, dtype=bool),
    }


def read_options(path):
    opts = {}
    if path:
        with open(path) as fh:
            for line in fh:
                if "=" in line:
                    k, v = line.split("=", 1)
                    opts[k.strip()] = v.strip()
    return opts


def solve_lp(m, time_limit, presolve):
    """LP with row duals: ranged rows split into ≤ halves for linprog."""
    a = m["a"]
    eq = np.isclose(m["row_lo"], m["row_hi"]) & np.isfinite(m["row_lo"])
    up = ~eq & np.isfinite(m["row_hi"])
    lo = ~eq & np.isfinite(m["row_lo"])
    a_ub = sparse.vstack([a[up], -a[lo]]).tocsr()
    b_ub = np.concatenate([m["row_hi"][up], -m["row_lo"][lo]])
    bounds = list(zip(m["col_lo"], [None if math.isinf(v) else v for v in m["col_hi"]]))
    bounds = [(None if math.isinf(l) else l, u) for l, u in bounds]
    res = linprog(
        m["c"],
        A_ub=a_ub if a_ub.shape[0] else None,
        b_ub=b_ub if a_ub.shape[0] else None,
        A_eq=a[eq] if eq.any() else None,
        b_eq=m["row_hi"][eq] if eq.any() else None,
        bounds=bounds,
        method="highs",
        options={"time_limit": time_limit, "presolve": presolve},
    )
    duals = None
    if res.status == 0:
        # scipy marginals are d(objective)/d(b) for each written row.
        duals = np.zeros(a.shape[0])
        ub_m = res.ineqlin.marginals if a_ub.shape[0] else np.zeros(0)
        k = int(up.sum())
        duals[np.flatnonzero(up)] += ub_m[:k]
        duals[np.flatnonzero(lo)] -= ub_m[k:]
        if eq.any():
            duals[np.flatnonzero(eq)] = res.eqlin.marginals
    return res.status, res.x, duals, None


def solve_mip(m, time_limit, gap, presolve):
    cons = LinearConstraint(m["a"], m["row_lo"], m["row_hi"])
    res = milp(
        m["c"],
        constraints=[cons],
        integrality=m["integer"].astype(int),
        bounds=Bounds(m["col_lo"], m["col_hi"]),
        options={"time_limit": time_limit, "mip_rel_gap": gap, "presolve": presolve, "disp": False},
    )
    mip_gap = getattr(res, "mip_gap", None)
    return res.status, res.x, None, mip_gap


def fmt(v):
    return repr(float(v))


def write_solution(path, m, status_text, x, duals, mip_gap):
    out = ["Model status", status_text, ""]
    if x is None:
        out += ["# Primal solution values", "None", "", "# Dual solution values", "None"]
    else:
        activity = m["a"] @ x
        out += ["# Primal solution values", "Feasible", f"Objective {fmt(m['c'] @ x)}"]
        if mip_gap is not None:
            out.append(f"MipGap {fmt(mip_gap)}")
        out.append(f"# Columns {len(m['cols'])}")
        out += [f"{n} {fmt(v)}" for n, v in zip(m["cols"], x)]
        out.append(f"# Rows {len(m['rows'])}")
        out += [f"{n} {fmt(v)}" for n, v in zip(m["rows"], activity)]
        out += ["", "# Dual solution values"]
        if duals is None:
            out.append("None")
        else:
            reduced = m["c"] - m["a"].T @ duals
            out.append("Feasible")
            out.append(f"# Columns {len(m['cols'])}")
            out += [f"{n} {fmt(v)}" for n, v in zip(m["cols"], reduced)]
            out.append(f"# Rows {len(m['rows'])}")
            out += [f"{n} {fmt(v)}" for n, v in zip(m["rows"], duals)]
    out += ["", "# Basis", "None", ""]
    with open(path, "w") as fh:
        fh.write("\n".join(out))


STATUS = {0: "Optimal", 2: "Infeasible", 3: "Unbounded"}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model_file", required=True)
    p.add_argument("--solution_file", required=True)
    p.add_argument("--options_file")
    p.add_argument("--time_limit", type=float)
    args = p.parse_args(argv)

    opts = read_options(args.options_file)
    time_limit = args.time_limit or float(opts.get("time_limit", "inf"))
    gap = float(opts.get("mip_rel_gap", "1e-4"))
    presolve = opts.get("presolve", "on") != "off"

    m = parse_mps(args.model_file)
    if m["integer"].any():
        status, x, duals, mip_gap = solve_mip(m, time_limit, gap, presolve)
    else:
        status, x, duals, mip_gap = solve_lp(m, time_limit, presolve)
    if status == 1:
        text = "Time limit reached"
    else:
        text = STATUS.get(status, "Unknown")
    if status not in (0, 1):
        x = None
    write_solution(args.solution_file, m, text, x, duals, mip_gap)
    return 0


if __name__ == "__main__":
    sys.exit(main())
