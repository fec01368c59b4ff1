#!/usr/bin/env python3
"""Solve exported placement LPs with scipy and cross-check them.

For each config: the LP optimum must not exceed the chunk-grid oracle, and the
LP-optimal placement, scored by `mcache evaluate`, must reproduce the LP
objective (the rows are tight at the optimum).

usage: lp_external_solve.py <mcache> <configs dir> <scratch dir>
"""

import re
import subprocess
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

TERM = re.compile(r"([+-])?\s*(?:((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s+)?([A-Za-z_][A-Za-z0-9_]*)")


def parse_expr(text):
    terms = []
    for sign, coef, name in TERM.findall(text):
        c = float(coef) if coef else 1.0
        terms.append((name, -c if sign == "-" else c))
    return terms


def parse_lp(text):
    section = None
    objective, rows, names = [], [], {}
    pending = ""

    def var(name):
        return names.setdefault(name, len(names))

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        if line in ("Minimize", "Subject To", "Bounds", "End"):
            section = line
            continue
        if section == "Minimize":
            body = line.split(":", 1)[1] if ":" in line else line
            objective += parse_expr(body)
        elif section == "Subject To":
            pending += " " + line
            if "<=" in pending or ">=" in pending:
                body = pending.split(":", 1)[1]
                sense = "<=" if "<=" in body else ">="
                lhs, rhs = body.split(sense)
                rows.append((parse_expr(lhs), sense, float(rhs)))
                pending = ""
        elif section == "Bounds":
            name, _, lower = line.partition(">=")
            if float(lower) != 0.0:
                raise ValueError("only zero lower bounds are expected")
            var(name.strip())
    for name, _ in objective:
        var(name)
    for terms, _, _ in rows:
        for name, _ in terms:
            var(name)
    return objective, rows, names


def solve(text):
    objective, rows, names = parse_lp(text)
    n = len(names)
    c = np.zeros(n)
    for name, coef in objective:
        c[names[name]] += coef
    a, b = [], []
    for terms, sense, rhs in rows:
        row = np.zeros(n)
        for name, coef in terms:
            row[names[name]] += coef
        if sense == ">=":
            row, rhs = -row, -rhs
        a.append(row)
        b.append(rhs)
    res = linprog(c, A_ub=np.array(a), b_ub=np.array(b), bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        raise RuntimeError(res.message)
    return res.fun, {name: res.x[i] for name, i in names.items()}


def run(cli, *args):
    out = subprocess.run([cli, *args], check=True, capture_output=True, text=True)
    return out.stdout, out.stderr


def main():
    cli, configs, scratch = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    scratch.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name in ("single_cell.ini", "tiny_oracle.ini", "tiny_lp.ini"):
        cfg = str(configs / name)
        lp_text, _ = run(cli, "export-lp", "--config", cfg)
        value, x = solve(lp_text)

        _, oracle_log = run(cli, "oracle", "--config", cfg)
        oracle = float(re.search(r"d_av_norm=([0-9.eE+-]+)", oracle_log).group(1))

        cells = 1 + max(int(k.split("_")[1]) - 1 for k in x if k.startswith("x_"))
        files = 1 + max(int(k.split("_")[2]) - 1 for k in x if k.startswith("x_"))
        policy = scratch / (Path(name).stem + "_lp.csv")
        with open(policy, "w") as f:
            f.write("cell," + ",".join(str(k + 1) for k in range(files)) + "\n")
            for n in range(cells):
                # shave the solver's feasibility slack off the capacity rows
                vals = [max(float(x[f"x_{n + 1}_{k + 1}"]), 0.0) * (1 - 1e-7) + 0.0 for k in range(files)]
                f.write(f"{n + 1}," + ",".join(repr(v) for v in vals) + "\n")
        scored, _ = run(cli, "evaluate", "--config", cfg, "--policy-file", str(policy))
        evaluated = float(scored.strip().splitlines()[1].split(",")[2])

        ok = value <= oracle + 1e-9 and abs(evaluated - value) <= 1e-6
        failures += 0 if ok else 1
        print(f"{'ok  ' if ok else 'FAIL'} {name}: lp {value:.12g}  oracle {oracle:.12g}  evaluated {evaluated:.12g}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
