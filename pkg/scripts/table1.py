"""Benchmark table: synthesize every domain and print one row per configuration.

Each row runs either the subtask pipeline (auxiliary procedures first, then
main) or a single synthesis of main, through the same job builder as the CLI.

    python3 scripts/table1.py                 # all rows, 600 s per search
    python3 scripts/table1.py --only summatory reverse
    python3 scripts/table1.py --skip-baselines --json table.json
"""
from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict

from genplan.cli import build_job, build_parser, cmd_pipeline, cmd_synth

# (label, command, domain, extra CLI flags, baseline)
# baselines are the single-procedure runs that are expected to hit the budget
ROWS = [
    ("Fibonacci", "pipeline", "fibonacci", [], False),
    ("Fibonacci", "synth", "fibonacci", [], True),
    ("Grid", "pipeline", "grid_nav", [], False),
    ("Grid", "synth", "grid_nav", [], True),
    ("Hall-A", "pipeline", "hall_a", ["--params", "procs=4"], False),
    ("Hall-A", "pipeline", "hall_a", [], False),
    ("Hall-A", "synth", "hall_a", ["--lines", "14"], True),
    ("List", "pipeline", "list_visit", [], False),
    ("List", "synth", "list_visit", [], False),
    ("Reverse", "synth", "reverse", [], False),
    ("Sorting", "pipeline", "sorting", [], False),
    ("Sorting", "synth", "sorting", [], True),
    ("Summatory", "synth", "summatory", [], False),
    ("Tree/DFS", "synth", "tree_dfs", [], False),
    ("Visitall", "pipeline", "visit_all", [], False),
    ("Visitall", "synth", "visit_all", [], True),
]


def run_row(command, domain, flags, max_seconds, algorithm):
    argv = [command, "--domain", domain, "--max-seconds", str(max_seconds), "--algorithm", algorithm] + flags
    args = build_parser().parse_args(argv)
    job = build_job(args)
    start = time.perf_counter()
    rep, _ = cmd_pipeline(job) if command == "pipeline" else cmd_synth(job)
    return rep, time.perf_counter() - start


def fmt(values, spec="{}"):
    return ",".join(spec.format(v) for v in values)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", nargs="*", help="domain names to run (recipe names)")
    ap.add_argument("--skip-baselines", action="store_true", help="skip single-procedure runs expected to fail")
    ap.add_argument("--max-seconds", type=float, default=600)
    ap.add_argument("--algorithm", choices=["gbfs", "bfs"], default="gbfs")
    ap.add_argument("--json", help="also write the reports here")
    args = ap.parse_args(argv)

    header = f"{'Domain':<10} {'Procs':>5} {'Sol':>4} {'Lines':>10} {'Inst':>10} {'Time(s)':>16} {'Total':>8} {'Plan':>12} {'Held-out':>8}"
    print(header)
    print("-" * len(header))
    reports = []
    for label, command, domain, flags, baseline in ROWS:
        if args.only and domain not in args.only:
            continue
        if baseline and args.skip_baselines:
            continue
        rep, wall = run_row(command, domain, flags, args.max_seconds, args.algorithm)
        rows = rep.rows
        kind = rows[0].kind if rows else "-"
        solved = rep.solved
        print(f"{label:<10} {len(rows):>5} {kind:>4} {fmt(r.lines for r in rows):>10} "
              f"{fmt(r.instances for r in rows):>10} "
              f"{fmt((r.seconds for r in rows), '{:.1f}') if solved else '-':>16} "
              f"{f'{sum(r.seconds for r in rows):.1f}' if solved else '-':>8} "
              f"{fmt(r.plan_length for r in rows) if solved else '-':>12} "
              f"{'-' if rep.heldout_ok is None else rep.heldout_ok!s:>8}", flush=True)
        reports.append(dict(label=label, command=command, flags=flags, wall=wall, report=asdict(rep)))
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2)


if __name__ == "__main__":
    main()
