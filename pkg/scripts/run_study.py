#!/usr/bin/env python3
"""Reproduce the simulation study at desk scale.

Runs FCFS, SNF and SNF-NP on both parameter sets over a geometric grid of
server counts, writing one CSV per set (plus a bounds JSON per n).  At the
default 2e6 jobs per cell this takes tens of minutes; pass --quick for a
fast smoke-scale version.

Usage:
    python scripts/run_study.py [--out-dir results] [--quick] [--workers W]
"""

import argparse
import json
from pathlib import Path

from msjlab.bounds import evaluate_bounds
from msjlab.cli import SweepSpec, run_sweep, write_csv
from msjlab.model import ParamSet, make_param_set


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--quick", action="store_true",
                    help="200k jobs and n <= 1024 instead of the full grid")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_list = (64, 256, 1024) if args.quick else (64, 256, 1024, 4096)
    jobs = 200_000 if args.quick else 2_000_000

    for which in ("one", "two"):
        spec = SweepSpec(param_set=which, n_list=n_list,
                         policies=("fcfs", "snf", "snf-np"),
                         seeds=tuple(args.seeds), jobs=jobs,
                         workers=args.workers)
        rows = run_sweep(spec)
        csv_path = out_dir / f"set_{which}.csv"
        with open(csv_path, "w") as fh:
            write_csv(rows, fh, header_meta=f"study sweep, set {which}")
        print(f"wrote {csv_path}")
        for n in n_list:
            report = evaluate_bounds(make_param_set(ParamSet(which), n))
            bounds_path = out_dir / f"bounds_{which}_n{n}.json"
            bounds_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        print(f"wrote bounds JSONs for set {which}")


if __name__ == "__main__":
    main()
