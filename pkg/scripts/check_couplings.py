#!/usr/bin/env python3
"""Exercise the pathwise couplings over many seeds.

For each seed: the waiting-time sandwich (Modified-FCFS with extra servers
below, FCFS in the middle, Modified-FCFS above) and infinite-server
dominance, both on one shared job stream.  Exact comparisons, no tolerance;
any violation would indicate an engine bug.

Usage:
    python scripts/check_couplings.py [--n 64] [--jobs 100000] [--seeds 10]
"""

import argparse
import sys

from msjlab.model import ParamSet, derive_params, make_param_set
from msjlab.policies import PolicyKind
from msjlab.sim import (build_job_stream, check_infinite_server_dominance,
                        check_sandwich, simulate_coupled)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--jobs", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--param-set", choices=("one", "two"), default="one")
    args = ap.parse_args()

    config = make_param_set(ParamSet(args.param_set), args.n)
    l_max = derive_params(config).l_max
    failures = 0
    for seed in range(args.seeds):
        stream = build_job_stream(seed, args.jobs, config)
        triple = simulate_coupled(
            [(PolicyKind.MODIFIED_FCFS, config.n + l_max),
             (PolicyKind.FCFS, None),
             (PolicyKind.MODIFIED_FCFS, None)], config, stream)
        sandwich = check_sandwich(triple)
        pair = simulate_coupled(
            [(PolicyKind.INFINITE_SERVER, None), (PolicyKind.FCFS, None)],
            config, stream)
        dominance = check_infinite_server_dominance(pair)
        print(f"seed {seed}: sandwich={'ok' if sandwich else 'VIOLATED'} "
              f"dominance={'ok' if dominance else 'VIOLATED'}")
        failures += (not sandwich) + (not dominance)
    if failures:
        print(f"{failures} violations")
        sys.exit(1)
    print("all couplings exact")


if __name__ == "__main__":
    main()
