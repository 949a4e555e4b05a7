#!/usr/bin/env python3
"""Recovery ceiling for any selector that knows the group structure.

For each trial the script enumerates every support that takes exactly one
column from each group {j} u G_j ((1 + group_size)^k supports) and keeps the
least-squares best. Even this genie rarely finds S* once rho_in is close to
1 at moderate noise, which bounds what the three solvers can reach on the
same trials.

    python scripts/group_oracle_bound.py --rho 0.95 0.99 --trials 200
"""
import argparse
import itertools

import numpy as np

from sparselab.bench import trial_seeds
from sparselab.design import DesignParams, build_design
from sparselab.instance import observe, sample_ground_truth


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.95, 0.99])
    ap.add_argument("--sigma", type=float, default=0.15)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--master-seed", type=int, default=2024)
    ap.add_argument("--magnitude-max", type=float, default=2.0)
    args = ap.parse_args()

    print("cell,rho_in,sigma,trials,group_oracle_rate,se")
    for cell, rho in enumerate(args.rho):
        d = build_design(DesignParams(m=100, p=200, k=5, group_size=3, rho_in=rho,
                                      rho_out_max=0.3, seed=1))
        groups = [(j,) + d.groups[j] for j in d.true_support]
        target = set(d.true_support)
        hits = 0
        for t in range(args.trials):
            ts, ns = trial_seeds(args.master_seed, cell, t)
            truth = sample_ground_truth(d, 1.0, args.magnitude_max, ts)
            y = observe(d, truth, args.sigma, ns).y
            best, best_S = np.inf, None
            for S in itertools.product(*groups):
                As = d.columns[:, S]
                coef = np.linalg.lstsq(As, y, rcond=None)[0]
                res = np.linalg.norm(y - As @ coef)
                if res < best:
                    best, best_S = res, S
            hits += set(best_S) == target
        rate = hits / args.trials
        print(f"{cell},{rho},{args.sigma},{args.trials},{rate},{np.sqrt(rate * (1 - rate) / args.trials)}")


if __name__ == "__main__":
    main()
