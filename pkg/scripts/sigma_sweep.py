#!/usr/bin/env python3
"""Recovery rate as the noise level falls, at a fixed design.

Defaults follow the small oracle-equivalence setting (m=30, p=18, k=3, one
near-duplicate per true column). Uses the bench harness, so the output
directory gets the usual cells.csv / summary.json / trials.jsonl.
"""
import argparse

from sparselab.bench import SOLVERS, ExperimentConfig, run_experiment
from sparselab.design import DesignParams
from sparselab.solvers.sbl import SblHyper


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--m", type=int, default=30)
    ap.add_argument("--p", type=int, default=18)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--group-size", type=int, default=1)
    ap.add_argument("--rho-in", type=float, default=0.95)
    ap.add_argument("--rho-out-max", type=float, default=0.2)
    ap.add_argument("--sigma", type=float, nargs="+", default=[0.5, 0.2, 0.1, 0.05, 0.01])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--b", type=float, default=1e-8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = DesignParams(m=args.m, p=args.p, k=args.k, group_size=args.group_size,
                          rho_in=args.rho_in, rho_out_max=args.rho_out_max, seed=args.seed)
    cfg = ExperimentConfig(design_params_grid=[params], sigma_grid=args.sigma,
                           trials_per_cell=args.trials, magnitude_max=1.0,
                           sbl=SblHyper(b=args.b), master_seed=args.seed)
    result = run_experiment(cfg, out_dir=args.out_dir)
    print(f"{'sigma':>6} " + " ".join(f"{s:>13}" for s in SOLVERS))
    for c in result.cells:
        print(f"{c.sigma:>6} " + " ".join(f"{c.rates[s]:.3f} ({c.se[s]:.3f})" for s in SOLVERS))


if __name__ == "__main__":
    main()
