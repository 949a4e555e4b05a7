#!/usr/bin/env python3
"""Irrepresentable value as rho_in approaches 1.

Prints, for each rho_in, the value on a k=1 single-duplicate design (where
it equals rho_in) and the worst case over sign patterns on a larger grouped
design with the same rho_in.
"""
import argparse

from sparselab.design import DesignParams, build_design
from sparselab.diagnostics import coherence_report, worst_case_irrepresentable


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.9, 0.95, 0.99, 0.999, 0.9999])
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--p", type=int, default=200)
    ap.add_argument("--k", type=int, default=5)
    ap.add_argument("--group-size", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print("rho_in,single_ic,one_minus_single,grouped_worst_ic,grouped_kappa,grouped_mu_out")
    for rho in args.rho:
        single = build_design(DesignParams(m=30, p=12, k=1, group_size=1, rho_in=rho,
                                           rho_out_max=0.3, seed=args.seed))
        ic1 = coherence_report(single, (1,)).ic_value
        grouped = build_design(DesignParams(m=args.m, p=args.p, k=args.k,
                                            group_size=args.group_size, rho_in=rho,
                                            rho_out_max=0.3, seed=args.seed))
        worst, signs = worst_case_irrepresentable(grouped)
        rep = coherence_report(grouped, signs)
        print(f"{rho},{ic1!r},{1 - ic1!r},{worst!r},{rep.kappa!r},{rep.mu_out_max!r}")


if __name__ == "__main__":
    main()
