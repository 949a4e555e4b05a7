"""Command-line entry point ``lab``.

Every subcommand reads and writes JSON files. Library errors are reported on
stderr with exit status 1; usage errors exit with status 2.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import ExperimentConfig, run_experiment
from .design import DesignMatrix, DesignParams, build_design
from .diagnostics import coherence_report, worst_case_irrepresentable
from .errors import SparseLabError
from .instance import load_instance, observe, sample_ground_truth, save_instance
from .oracle import best_subset
from .solvers import _jsonable
from .solvers.lasso import LassoConfig, fit_lasso, lasso_path
from .solvers.omp import fit_omp
from .solvers.sbl import SblHyper, fit_sbl


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj)))


def parse_signs(text: str) -> tuple[int, ...]:
    """``"+-+"`` -> ``(1, -1, 1)``."""
    table = {"+": 1, "-": -1}
    try:
        return tuple(table[ch] for ch in text.strip())
    except KeyError as exc:
        raise argparse.ArgumentTypeError(f"signs must be a string of '+' and '-', got {text!r}") from exc


def _cmd_design(args) -> None:
    params = DesignParams(
        m=args.m, p=args.p, k=args.k, group_size=args.group_size, rho_in=args.rho_in,
        rho_out_max=args.rho_out_max, support_gram_offdiag=args.gamma, seed=args.seed,
        shuffle_columns=not args.no_shuffle,
    )
    build_design(params).save(args.out)


def _cmd_instance(args) -> None:
    design = DesignMatrix.load(args.design)
    truth_seed = args.seed
    noise_seed = args.noise_seed if args.noise_seed is not None else args.seed + 1
    truth = sample_ground_truth(design, args.beta_min, args.mag_max, truth_seed)
    obs = observe(design, truth, args.sigma, noise_seed)
    save_instance(args.out, truth, obs)


def _cmd_ic(args) -> None:
    design = DesignMatrix.load(args.design)
    if args.worst_case:
        _, signs = worst_case_irrepresentable(design)
    elif args.signs is not None:
        signs = args.signs
    else:
        signs = (1,) * design.k
    _write_json(args.out, coherence_report(design, signs).to_dict())


def _cmd_solve(args) -> None:
    design = DesignMatrix.load(args.design)
    _, obs = load_instance(args.instance)
    if args.solver == "lasso":
        if args.path:
            path = lasso_path(design, obs, LassoConfig())
            _write_json(args.out, {"path": [dict(est.to_dict(), **{"lambda": lam})
                                            for lam, est in path]})
            return
        est = fit_lasso(design, obs, args.lam)
    elif args.solver == "omp":
        est = fit_omp(design, obs, args.k if args.k is not None else design.k)
    else:
        if args.sigma is None and not args.estimate_sigma:
            raise SystemExit("solve sbl: --sigma is required unless --estimate-sigma is given")
        hyper = SblHyper(
            a=args.a, b=args.b,
            noise_variance=None if args.sigma is None else args.sigma**2,
            estimate_noise=args.estimate_sigma, restarts=args.restarts, seed=args.seed,
        )
        est = fit_sbl(design, obs, hyper)
    est.save(args.out)


def _cmd_oracle(args) -> None:
    design = DesignMatrix.load(args.design)
    _, obs = load_instance(args.instance)
    best_subset(design, obs, args.k, full_table=args.full_table).save(args.out)


def _cmd_bench(args) -> None:
    config = ExperimentConfig.load(args.config)
    if args.workers is not None:
        config = ExperimentConfig.from_dict(dict(config.to_dict(), workers=args.workers))
    result = run_experiment(config, out_dir=args.out_dir)
    for c in result.cells:
        rates = " ".join(f"{name}={c.rates[name]:.3f}" for name in ("lasso", "omp", "sbl"))
        print(f"cell {c.cell_id} rho_in={c.rho_in} sigma={c.sigma}: {rates}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="build a near-duplicate design")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--group-size", type=int, default=1)
    p.add_argument("--rho-in", type=float, default=0.95)
    p.add_argument("--rho-out-max", type=float, default=0.3)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-shuffle", action="store_true", help="keep structured columns first")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("instance", help="draw w* and a noisy observation")
    p.add_argument("--design", required=True)
    p.add_argument("--beta-min", type=float, default=1.0)
    p.add_argument("--mag-max", type=float, default=None)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-seed", type=int, default=None, help="defaults to seed + 1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_instance)

    p = sub.add_parser("ic", help="irrepresentable value and coherence summary")
    p.add_argument("--design", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--signs", type=parse_signs, default=None)
    g.add_argument("--worst-case", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ic)

    p = sub.add_parser("solve", help="run one solver")
    solvers = p.add_subparsers(dest="solver", required=True)
    for name in ("lasso", "omp", "sbl"):
        s = solvers.add_parser(name)
        s.add_argument("--design", required=True)
        s.add_argument("--instance", required=True)
        s.add_argument("--out", required=True)
        s.set_defaults(func=_cmd_solve)
        if name == "lasso":
            g = s.add_mutually_exclusive_group(required=True)
            g.add_argument("--lambda", dest="lam", type=float)
            g.add_argument("--path", action="store_true")
        elif name == "omp":
            s.add_argument("--k", type=int, default=None, help="defaults to the design's k")
        else:
            s.add_argument("--a", type=float, default=1.0)
            s.add_argument("--b", type=float, default=1e-4)
            s.add_argument("--sigma", type=float, default=None, help="noise standard deviation")
            s.add_argument("--estimate-sigma", action="store_true")
            s.add_argument("--restarts", type=int, default=0)
            s.add_argument("--seed", type=int, default=0, help="seed for restart draws")

    p = sub.add_parser("oracle", help="exhaustive best-subset search")
    p.add_argument("--design", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--full-table", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("bench", help="Monte Carlo comparison of the three solvers")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "mag_max", 0) is None:
        args.mag_max = args.beta_min
    try:
        args.func(args)
    except (SparseLabError, ValueError, FileNotFoundError) as exc:
        print(f"lab {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
