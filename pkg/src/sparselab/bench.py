"""Monte Carlo harness comparing LASSO (best over the path), OMP and SBL.

A cell is one (DesignParams, sigma) pair. Each cell builds its design once;
trials redraw ``w*`` and the noise from seeds derived from
``(master_seed, cell, trial)`` so results do not depend on scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .design import DesignMatrix, DesignParams, build_design
from .diagnostics import irrepresentable_value
from .errors import EmptyCell, SparseLabError
from .instance import observe, sample_ground_truth
from .solvers import hamming
from .solvers.lasso import LassoConfig, lasso_path
from .solvers.omp import fit_omp, misselection_probability, residual_orthogonality
from .solvers.sbl import SblHyper, descent_violation, fit_sbl

SOLVERS = ("lasso", "omp", "sbl")
CSV_HEADER = ["cell_id", "solver", "rho_in", "sigma", "m", "p", "k", "recovery_rate", "se",
              "mean_hamming", "omp_misselect_rate", "ic_value"]

# certificate tolerances
KKT_FACTOR = 10.0
ORTHO_TOL = 1e-8
DESCENT_SLACK = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    design_params_grid: tuple[DesignParams, ...]
    sigma_grid: tuple[float, ...]
    trials_per_cell: int = 200
    beta_min: float = 1.0
    magnitude_max: float = 2.0
    lasso: LassoConfig = field(default_factory=LassoConfig)
    sbl: SblHyper = field(default_factory=lambda: SblHyper(b=1e-8))
    omp_k: int | None = None
    master_seed: int = 0
    freeze_truth: bool = False
    sbl_sigma_floor: float = 1e-3
    record_runtime: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not self.design_params_grid or not self.sigma_grid:
            raise ValueError("design_params_grid and sigma_grid must be nonempty")
        object.__setattr__(self, "design_params_grid", tuple(self.design_params_grid))
        object.__setattr__(self, "sigma_grid", tuple(float(s) for s in self.sigma_grid))

    def cells(self) -> list[tuple[int, DesignParams, float]]:
        out = []
        for params in self.design_params_grid:
            for sigma in self.sigma_grid:
                out.append((len(out), params, sigma))
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["design_params_grid"] = [asdict(p) for p in self.design_params_grid]
        d["sigma_grid"] = list(self.sigma_grid)
        if self.lasso.lambda_grid is not None:
            d["lasso"]["lambda_grid"] = list(self.lasso.lambda_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["design_params_grid"] = tuple(DesignParams.from_dict(p) for p in d["design_params_grid"])
        if "lasso" in d:
            lasso = dict(d["lasso"])
            if lasso.get("lambda_grid") is not None:
                lasso["lambda_grid"] = tuple(lasso["lambda_grid"])
            d["lasso"] = LassoConfig(**lasso)
        if "sbl" in d:
            d["sbl"] = SblHyper(**d["sbl"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class SolverOutcome:
    exact_recovery: bool
    hamming_distance: int
    runtime: float
    certified: bool
    error: str | None = None


@dataclass
class TrialReport:
    cell_id: int
    trial: int
    truth_seed: int
    noise_seed: int
    rho_in: float
    sigma: float
    m: int
    p: int
    k: int
    outcomes: dict[str, SolverOutcome]
    omp_first_step_misselection: bool
    ic_value: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outcomes"] = {name: asdict(o) for name, o in self.outcomes.items()}
        return d


def trial_seeds(master_seed: int, cell: int, trial: int) -> tuple[int, int]:
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell, trial))
    a, b = ss.generate_state(2)
    return int(a), int(b)


def _timed(fn, record):
    t0 = time.perf_counter()
    out = fn()
    return out, (time.perf_counter() - t0) if record else 0.0


def run_trial(config: ExperimentConfig, design: DesignMatrix, cell: int, sigma: float,
              trial: int) -> TrialReport:
    """One (truth, noise) draw on ``design`` scored for every solver."""
    S = design.true_support
    truth_seed, noise_seed = trial_seeds(config.master_seed, cell, trial)
    if config.freeze_truth:
        truth_seed = trial_seeds(config.master_seed, cell, 0)[0]
    truth = sample_ground_truth(design, config.beta_min, config.magnitude_max, truth_seed)
    obs = observe(design, truth, sigma, noise_seed)
    record = config.record_runtime
    outcomes: dict[str, SolverOutcome] = {}

    try:
        ic = irrepresentable_value(design, truth.sign_pattern)
    except SparseLabError:
        ic = float("nan")

    try:
        path, dt = _timed(lambda: lasso_path(design, obs, config.lasso), record)
        hits = [est.recovers(S) for _, est in path]
        ham = min(hamming(est.support, S) for _, est in path)
        kkt_ok = all(est.trace["kkt_residual"] <= KKT_FACTOR * config.lasso.tol for _, est in path)
        outcomes["lasso"] = SolverOutcome(any(hits), ham, dt, kkt_ok)
    except SparseLabError as exc:
        outcomes["lasso"] = SolverOutcome(False, len(S), 0.0, False, repr(exc))

    misselect = False
    try:
        k = config.omp_k or design.k
        est, dt = _timed(lambda: fit_omp(design, obs, k), record)
        misselect = est.trace["first_step_misselection"]
        ortho_ok = residual_orthogonality(design, obs, est) <= ORTHO_TOL
        outcomes["omp"] = SolverOutcome(est.recovers(S), hamming(est.support, S), dt, ortho_ok)
    except SparseLabError as exc:
        outcomes["omp"] = SolverOutcome(False, len(S), 0.0, False, repr(exc))

    try:
        hyper = replace(config.sbl, noise_variance=max(sigma, config.sbl_sigma_floor) ** 2)
        est, dt = _timed(lambda: fit_sbl(design, obs, hyper), record)
        desc_ok = descent_violation(est.trace) <= DESCENT_SLACK
        outcomes["sbl"] = SolverOutcome(est.recovers(S), hamming(est.support, S), dt, desc_ok)
    except (SparseLabError, np.linalg.LinAlgError) as exc:
        outcomes["sbl"] = SolverOutcome(False, len(S), 0.0, False, repr(exc))

    return TrialReport(
        cell_id=cell, trial=trial, truth_seed=truth_seed, noise_seed=noise_seed,
        rho_in=design.params.rho_in if design.params else float("nan"),
        sigma=float(sigma), m=design.m, p=design.p, k=design.k,
        outcomes=outcomes, omp_first_step_misselection=bool(misselect), ic_value=float(ic),
    )


def _run_cell(args) -> list[TrialReport]:
    config, cell, params, sigma = args
    design = build_design(params)
    return [run_trial(config, design, cell, sigma, t) for t in range(config.trials_per_cell)]


@dataclass
class CellSummary:
    cell_id: int
    rho_in: float
    sigma: float
    m: int
    p: int
    k: int
    n_trials: int
    rates: dict[str, float]
    se: dict[str, float]
    mean_hamming: dict[str, float]
    certified: dict[str, bool]
    omp_misselect_rate: float
    ic_value: float

    def interval(self, solver: str, width: float = 2.0) -> tuple[float, float]:
        r, s = self.rates[solver], self.se[solver]
        return r - width * s, r + width * s


def summarize(reports: list[TrialReport]) -> list[CellSummary]:
    """Aggregate trial reports into one row per cell, ordered by cell id.

    ``ic_value`` is the largest value seen across the cell's sign draws.

    Raises
    ------
    EmptyCell
        If ``reports`` is empty.
    """
    if not reports:
        raise EmptyCell("no trial reports to summarize")
    by_cell: dict[int, list[TrialReport]] = {}
    for r in reports:
        by_cell.setdefault(r.cell_id, []).append(r)
    out = []
    for cell_id in sorted(by_cell):
        rows = sorted(by_cell[cell_id], key=lambda r: r.trial)
        n = len(rows)
        rates, se, ham, cert = {}, {}, {}, {}
        for name in SOLVERS:
            hits = [r.outcomes[name].exact_recovery for r in rows]
            rate = sum(hits) / n
            rates[name] = rate
            se[name] = math.sqrt(rate * (1 - rate) / n)
            ham[name] = sum(r.outcomes[name].hamming_distance for r in rows) / n
            cert[name] = all(r.outcomes[name].certified for r in rows)
        head = rows[0]
        out.append(CellSummary(
            cell_id=cell_id, rho_in=head.rho_in, sigma=head.sigma, m=head.m, p=head.p,
            k=head.k, n_trials=n, rates=rates, se=se, mean_hamming=ham, certified=cert,
            omp_misselect_rate=sum(r.omp_first_step_misselection for r in rows) / n,
            ic_value=max(r.ic_value for r in rows),
        ))
    return out


def recovery_rate(values) -> float:
    """Mean of a 0/1 sequence; raises :class:`EmptyCell` when empty."""
    values = list(values)
    if not values:
        raise EmptyCell("no values")
    return sum(bool(v) for v in values) / len(values)


def cells_csv(summaries: list[CellSummary]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for c in summaries:
        for name in SOLVERS:
            writer.writerow([
                c.cell_id, name, repr(c.rho_in), repr(c.sigma), c.m, c.p, c.k,
                repr(c.rates[name]), repr(c.se[name]), repr(c.mean_hamming[name]),
                repr(c.omp_misselect_rate), repr(c.ic_value),
            ])
    return buf.getvalue()


def summary_json(config: ExperimentConfig, summaries: list[CellSummary]) -> str:
    cells = []
    for c in summaries:
        d = asdict(c)
        params = config.design_params_grid[c.cell_id // len(config.sigma_grid)]
        if params.k == 1 and params.group_size == 1 and config.beta_min == config.magnitude_max:
            d["omp_misselect_closed_form"] = misselection_probability(
                config.beta_min, params.rho_in, c.sigma)
        cells.append(d)
    return json.dumps({"config": config.to_dict(), "cells": cells}, indent=2, sort_keys=True)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[TrialReport]
    cells: list[CellSummary]

    def cell(self, rho_in: float, sigma: float) -> CellSummary:
        for c in self.cells:
            if c.rho_in == rho_in and c.sigma == sigma:
                return c
        raise KeyError((rho_in, sigma))

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "cells.csv").write_text(cells_csv(self.cells))
        (out / "summary.json").write_text(summary_json(self.config, self.cells))
        with open(out / "trials.jsonl", "w") as fh:
            for r in self.trials:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")


def run_experiment(config: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run every cell and aggregate; optionally write the three report files.

    With ``workers > 1`` cells run in separate processes. Each cell depends
    only on its own seeds, so the output is identical to the serial run.
    """
    jobs = [(config, cell, params, sigma) for cell, params, sigma in config.cells()]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_cell = list(pool.map(_run_cell, jobs))
    else:
        per_cell = [_run_cell(job) for job in jobs]
    trials = [r for rows in per_cell for r in rows]
    result = ExperimentResult(config, trials, summarize(trials))
    if out_dir is not None:
        result.write(out_dir)
    return result
