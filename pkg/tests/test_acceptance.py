"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary. Criterion 7 recomputes criteria 1-4 from scratch and
compares serialized outputs byte for byte.
"""
import json
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from sparselab.bench import ExperimentConfig, cells_csv, run_experiment, trial_seeds
from sparselab.design import DesignMatrix, DesignParams, build_design
from sparselab.diagnostics import irrepresentable_value
from sparselab.instance import observe, sample_ground_truth
from sparselab.oracle import best_subset
from sparselab.solvers.lasso import LassoConfig, fit_lasso, lasso_path
from sparselab.solvers.omp import fit_omp, misselection_probability, residual_orthogonality
from sparselab.solvers.sbl import SblHyper, descent_violation, fit_sbl, sbl_objective, sbl_penalty

KKT_TOL = 10 * LassoConfig().tol
ORTHO_TOL = 1e-8
DESCENT_SLACK = 1e-10
SBL_B = 1e-8
SIGMA_FLOOR = 1e-3


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# criterion 1: small instances where the exhaustive oracle is cheap

C1_PARAMS = dict(m=30, p=18, k=3, group_size=1, rho_in=0.95, rho_out_max=0.2)


def c1_instance(seed: int, sigma: float):
    d = build_design(DesignParams(seed=seed, **C1_PARAMS))
    truth = sample_ground_truth(d, 1.0, 1.0, seed + 1000)
    return d, truth, observe(d, truth, sigma, seed + 2000)


def run_criterion1():
    t0 = time.perf_counter()
    rows = []
    for sigma in (0.0, 0.05):
        hyper = SblHyper(b=SBL_B, noise_variance=max(sigma, SIGMA_FLOOR) ** 2)
        for seed in range(50):
            d, truth, obs = c1_instance(seed, sigma)
            est = fit_sbl(d, obs, hyper)
            orc = best_subset(d, obs, d.k)
            S = tuple(sorted(d.true_support))
            rows.append({
                "sigma": sigma, "seed": seed,
                "sbl_support": list(est.support), "oracle_support": list(orc.best_support),
                "sbl_coefficients": est.coefficients.tolist(),
                "oracle_residual": orc.best_residual_norm,
                "agree": est.support == tuple(orc.best_support) == S,
                "descent_violation": descent_violation(est.trace),
            })
    elapsed = time.perf_counter() - t0
    return rows, elapsed


@pytest.fixture(scope="module")
def c1():
    return run_criterion1()


def test_criterion1_oracle_equivalence(c1):
    rows, elapsed = c1
    clean = sum(r["agree"] for r in rows if r["sigma"] == 0.0)
    noisy = sum(r["agree"] for r in rows if r["sigma"] == 0.05)
    ok = clean >= 48 and noisy >= 45 and elapsed < 60
    report(1, "SBL = oracle = true support", ok,
           f"noiseless {clean}/50 (need 48), sigma=0.05 {noisy}/50 (need 45), "
           f"{elapsed:.1f}s (limit 60s)")
    assert ok


# criterion 2: three-way separation on the coherent grid

def separation_config() -> ExperimentConfig:
    grid = [DesignParams(m=100, p=200, k=5, group_size=3, rho_in=rho, rho_out_max=0.3,
                         support_gram_offdiag=0.0, seed=1) for rho in (0.95, 0.99)]
    return ExperimentConfig(design_params_grid=grid, sigma_grid=[0.15], trials_per_cell=200,
                            beta_min=1.0, magnitude_max=2.0, sbl=SblHyper(b=SBL_B),
                            master_seed=2024, record_runtime=False)


def run_criterion2():
    t0 = time.perf_counter()
    result = run_experiment(separation_config())
    elapsed = time.perf_counter() - t0
    return result, elapsed


@pytest.fixture(scope="module")
def c2():
    return run_criterion2()


def serialize_bench(result) -> str:
    return cells_csv(result.cells) + "\n".join(dumps(r.to_dict()) for r in result.trials)


@pytest.mark.slow
def test_criterion2_three_way_separation(c2):
    result, elapsed = c2
    parts, ok = [], elapsed < 600
    for cell in result.cells:
        r, se = cell.rates, cell.se
        parts.append(f"rho_in={cell.rho_in}: sbl={r['sbl']:.3f} lasso={r['lasso']:.3f} "
                     f"omp={r['omp']:.3f}")
        if cell.rho_in >= 0.99:
            for rival in ("lasso", "omp"):
                margin = r["sbl"] - r[rival]
                disjoint = r["sbl"] - 2 * se["sbl"] > r[rival] + 2 * se[rival]
                ok = ok and margin >= 0.10 and disjoint
    report(2, "SBL beats LASSO and OMP by 0.10 at rho_in=0.99", ok,
           "; ".join(parts) + f"; {elapsed:.0f}s (limit 600s)")
    assert ok


# criterion 3: OMP first-step mis-selection law

def run_criterion3():
    d = build_design(DesignParams(m=2, p=2, k=1, group_size=1, rho_in=0.99, rho_out_max=0.3,
                                  shuffle_columns=False))
    hits = []
    for t in range(2000):
        truth_seed, noise_seed = trial_seeds(7, 0, t)
        truth = sample_ground_truth(d, 1.0, 1.0, truth_seed)
        obs = observe(d, truth, 0.5, noise_seed)
        est = fit_omp(d, obs, 1)
        assert residual_orthogonality(d, obs, est) <= ORTHO_TOL
        hits.append(bool(est.trace["first_step_misselection"]))
    return hits


@pytest.fixture(scope="module")
def c3():
    return run_criterion3()


def test_criterion3_omp_misselection_law(c3):
    n = len(c3)
    rate = sum(c3) / n
    p = misselection_probability(1.0, 0.99, 0.5)
    se = np.sqrt(p * (1 - p) / n)
    ok = abs(rate - p) <= 3 * se and rate >= 0.05
    report(3, "OMP mis-selection matches the Gaussian law", ok,
           f"empirical {rate:.4f} vs closed form {p:.4f} (|diff| {abs(rate - p):.4f}, "
           f"3 SE {3 * se:.4f}), exact |T| law {misselection_probability(1.0, 0.99, 0.5, True):.4f}")
    assert ok


# criterion 4: irrepresentable statistic at the boundary

def hand_design() -> DesignMatrix:
    e = np.eye(4)
    cols = np.column_stack([
        e[0], e[1],
        0.95 * e[0] + 0.3 * e[1] + np.sqrt(1 - 0.95**2 - 0.3**2) * e[2],
        0.95 * e[1] + np.sqrt(1 - 0.95**2) * e[3],
    ])
    return DesignMatrix(columns=cols, true_support=(0, 1), groups={0: (2,), 1: (3,)})


def run_criterion4():
    values = {}
    for rho in (0.9, 0.99, 0.999):
        d = build_design(DesignParams(m=30, p=12, k=1, group_size=1, rho_in=rho,
                                      rho_out_max=0.3, seed=3))
        values[str(rho)] = irrepresentable_value(d, (1,))
    values["hand"] = irrepresentable_value(hand_design(), (1, 1))
    return values


@pytest.fixture(scope="module")
def c4():
    return run_criterion4()


def test_criterion4_ic_boundary(c4):
    single = all(abs(c4[str(rho)] - rho) <= 1e-8 for rho in (0.9, 0.99, 0.999))
    hand = abs(c4["hand"] - 1.25) <= 1e-8
    ok = single and hand
    detail = ", ".join(f"rho_in={rho}: {c4[str(rho)]:.12f}" for rho in (0.9, 0.99, 0.999))
    report(4, "IC value equals rho_in; hand design gives 1.25", ok,
           f"{detail}; hand design {c4['hand']:.12f}")
    assert ok


# criterion 5: SBL objective properties

@pytest.mark.slow
def test_criterion5_sbl_objective_properties(c1, c2):
    rng = np.random.default_rng(5)
    n_grid = 1000
    grid_ok = True
    for _ in range(n_grid):
        h = SblHyper(a=rng.uniform(0.51, 10), b=10 ** rng.uniform(-10, 2))
        s1 = rng.uniform(0, 50)
        s2 = s1 + 10 ** rng.uniform(-6, 2)
        theta = rng.uniform(0.001, 0.999)
        grid_ok &= sbl_penalty(s2, h) > sbl_penalty(s1, h)
        grid_ok &= sbl_penalty(theta * s1 + (1 - theta) * s2, h) >= \
            theta * sbl_penalty(s1, h) + (1 - theta) * sbl_penalty(s2, h) - 1e-12
    h = SblHyper()
    grid_ok &= sbl_penalty(0.5, h) > 0.5 * (sbl_penalty(0.0, h) + sbl_penalty(1.0, h))

    rows, _ = c1
    result, _ = c2
    descent_ok = all(r["descent_violation"] <= DESCENT_SLACK for r in rows) and all(
        t.outcomes["sbl"].certified for t in result.trials)

    checked, spurious_ok = 0, True
    hyper = SblHyper(b=SBL_B, noise_variance=SIGMA_FLOOR**2)
    for seed in range(50):
        d, truth, obs = c1_instance(seed, 0.0)
        base = sbl_objective(truth.w_star, d, obs, hyper).total
        for l in d.off_support():
            for v in (0.01, -0.01, 1e-4, -1e-6):
                w = truth.w_star.copy()
                w[l] = v
                spurious_ok &= sbl_objective(w, d, obs, hyper).total > base
                checked += 1
    ok = bool(grid_ok and descent_ok and spurious_ok)
    report(5, "SBL penalty and descent properties", ok,
           f"concavity/monotonicity grid {n_grid} points {'ok' if grid_ok else 'violated'}; "
           f"descent on {len(rows)}+{len(result.trials)} runs {'ok' if descent_ok else 'violated'}; "
           f"spurious-index perturbations {checked} {'ok' if spurious_ok else 'violated'}")
    assert ok


# criterion 6: solver certificates

def qp_value(A, y, lam):
    import cvxpy as cp
    w = cp.Variable(A.shape[1])
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(y - A @ w) + lam * cp.norm1(w)))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return prob.value


@pytest.mark.slow
def test_criterion6_solver_certification(c2, c3):
    pytest.importorskip("cvxpy")
    result, _ = c2
    n_paths = n_omp = 0
    kkt_ok = ortho_ok = True
    for sigma in (0.0, 0.05):
        for seed in range(50):
            d, _, obs = c1_instance(seed, sigma)
            for lam, est in lasso_path(d, obs):
                kkt_ok &= est.trace["kkt_residual"] <= KKT_TOL
            n_paths += 1
            est = fit_omp(d, obs, d.k)
            ortho_ok &= residual_orthogonality(d, obs, est) <= ORTHO_TOL
            n_omp += 1
    kkt_ok &= all(t.outcomes["lasso"].certified for t in result.trials)
    ortho_ok &= all(t.outcomes["omp"].certified for t in result.trials)
    n_paths += len(result.trials)
    n_omp += len(result.trials) + len(c3)  # criterion 3 checks inline

    worst = 0.0
    for seed in range(10):
        d = build_design(DesignParams(m=8, p=6, k=2, group_size=1, rho_in=0.9, rho_out_max=0.5,
                                      seed=seed))
        truth = sample_ground_truth(d, 1.0, 2.0, seed)
        obs = observe(d, truth, 0.0, seed)
        lam = 0.05 * np.max(np.abs(d.columns.T @ obs.y))
        est = fit_lasso(d, obs, lam)
        r = obs.y - d.columns @ est.coefficients
        ours = 0.5 * float(r @ r) + lam * float(np.abs(est.coefficients).sum())
        worst = max(worst, abs(ours - qp_value(d.columns, obs.y, lam)))
    qp_ok = worst <= 1e-6
    ok = bool(kkt_ok and ortho_ok and qp_ok)
    report(6, "solver certificates", ok,
           f"LASSO KKT on {n_paths} paths {'ok' if kkt_ok else 'violated'}; "
           f"OMP orthogonality on {n_omp} fits {'ok' if ortho_ok else 'violated'}; "
           f"QP oracle max objective gap {worst:.2e} over 10 instances (limit 1e-6)")
    assert ok


# criterion 7: determinism

@pytest.mark.slow
def test_criterion7_determinism(c1, c2, c3, c4):
    first = [dumps(c1[0]), serialize_bench(c2[0]), dumps(c3), dumps(c4)]
    again = [dumps(run_criterion1()[0]), serialize_bench(run_criterion2()[0]),
             dumps(run_criterion3()), dumps(run_criterion4())]
    same = [a.encode() == b.encode() for a, b in zip(first, again)]
    ok = all(same)
    report(7, "byte-identical reruns of criteria 1-4", ok,
           ", ".join(f"criterion {i + 1} {'identical' if s else 'differs'}"
                     for i, s in enumerate(same)))
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
