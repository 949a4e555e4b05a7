import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_instance, orthogonal_design
from sparselab.design import DesignMatrix, DesignParams
from sparselab.instance import GroundTruth, Observation, observe
from sparselab.solvers.lasso import LassoConfig, fit_lasso, lasso_kkt_residual, lasso_path

cp = pytest.importorskip("cvxpy")

log = logging.getLogger(__name__)


def lasso_objective(A, y, w, lam):
    r = y - A @ w
    return 0.5 * float(r @ r) + lam * float(np.abs(w).sum())


def qp_oracle(A, y, lam):
    """Generic conic solve of the same problem, for comparison."""
    w = cp.Variable(A.shape[1])
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(y - A @ w) + lam * cp.norm1(w)))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return prob.value, np.asarray(w.value)


def test_orthogonal_design_soft_thresholds():
    rng = np.random.default_rng(0)
    d = orthogonal_design(8, (0, 1))
    y = rng.normal(size=8)
    lam = 0.4
    est = fit_lasso(d, Observation(y, 0.0), lam)
    expected = np.sign(y) * np.maximum(np.abs(y) - lam, 0.0)
    np.testing.assert_allclose(est.coefficients, expected, atol=1e-12)


def test_large_lambda_gives_zero():
    d, _, obs = make_instance(DesignParams(m=20, p=30, k=3, group_size=2, seed=1), sigma=0.1)
    lam_max = np.max(np.abs(d.columns.T @ obs.y))
    for lam in (lam_max, 2 * lam_max):
        est = fit_lasso(d, obs, lam)
        assert not np.any(est.coefficients)
        assert est.support == ()


@pytest.mark.parametrize("seed", range(10))
def test_matches_qp_oracle(seed):
    d, _, obs = make_instance(
        DesignParams(m=8, p=6, k=2, group_size=1, rho_in=0.9, rho_out_max=0.5, seed=seed),
        magnitude_max=2.0, truth_seed=seed, noise_seed=seed)
    lam_max = np.max(np.abs(d.columns.T @ obs.y))
    for lam in (0.5 * lam_max, 0.1 * lam_max, 0.01 * lam_max):
        est = fit_lasso(d, obs, lam)
        ref_val, _ = qp_oracle(d.columns, obs.y, lam)
        assert lasso_objective(d.columns, obs.y, est.coefficients, lam) == pytest.approx(
            ref_val, abs=1e-6)


def test_kkt_and_monotone_objective():
    d, _, obs = make_instance(DesignParams(m=40, p=80, k=4, group_size=3, rho_in=0.99, seed=2),
                              magnitude_max=2.0, sigma=0.1)
    cfg = LassoConfig()
    for lam, est in lasso_path(d, obs, cfg):
        assert est.trace["kkt_residual"] <= 10 * cfg.tol
        assert lasso_kkt_residual(d, obs, est.coefficients, lam) <= 10 * cfg.tol
        hist = est.trace["objective"]
        assert np.all(np.diff(hist) <= 1e-12)
        assert est.trace["converged"] and not est.trace["non_convergence"]


def test_more_active_columns_than_rows():
    # small lambda on a wide coherent design: the active set can exceed m
    d, _, obs = make_instance(DesignParams(m=20, p=60, k=3, group_size=3, rho_in=0.99,
                                           rho_out_max=0.4, seed=3), sigma=0.2)
    lam = 1e-3 * np.max(np.abs(d.columns.T @ obs.y))
    est = fit_lasso(d, obs, lam)
    assert est.trace["kkt_residual"] <= 1e-9
    assert np.count_nonzero(est.coefficients) <= d.m


def test_iteration_cap_sets_flag():
    d, _, obs = make_instance(DesignParams(m=20, p=40, k=3, group_size=2, rho_in=0.99, seed=3),
                              sigma=0.2)
    est = fit_lasso(d, obs, 1e-3, LassoConfig(max_iter=1))
    assert est.trace["non_convergence"]
    assert est.trace["sweeps"] == 1


def test_single_point_grid():
    d, _, obs = make_instance(DesignParams(m=20, p=30, k=3, seed=4), sigma=0.1)
    lam_max = float(np.max(np.abs(d.columns.T @ obs.y)))
    path = lasso_path(d, obs, LassoConfig(lambda_grid=(lam_max,)))
    assert len(path) == 1
    assert path[0][1].support == ()


def test_noiseless_orthogonal_recovery_at_smallest_lambda():
    d = orthogonal_design(10, (2, 5, 7))
    w = np.zeros(10)
    w[[2, 5, 7]] = [1.0, -1.5, 2.0]
    obs = observe(d, GroundTruth(w, (2, 5, 7), 1.0, (1, -1, 1)), 0.0, 0)
    path = lasso_path(d, obs)
    assert path[-1][0] < 0.5  # beta_min > 2 lambda_min
    assert path[-1][1].support == (2, 5, 7)


def test_default_grid():
    d, _, obs = make_instance(DesignParams(m=20, p=30, k=3, seed=4), sigma=0.1)
    grid = LassoConfig().grid_for(d, obs)
    assert len(grid) == 50
    assert grid[0] == pytest.approx(np.max(np.abs(d.columns.T @ obs.y)))
    assert grid[-1] == pytest.approx(1e-3 * grid[0])


def test_support_sizes_grow_along_path():
    # heuristic only: logged, never asserted
    fractions = []
    for seed in range(10):
        d, _, obs = make_instance(DesignParams(m=30, p=50, k=3, group_size=2, seed=seed),
                                  sigma=0.1, truth_seed=seed, noise_seed=seed)
        sizes = [len(est.support) for _, est in lasso_path(d, obs)]
        fractions.append(np.mean(np.diff(sizes) >= 0))
    log.info("fraction of nondecreasing support steps: %.3f", np.mean(fractions))


@pytest.mark.parametrize("kwargs", [
    dict(tol=0.0), dict(support_threshold=-1.0), dict(lambda_grid=(1.0, 2.0)),
    dict(lambda_grid=(1.0, -1.0)),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        LassoConfig(**kwargs)


def test_nonpositive_lambda_rejected():
    d = orthogonal_design(3, (0,))
    with pytest.raises(ValueError):
        fit_lasso(d, Observation(np.ones(3), 0.0), 0.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(0.01, 0.9))
def test_random_problems_are_stationary(seed, frac):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(12, 20))
    A /= np.linalg.norm(A, axis=0)
    d = DesignMatrix(A, (0, 1))
    obs = Observation(rng.normal(size=12), 1.0)
    lam = frac * np.max(np.abs(A.T @ obs.y))
    est = fit_lasso(d, obs, lam)
    assert lasso_kkt_residual(d, obs, est.coefficients, lam) <= 1e-9
    assert np.all(np.diff(est.trace["objective"]) <= 1e-12)
    assert set(est.support) == set(np.flatnonzero(np.abs(est.coefficients) > 1e-6))


def test_estimate_json(tmp_path):
    d, _, obs = make_instance(DesignParams(m=20, p=30, k=3, seed=4), sigma=0.1)
    est = fit_lasso(d, obs, 0.1)
    est.save(tmp_path / "est.json")
    doc = json.loads((tmp_path / "est.json").read_text())
    assert set(doc) == {"solver_tag", "coefficients", "support", "trace"}
    assert doc["solver_tag"] == "lasso"
