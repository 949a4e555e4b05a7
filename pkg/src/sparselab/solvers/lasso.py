"""Cyclic coordinate descent for the LASSO, ``0.5||y - Aw||^2 + lam ||w||_1``."""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg

from ..design import DesignMatrix, gram
from ..instance import Observation
from . import Estimate

# sweeps between active-set polish attempts
POLISH_EVERY = 10
NULL_TOL = 1e-10


@dataclass(frozen=True)
class LassoConfig:
    """``lambda_grid=None`` means 50 log-spaced points from ``||A^T y||_inf``
    down to ``1e-3`` of it, computed per observation."""

    lambda_grid: tuple[float, ...] | None = None
    max_iter: int = 20000
    tol: float = 1e-10
    support_threshold: float = 1e-6
    n_lambda: int = 50
    lambda_min_ratio: float = 1e-3

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.support_threshold < 0:
            raise ValueError("support_threshold must be nonnegative")
        if self.lambda_grid is not None:
            grid = np.asarray(self.lambda_grid, dtype=float)
            if np.any(grid <= 0) or np.any(np.diff(grid) >= 0):
                raise ValueError("lambda_grid must be strictly descending positive values")
            object.__setattr__(self, "lambda_grid", tuple(float(x) for x in grid))

    def grid_for(self, design: DesignMatrix, obs: Observation) -> np.ndarray:
        if self.lambda_grid is not None:
            return np.asarray(self.lambda_grid)
        lam_max = float(np.max(np.abs(design.columns.T @ obs.y)))
        if lam_max == 0:
            return np.array([1.0])
        return np.geomspace(lam_max, lam_max * self.lambda_min_ratio, self.n_lambda)


@numba.njit(cache=True)
def _sweep(G, c, w, lam, idx):
    # one pass of exact coordinate minimization over idx; c = A^T r is kept current
    biggest = 0.0
    for j in idx:
        gjj = G[j, j]
        z = c[j] + gjj * w[j]
        if z > lam:
            new = (z - lam) / gjj
        elif z < -lam:
            new = (z + lam) / gjj
        else:
            new = 0.0
        delta = new - w[j]
        if delta != 0.0:
            for i in range(c.shape[0]):
                c[i] -= delta * G[i, j]
            w[j] = new
            if abs(delta) > biggest:
                biggest = abs(delta)
    return biggest


@numba.njit(cache=True)
def _objective(yy, Aty, c, w, lam):
    # 0.5||y - Aw||^2 = 0.5 y'y - 0.5 w'(A'y + c) with c = A'(y - Aw)
    val = 0.5 * yy
    l1 = 0.0
    for j in range(w.shape[0]):
        val -= 0.5 * w[j] * (Aty[j] + c[j])
        l1 += abs(w[j])
    return val + lam * l1


@numba.njit(cache=True)
def _cd(G, Aty, yy, w, lam, tol, max_iter, history):
    """Active-set cyclic coordinate descent (glmnet-style).

    Full sweeps alternate with sweeps restricted to the nonzero coordinates;
    the run ends once a full sweep moves no coordinate by ``tol`` or more.
    """
    p = w.shape[0]
    c = Aty - G @ w
    everything = np.arange(p)
    n = 0
    converged = False
    while n < max_iter:
        moved = _sweep(G, c, w, lam, everything)
        history[n] = _objective(yy, Aty, c, w, lam)
        n += 1
        if moved < tol:
            converged = True
            break
        active = np.flatnonzero(w)
        while n < max_iter:
            moved = _sweep(G, c, w, lam, active)
            history[n] = _objective(yy, Aty, c, w, lam)
            n += 1
            if moved < tol:
                break
    return n, converged


def lasso_kkt_residual(design: DesignMatrix, obs: Observation, w: np.ndarray,
                       lam: float) -> float:
    """Largest violation of the LASSO optimality conditions at ``w``."""
    corr = design.columns.T @ (obs.y - design.columns @ w)
    nz = w != 0
    viol = np.where(nz, np.abs(corr - lam * np.sign(w)), np.maximum(np.abs(corr) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


def _polish(G, Aty, yy, w, lam, max_drops=50):
    """Sign-constrained exact steps on the active set.

    With the signs of the nonzero coordinates held fixed the objective is a
    convex quadratic, minimized by solving ``G_AA w_A = A_A^T y - lam s``.
    If that point flips a sign, step along the segment toward it until the
    first coordinate reaches zero, drop that coordinate, and repeat. Every
    accepted move lowers the objective.
    """
    moved = False
    for _ in range(max_drops):
        act = np.flatnonzero(w)
        if act.size == 0:
            return moved
        s = np.sign(w[act])
        cur = w[act]
        Gaa = G[np.ix_(act, act)]
        evals, evecs = np.linalg.eigh(Gaa)
        if evals[0] <= NULL_TOL * max(evals[-1], 1.0):
            # A_act has a null direction: the fit is flat along it and the l1 term
            # is linear, so slide until a coordinate reaches zero
            d = evecs[:, 0]
            if s @ d > 0:
                d = -d
            shrink = d * cur < 0
            if not np.any(shrink):
                return moved
            ts = -cur[shrink] / d[shrink]
            hit = int(np.flatnonzero(shrink)[np.argmin(ts)])
            trial = w.copy()
            trial[act] = cur + float(ts.min()) * d
            trial[act[hit]] = 0.0
            if _objective(yy, Aty, Aty - G @ trial, trial, lam) > _objective(yy, Aty, Aty - G @ w, w, lam):
                return moved
            w[:] = trial
            moved = True
            continue
        try:
            cf = scipy.linalg.cho_factor(Gaa)
        except np.linalg.LinAlgError:
            return moved
        cand = scipy.linalg.cho_solve(cf, Aty[act] - lam * s)
        if not np.all(np.isfinite(cand)):
            return moved
        flips = np.flatnonzero(np.sign(cand) != s)
        if flips.size == 0:
            step, hit = 1.0, -1
        else:
            ts = cur[flips] / (cur[flips] - cand[flips])
            hit = int(flips[np.argmin(ts)])
            step = float(ts.min())
        trial = w.copy()
        trial[act] = cur + step * (cand - cur)
        if hit >= 0:
            trial[act[hit]] = 0.0
        if _objective(yy, Aty, Aty - G @ trial, trial, lam) > _objective(yy, Aty, Aty - G @ w, w, lam):
            return moved
        w[:] = trial
        moved = True
        if hit < 0:
            return True
    return moved


def _fit(design, obs, lam, config, w0, G, Aty, yy):
    if lam <= 0:
        raise ValueError("lambda must be positive")
    w = np.zeros(design.p) if w0 is None else np.array(w0, dtype=float)
    buf = np.empty(POLISH_EVERY)
    history = []
    n_total, converged, polishes = 0, False, 0
    while n_total < config.max_iter:
        chunk = min(POLISH_EVERY, config.max_iter - n_total)
        n, converged = _cd(G, Aty, yy, w, float(lam), float(config.tol), chunk, buf)
        history.extend(buf[:n].tolist())
        n_total += n
        if converged:
            break
        if _polish(G, Aty, yy, w, lam):
            polishes += 1
            history.append(_objective(yy, Aty, Aty - G @ w, w, lam))
    support = np.flatnonzero(np.abs(w) > config.support_threshold)
    trace = {
        "lambda": float(lam),
        "sweeps": int(n_total),
        "polishes": polishes,
        "converged": bool(converged),
        "non_convergence": not converged,
        "objective": np.asarray(history),
        "kkt_residual": lasso_kkt_residual(design, obs, w, lam),
    }
    return Estimate(w, tuple(support), "lasso", trace)


def fit_lasso(design: DesignMatrix, obs: Observation, lam: float,
              config: LassoConfig | None = None, w0=None) -> Estimate:
    """Solve the LASSO at one penalty level by cyclic coordinate descent.

    Coordinates are visited in ascending index order. ``trace['objective']``
    holds the objective after every sweep and is nonincreasing;
    ``trace['non_convergence']`` is set when ``max_iter`` sweeps run out.
    """
    config = config or LassoConfig()
    A = design.columns
    return _fit(design, obs, lam, config, w0, gram(design), A.T @ obs.y, float(obs.y @ obs.y))


def lasso_path(design: DesignMatrix, obs: Observation,
               config: LassoConfig | None = None) -> list[tuple[float, Estimate]]:
    """Fit every grid point in descending order, warm-starting each fit."""
    config = config or LassoConfig()
    A = design.columns
    G, Aty, yy = gram(design), A.T @ obs.y, float(obs.y @ obs.y)
    out = []
    w = None
    for lam in config.grid_for(design, obs):
        est = _fit(design, obs, lam, config, w, G, Aty, yy)
        w = est.coefficients
        out.append((float(lam), est))
    return out
