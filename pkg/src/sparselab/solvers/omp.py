"""k-step Orthogonal Matching Pursuit with a per-step selection trace."""
from __future__ import annotations

import numpy as np
import scipy.linalg
from scipy.stats import norm

from ..design import DesignMatrix
from ..errors import SingularLeastSquares
from ..instance import Observation
from . import Estimate

COND_MAX = 1e12


def fit_omp(design: DesignMatrix, obs: Observation, k: int) -> Estimate:
    """Run ``k`` greedy steps, refitting least squares on the selected set.

    Each step picks the unselected column with the largest ``|<a_j, r>|``
    (lowest index on ties), appends it to a QR factorization by
    re-orthogonalized Gram-Schmidt, and recomputes the residual. Indices are
    never removed.

    The trace records, per step, the selected index, the full correlation
    vector against the residual entering that step, and the residual norm
    after the refit. ``first_step_misselection`` is True when the first pick
    lies outside the design's true support.

    Raises
    ------
    SingularLeastSquares
        If the selected columns become numerically dependent.
    """
    A, y = design.columns, obs.y
    m, p = A.shape
    if not (1 <= k <= min(m, p)):
        raise ValueError(f"need 1 <= k <= min(m, p) = {min(m, p)}, got {k}")
    Q = np.zeros((m, k))
    R = np.zeros((k, k))
    selected: list[int] = []
    taken = np.zeros(p, dtype=bool)
    r = y.copy()
    steps = []
    for t in range(k):
        corr = np.abs(A.T @ r)
        masked = np.where(taken, -np.inf, corr)
        j = int(np.argmax(masked))
        a = A[:, j]
        # two rounds of classical Gram-Schmidt
        v = a.copy()
        coef = np.zeros(t)
        for _ in range(2):
            h = Q[:, :t].T @ v
            v -= Q[:, :t] @ h
            coef += h
        nv = np.linalg.norm(v)
        R[:t, t] = coef
        R[t, t] = nv
        if nv == 0 or np.linalg.cond(R[: t + 1, : t + 1]) > COND_MAX:
            raise SingularLeastSquares(f"column {j} is numerically dependent on {selected}")
        Q[:, t] = v / nv
        selected.append(j)
        taken[j] = True
        qty = Q[:, : t + 1].T @ y
        r = y - Q[:, : t + 1] @ qty
        steps.append({
            "selected_index": j,
            "correlations": corr,
            "residual_norm": float(np.linalg.norm(r)),
        })

    coef = scipy.linalg.solve_triangular(R, Q.T @ y)
    w = np.zeros(p)
    w[selected] = coef
    S = set(design.true_support)
    trace = {
        "steps": steps,
        "selected": list(selected),
        "residual_norms": [s["residual_norm"] for s in steps],
        "first_step_misselection": bool(selected[0] not in S),
    }
    return Estimate(w, tuple(selected), "omp", trace)


def residual_orthogonality(design: DesignMatrix, obs: Observation, est: Estimate) -> float:
    """Max ``|<a_j, y - A w>|`` over the selected columns (zero at an exact refit)."""
    r = obs.y - design.columns @ est.coefficients
    idx = list(est.support)
    if not idx:
        return 0.0
    return float(np.max(np.abs(design.columns[:, idx].T @ r)))


def misselection_probability(beta: float, rho_in: float, sigma: float,
                             absolute: bool = False) -> float:
    """Probability that a near-duplicate beats the true column at step one.

    For ``y = beta a_j + eps`` with ``<a_j, a_l> = rho_in`` the gap
    ``T_j - T_l`` is Gaussian with mean ``beta (1 - rho_in)`` and variance
    ``2 sigma^2 (1 - rho_in)``, so ``P(T_l > T_j) = Phi(-mean / sd)``.

    With ``absolute=True`` the comparison is ``|T_l| > |T_j|``, which is what
    OMP actually tests. Since ``T_j - T_l`` and ``T_j + T_l`` are uncorrelated
    Gaussians, that probability is ``q (1 - s) + (1 - q) s`` with ``q`` the
    signed probability above and ``s = P(T_j + T_l < 0)``.
    """
    if sigma == 0:
        return 0.0
    beta = abs(beta)
    q = float(norm.cdf(-beta * (1 - rho_in) / np.sqrt(2 * sigma**2 * (1 - rho_in))))
    if not absolute:
        return q
    s = float(norm.cdf(-beta * (1 + rho_in) / np.sqrt(2 * sigma**2 * (1 + rho_in))))
    return q * (1 - s) + (1 - q) * s
