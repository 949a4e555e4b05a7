"""Exhaustive best-subset reference solver for small instances."""
from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .design import DesignMatrix
from .errors import BudgetExceeded
from .instance import Observation

log = logging.getLogger(__name__)

SUBSET_BUDGET = 10**7
COND_MAX = 1e12


@dataclass
class OracleResult:
    best_support: tuple[int, ...]
    best_residual_norm: float
    coefficients: np.ndarray
    n_enumerated: int
    n_skipped: int = 0
    per_support_table: list[tuple[tuple[int, ...], float]] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        d = {
            "best_support": list(self.best_support),
            "best_residual_norm": self.best_residual_norm,
            "coefficients": self.coefficients.tolist(),
            "n_enumerated": self.n_enumerated,
            "n_skipped": self.n_skipped,
        }
        if self.per_support_table is not None:
            d["per_support_table"] = [[list(s), r] for s, r in self.per_support_table]
        return d

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def best_subset(design: DesignMatrix, obs: Observation, k_max: int,
                full_table: bool = False, budget: int = SUBSET_BUDGET) -> OracleResult:
    """Least-squares fit on every support of size exactly ``k_max``.

    Supports are visited in lexicographic order and only a strictly smaller
    residual replaces the incumbent, so ties go to the lexicographically
    first support. Numerically dependent subsets are skipped and logged.

    Raises
    ------
    BudgetExceeded
        If ``C(p, k_max)`` exceeds ``budget``.
    """
    A, y = design.columns, obs.y
    p = design.p
    if not 1 <= k_max <= p:
        raise ValueError(f"k_max must lie in [1, {p}]")
    n_sub = math.comb(p, k_max)
    if n_sub > budget:
        raise BudgetExceeded(f"C({p}, {k_max}) = {n_sub} subsets exceeds budget {budget}")

    best_res, best_S, best_coef = np.inf, None, None
    table = [] if full_table else None
    skipped = 0
    for S in itertools.combinations(range(p), k_max):
        As = A[:, S]
        coef, _, rank, sv = np.linalg.lstsq(As, y, rcond=None)
        if rank < k_max or sv[0] > COND_MAX * sv[-1]:
            skipped += 1
            log.info("skipping numerically dependent subset %s", S)
            continue
        res = float(np.linalg.norm(y - As @ coef))
        if table is not None:
            table.append((S, res))
        if res < best_res:
            best_res, best_S, best_coef = res, S, coef
    w = np.zeros(p)
    if best_S is not None:
        w[list(best_S)] = best_coef
    return OracleResult(
        best_support=tuple(best_S) if best_S is not None else (),
        best_residual_norm=best_res,
        coefficients=w,
        n_enumerated=n_sub,
        n_skipped=skipped,
        per_support_table=table,
    )
