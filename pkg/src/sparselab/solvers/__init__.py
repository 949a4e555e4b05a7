"""Support-recovery estimators sharing the :class:`Estimate` result type."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SOLVER_TAGS = ("lasso", "omp", "sbl", "oracle")


@dataclass(eq=False)
class Estimate:
    coefficients: np.ndarray
    support: tuple[int, ...]
    solver_tag: str
    trace: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.solver_tag not in SOLVER_TAGS:
            raise ValueError(f"unknown solver tag {self.solver_tag!r}")
        self.support = tuple(sorted(int(j) for j in self.support))

    def recovers(self, support) -> bool:
        return set(self.support) == set(support)

    def to_dict(self) -> dict:
        return {
            "solver_tag": self.solver_tag,
            "coefficients": np.asarray(self.coefficients).tolist(),
            "support": list(self.support),
            "trace": _jsonable(self.trace),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def hamming(support, target) -> int:
    return len(set(support) ^ set(target))


from .lasso import LassoConfig, fit_lasso, lasso_kkt_residual, lasso_path  # noqa: E402
from .omp import fit_omp, misselection_probability, residual_orthogonality  # noqa: E402
from .sbl import SblHyper, SblObjective, fit_sbl, sbl_objective, sbl_penalty  # noqa: E402

__all__ = [
    "Estimate", "hamming",
    "LassoConfig", "fit_lasso", "lasso_path", "lasso_kkt_residual",
    "fit_omp", "misselection_probability", "residual_orthogonality",
    "SblHyper", "SblObjective", "fit_sbl", "sbl_objective", "sbl_penalty",
]
