"""Structural statistics of a design: irrepresentable value, coherence, kappa."""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg

from .design import DesignMatrix, gram
from .errors import SingularSupportGram

KAPPA_MIN = 1e-10
WORST_CASE_MAX_K = 12


@dataclass(frozen=True)
class CoherenceReport:
    ic_value: float
    mu_in_min: float
    mu_out_max: float
    kappa: float
    mutual_coherence: float
    sign_pattern: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sign_pattern"] = list(self.sign_pattern)
        return d


def restricted_eigenvalue(design: DesignMatrix) -> float:
    """Smallest eigenvalue of the support Gram matrix."""
    As = design.support_columns
    return float(np.linalg.eigvalsh(As.T @ As)[0])


def irrepresentable_value(design: DesignMatrix, sign_pattern) -> float:
    """Sup-norm of ``A_Sc^T A_S (A_S^T A_S)^{-1} s`` over off-support columns.

    Uses a Cholesky solve of the k x k support system; no explicit inverse.
    Returns 0 when the design has no off-support columns.
    """
    s = np.asarray(sign_pattern, dtype=float)
    if s.shape != (design.k,):
        raise ValueError(f"sign pattern must have length k={design.k}")
    As = design.support_columns
    Gs = As.T @ As
    if restricted_eigenvalue(design) <= KAPPA_MIN:
        raise SingularSupportGram("support columns are numerically dependent")
    v = scipy.linalg.cho_solve(scipy.linalg.cho_factor(Gs), s)
    off = design.off_support()
    if off.size == 0:
        return 0.0
    return float(np.max(np.abs(design.columns[:, off].T @ (As @ v))))


def worst_case_irrepresentable(design: DesignMatrix) -> tuple[float, tuple[int, ...]]:
    """Maximize the irrepresentable value over all sign patterns (k <= 12).

    ``s`` and ``-s`` give the same value, so the first sign is fixed to +1.
    """
    k = design.k
    if k > WORST_CASE_MAX_K:
        raise ValueError(f"worst-case enumeration limited to k <= {WORST_CASE_MAX_K}")
    best, best_s = -1.0, ()
    for tail in itertools.product((1, -1), repeat=k - 1):
        s = (1,) + tail
        v = irrepresentable_value(design, s)
        if v > best:
            best, best_s = v, s
    return best, best_s


def coherence_report(design: DesignMatrix, sign_pattern) -> CoherenceReport:
    G = gram(design)
    p = design.p
    mu_in, mu_out = np.nan, np.nan
    if design.groups:
        ins, outs = [], []
        for j, grp in design.groups.items():
            members = set(grp) | {j}
            others = [r for r in range(p) if r not in members]
            for l in grp:
                ins.append(G[j, l])
                if others:
                    outs.append(np.max(np.abs(G[l, others])))
        mu_in = float(min(ins))
        mu_out = float(max(outs)) if outs else 0.0
    off = np.abs(G - np.diag(np.diag(G)))
    return CoherenceReport(
        ic_value=irrepresentable_value(design, sign_pattern),
        mu_in_min=mu_in,
        mu_out_max=mu_out,
        kappa=restricted_eigenvalue(design),
        mutual_coherence=float(off.max()) if p > 1 else 0.0,
        sign_pattern=tuple(int(x) for x in sign_pattern),
    )
