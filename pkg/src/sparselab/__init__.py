"""Coherent sparse-regression instances and support-recovery solvers.

Builds designs whose true columns have near-duplicates, then compares the
LASSO, k-step OMP and a joint-MAP sparse Bayesian learning estimator against
an exhaustive best-subset oracle.
"""
from .design import DesignMatrix, DesignParams, build_design, gram
from .diagnostics import (CoherenceReport, coherence_report, irrepresentable_value,
                          restricted_eigenvalue, worst_case_irrepresentable)
from .errors import (BudgetExceeded, EmptyCell, InfeasibleParams, RejectionBudgetExhausted,
                     SingularLeastSquares, SingularSupportGram, SparseLabError)
from .instance import GroundTruth, Observation, observe, sample_ground_truth
from .oracle import OracleResult, best_subset
from .solvers import (Estimate, LassoConfig, SblHyper, SblObjective, fit_lasso, fit_omp,
                      fit_sbl, lasso_path, sbl_objective, sbl_penalty)

__version__ = "0.1.0"

__all__ = [
    "DesignMatrix", "DesignParams", "build_design", "gram",
    "CoherenceReport", "coherence_report", "irrepresentable_value", "restricted_eigenvalue",
    "worst_case_irrepresentable",
    "BudgetExceeded", "EmptyCell", "InfeasibleParams", "RejectionBudgetExhausted",
    "SingularLeastSquares", "SingularSupportGram", "SparseLabError",
    "GroundTruth", "Observation", "observe", "sample_ground_truth",
    "OracleResult", "best_subset",
    "Estimate", "LassoConfig", "SblHyper", "SblObjective", "fit_lasso", "fit_omp", "fit_sbl",
    "lasso_path", "sbl_objective", "sbl_penalty",
]
