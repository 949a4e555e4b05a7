import numpy as np
import pytest

from sparselab.design import DesignMatrix, DesignParams, build_design
from sparselab.instance import observe, sample_ground_truth

# lines appended by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def orthogonal_design(p: int, support) -> DesignMatrix:
    """Identity design; columns are the standard basis."""
    return DesignMatrix(columns=np.eye(p), true_support=tuple(support))


def make_instance(params: DesignParams, beta_min=1.0, magnitude_max=1.0, sigma=0.0,
                  truth_seed=0, noise_seed=1):
    design = build_design(params)
    truth = sample_ground_truth(design, beta_min, magnitude_max, truth_seed)
    return design, truth, observe(design, truth, sigma, noise_seed)


@pytest.fixture
def example3_params():
    return DesignParams(m=50, p=100, k=4, group_size=2, rho_in=0.98, rho_out_max=0.3,
                        support_gram_offdiag=0.1, seed=7)
