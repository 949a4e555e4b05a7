"""Ground-truth coefficients and noisy observations ``y = A w + eps``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .design import DesignMatrix


@dataclass(frozen=True, eq=False)
class GroundTruth:
    w_star: np.ndarray
    support: tuple[int, ...]
    beta_min: float
    sign_pattern: tuple[int, ...]

    def scaled(self, factor: float) -> "GroundTruth":
        return GroundTruth(self.w_star * factor, self.support, self.beta_min * abs(factor),
                           tuple(int(np.sign(factor)) * s for s in self.sign_pattern))

    def to_dict(self) -> dict:
        return {
            "w_star": self.w_star.tolist(),
            "support": list(self.support),
            "beta_min": self.beta_min,
            "sign_pattern": list(self.sign_pattern),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruth":
        return cls(np.asarray(d["w_star"], dtype=float), tuple(d["support"]),
                   float(d["beta_min"]), tuple(int(s) for s in d["sign_pattern"]))


@dataclass(frozen=True, eq=False)
class Observation:
    y: np.ndarray
    sigma: float
    noise_seed: int | None = None

    def to_dict(self) -> dict:
        return {"y": self.y.tolist(), "sigma": self.sigma, "noise_seed": self.noise_seed}

    @classmethod
    def from_dict(cls, d: dict) -> "Observation":
        return cls(np.asarray(d["y"], dtype=float), float(d["sigma"]), d.get("noise_seed"))


def sample_ground_truth(design: DesignMatrix, beta_min: float, magnitude_max: float,
                        seed) -> GroundTruth:
    """Draw ``w*`` on the design's support.

    Magnitudes are uniform on ``[beta_min, magnitude_max]`` and signs are
    Rademacher; every off-support entry is exactly zero.
    """
    if not (0 < beta_min <= magnitude_max):
        raise ValueError(f"need 0 < beta_min <= magnitude_max, got {beta_min}, {magnitude_max}")
    rng = np.random.default_rng(seed)
    k = design.k
    mags = rng.uniform(beta_min, magnitude_max, size=k)
    signs = rng.choice(np.array([-1, 1]), size=k)
    w = np.zeros(design.p)
    w[list(design.true_support)] = signs * mags
    return GroundTruth(w, design.true_support, float(beta_min), tuple(int(s) for s in signs))


def observe(design: DesignMatrix, truth: GroundTruth, sigma: float, noise_seed) -> Observation:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    signal = design.columns @ truth.w_star
    if sigma == 0:
        return Observation(signal, 0.0, noise_seed)
    rng = np.random.default_rng(noise_seed)
    return Observation(signal + sigma * rng.standard_normal(design.m), float(sigma), noise_seed)


def save_instance(path, truth: GroundTruth, obs: Observation) -> None:
    Path(path).write_text(json.dumps({"truth": truth.to_dict(), "observation": obs.to_dict()}))


def load_instance(path) -> tuple[GroundTruth, Observation]:
    d = json.loads(Path(path).read_text())
    return GroundTruth.from_dict(d["truth"]), Observation.from_dict(d["observation"])
