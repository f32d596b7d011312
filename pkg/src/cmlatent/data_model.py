"""Exponential-family observation models on the natural-parameter scale.

Each family pairs a full log pmf/pdf in the natural parameterization
``z*y - b*psi(y) + c(z)`` with the bookkeeping the latent model needs: the
partition kind, the per-observation b coefficients, and the scale on which
predictions are scored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .partition import PartitionKind


@dataclass(frozen=True)
class DataModel:
    """Observation family; `t` is the trial/size count where applicable."""

    family: str  # 'poisson' | 'binomial' | 'negbinomial' | 'gaussian'
    t: int | None = None

    def __post_init__(self):
        if self.family not in ("poisson", "binomial", "negbinomial",
                               "gaussian"):
            raise ValueError(f"unknown family: {self.family!r}")
        if self.family in ("binomial", "negbinomial"):
            if self.t is None or int(self.t) <= 0:
                raise ValueError(f"{self.family} requires a positive t")

    @property
    def kind(self) -> PartitionKind:
        if self.family == "poisson":
            return PartitionKind.LOG_GAMMA
        if self.family in ("binomial", "negbinomial"):
            return PartitionKind.LOGIT_BETA
        return PartitionKind.QUADRATIC

    @property
    def bounded_below(self) -> bool:
        return self.family in ("poisson", "binomial", "negbinomial")

    @property
    def bounded_above(self) -> bool:
        return self.family == "binomial"

    def validate_data(self, Z) -> None:
        Z = np.asarray(Z, dtype=float)
        if not np.all(np.isfinite(Z)):
            raise ValueError("data must be finite")
        if self.family == "gaussian":
            return
        if np.any(Z < 0) or np.any(Z != np.round(Z)):
            raise ValueError(f"{self.family} data must be nonnegative integers")
        if self.family == "binomial" and np.any(Z > self.t):
            raise ValueError("binomial data must not exceed t")

    def b_vec(self, Z) -> np.ndarray:
        """Coefficient on psi(Y) per observation."""
        Z = np.asarray(Z, dtype=float)
        if self.family == "poisson":
            return np.ones_like(Z)
        if self.family == "binomial":
            return np.full_like(Z, float(self.t))
        if self.family == "negbinomial":
            return float(self.t) + Z
        return np.full_like(Z, 0.5)

    def log_pmf(self, Z, Y) -> np.ndarray:
        """Full log likelihood of each observation at natural parameter Y."""
        Z = np.asarray(Z, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if self.family == "poisson":
            return Z * Y - np.exp(Y) - special.gammaln(Z + 1.0)
        if self.family == "binomial":
            t = float(self.t)
            c = (special.gammaln(t + 1.0) - special.gammaln(Z + 1.0)
                 - special.gammaln(t - Z + 1.0))
            return c + Z * Y - t * np.logaddexp(0.0, Y)
        if self.family == "negbinomial":
            t = float(self.t)
            c = (special.gammaln(Z + t) - special.gammaln(Z + 1.0)
                 - special.gammaln(t))
            return c + Z * Y - (t + Z) * np.logaddexp(0.0, Y)
        return (Z * Y - 0.5 * Y * Y - 0.5 * Z * Z
                - 0.5 * np.log(2.0 * np.pi))

    def predict_scale(self, Y) -> np.ndarray:
        """Map a natural parameter to the scale predictions are scored on.

        poisson: mean count; binomial: expected count t*p; negbinomial:
        odds p/(1-p); gaussian: the mean itself.

        The exponential families clip Y at +/-700 so that a wild sweep of
        a heavy-tailed chain degrades a running prediction average rather
        than turning it into inf permanently.
        """
        Y = np.asarray(Y, dtype=float)
        if self.family == "poisson":
            return np.exp(np.clip(Y, -700.0, 700.0))
        if self.family == "binomial":
            return float(self.t) * special.expit(Y)
        if self.family == "negbinomial":
            return np.exp(np.clip(Y, -700.0, 700.0))
        return Y

    def sample_data(self, Y, rng) -> np.ndarray:
        """Draw observations given natural parameters (numpy Generator)."""
        Y = np.asarray(Y, dtype=float)
        if self.family == "poisson":
            return rng.poisson(np.exp(Y)).astype(float)
        if self.family == "binomial":
            return rng.binomial(int(self.t), special.expit(Y)).astype(float)
        if self.family == "negbinomial":
            # success probability of each trial is 1 - p with p = expit(Y)
            return rng.negative_binomial(int(self.t),
                                         special.expit(-Y)).astype(float)
        return Y + rng.standard_normal(Y.shape)


def data_log_pmf(data_model: DataModel, Z, Y) -> np.ndarray:
    """Functional alias for DataModel.log_pmf."""
    return data_model.log_pmf(Z, Y)
