"""Synthetic benchmark data: a 4-component Gaussian mixture in R^8 with an
AR(1)-style correlation structure, plus random cost profiles.

Normal variates come from the inverse CDF applied to PCG64 uniforms, a
frozen choice so a given seed reproduces the same sample everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidCorrelation, InvalidCost
from .schedule import CostProfile

MIXTURE_DIM = 8
N_COMPONENTS = 4

# fixed per-variable costs used by the small exhaustive-search benchmark
TOY_COSTS = (92.0, 81.0, 45.0, 23.0, 23.0, 33.0, 72.0, 5.0)


def mixture_means() -> np.ndarray:
    """Component centers: mu1 descends 2.0..0.6; mu2/mu3 flip the sign of
    the second/first half; mu4 = -mu1."""
    mu1 = np.array([2.0, 1.8, 1.6, 1.4, 1.2, 1.0, 0.8, 0.6])
    mu2 = mu1.copy()
    mu2[4:] *= -1
    mu3 = mu1.copy()
    mu3[:4] *= -1
    mu4 = -mu1
    return np.stack([mu1, mu2, mu3, mu4])


def mixture_covariance(rho: float) -> np.ndarray:
    if not -1.0 < rho < 1.0:
        raise InvalidCorrelation(f"correlation must be in (-1, 1), got {rho}")
    i = np.arange(MIXTURE_DIM)
    return rho ** np.abs(i[:, None] - i[None, :]).astype(float)


@dataclass(frozen=True)
class MixtureSpec:
    n: int
    rho: float
    seed: int = 0


def sample_mixture(spec: MixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Draw (X, y) with the component ID (1..4) as the label."""
    cov = mixture_covariance(spec.rho)
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as e:
        raise InvalidCorrelation(f"covariance not positive definite: {e}")
    means = mixture_means()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    comp = np.minimum((N_COMPONENTS * rng.random(spec.n)).astype(int),
                      N_COMPONENTS - 1)
    u = np.clip(rng.random((spec.n, MIXTURE_DIM)), 1e-300, None)
    z = ndtri(u)
    X = means[comp] + z @ chol.T
    return X, comp + 1


def sample_cost_profile(p: int, lo: float = 1.0, hi: float = 100.0,
                        seed: int = 0) -> CostProfile:
    """p independent uniform costs on [lo, hi], rounded to cents."""
    if not 0 < lo < hi:
        raise InvalidCost(f"need 0 < lo < hi, got [{lo}, {hi}]")
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = lo + (hi - lo) * rng.random(p)
    return CostProfile.from_costs(np.round(draws, 2))


def toy_cost_profile() -> CostProfile:
    return CostProfile.from_costs(TOY_COSTS)
