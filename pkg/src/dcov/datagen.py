"""Seeded synthetic samples: independence nulls and nonlinear alternatives.

The three nonlinear shapes (circle, wave, cross) all have zero population
cross-covariance by symmetry, so the classical covariance is blind to
them while the distance covariance is not.  The linear shape provides
Gaussian dependence for the normal-limit experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .estimators import PairedSample
from .rng import derived_rng

SHAPES = ("circle", "wave", "cross", "linear", "independent")


@dataclass(frozen=True)
class ShapeSpec:
    """What to generate: shape tag, size, noise level, and seed.

    ``rho`` is the correlation of the linear shape; ``x_dim``/``y_dim``
    apply to the independent shape only (all other shapes are bivariate
    scalars).
    """

    shape: str
    n: int
    noise_sd: float = 0.0
    seed: int = 0
    rho: float = 0.5
    x_dim: int = 1
    y_dim: int = 1

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown shape {self.shape!r}; choose from {SHAPES}")
        if self.n < 1:
            raise DomainError(f"need n >= 1, got {self.n}")
        if self.noise_sd < 0:
            raise DomainError(f"noise_sd must be nonnegative, got {self.noise_sd}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must be in [-1, 1], got {self.rho}")
        if self.x_dim < 1 or self.y_dim < 1:
            raise DomainError("dimensions must be positive")


def generate(spec: ShapeSpec) -> PairedSample:
    """Deterministic sample for the given spec (same seed, same sample)."""
    rng = derived_rng(spec.seed)
    n, sd = spec.n, spec.noise_sd
    if spec.shape == "circle":
        theta = rng.uniform(0.0, 2.0 * np.pi, n)
        x = np.cos(theta) + sd * rng.standard_normal(n)
        y = np.sin(theta) + sd * rng.standard_normal(n)
    elif spec.shape == "wave":
        # cos, not sin: u - 1/2 is odd and cos(4 pi u) even about u = 1/2,
        # so the population covariance vanishes exactly
        u = rng.uniform(0.0, 1.0, n)
        x = u + sd * rng.standard_normal(n)
        y = np.cos(4.0 * np.pi * u) + sd * rng.standard_normal(n)
    elif spec.shape == "cross":
        v = rng.uniform(0.0, 1.0, n)
        s1 = rng.choice([-1.0, 1.0], n)
        s2 = rng.choice([-1.0, 1.0], n)
        x = s1 * v + sd * rng.standard_normal(n)
        y = s2 * v + sd * rng.standard_normal(n)
    elif spec.shape == "linear":
        u = rng.standard_normal(n)
        u2 = rng.standard_normal(n)
        x = u
        y = spec.rho * u + np.sqrt(1.0 - spec.rho**2) * u2
    else:  # independent
        x = rng.standard_normal((n, spec.x_dim))
        y = rng.standard_normal((n, spec.y_dim))
        return PairedSample(x, y)
    return PairedSample(x, y)
