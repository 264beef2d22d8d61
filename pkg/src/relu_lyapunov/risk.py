"""Risk functionals over finite measures, minibatches, and Monte Carlo.

A DiscreteMeasure is a finite weighted point set on a box [a, b]^dim; the
exact risk is the weighted sum of squared output errors over its points.
Sampling-based quantities (minibatch risk, Monte Carlo population risk) use
UniformSampler streams, which are keyed so runs are reproducible and
splittable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .activation import DEFAULT_CLAMP, ClampConfig
from .arch import Architecture, check_params
from .network import _forward_exact_batch, _forward_smooth_batch


@dataclass
class DiscreteMeasure:
    """Finite measure sum_p weights[p] * delta_{points[p]} on [a, b]^dim."""

    points: np.ndarray
    weights: np.ndarray
    a: float
    b: float

    def __post_init__(self) -> None:
        self.points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.a = float(self.a)
        self.b = float(self.b)
        if self.b <= self.a:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if self.weights.ndim != 1 or self.weights.shape[0] != self.points.shape[0]:
            raise ValueError("one weight per point required")
        if np.any(self.weights < 0.0):
            raise ValueError("weights must be nonnegative")
        if self.points.size and (self.points.min() < self.a or self.points.max() > self.b):
            raise ValueError(f"points must lie in [{self.a}, {self.b}]")

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def input_scale(self) -> float:
        """max(|a|, |b|, 1), the box scale entering the growth bounds."""
        return max(abs(self.a), abs(self.b), 1.0)

    @classmethod
    def uniform_grid(cls, a: float, b: float, count: int, dim: int = 1) -> "DiscreteMeasure":
        """Equispaced grid with uniform weights of total mass 1 (dim 1 only)."""
        if dim != 1:
            raise ValueError("uniform_grid supports dim=1")
        if count < 1:
            raise ValueError("count must be positive")
        points = np.linspace(a, b, count)[:, None]
        weights = np.full(count, 1.0 / count)
        return cls(points, weights, a, b)

    @classmethod
    def from_file(cls, path, a: float, b: float) -> "DiscreteMeasure":
        """Load "x_1 ... x_dim weight" rows, one point per line."""
        rows = np.atleast_2d(np.loadtxt(path, dtype=np.float64, ndmin=2))
        if rows.shape[1] < 2:
            raise ValueError("each line needs at least one coordinate and a weight")
        return cls(rows[:, :-1], rows[:, -1], a, b)


@dataclass
class TargetSpec:
    """Target function: a constant vector, or a callable with its value at 0.

    ``fn`` takes one input point (dim,) and returns the target vector; the
    value at the origin has to be supplied explicitly because the Lyapunov
    function depends on it even when 0 is outside the sampled box.
    """

    f0: np.ndarray
    xi: np.ndarray | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.f0 = np.atleast_1d(np.asarray(self.f0, dtype=np.float64))
        if (self.xi is None) == (self.fn is None):
            raise ValueError("exactly one of xi and fn must be set")
        if self.xi is not None:
            self.xi = np.atleast_1d(np.asarray(self.xi, dtype=np.float64))

    @classmethod
    def constant(cls, xi) -> "TargetSpec":
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        return cls(f0=xi, xi=xi)

    @classmethod
    def from_function(cls, fn, f0) -> "TargetSpec":
        return cls(f0=f0, fn=fn)

    @property
    def is_constant(self) -> bool:
        return self.xi is not None

    def values(self, points: np.ndarray) -> np.ndarray:
        """Target values at each row of points, shape (M, out_dim)."""
        points = np.atleast_2d(points)
        if self.xi is not None:
            return np.broadcast_to(self.xi, (points.shape[0], self.xi.shape[0]))
        return np.stack([np.atleast_1d(np.asarray(self.fn(p), dtype=np.float64)) for p in points])


@dataclass
class UniformSampler:
    """Uniform draws on [a, b)^dim from a keyed, reproducible stream.

    ``seed`` may be an int or a tuple of ints.  ``derive(*key)`` returns an
    independent child stream; equal seeds give equal sequences, so splitting
    a master seed into per-step keys makes every batch reproducible without
    keeping generator state around.
    """

    a: float
    b: float
    dim: int = 1
    seed: int | tuple[int, ...] = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.b <= self.a:
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        self._rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.entropy)))

    @property
    def entropy(self) -> tuple[int, ...]:
        return (self.seed,) if isinstance(self.seed, int) else tuple(self.seed)

    def derive(self, *key: int) -> "UniformSampler":
        return UniformSampler(self.a, self.b, self.dim, self.entropy + tuple(key))

    def with_seed(self, seed) -> "UniformSampler":
        return UniformSampler(self.a, self.b, self.dim, seed)

    def sample(self, n: int) -> np.ndarray:
        if n < 0:
            raise ValueError("sample size must be nonnegative")
        return self.a + (self.b - self.a) * self._rng.random((n, self.dim))


def _squared_errors(arch, theta, points, fvals) -> np.ndarray:
    pres, _ = _forward_exact_batch(arch, theta, points)
    resid = pres[-1] - fvals
    return np.sum(resid * resid, axis=1)


def risk_exact(arch: Architecture, theta, measure: DiscreteMeasure, target: TargetSpec) -> float:
    """sum_p w_p ||N(x_p) - f(x_p)||^2 with the exact ReLU network."""
    theta = check_params(arch, theta)
    if measure.dim != arch.widths[0]:
        raise ValueError(f"measure dim {measure.dim} != input width {arch.widths[0]}")
    fvals = target.values(measure.points)
    return float(np.sum(measure.weights * _squared_errors(arch, theta, measure.points, fvals)))


def risk_smooth(
    arch: Architecture,
    theta,
    measure: DiscreteMeasure,
    target: TargetSpec,
    sharpness: float,
    cfg: ClampConfig = DEFAULT_CLAMP,
) -> float:
    """Exact-measure risk of the smoothed network."""
    theta = check_params(arch, theta)
    pres, _ = _forward_smooth_batch(arch, theta, measure.points, float(sharpness), cfg)
    resid = pres[-1] - target.values(measure.points)
    return float(np.sum(measure.weights * np.sum(resid * resid, axis=1)))


def empirical_risk(arch: Architecture, theta, batch: np.ndarray, xi) -> float:
    """Mean squared error against a constant target over one batch."""
    theta = check_params(arch, theta)
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if batch.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    pres, _ = _forward_exact_batch(arch, theta, batch)
    resid = pres[-1] - xi
    return float(np.mean(np.sum(resid * resid, axis=1)))


def population_risk_mc(
    arch: Architecture,
    theta,
    sampler: UniformSampler,
    xi,
    n_samples: int,
) -> tuple[float, float]:
    """Monte Carlo estimate of the population risk and its standard error.

    Returns (mean, std / sqrt(n)) with the unbiased sample variance.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples for a standard error")
    theta = check_params(arch, theta)
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    points = sampler.sample(n_samples)
    sq = _squared_errors(arch, theta, points, xi)
    estimate = float(np.mean(sq))
    std_error = float(np.std(sq, ddof=1) / np.sqrt(n_samples))
    return estimate, std_error
