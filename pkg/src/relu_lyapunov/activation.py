"""ReLU and its clamped-smoothstep approximation.

The smooth variant multiplies the ramp ``max(x, 0)`` by a cubic smoothstep of
``(sharpness * x - lo) / (hi - lo)``: it vanishes for ``x <= lo/sharpness``,
equals ``x`` for ``x >= hi/sharpness``, and interpolates monotonically in
between.  Raising ``sharpness`` shrinks the transition window, so the smooth
unit converges uniformly to ReLU at rate ``hi / sharpness``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClampConfig:
    """Transition window endpoints; requires 0 < lo < hi."""

    lo: float = 0.5
    hi: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.lo < self.hi):
            raise ValueError(f"need 0 < lo < hi, got lo={self.lo}, hi={self.hi}")


DEFAULT_CLAMP = ClampConfig()


def relu(x):
    return np.maximum(x, 0.0)


def relu_left_derivative(x):
    """Left derivative of ReLU: 1 on (0, inf), 0 at 0 and below."""
    x = np.asarray(x)
    return np.where(x > 0.0, 1.0, 0.0)


def smoothstep(t):
    """Clamped cubic: 0 for t<=0, 3t^2 - 2t^3 on (0,1), 1 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def smoothstep_slope(t):
    t = np.asarray(t)
    return np.where((t > 0.0) & (t < 1.0), 6.0 * t * (1.0 - t), 0.0)


def _check_sharpness(sharpness: float) -> float:
    sharpness = float(sharpness)
    if not sharpness >= 1.0:
        raise ValueError(f"sharpness must be >= 1, got {sharpness}")
    return sharpness


def smooth_relu(cfg: ClampConfig, sharpness: float, x):
    sharpness = _check_sharpness(sharpness)
    t = (sharpness * np.asarray(x, dtype=np.float64) - cfg.lo) / (cfg.hi - cfg.lo)
    return np.maximum(x, 0.0) * smoothstep(t)


def smooth_relu_derivative(cfg: ClampConfig, sharpness: float, x):
    sharpness = _check_sharpness(sharpness)
    x = np.asarray(x, dtype=np.float64)
    t = (sharpness * x - cfg.lo) / (cfg.hi - cfg.lo)
    slope = smoothstep(t) + x * smoothstep_slope(t) * (sharpness / (cfg.hi - cfg.lo))
    # below the window the unit is identically 0, so its derivative is too
    return np.where(x > 0.0, slope, 0.0)


def smooth_relu_derivative_bound(cfg: ClampConfig = DEFAULT_CLAMP) -> float:
    """Uniform bound on |d/dx smooth_relu|, valid for every sharpness >= 1.

    The ramp contributes at most 1 and the smoothstep factor at most
    x * eta'(t) * sharpness/(hi-lo) <= hi * 3/2 / (hi - lo), since eta' peaks
    at 3/2 and x <= hi/sharpness wherever eta' is nonzero.  Default window
    (0.5, 1) gives 4.
    """
    return 1.0 + 1.5 * cfg.hi / (cfg.hi - cfg.lo)
