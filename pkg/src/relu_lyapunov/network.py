"""Forward evaluation of the network, exact and smoothed.

The exact realization applies ReLU after every hidden layer.  The smoothed
realization replaces ReLU after hidden layer k with the smooth unit at
per-layer sharpness ``sharpness**(1/k)`` (computed as ``exp(ln(sharpness)/k)``),
so deeper layers smooth more gently; this keeps the composed map converging
to the exact one with an explicit rate as sharpness grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .activation import (
    DEFAULT_CLAMP,
    ClampConfig,
    relu,
    smooth_relu,
    smooth_relu_derivative_bound,
)
from .arch import Architecture, check_params, layer_views


@dataclass
class ForwardTrace:
    """Everything one forward pass produces.

    ``preactivations[k-1]`` is the affine image entering layer k's unit
    (the network output for k = L); ``activations[k-1]`` the post-unit value
    for hidden k.  ``pattern`` holds the strict activation pattern
    (preactivation > 0) per hidden layer and is only set in exact mode.
    """

    x: np.ndarray
    preactivations: list[np.ndarray]
    activations: list[np.ndarray]
    pattern: list[np.ndarray] | None

    @property
    def output(self) -> np.ndarray:
        return self.preactivations[-1]


def layer_sharpness(sharpness: float, k: int) -> float:
    """Per-layer sharpness after hidden layer k: sharpness**(1/k)."""
    if k == 1:
        return float(sharpness)
    return math.exp(math.log(sharpness) / k)


def _check_input(arch: Architecture, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != arch.widths[0]:
        raise ValueError(f"input has shape {x.shape}, expected ({arch.widths[0]},)")
    return x


def _forward_exact_batch(
    arch: Architecture, theta: np.ndarray, points: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Batched exact pass: points (M, l_0) -> (preactivations, activations)."""
    layers = layer_views(arch, theta)
    pres: list[np.ndarray] = []
    acts: list[np.ndarray] = []
    h = points
    for k, (w, b) in enumerate(layers, start=1):
        z = h @ w.T + b
        pres.append(z)
        if k < arch.depth:
            h = relu(z)
            acts.append(h)
    return pres, acts


def _forward_smooth_batch(
    arch: Architecture,
    theta: np.ndarray,
    points: np.ndarray,
    sharpness: float,
    cfg: ClampConfig = DEFAULT_CLAMP,
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    layers = layer_views(arch, theta)
    pres: list[np.ndarray] = []
    acts: list[np.ndarray] = []
    h = points
    for k, (w, b) in enumerate(layers, start=1):
        z = h @ w.T + b
        pres.append(z)
        if k < arch.depth:
            h = smooth_relu(cfg, layer_sharpness(sharpness, k), z)
            acts.append(h)
    return pres, acts


def forward_exact(arch: Architecture, theta: np.ndarray, x) -> ForwardTrace:
    """Exact ReLU forward pass at a single input."""
    theta = check_params(arch, theta)
    x = _check_input(arch, x)
    pres, acts = _forward_exact_batch(arch, theta, x[None, :])
    return ForwardTrace(
        x=x,
        preactivations=[z[0] for z in pres],
        activations=[a[0] for a in acts],
        pattern=[z[0] > 0.0 for z in pres[:-1]],
    )


def forward_smooth(
    arch: Architecture,
    theta: np.ndarray,
    x,
    sharpness: float,
    cfg: ClampConfig = DEFAULT_CLAMP,
) -> ForwardTrace:
    """Smoothed forward pass at a single input; no activation pattern."""
    theta = check_params(arch, theta)
    x = _check_input(arch, x)
    if not float(sharpness) >= 1.0:
        raise ValueError(f"sharpness must be >= 1, got {sharpness}")
    pres, acts = _forward_smooth_batch(arch, theta, x[None, :], float(sharpness), cfg)
    return ForwardTrace(
        x=x,
        preactivations=[z[0] for z in pres],
        activations=[a[0] for a in acts],
        pattern=None,
    )


def deviation_bound(
    arch: Architecture,
    theta: np.ndarray,
    sharpness: float,
    cfg: ClampConfig = DEFAULT_CLAMP,
) -> float:
    """Uniform bound on |exact - smoothed| network output, any input.

    Unrolling the per-layer error recursion gives
    ``sharpness**(-1/max(L-1,1)) * hi * sum_{j=1..L} S**(j-1) * norm1(theta)**j``
    for depth L >= 2 (zero for L = 1, where nothing is smoothed), with S the
    uniform slope bound of the smooth unit and norm1 the l^1 norm.
    """
    theta = check_params(arch, theta)
    depth = arch.depth
    if depth < 2:
        return 0.0
    slope = smooth_relu_derivative_bound(cfg)
    norm1 = float(np.abs(theta).sum())
    total = sum(slope ** (j - 1) * norm1**j for j in range(1, depth + 1))
    rate = layer_sharpness(float(sharpness), max(depth - 1, 1))
    return cfg.hi * total / rate
