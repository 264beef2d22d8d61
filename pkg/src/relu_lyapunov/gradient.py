"""Gradients of the risk functionals.

The exact ReLU network is only piecewise smooth, so `generalized_gradient`
computes the limit of the smoothed gradients: a reverse sweep whose hidden
gates are the left derivative of ReLU (0 exactly at a kink).  For smoothed
networks `smooth_gradient` is the honest gradient of `risk_smooth`.

`gradient_pathsum_oracle` is an independent reference implementation that
expands the same quantity as a literal sum over neuron paths.  It is
deliberately slow and structurally unrelated to the reverse sweep; tests pit
the two against each other.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .activation import DEFAULT_CLAMP, ClampConfig, smooth_relu_derivative
from .arch import Architecture, check_params, layer_views
from .network import (
    _forward_exact_batch,
    _forward_smooth_batch,
    forward_exact,
    layer_sharpness,
)
from .risk import DiscreteMeasure, TargetSpec

PATH_CAP = 10_000


class PathCountError(RuntimeError):
    """Raised when the path-sum oracle would enumerate too many paths."""


def _exact_grad_core(
    arch: Architecture,
    theta: np.ndarray,
    points: np.ndarray,
    point_weights: np.ndarray,
    fvals: np.ndarray,
) -> tuple[np.ndarray, float]:
    """Weighted generalized gradient and risk in one reverse sweep.

    Measure points are processed in their given order; reductions over the
    point axis use numpy's pairwise summation.
    """
    layers = layer_views(arch, theta)
    pres, acts = _forward_exact_batch(arch, theta, points)
    resid = pres[-1] - fvals
    risk = float(np.sum(point_weights * np.sum(resid * resid, axis=1)))
    grad = np.empty(arch.param_count)
    delta = 2.0 * resid * point_weights[:, None]
    for k in range(arch.depth, 0, -1):
        inputs = acts[k - 2] if k > 1 else points
        grad[arch.weight_slice(k)] = (delta.T @ inputs).ravel()
        grad[arch.bias_slice(k)] = delta.sum(axis=0)
        if k > 1:
            # left-derivative gate: strictly positive preactivations pass
            delta = (delta @ layers[k - 1][0]) * (pres[k - 2] > 0.0)
    return grad, risk


def generalized_gradient(
    arch: Architecture, theta, measure: DiscreteMeasure, target: TargetSpec
) -> np.ndarray:
    """Limit of the smoothed risk gradients for a finite measure."""
    theta = check_params(arch, theta)
    if measure.dim != arch.widths[0]:
        raise ValueError(f"measure dim {measure.dim} != input width {arch.widths[0]}")
    fvals = target.values(measure.points)
    grad, _ = _exact_grad_core(arch, theta, measure.points, measure.weights, fvals)
    return grad


def minibatch_gradient(arch: Architecture, theta, batch: np.ndarray, xi) -> np.ndarray:
    """Generalized gradient of the minibatch objective (mean squared error)."""
    theta = check_params(arch, theta)
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if batch.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    weights = np.full(batch.shape[0], 1.0 / batch.shape[0])
    fvals = np.broadcast_to(xi, (batch.shape[0], xi.shape[0]))
    grad, _ = _exact_grad_core(arch, theta, batch, weights, fvals)
    return grad


def smooth_gradient(
    arch: Architecture,
    theta,
    measure: DiscreteMeasure,
    target: TargetSpec,
    sharpness: float,
    cfg: ClampConfig = DEFAULT_CLAMP,
) -> np.ndarray:
    """Gradient of risk_smooth; hidden gates are the smooth unit's derivative."""
    theta = check_params(arch, theta)
    sharpness = float(sharpness)
    layers = layer_views(arch, theta)
    pres, acts = _forward_smooth_batch(arch, theta, measure.points, sharpness, cfg)
    resid = pres[-1] - target.values(measure.points)
    grad = np.empty(arch.param_count)
    delta = 2.0 * resid * measure.weights[:, None]
    for k in range(arch.depth, 0, -1):
        inputs = acts[k - 2] if k > 1 else measure.points
        grad[arch.weight_slice(k)] = (delta.T @ inputs).ravel()
        grad[arch.bias_slice(k)] = delta.sum(axis=0)
        if k > 1:
            gate = smooth_relu_derivative(cfg, layer_sharpness(sharpness, k - 1), pres[k - 2])
            delta = (delta @ layers[k - 1][0]) * gate
    return grad


def gradient_pathsum_oracle(
    arch: Architecture, theta, measure: DiscreteMeasure, target: TargetSpec
) -> np.ndarray:
    """Generalized gradient as a literal sum over neuron paths.

    Entry for weight (k, i, j): over every path i = v_k, v_{k+1}, ..., v_L,
    accumulate 2 (output - target)_{v_L} times the product of downstream
    weights times the strict activation indicators along the path, times the
    incoming activation at j (the input coordinate when k = 1).  Bias entries
    drop the incoming factor.  Terms are combined with math.fsum.
    """
    theta = check_params(arch, theta)
    depth = arch.depth
    widths = arch.widths
    if math.prod(widths[1:]) > PATH_CAP:
        raise PathCountError(
            f"{math.prod(widths[1:])} paths exceed the oracle cap of {PATH_CAP}"
        )
    fvals = target.values(measure.points)
    terms: dict[int, list[float]] = {idx: [] for idx in range(arch.param_count)}
    weight_mats = [None] + [
        theta[arch.weight_slice(k)].reshape(widths[k], widths[k - 1]) for k in range(1, depth + 1)
    ]
    for x, w, f in zip(measure.points, measure.weights, fvals):
        trace = forward_exact(arch, theta, x)
        resid2 = 2.0 * (trace.output - f)
        for k in range(1, depth + 1):
            for i in range(1, widths[k] + 1):
                path_terms: list[float] = []
                tail_layers = [range(1, widths[q] + 1) for q in range(k + 1, depth + 1)]
                for tail in itertools.product(*tail_layers):
                    path = (i,) + tail
                    factor = float(resid2[path[-1] - 1])
                    for q in range(k + 1, depth + 1):
                        v_q = path[q - k]
                        v_prev = path[q - k - 1]
                        factor *= weight_mats[q][v_q - 1, v_prev - 1]
                        if trace.preactivations[q - 2][v_prev - 1] <= 0.0:
                            factor = 0.0
                            break
                    path_terms.append(factor)
                gsum = math.fsum(path_terms)
                for j in range(1, widths[k - 1] + 1):
                    incoming = trace.activations[k - 2][j - 1] if k > 1 else x[j - 1]
                    terms[arch.weight_index(k, i, j) - 1].append(w * gsum * float(incoming))
                terms[arch.bias_index(k, i) - 1].append(w * gsum)
    grad = np.empty(arch.param_count)
    for idx in range(arch.param_count):
        grad[idx] = math.fsum(terms[idx])
    return grad


def gradient_growth_bound(
    arch: Architecture, theta, mass: float, risk_value: float, input_scale: float = 1.0
) -> float:
    """Upper bound for ||generalized gradient||^2 in terms of the risk.

    4 L mass scale^2 prod_p (l_p + 1) (||theta||^2 + 1)^(L-1) risk.
    """
    theta = check_params(arch, theta)
    depth = arch.depth
    prod = math.prod(w + 1 for w in arch.widths)
    norm_sq = float(theta @ theta)
    return 4.0 * depth * float(mass) * float(input_scale) ** 2 * prod * (norm_sq + 1.0) ** (depth - 1) * float(risk_value)
