"""Lyapunov descent analysis of SGD for deep ReLU networks with constant targets."""

from .activation import (
    DEFAULT_CLAMP,
    ClampConfig,
    relu,
    relu_left_derivative,
    smooth_relu,
    smooth_relu_derivative,
    smooth_relu_derivative_bound,
    smoothstep,
    smoothstep_slope,
)
from .arch import Architecture, extract_layer, pack_layer
from .convexity import last_layer_midpoint_check, midpoint_gap, nonconvexity_witness
from .gradient import (
    PATH_CAP,
    PathCountError,
    generalized_gradient,
    gradient_growth_bound,
    gradient_pathsum_oracle,
    minibatch_gradient,
    smooth_gradient,
)
from .lyapunov import (
    LyapunovContext,
    lyapunov_gradient,
    lyapunov_value,
    norm_bound,
    pairing,
    sandwich_bounds,
)
from .network import ForwardTrace, deviation_bound, forward_exact, forward_smooth, layer_sharpness
from .optimize import (
    DescentReport,
    DivergenceError,
    EnsembleResult,
    Schedule,
    SgdConfig,
    Trajectory,
    decade_steps,
    descent_certificate,
    gaussian_init,
    gd_run,
    gd_threshold,
    geometric_checkpoints,
    gf_euler_run,
    sgd_ensemble,
    sgd_run,
    sgd_threshold,
)
from .risk import (
    DiscreteMeasure,
    TargetSpec,
    UniformSampler,
    empirical_risk,
    population_risk_mc,
    risk_exact,
    risk_smooth,
)

__version__ = "0.1.0"

__all__ = [
    "Architecture",
    "ClampConfig",
    "DEFAULT_CLAMP",
    "DescentReport",
    "DiscreteMeasure",
    "DivergenceError",
    "EnsembleResult",
    "ForwardTrace",
    "LyapunovContext",
    "PATH_CAP",
    "PathCountError",
    "Schedule",
    "SgdConfig",
    "TargetSpec",
    "Trajectory",
    "UniformSampler",
    "decade_steps",
    "descent_certificate",
    "deviation_bound",
    "empirical_risk",
    "extract_layer",
    "forward_exact",
    "forward_smooth",
    "gaussian_init",
    "gd_run",
    "gd_threshold",
    "generalized_gradient",
    "geometric_checkpoints",
    "gf_euler_run",
    "gradient_growth_bound",
    "gradient_pathsum_oracle",
    "last_layer_midpoint_check",
    "layer_sharpness",
    "lyapunov_gradient",
    "lyapunov_value",
    "midpoint_gap",
    "minibatch_gradient",
    "nonconvexity_witness",
    "norm_bound",
    "pack_layer",
    "pairing",
    "population_risk_mc",
    "relu",
    "relu_left_derivative",
    "risk_exact",
    "risk_smooth",
    "sandwich_bounds",
    "sgd_ensemble",
    "sgd_run",
    "sgd_threshold",
    "smooth_gradient",
    "smooth_relu",
    "smooth_relu_derivative",
    "smooth_relu_derivative_bound",
    "smoothstep",
    "smoothstep_slope",
]
