"""Training loops and the descent guarantees around them.

Three dynamics share one logging format: full-measure gradient descent
(`gd_run`), an explicit Euler discretization of the gradient flow
(`gf_euler_run`), and minibatch SGD with a constant target (`sgd_run`).
`sgd_ensemble` evolves many SGD trials jointly with stacked arrays; it exists
because experiment-scale runs (hundreds of trials, 1e5 steps) would otherwise
spend their time in Python per-step overhead.  Trials never interact: each has
its own initial parameters and its own slice of the per-step sample block.

Step-size thresholds (`gd_threshold`, `sgd_threshold`) reproduce the regime in
which the Lyapunov function is guaranteed to decrease; `descent_certificate`
checks a finished trajectory against that guarantee.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .arch import Architecture, check_params
from .gradient import _exact_grad_core
from .lyapunov import LyapunovContext, lyapunov_value
from .network import _forward_exact_batch
from .risk import DiscreteMeasure, TargetSpec, UniformSampler


class DivergenceError(RuntimeError):
    """Training blew up; carries the last finite step and parameters."""

    def __init__(self, step: int, theta: np.ndarray | None, message: str):
        super().__init__(message)
        self.step = step
        self.theta = theta


class Schedule:
    """Nonnegative step-size schedule: a constant or a function of the step."""

    def __init__(self, rate: float | Callable[[int], float]):
        if callable(rate):
            self._fn = rate
            self._value = None
        else:
            value = float(rate)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValueError(f"step size must be finite and >= 0, got {value}")
            self._fn = None
            self._value = value

    @classmethod
    def constant(cls, value: float) -> "Schedule":
        return cls(float(value))

    @staticmethod
    def of(rate) -> "Schedule":
        return rate if isinstance(rate, Schedule) else Schedule(rate)

    def rate(self, n: int) -> float:
        if self._fn is None:
            return self._value
        value = float(self._fn(n))
        if not (value >= 0.0 and math.isfinite(value)):
            raise ValueError(f"schedule produced invalid step size {value} at step {n}")
        return value


@dataclass
class Trajectory:
    """Per-step scalars of one run plus a few parameter snapshots.

    Scalar rows are indexed by ``steps``; each row holds quantities evaluated
    at the pre-update parameters of that step.  ``risk`` is the objective the
    step actually descends (full risk for gd/gf, the step's minibatch risk for
    sgd).  ``mc_steps``/``mc_risk`` hold independent Monte Carlo population
    estimates (sgd only); ``time``/``descent_integral`` are gf-only.
    """

    steps: np.ndarray
    v: np.ndarray
    risk: np.ndarray
    grad_norm: np.ndarray
    param_norm: np.ndarray
    gamma: np.ndarray
    snapshots: dict[int, np.ndarray]
    input_scale: float = 1.0
    mass: float = 1.0
    time: np.ndarray | None = None
    descent_integral: np.ndarray | None = None
    mc_steps: np.ndarray | None = None
    mc_risk: np.ndarray | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("step,v,risk,grad_norm,param_norm,gamma\n")
            for i in range(len(self.steps)):
                fh.write(
                    f"{int(self.steps[i])},{self.v[i]:.17g},{self.risk[i]:.17g},"
                    f"{self.grad_norm[i]:.17g},{self.param_norm[i]:.17g},{self.gamma[i]:.17g}\n"
                )


def geometric_checkpoints(steps: int, count: int = 10) -> tuple[int, ...]:
    """0, the final step, and up to ``count`` geometrically spaced steps."""
    marks = {0, steps}
    if steps > 0:
        for i in range(1, count + 1):
            marks.add(min(steps, round(steps ** (i / count))))
    return tuple(sorted(marks))


def decade_steps(last: int) -> tuple[int, ...]:
    """The 1-2-5 log grid up to ``last``, always including ``last`` itself."""
    out: list[int] = []
    base = 1
    while base <= last:
        for mult in (1, 2, 5):
            if mult * base <= last:
                out.append(mult * base)
        base *= 10
    if last >= 1 and (not out or out[-1] != last):
        out.append(last)
    return tuple(out)


@dataclass(frozen=True)
class SgdConfig:
    """Knobs of one SGD run.

    ``batch_size`` is an int or a function of the step.  ``seed`` is the
    master seed: the step-n batch comes from stream (seed, 1, n) and the fixed
    Monte Carlo evaluation sample from (seed, 0), so identical configs give
    bit-identical runs.  ``eval_steps=None`` selects the 1-2-5 log grid.
    """

    batch_size: int | Callable[[int], int] = 100
    steps: int = 1000
    seed: int = 0
    log_stride: int = 1
    eval_samples: int = 10_000
    eval_steps: tuple[int, ...] | None = None
    snapshot_steps: tuple[int, ...] | None = None

    def batch_at(self, n: int) -> int:
        size = self.batch_size(n) if callable(self.batch_size) else self.batch_size
        if int(size) != size or size < 1:
            raise ValueError(f"batch size must be a positive integer, got {size} at step {n}")
        return int(size)


def _entropy(seed) -> tuple[int, ...]:
    return (int(seed),) if np.isscalar(seed) else tuple(int(s) for s in seed)


def _norm(x: np.ndarray) -> float:
    return float(np.sqrt(x @ x))


def gd_run(
    arch: Architecture,
    theta0,
    measure: DiscreteMeasure,
    target: TargetSpec,
    schedule,
    steps: int,
    log_stride: int = 1,
    snapshot_steps: tuple[int, ...] | None = None,
) -> Trajectory:
    """Full-measure gradient descent for ``steps`` steps."""
    return _deterministic_run(arch, theta0, measure, target, schedule, steps, log_stride, snapshot_steps, dt=None)


def gf_euler_run(
    arch: Architecture,
    theta0,
    measure: DiscreteMeasure,
    target: TargetSpec,
    dt: float,
    steps: int,
    log_stride: int = 1,
    snapshot_steps: tuple[int, ...] | None = None,
) -> Trajectory:
    """Explicit Euler gradient flow; logs the running integral 4L sum risk dt.

    Warns when dt exceeds the descent threshold, since the discretization is
    then no better behaved than plain gradient descent with a large step.
    """
    dt = float(dt)
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    threshold = gd_threshold(arch, theta0, target.f0, measure.mass, measure.input_scale)
    if dt > threshold:
        warnings.warn(
            f"Euler step dt={dt:g} exceeds the descent threshold {threshold:g}; "
            "the flow approximation may lose monotonicity",
            stacklevel=2,
        )
    return _deterministic_run(arch, theta0, measure, target, Schedule.constant(dt), steps, log_stride, snapshot_steps, dt=dt)


def _deterministic_run(
    arch, theta0, measure, target, schedule, steps, log_stride, snapshot_steps, dt
) -> Trajectory:
    theta = check_params(arch, theta0).copy()
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if log_stride < 1:
        raise ValueError("log_stride must be positive")
    schedule = Schedule.of(schedule)
    ctx = LyapunovContext(arch, target.f0)
    points = measure.points
    weights = measure.weights
    fvals = np.ascontiguousarray(target.values(points))
    depth = arch.depth
    snaps = set(geometric_checkpoints(steps) if snapshot_steps is None else snapshot_steps)

    rows: list[tuple] = []
    integrals: list[float] = []
    snapshots: dict[int, np.ndarray] = {}
    integral = 0.0
    for n in range(steps + 1):
        grad, risk = _exact_grad_core(arch, theta, points, weights, fvals)
        if not math.isfinite(risk):
            if n == 0:
                raise ValueError("risk is not finite at the initial parameters")
            raise DivergenceError(n - 1, prev_theta, f"risk became non-finite at step {n}")
        gamma = schedule.rate(n)
        if n % log_stride == 0 or n == steps:
            rows.append((n, lyapunov_value(ctx, theta), risk, _norm(grad), _norm(theta), gamma))
            if dt is not None:
                integrals.append(integral)
        if n in snaps:
            snapshots[n] = theta.copy()
        if n == steps:
            break
        integral += 4.0 * depth * risk * (dt if dt is not None else 0.0)
        prev_theta = theta
        theta = theta - gamma * grad

    cols = list(zip(*rows))
    steps_arr = np.asarray(cols[0], dtype=np.int64)
    return Trajectory(
        steps=steps_arr,
        v=np.asarray(cols[1]),
        risk=np.asarray(cols[2]),
        grad_norm=np.asarray(cols[3]),
        param_norm=np.asarray(cols[4]),
        gamma=np.asarray(cols[5]),
        snapshots=snapshots,
        input_scale=measure.input_scale,
        mass=measure.mass,
        time=steps_arr * dt if dt is not None else None,
        descent_integral=np.asarray(integrals) if dt is not None else None,
    )


def sgd_run(
    arch: Architecture,
    theta0,
    schedule,
    sampler: UniformSampler,
    xi,
    cfg: SgdConfig,
) -> Trajectory:
    """Minibatch SGD towards a constant target, fresh i.i.d. batches per step.

    The logged risk at step n is that step's minibatch objective, evaluated at
    the pre-update parameters; the final row draws one extra batch so the last
    parameters get a row too.
    """
    theta = check_params(arch, theta0).copy()
    if sampler.dim != arch.widths[0]:
        raise ValueError(f"sampler dim {sampler.dim} != input width {arch.widths[0]}")
    schedule = Schedule.of(schedule)
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    ctx = LyapunovContext(arch, xi)
    entropy = _entropy(cfg.seed)
    depth = arch.depth

    eval_grid = decade_steps(cfg.steps) if cfg.eval_steps is None else tuple(cfg.eval_steps)
    eval_set = set(eval_grid)
    eval_points = None
    if eval_set and cfg.eval_samples > 0:
        eval_points = sampler.with_seed(entropy + (0,)).sample(cfg.eval_samples)
    snaps = set(geometric_checkpoints(cfg.steps) if cfg.snapshot_steps is None else cfg.snapshot_steps)

    rows: list[tuple] = []
    mc_rows: list[tuple[int, float]] = []
    snapshots: dict[int, np.ndarray] = {}
    for n in range(cfg.steps + 1):
        m = cfg.batch_at(n)
        batch = sampler.with_seed(entropy + (1, n)).sample(m)
        fvals = np.broadcast_to(xi, (m, xi.shape[0]))
        grad, risk = _exact_grad_core(arch, theta, batch, np.full(m, 1.0 / m), fvals)
        if not math.isfinite(risk):
            if n == 0:
                raise ValueError("risk is not finite at the initial parameters")
            raise DivergenceError(n - 1, prev_theta, f"risk became non-finite at step {n}")
        gamma = schedule.rate(n)
        if n % cfg.log_stride == 0 or n == cfg.steps:
            rows.append((n, lyapunov_value(ctx, theta), risk, _norm(grad), _norm(theta), gamma))
        if n in eval_set and eval_points is not None:
            pres, _ = _forward_exact_batch(arch, theta, eval_points)
            resid = pres[-1] - xi
            mc_rows.append((n, float(np.mean(np.sum(resid * resid, axis=1)))))
        if n in snaps:
            snapshots[n] = theta.copy()
        if n == cfg.steps:
            break
        prev_theta = theta
        theta = theta - gamma * grad

    cols = list(zip(*rows))
    return Trajectory(
        steps=np.asarray(cols[0], dtype=np.int64),
        v=np.asarray(cols[1]),
        risk=np.asarray(cols[2]),
        grad_norm=np.asarray(cols[3]),
        param_norm=np.asarray(cols[4]),
        gamma=np.asarray(cols[5]),
        snapshots=snapshots,
        input_scale=max(abs(sampler.a), abs(sampler.b), 1.0),
        mass=1.0,
        mc_steps=np.asarray([r[0] for r in mc_rows], dtype=np.int64),
        mc_risk=np.asarray([r[1] for r in mc_rows]),
    )


@dataclass
class EnsembleResult:
    """Per-trial Monte Carlo risk estimates at the evaluation steps."""

    eval_steps: np.ndarray  # (C,)
    risk: np.ndarray  # (trials, C)
    theta_final: np.ndarray  # (trials, param_count)

    @property
    def mean_risk(self) -> np.ndarray:
        return np.mean(self.risk, axis=0)

    @property
    def std_error(self) -> np.ndarray:
        return np.std(self.risk, axis=0, ddof=1) / np.sqrt(self.risk.shape[0])


def gaussian_init(arch: Architecture, seed, scale: float, trials: int) -> np.ndarray:
    """Per-trial N(0, scale^2) initial parameters from streams (seed, 2, t)."""
    entropy = _entropy(seed)
    out = np.empty((trials, arch.param_count))
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy + (2, t))))
        out[t] = rng.normal(0.0, scale, arch.param_count)
    return out


def _stack_forward(weights, biases, x):
    pres = []
    acts = []
    h = x
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = np.matmul(h, w.transpose(0, 2, 1)) + b[:, None, :]
        pres.append(z)
        if k < last:
            h = np.maximum(z, 0.0)
            acts.append(h)
    return pres, acts


def _ensemble_chunk(arch, theta0s, lo, hi, schedule, a, b, xi, cfg, eval_grid):
    """Run trials [lo, hi) of the stacked ensemble.

    The per-step sample block and the evaluation block are always drawn at
    full trial count and sliced, so results do not depend on the chunking.
    """
    depth = arch.depth
    trials = theta0s.shape[0]
    span = b - a
    entropy = _entropy(cfg.seed)
    weights = []
    biases = []
    for k in range(1, depth + 1):
        fan_in, fan_out = arch.layer_sizes(k)
        weights.append(theta0s[lo:hi, arch.weight_slice(k)].reshape(hi - lo, fan_out, fan_in).copy())
        biases.append(theta0s[lo:hi, arch.bias_slice(k)].copy())
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))

    eval_points = None
    if eval_grid and cfg.eval_samples > 0:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy + (0,))))
        block = rng.random((trials, cfg.eval_samples, arch.widths[0]))
        eval_points = a + span * block[lo:hi]

    risk_out = np.empty((hi - lo, len(eval_grid)))
    eval_pos = {n: c for c, n in enumerate(eval_grid)}
    ones_rows: dict[int, np.ndarray] = {}

    def eval_risk() -> np.ndarray:
        # chunk the sample axis to keep transients small
        total = np.zeros(hi - lo)
        count = eval_points.shape[1]
        for s0 in range(0, count, 1000):
            pres, _ = _stack_forward(weights, biases, eval_points[:, s0 : s0 + 1000])
            resid = pres[-1] - xi
            total += np.sum(np.sum(resid * resid, axis=2), axis=1)
        return total / count

    for n in range(cfg.steps + 1):
        if n in eval_pos and eval_points is not None:
            risk_out[:, eval_pos[n]] = eval_risk()
        if n == cfg.steps:
            break
        m = cfg.batch_at(n)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy + (1, n))))
        block = rng.random((trials, m, arch.widths[0]))
        x = a + span * block[lo:hi]
        pres, acts = _stack_forward(weights, biases, x)
        gamma = schedule.rate(n)
        # gamma and the 2/m of the minibatch objective fold into delta
        delta = (pres[-1] - xi) * (2.0 * gamma / m)
        ones_row = ones_rows.get(m)
        if ones_row is None:
            ones_row = ones_rows[m] = np.ones((1, m))
        for k in range(depth, 0, -1):
            inputs = acts[k - 2] if k > 1 else x
            gw = np.matmul(delta.transpose(0, 2, 1), inputs)
            gb = np.matmul(ones_row, delta)[:, 0, :]
            if k > 1:
                delta = np.matmul(delta, weights[k - 1]) * (pres[k - 2] > 0.0)
            weights[k - 1] -= gw
            biases[k - 1] -= gb
        if not np.isfinite(biases[-1]).all():
            raise DivergenceError(n, None, f"ensemble trial block [{lo},{hi}) diverged at step {n}")

    flat = np.concatenate(
        [arr for k in range(depth) for arr in (weights[k].reshape(hi - lo, -1), biases[k])], axis=1
    )
    return risk_out, flat


def sgd_ensemble(
    arch: Architecture,
    theta0s: np.ndarray,
    schedule,
    a: float,
    b: float,
    xi,
    cfg: SgdConfig,
) -> EnsembleResult:
    """Evolve many independent SGD trials jointly for cfg.steps steps.

    ``theta0s`` has one row per trial.  Each trial t reads row t of the step-n
    sample block drawn from stream (seed, 1, n) and row t of the evaluation
    block from (seed, 0).  ``RELU_LYAPUNOV_THREADS`` chunks the trial axis
    without changing any output bit.
    """
    theta0s = np.asarray(theta0s, dtype=np.float64)
    if theta0s.ndim != 2 or theta0s.shape[1] != arch.param_count:
        raise ValueError(f"theta0s must have shape (trials, {arch.param_count})")
    if b <= a:
        raise ValueError(f"need a < b, got a={a}, b={b}")
    schedule = Schedule.of(schedule)
    trials = theta0s.shape[0]
    eval_grid = decade_steps(cfg.steps) if cfg.eval_steps is None else tuple(cfg.eval_steps)

    threads = int(os.environ.get("RELU_LYAPUNOV_THREADS", "1") or "1")
    threads = max(1, min(threads, trials))
    bounds = np.linspace(0, trials, threads + 1).astype(int)
    ranges = [(int(bounds[i]), int(bounds[i + 1])) for i in range(threads) if bounds[i] < bounds[i + 1]]

    if len(ranges) == 1:
        parts = [_ensemble_chunk(arch, theta0s, 0, trials, schedule, a, b, xi, cfg, eval_grid)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            futures = [
                pool.submit(_ensemble_chunk, arch, theta0s, lo, hi, schedule, a, b, xi, cfg, eval_grid)
                for lo, hi in ranges
            ]
            parts = [f.result() for f in futures]

    risk = np.concatenate([p[0] for p in parts], axis=0)
    theta_final = np.concatenate([p[1] for p in parts], axis=0)
    return EnsembleResult(
        eval_steps=np.asarray(eval_grid, dtype=np.int64), risk=risk, theta_final=theta_final
    )


def gd_threshold(arch: Architecture, theta0, f0, mass: float, input_scale: float = 1.0) -> float:
    """Largest constant step with guaranteed Lyapunov descent for gd_run.

    1 / (L scale^2 prod_p(l_p+1) (2 V(theta0) + 4 L^2 ||f0||^2 + 1)^(L-1) mass);
    infinite when the measure has no mass.
    """
    mass = float(mass)
    if mass < 0.0:
        raise ValueError("mass must be nonnegative")
    if mass == 0.0:
        return math.inf
    f0 = np.atleast_1d(np.asarray(f0, dtype=np.float64))
    ctx = LyapunovContext(arch, f0)
    v0 = lyapunov_value(ctx, theta0)
    depth = arch.depth
    prod = math.prod(w + 1 for w in arch.widths)
    base = 2.0 * v0 + 4.0 * depth**2 * float(f0 @ f0) + 1.0
    return 1.0 / (depth * float(input_scale) ** 2 * prod * base ** (depth - 1) * mass)


def sgd_threshold(arch: Architecture, theta0_norm: float, xi, a: float, b: float) -> float:
    """Step-size bound under which SGD towards a constant target descends:

    (||theta0|| + 1)^(-2L) / (4 L d max(scale, ||xi||))^(2L), with d the
    parameter count and scale = max(|a|, |b|, 1).
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
    depth = arch.depth
    scale = max(abs(float(a)), abs(float(b)), 1.0)
    big = max(scale, float(np.sqrt(xi @ xi)))
    return (float(theta0_norm) + 1.0) ** (-2 * depth) / (4.0 * depth * arch.param_count * big) ** (2 * depth)


@dataclass
class DescentReport:
    """What descent_certificate found on one trajectory."""

    increase_count: int
    max_increase: float
    stepwise_ok: bool
    stepwise_margin: float
    delta: float
    sup_param_norm: float
    norm_bound: float
    norm_ok: bool

    @property
    def passed(self) -> bool:
        return self.increase_count == 0 and self.stepwise_ok and self.norm_ok

    def summary(self) -> str:
        return (
            f"increases={self.increase_count} (max {self.max_increase:.3g}), "
            f"stepwise={'ok' if self.stepwise_ok else 'VIOLATED'} "
            f"(margin {self.stepwise_margin:.3g}, delta {self.delta:.3g}), "
            f"norms={'ok' if self.norm_ok else 'VIOLATED'} "
            f"(sup {self.sup_param_norm:.6g} vs bound {self.norm_bound:.6g})"
        )


def descent_certificate(trajectory: Trajectory, ctx: LyapunovContext) -> DescentReport:
    """Check a fully logged trajectory against the descent guarantee.

    Verifies (a) V never increases, (b) each step satisfies
    V_{n+1} - V_n <= -4 gamma_n L (1 - delta) risk_n with
    delta = sup gamma * L * scale^2 * prod(l_p+1) * (2 V_0 + 4 L^2 ||f0||^2 + 1)^(L-1) * mass,
    and (c) every logged parameter norm stays below
    sqrt(2 V_0 + 4 L^2 ||f0||^2).  Requires every step to be logged.
    """
    steps = trajectory.steps
    if len(steps) < 2:
        raise ValueError("certificate needs at least two logged steps")
    if not np.all(np.diff(steps) == 1):
        raise ValueError("certificate needs every step logged (log_stride=1)")

    depth = ctx.arch.depth
    f0_sq = float(ctx.f0 @ ctx.f0)
    v = trajectory.v
    diffs = v[1:] - v[:-1]
    increase_count = int(np.sum(diffs > 0.0))
    max_increase = float(max(diffs.max(), 0.0)) if len(diffs) else 0.0

    applied_gamma = trajectory.gamma[:-1]
    base = 2.0 * v[0] + 4.0 * depth**2 * f0_sq + 1.0
    prod = math.prod(w + 1 for w in ctx.arch.widths)
    delta = (
        float(applied_gamma.max())
        * depth
        * trajectory.input_scale**2
        * prod
        * base ** (depth - 1)
        * trajectory.mass
    )
    rhs = -4.0 * applied_gamma * depth * (1.0 - delta) * trajectory.risk[:-1]
    slack = 1e-13 * (1.0 + np.abs(v[:-1]) + np.abs(v[1:]))
    stepwise_ok = bool(np.all(diffs <= rhs + slack))
    stepwise_margin = float(np.min(rhs - diffs))

    norm_bound_value = math.sqrt(max(2.0 * v[0] + 4.0 * depth**2 * f0_sq, 0.0))
    sup_norm = float(trajectory.param_norm.max())
    norm_ok = sup_norm <= norm_bound_value * (1.0 + 1e-12) + 1e-12

    return DescentReport(
        increase_count=increase_count,
        max_increase=max_increase,
        stepwise_ok=stepwise_ok,
        stepwise_margin=stepwise_margin,
        delta=delta,
        sup_param_norm=sup_norm,
        norm_bound=norm_bound_value,
        norm_ok=norm_ok,
    )
