"""Command line front end.

Subcommands: ``sgd`` (multi-trial experiment, CSV of mean risk per
checkpoint), ``gd`` and ``gf`` (single deterministic runs on a grid measure,
CSV trajectory), ``verify`` (self-checks of the library's identities), and
``nonconvexity`` (prints an explicit midpoint-inequality violation).

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .activation import DEFAULT_CLAMP, relu, smooth_relu, smooth_relu_derivative, smooth_relu_derivative_bound
from .arch import Architecture
from .convexity import last_layer_midpoint_check, midpoint_gap, nonconvexity_witness
from .gradient import (
    generalized_gradient,
    gradient_growth_bound,
    gradient_pathsum_oracle,
    smooth_gradient,
)
from .lyapunov import LyapunovContext, lyapunov_gradient, lyapunov_value, pairing, sandwich_bounds
from .optimize import (
    DivergenceError,
    Schedule,
    SgdConfig,
    descent_certificate,
    gaussian_init,
    gd_run,
    gd_threshold,
    gf_euler_run,
    sgd_ensemble,
    sgd_run,
    sgd_threshold,
)
from .risk import DiscreteMeasure, TargetSpec, UniformSampler, risk_exact, risk_smooth


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentPreset:
    """Named experiment configuration for the sgd command."""

    name: str
    widths: tuple[int, ...]
    xi: float = 1.0
    a: float = 0.0
    b: float = 1.0
    batch: int = 100
    gamma: float = 1.0 / 2000.0
    steps: int = 100_000
    trials: int = 100

    @property
    def init_scale(self) -> float:
        # std 1/sqrt(first hidden width)
        return self.widths[1] ** -0.5


PRESETS = {
    "shallow": ExperimentPreset("shallow", (1, 7, 1)),
    "deep": ExperimentPreset("deep", (1, 3, 7, 1)),
}


def _parse_xi(text: str, out_width: int) -> np.ndarray:
    try:
        values = np.asarray([float(p) for p in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise UsageError(f"malformed --xi value {text!r}") from exc
    if values.shape == (1,) and out_width > 1:
        values = np.full(out_width, values[0])
    if values.shape != (out_width,):
        raise UsageError(f"--xi needs {out_width} components, got {len(values)}")
    return values


@dataclass
class Resolved:
    arch: Architecture
    xi: np.ndarray
    a: float
    b: float
    preset: ExperimentPreset | None

    @property
    def init_scale(self) -> float:
        return self.arch.widths[1] ** -0.5

    @property
    def tag(self) -> str:
        return self.preset.name if self.preset else "x".join(str(w) for w in self.arch.widths)


def _resolve(args) -> Resolved:
    preset = PRESETS[args.preset] if getattr(args, "preset", None) else None
    if getattr(args, "arch", None):
        arch = Architecture.from_string(args.arch)
    elif preset:
        arch = Architecture(preset.widths)
    else:
        raise UsageError("either --preset or --arch is required")
    a = args.a if args.a is not None else (preset.a if preset else 0.0)
    b = args.b if args.b is not None else (preset.b if preset else 1.0)
    if b <= a:
        raise UsageError(f"need a < b, got a={a}, b={b}")
    xi_text = args.xi if args.xi is not None else str(preset.xi if preset else 1.0)
    xi = _parse_xi(xi_text, arch.widths[-1])
    return Resolved(arch=arch, xi=xi, a=float(a), b=float(b), preset=preset)


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(value) for value in row) + "\n")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def cmd_sgd(args) -> int:
    res = _resolve(args)
    preset = res.preset
    trials = args.trials if args.trials is not None else (preset.trials if preset else 100)
    batch = args.batch if args.batch is not None else (preset.batch if preset else 100)
    gamma = args.gamma if args.gamma is not None else (preset.gamma if preset else 1.0 / 2000.0)
    steps = args.steps if args.steps is not None else (preset.steps if preset else 100_000)
    seed = args.seed if args.seed is not None else 0
    out = args.out or f"sgd_{res.tag}.csv"

    theta0s = gaussian_init(res.arch, seed, res.init_scale, trials)
    norms = np.sqrt(np.sum(theta0s * theta0s, axis=1))
    thresholds = np.asarray(
        [sgd_threshold(res.arch, n, res.xi, res.a, res.b) for n in norms]
    )
    print(f"configured gamma: {gamma:.17g}")
    print(
        f"sgd descent threshold across {trials} trials: "
        f"min {thresholds.min():.6g}, max {thresholds.max():.6g}"
        + ("" if gamma <= thresholds.min() else "  (gamma exceeds it; descent not guaranteed)")
    )

    cfg = SgdConfig(batch_size=batch, steps=steps, seed=seed, eval_samples=args.eval_samples)
    result = sgd_ensemble(res.arch, theta0s, Schedule.constant(gamma), res.a, res.b, res.xi, cfg)
    mean = result.mean_risk
    se = result.std_error if trials > 1 else np.zeros_like(mean)
    _write_csv(
        out,
        "step,mean_mse,std_error",
        [(int(s), mean[i], se[i]) for i, s in enumerate(result.eval_steps)],
    )
    print(f"wrote {out} ({len(result.eval_steps)} checkpoints, {trials} trials)")
    print(f"final mean risk at step {int(result.eval_steps[-1])}: {mean[-1]:.6g}")
    return 0


def _deterministic_setup(args):
    res = _resolve(args)
    points = args.points if getattr(args, "points", None) is not None else 101
    measure = DiscreteMeasure.uniform_grid(res.a, res.b, points)
    target = TargetSpec.constant(res.xi)
    seed = args.seed if args.seed is not None else 0
    theta0 = gaussian_init(res.arch, seed, res.init_scale, 1)[0]
    threshold = gd_threshold(res.arch, theta0, res.xi, measure.mass, measure.input_scale)
    return res, measure, target, theta0, threshold


def cmd_gd(args) -> int:
    res, measure, target, theta0, threshold = _deterministic_setup(args)
    gamma = args.gamma if args.gamma is not None else 0.9 * threshold
    steps = args.steps if args.steps is not None else 10_000
    out = args.out or f"gd_{res.tag}.csv"
    print(f"configured gamma: {gamma:.17g}")
    print(f"gd descent threshold: {threshold:.17g}" + ("" if gamma < threshold else "  (gamma at or above it; descent not guaranteed)"))
    trajectory = gd_run(res.arch, theta0, measure, target, Schedule.constant(gamma), steps)
    trajectory.to_csv(out)
    report = descent_certificate(trajectory, LyapunovContext(res.arch, target.f0))
    print(f"descent certificate: {report.summary()}")
    print(f"wrote {out}; final risk {trajectory.risk[-1]:.6g}")
    return 0


def cmd_gf(args) -> int:
    res, measure, target, theta0, threshold = _deterministic_setup(args)
    dt = args.dt if args.dt is not None else 0.5 * threshold
    steps = args.steps if args.steps is not None else 10_000
    out = args.out or f"gf_{res.tag}.csv"
    print(f"euler dt: {dt:.17g} (descent threshold {threshold:.17g})")
    trajectory = gf_euler_run(res.arch, theta0, measure, target, dt, steps)
    trajectory.to_csv(out)
    drift = np.max(np.abs(trajectory.v - (trajectory.v[0] - trajectory.descent_integral)))
    print(f"max |V(t) - (V(0) - 4L int risk)| along the run: {drift:.6g}")
    print(f"wrote {out}; final risk {trajectory.risk[-1]:.6g}")
    return 0


def cmd_nonconvexity(args) -> int:
    res = _resolve(args)
    if res.arch.depth < 2:
        print(
            "depth-1 networks: the risk is a convex least-squares objective, "
            "so no midpoint violation exists",
            file=sys.stderr,
        )
        return 2
    measure = DiscreteMeasure.uniform_grid(res.a, res.b, args.points if args.points is not None else 101)
    target = TargetSpec.constant(res.xi)
    theta, vartheta = nonconvexity_witness(res.arch, res.xi, measure)
    mid = 0.5 * (theta + vartheta)
    gap = midpoint_gap(res.arch, theta, vartheta, measure, target)
    with np.printoptions(linewidth=100, precision=6, suppress=True):
        print(f"theta    = {theta}")
        print(f"vartheta = {vartheta}")
    print(f"risk(theta)    = {risk_exact(res.arch, theta, measure, target):.17g}")
    print(f"risk(vartheta) = {risk_exact(res.arch, vartheta, measure, target):.17g}")
    print(f"risk(midpoint) = {risk_exact(res.arch, mid, measure, target):.17g}")
    print(f"midpoint gap   = {gap:.17g} (positive violates convexity; mass/16 = {measure.mass / 16:.17g})")
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _verify_activation(seed: int):
    rng = np.random.default_rng(seed)
    cfg = DEFAULT_CLAMP
    checks = []

    xs = rng.uniform(-10.0, 10.0, 4000)
    worst = 0.0
    for exp in range(0, 21, 2):
        sharp = float(2**exp)
        dev = np.abs(smooth_relu(cfg, sharp, xs) - relu(xs)) - cfg.hi / sharp
        worst = max(worst, float(dev.max()))
    checks.append(("uniform_approximation", worst <= 1e-15, f"max excess {worst:.3g}"))

    bound = smooth_relu_derivative_bound(cfg)
    sup = 0.0
    for exp in range(0, 21, 2):
        sharp = float(2**exp)
        grid = np.linspace(-1.0, cfg.hi / sharp * 2.0, 20001)
        sup = max(sup, float(np.abs(smooth_relu_derivative(cfg, sharp, grid)).max()))
    checks.append(("derivative_bound", sup <= bound + 1e-12, f"sup {sup:.6g} vs bound {bound:g}"))

    sharp = 64.0
    lo_x, hi_x = cfg.lo / sharp, cfg.hi / sharp
    pts = rng.uniform(-2.0, 2.0, 4000)
    keep = np.ones(len(pts), dtype=bool)
    for kink in (0.0, lo_x, hi_x):
        keep &= np.abs(pts - kink) > 5e-6
    pts = pts[keep][:1000]
    h = 1e-6
    fd = (smooth_relu(cfg, sharp, pts + h) - smooth_relu(cfg, sharp, pts - h)) / (2 * h)
    an = smooth_relu_derivative(cfg, sharp, pts)
    err = np.abs(fd - an) / np.maximum(np.abs(an), 1e-3)
    checks.append(("derivative_fd", float(err.max()) <= 1e-6, f"max rel err {err.max():.3g}"))

    x = 0.75
    exact_candidates = [r for r in (2.0, 8.0, 1024.0) if cfg.hi / r < x]
    ok = all(
        smooth_relu(cfg, r, x) == x and smooth_relu_derivative(cfg, r, x) == 1.0
        for r in exact_candidates
    )
    checks.append(("identity_above_window", ok, "ramp exact once hi/sharpness < x"))
    return checks


def _verify_gradient(seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for _ in range(40):
        depth = int(rng.integers(1, 4))
        widths = (int(rng.integers(1, 4)),) + tuple(int(rng.integers(1, 4)) for _ in range(depth))
        arch = Architecture(widths)
        theta = rng.normal(0.0, 1.0, arch.param_count)
        m = int(rng.integers(1, 6))
        measure = DiscreteMeasure(rng.uniform(-1, 1, (m, widths[0])), rng.uniform(0, 1, m), -1.0, 1.0)
        target = TargetSpec.constant(rng.normal(0.0, 1.0, widths[-1]))
        g = generalized_gradient(arch, theta, measure, target)
        o = gradient_pathsum_oracle(arch, theta, measure, target)
        denom = max(float(np.linalg.norm(o)), 1e-30)
        worst = max(worst, float(np.linalg.norm(g - o)) / denom)
    checks.append(("pathsum_oracle_agreement", worst <= 1e-12, f"max rel dev {worst:.3g}"))

    worst = 0.0
    for _ in range(20):
        arch = Architecture((1, 2, 1))
        theta = rng.normal(0.0, 0.6, arch.param_count)
        sharp = float(2 ** rng.integers(2, 12))
        measure = DiscreteMeasure(rng.uniform(0, 1, (3, 1)), rng.uniform(0, 0.5, 3), 0.0, 1.0)
        target = TargetSpec.constant([0.5])
        g = smooth_gradient(arch, theta, measure, target, sharp)
        for i in range(arch.param_count):
            tp = theta.copy()
            tm = theta.copy()
            tp[i] += 1e-6
            tm[i] -= 1e-6
            fd = (risk_smooth(arch, tp, measure, target, sharp) - risk_smooth(arch, tm, measure, target, sharp)) / (tp[i] - tm[i])
            worst = max(worst, abs(fd - g[i]) / max(abs(g[i]), 1e-3))
    checks.append(("smooth_gradient_fd", worst <= 1e-5, f"max rel err {worst:.3g}"))

    bad = 0
    for _ in range(2000):
        depth = int(rng.integers(1, 4))
        widths = (int(rng.integers(1, 4)),) + tuple(int(rng.integers(1, 4)) for _ in range(depth))
        arch = Architecture(widths)
        theta = rng.normal(0.0, 2.0, arch.param_count)
        m = int(rng.integers(1, 4))
        measure = DiscreteMeasure(rng.uniform(-1, 1, (m, widths[0])), rng.uniform(0, 1, m), -1.0, 1.0)
        target = TargetSpec.constant(rng.normal(0.0, 1.0, widths[-1]))
        g = generalized_gradient(arch, theta, measure, target)
        risk = risk_exact(arch, theta, measure, target)
        bound = gradient_growth_bound(arch, theta, measure.mass, risk, measure.input_scale)
        if float(g @ g) > bound * (1 + 1e-12) + 1e-12:
            bad += 1
    checks.append(("growth_bound", bad == 0, f"{bad} violations in 2000 draws"))
    return checks


def _verify_lyapunov(seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for _ in range(2000):
        depth = int(rng.integers(1, 4))
        widths = (int(rng.integers(1, 4)),) + tuple(int(rng.integers(1, 4)) for _ in range(depth))
        arch = Architecture(widths)
        theta = rng.normal(0.0, 1.5, arch.param_count)
        xi = rng.normal(0.0, 1.0, widths[-1])
        m = int(rng.integers(1, 4))
        measure = DiscreteMeasure(rng.uniform(-1, 1, (m, widths[0])), rng.uniform(0, 1, m), -1.0, 1.0)
        target = TargetSpec.constant(xi)
        ctx = LyapunovContext(arch, xi)
        lhs, rhs = pairing(ctx, theta, measure, target)
        dev = abs(lhs - rhs) / (1.0 + abs(lhs))
        worst = max(worst, dev)
        risk = risk_exact(arch, theta, measure, target)
        worst = max(worst, abs(rhs - 4.0 * depth * risk) / (1.0 + abs(rhs)))
    checks.append(("pairing_identity", worst <= 1e-10, f"max rel dev {worst:.3g}"))

    worst = 0.0
    for _ in range(50):
        arch = Architecture((2, 3, 2))
        ctx = LyapunovContext(arch, rng.normal(0.0, 1.0, 2))
        theta = rng.normal(0.0, 1.0, arch.param_count)
        g = lyapunov_gradient(ctx, theta)
        for i in range(arch.param_count):
            tp, tm = theta.copy(), theta.copy()
            tp[i] += 1e-6
            tm[i] -= 1e-6
            fd = (lyapunov_value(ctx, tp) - lyapunov_value(ctx, tm)) / (tp[i] - tm[i])
            worst = max(worst, abs(fd - g[i]) / max(1.0, abs(g[i])))
    checks.append(("gradient_fd", worst <= 1e-8, f"max rel err {worst:.3g}"))

    bad = 0
    for _ in range(2000):
        depth = int(rng.integers(1, 5))
        widths = tuple(int(rng.integers(1, 4)) for _ in range(depth + 1))
        arch = Architecture(widths)
        ctx = LyapunovContext(arch, rng.normal(0.0, 1.0, widths[-1]))
        theta = rng.normal(0.0, 2.0, arch.param_count)
        low, high = sandwich_bounds(ctx, theta)
        value = lyapunov_value(ctx, theta)
        if not (low - 1e-9 <= value <= high + 1e-9):
            bad += 1
    checks.append(("sandwich", bad == 0, f"{bad} violations in 2000 draws"))
    return checks


def _verify_convexity(seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for widths in ((1, 2, 1), (1, 7, 1), (2, 3, 4, 2)):
        arch = Architecture(widths)
        xi = rng.normal(0.0, 1.0, widths[-1])
        measure = DiscreteMeasure(rng.uniform(0, 1, (5, widths[0])), rng.uniform(0.1, 1, 5), 0.0, 1.0)
        target = TargetSpec.constant(xi)
        theta, vartheta = nonconvexity_witness(arch, xi, measure)
        gap = midpoint_gap(arch, theta, vartheta, measure, target)
        worst = max(worst, abs(gap - measure.mass / 16.0))
    checks.append(("witness_gap", worst <= 1e-12, f"max |gap - mass/16| = {worst:.3g}"))

    bad = 0
    worst = 0.0
    for _ in range(200):
        depth = int(rng.integers(1, 4))
        widths = tuple(int(rng.integers(1, 4)) for _ in range(depth + 1))
        arch = Architecture(widths)
        head = arch.offsets[depth - 1]
        block = arch.param_count - head
        hidden = rng.normal(0.0, 1.0, head)
        v = rng.normal(0.0, 1.0, block)
        w = rng.normal(0.0, 1.0, block)
        m = int(rng.integers(1, 5))
        measure = DiscreteMeasure(rng.uniform(-1, 1, (m, widths[0])), rng.uniform(0, 1, m), -1.0, 1.0)
        target = TargetSpec.constant(rng.normal(0.0, 1.0, widths[-1]))
        lhs, rhs = last_layer_midpoint_check(arch, hidden, v, w, measure, target)
        if lhs > rhs + 1e-12:
            bad += 1
        worst = max(worst, lhs - rhs)
    checks.append(("last_layer_convexity", bad == 0, f"max lhs-rhs = {worst:.3g}"))

    bad = 0
    for _ in range(200):
        widths = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        arch = Architecture(widths)
        m = int(rng.integers(1, 5))
        measure = DiscreteMeasure(rng.uniform(-1, 1, (m, widths[0])), rng.uniform(0, 1, m), -1.0, 1.0)
        target = TargetSpec.constant(rng.normal(0.0, 1.0, widths[-1]))
        t1 = rng.normal(0.0, 1.0, arch.param_count)
        t2 = rng.normal(0.0, 1.0, arch.param_count)
        if midpoint_gap(arch, t1, t2, measure, target) > 1e-12:
            bad += 1
    checks.append(("depth1_convex", bad == 0, f"{bad} violations in 200 pairs"))
    return checks


def _verify_thresholds(seed: int):
    rng = np.random.default_rng(seed)
    checks = []

    arch = Architecture((1, 1))
    value = gd_threshold(arch, np.zeros(2), np.zeros(1), 1.0)
    checks.append(("gd_threshold_example", value == 0.25, f"got {value!r}, expected 0.25"))

    arch = Architecture((1, 7, 1))
    value = sgd_threshold(arch, 0.0, 1.0, 0.0, 1.0)
    checks.append(
        ("sgd_threshold_example", abs(value - 176.0**-4) <= 1e-25, f"got {value:.6g}, expected 176^-4")
    )

    arch = Architecture((1, 3, 1))
    theta0 = rng.normal(0.0, 0.5, arch.param_count)
    measure = DiscreteMeasure.uniform_grid(0.0, 1.0, 51)
    target = TargetSpec.constant([1.0])
    gamma = 0.99 * gd_threshold(arch, theta0, target.f0, measure.mass, measure.input_scale)
    trajectory = gd_run(arch, theta0, measure, target, Schedule.constant(gamma), 400)
    report = descent_certificate(trajectory, LyapunovContext(arch, target.f0))
    checks.append(("gd_descent", report.passed, report.summary()))

    arch = Architecture((1, 7, 1))
    theta0 = gaussian_init(arch, 7, 7**-0.5, 1)[0]
    gamma = sgd_threshold(arch, float(np.linalg.norm(theta0)), 1.0, 0.0, 1.0)
    sampler = UniformSampler(0.0, 1.0, 1, 7)
    cfg = SgdConfig(batch_size=20, steps=500, seed=7, eval_samples=0, eval_steps=())
    trajectory = sgd_run(arch, theta0, Schedule.constant(gamma), sampler, [1.0], cfg)
    report = descent_certificate(trajectory, LyapunovContext(arch, [1.0]))
    checks.append(("sgd_descent", report.passed, report.summary()))
    return checks


VERIFY_SUITES = {
    "activation": _verify_activation,
    "gradient": _verify_gradient,
    "lyapunov": _verify_lyapunov,
    "convexity": _verify_convexity,
    "thresholds": _verify_thresholds,
}


def cmd_verify(args) -> int:
    names = list(VERIFY_SUITES) if args.suite == "all" else [args.suite]
    seed = args.seed if args.seed is not None else 0
    all_ok = True
    for name in names:
        for prop, ok, detail in VERIFY_SUITES[name](seed):
            all_ok &= ok
            print(f"{'PASS' if ok else 'FAIL'}  {name}.{prop}: {detail}")
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------


def _add_common(sub, *, points=False):
    sub.add_argument("--preset", choices=sorted(PRESETS), help="named experiment configuration")
    sub.add_argument("--arch", help="comma-separated widths, e.g. 1,7,1")
    sub.add_argument("--xi", help="constant target value(s), comma-separated")
    sub.add_argument("--a", type=float, help="input box lower end (default 0)")
    sub.add_argument("--b", type=float, help="input box upper end (default 1)")
    sub.add_argument("--seed", type=int, help="master seed (default 0)")
    sub.add_argument("--out", help="output CSV path")
    if points:
        sub.add_argument("--points", type=int, help="grid points of the measure (default 101)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relu-lyapunov",
        description="Train and verify deep ReLU networks with constant targets.",
    )
    subparsers = parser.add_subparsers(dest="command")

    sub = subparsers.add_parser("sgd", help="multi-trial SGD experiment, CSV of mean risk")
    _add_common(sub)
    sub.add_argument("--gamma", type=float, help="step size (default preset's, else 1/2000)")
    sub.add_argument("--batch", type=int, help="minibatch size (default 100)")
    sub.add_argument("--steps", type=int, help="SGD steps (default 100000)")
    sub.add_argument("--trials", type=int, help="independent trials (default 100)")
    sub.add_argument("--eval-samples", type=int, default=10_000, help="Monte Carlo sample size per checkpoint")
    sub.set_defaults(func=cmd_sgd)

    sub = subparsers.add_parser("gd", help="full-measure gradient descent on a grid")
    _add_common(sub, points=True)
    sub.add_argument("--gamma", type=float, help="step size (default 0.9x the descent threshold)")
    sub.add_argument("--steps", type=int, help="steps (default 10000)")
    sub.set_defaults(func=cmd_gd)

    sub = subparsers.add_parser("gf", help="Euler gradient flow on a grid")
    _add_common(sub, points=True)
    sub.add_argument("--dt", type=float, help="Euler step (default 0.5x the descent threshold)")
    sub.add_argument("--steps", type=int, help="steps (default 10000)")
    sub.set_defaults(func=cmd_gf)

    sub = subparsers.add_parser("verify", help="run self-checks; exit 0 iff all pass")
    sub.add_argument("--suite", choices=["all"] + sorted(VERIFY_SUITES), default="all")
    sub.add_argument("--seed", type=int, help="seed for the randomized checks (default 0)")
    sub.set_defaults(func=cmd_verify)

    sub = subparsers.add_parser("nonconvexity", help="print an explicit midpoint violation")
    _add_common(sub, points=True)
    sub.set_defaults(func=cmd_nonconvexity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"diverged: {exc} (last finite step {exc.step})", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
