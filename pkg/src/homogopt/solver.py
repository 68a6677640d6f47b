"""Global-minimization drivers.

``smoothed_descent`` runs projected gradient descent on F(h, .) for a
decreasing sequence of scales, warm-starting each stage from the last and
finishing on the raw objective. ``line_decomposition_solve`` repeatedly
minimizes the objective along random lines through the current point.
``plain_descent`` is the single-stage baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import config
from .errors import DomainError, EmptyDomainError, InsetError
from .funcmodel import ScalarField, restrict_to_line
from .homog import HomogenizationOperator, default_policy, inset_box
from .scale import ContinuationSchedule
from .search1d import bisect_sign, golden_section

CONVERGED = "converged"
MAX_ITERS = "max-iters"
CLIPPED = "inset-clipped"


@dataclass(frozen=True)
class DescentParams:
    step0: float = config.STEP0
    armijo: float = config.ARMIJO_C
    max_iters: int = config.STAGE_MAX_ITERS
    grad_tol: float = config.GRAD_TOL
    max_backtracks: int = config.MAX_BACKTRACKS
    max_move: float = config.MAX_MOVE_FRACTION  # trial moves capped at this fraction of the shortest box edge


@dataclass(frozen=True)
class LineParams:
    x0: tuple = None
    max_lines: int = config.LINE_MAX
    move_tol: float = config.LINE_MOVE_TOL
    still_count: int = config.LINE_STILL_COUNT
    scan_points: int = config.LINE_SCAN_POINTS


@dataclass
class IterRecord:
    stage: int
    h: object  # float, or "raw"
    point: tuple
    value: float
    grad_norm: float
    step: float
    clipped: bool = False


@dataclass
class StageSummary:
    h: object
    status: str
    iterations: int
    start: tuple
    end: tuple
    value: float


@dataclass
class SolverTrace:
    method: str
    x0: tuple
    records: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    status: str = CONVERGED
    counts: dict = field(default_factory=lambda: {"f": 0, "gradient": 0, "quadrature": 0})
    final_point: tuple = ()
    final_value: float = math.nan

    def to_dict(self):
        return {
            "method": self.method,
            "x0": list(self.x0),
            "status": self.status,
            "final_point": list(self.final_point),
            "final_value": self.final_value,
            "counts": dict(self.counts),
            "stages": [asdict(s) for s in self.stages],
            "records": [asdict(r) for r in self.records],
        }


class _Counted:
    """Wraps a field so every evaluated point is tallied into one bucket."""

    def __init__(self, f: ScalarField, counts: dict):
        self.counts = counts
        self.bucket = "f"

        def func(X):
            X = np.asarray(X, dtype=float)
            counts[self.bucket] += int(np.prod(X.shape[:-1]))
            return f.func(X)

        self.field = ScalarField(f.name, f.lower, f.upper, func, f.grad, f.expression, f.poly_degree)


def _fd_gradient(func, x, lo, hi):
    n = x.size
    g = np.empty(n)
    for i in range(n):
        step = 1e-6 * max(1.0, abs(x[i]))
        a = max(x[i] - step, lo[i])
        b = min(x[i] + step, hi[i])
        xa, xb = x.copy(), x.copy()
        xa[i], xb[i] = a, b
        g[i] = (func(xb) - func(xa)) / (b - a)
    return g


def _descend(obj, grad, lo, hi, x, params: DescentParams, stage, h, trace, max_move):
    """Projected gradient descent with Armijo backtracking on one stage.

    The first trial of every iteration moves at most ``max_move``, so one
    long step cannot leap over a barrier into another basin.
    """
    x = np.clip(np.asarray(x, dtype=float), lo, hi)
    fx = obj(x)
    if not math.isfinite(fx):
        raise DomainError(f"non-finite objective at {tuple(x)}", tuple(x))
    g = grad(x)
    trace.counts["gradient"] += 1
    alpha = params.step0
    status = MAX_ITERS
    it = 0
    for it in range(params.max_iters):
        pg = x - np.clip(x - g, lo, hi)
        gnorm = float(np.linalg.norm(pg))
        if gnorm <= params.grad_tol * (1.0 + abs(fx)):
            status = CONVERGED
            break
        accepted = False
        alpha = min(alpha, max_move / max(float(np.linalg.norm(g)), 1e-300))
        for _ in range(params.max_backtracks):
            trial = x - alpha * g
            xn = np.clip(trial, lo, hi)
            d = xn - x
            if not np.any(d):
                alpha *= 0.5
                continue
            fn = obj(xn)
            if fn <= fx + params.armijo * float(g @ d):
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no representable decrease left along the projected direction
            status = CONVERGED
            break
        clipped = bool(np.any(trial != xn))
        x, fx = xn, fn
        g = grad(x)
        trace.counts["gradient"] += 1
        trace.records.append(IterRecord(stage, h, tuple(map(float, x)), float(fx),
                                        float(np.linalg.norm(g)), float(alpha), clipped))
        alpha = min(2.0 * alpha, 1e6 * params.step0)
    else:
        it = params.max_iters
    if status == CONVERGED:
        # stationary only because a box face blocks the descent direction
        snap = 8 * np.finfo(float).eps * (1.0 + np.abs(lo) + np.abs(hi))
        blocked = ((x <= lo + snap) & (g > 0)) | ((x >= hi - snap) & (g < 0))
        if np.any(blocked) and np.linalg.norm(g) > params.grad_tol * (1.0 + abs(fx)):
            status = CLIPPED
    return x, fx, status, it


def _raw_stage(f, x, params, trace, stage):
    obj = lambda p: float(f.func(p))
    if f.grad is not None:
        grad = lambda p: f.grad(p)
    else:
        grad = lambda p: _fd_gradient(obj, p, f.lower, f.upper)
    start = tuple(map(float, x))
    x, fx, status, it = _descend(obj, grad, f.lower, f.upper, x, params, stage, "raw", trace,
                                 params.max_move * float(f.edges.min()))
    trace.stages.append(StageSummary("raw", status, it, start, tuple(map(float, x)), float(fx)))
    return x, status


def smoothed_descent(f: ScalarField, schedule: ContinuationSchedule, x0, params: DescentParams = None,
                     policy=None) -> SolverTrace:
    params = params or DescentParams()
    policy = policy or default_policy(f.dim)
    x0 = np.asarray(x0, dtype=float).reshape(f.dim)
    trace = SolverTrace("continuation", tuple(map(float, x0)))
    counted = _Counted(f, trace.counts)
    cf = counted.field

    lo, hi = inset_box(f, schedule.scales[0])
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise InsetError(f"x0={tuple(x0)} lies outside the inset box for h={schedule.scales[0]:g}",
                         point=tuple(x0), required=(lo, hi))
    x = x0
    status = CONVERGED
    counted.bucket = "quadrature"
    for k, h in enumerate(schedule.scales):
        op = HomogenizationOperator(h, policy)
        lo, hi = inset_box(f, h)
        obj = lambda p, op=op: float(op.average(cf, p))
        grad = lambda p, op=op: op.gradient(cf, p)
        start = tuple(map(float, x))
        x, fx, status, it = _descend(obj, grad, lo, hi, x, params, k, h, trace,
                                     params.max_move * float(f.edges.min()))
        trace.stages.append(StageSummary(h, status, it, start, tuple(map(float, x)), float(fx)))
    if schedule.polish:
        counted.bucket = "f"
        x, status = _raw_stage(cf, x, params, trace, len(schedule.scales))
    trace.status = status
    trace.final_point = tuple(map(float, x))
    trace.final_value = float(f.func(x))
    return trace


def plain_descent(f: ScalarField, x0, params: DescentParams = None) -> SolverTrace:
    params = params or DescentParams()
    x0 = np.asarray(x0, dtype=float).reshape(f.dim)
    if not f.contains(x0):
        raise DomainError(f"x0={tuple(x0)} lies outside the domain box", tuple(x0))
    trace = SolverTrace("plain", tuple(map(float, x0)))
    counted = _Counted(f, trace.counts)
    x, status = _raw_stage(counted.field, x0, params, trace, 0)
    trace.status = status
    trace.final_point = tuple(map(float, x))
    trace.final_value = float(f.func(x))
    return trace


def _line_minimize(g: ScalarField, t0: float, scan_points: int):
    """Global-ish minimum of a 1-D slice: grid scan, golden-section, then a
    derivative-sign bisection when the slope is available."""
    lo, hi = float(g.lower[0]), float(g.upper[0])
    ts = np.linspace(lo, hi, scan_points)
    vals = g.scalar(ts)
    i = int(np.argmin(vals))
    a, b = ts[max(i - 1, 0)], ts[min(i + 1, scan_points - 1)]
    t, _ = golden_section(lambda s: float(g.scalar(s)), a, b, tol=1e-12 * (hi - lo))
    if g.grad is not None:
        d = lambda s: float(g.scalar_derivative(s))
        w = max(1e-7 * (hi - lo), 1e-12)
        p, q = max(a, t - w), min(b, t + w)
        dp, dq = d(p), d(q)
        if dp < 0 < dq:
            p, q = bisect_sign(d, p, q, xtol=4e-16 * max(1.0, abs(t)), fa=dp)
            t = 0.5 * (p + q)
    if float(g.scalar(t)) > float(g.scalar(t0)):
        t = t0
    return t


def line_decomposition_solve(f: ScalarField, seed: int, params: LineParams = None) -> SolverTrace:
    """Minimize a 2-D field by exact minimization along random lines.

    Each line passes through the current point with a uniformly random
    direction; near-vertical lines are parametrized by y instead of x.
    """
    if f.dim != 2:
        raise ValueError("line decomposition needs a 2-D field")
    params = params or LineParams()
    rng = np.random.default_rng(seed)
    if params.x0 is None:
        x = rng.uniform(f.lower, f.upper)
    else:
        x = np.asarray(params.x0, dtype=float).reshape(2)
        if not f.contains(x):
            raise DomainError(f"x0={tuple(x)} lies outside the domain box", tuple(x))
    trace = SolverTrace("line-decomposition", tuple(map(float, x)))
    counted = _Counted(f, trace.counts)
    cf = counted.field
    fx = float(cf.func(x))
    still = 0
    status = MAX_ITERS
    lines = 0
    for lines in range(1, params.max_lines + 1):
        theta = rng.uniform(0.0, math.pi)
        c, s = math.cos(theta), math.sin(theta)
        if abs(c) >= abs(s):
            along, slope, t0 = "x", s / c, x[0]
            intercept = x[1] - slope * x[0]
        else:
            along, slope, t0 = "y", c / s, x[1]
            intercept = x[0] - slope * x[1]
        try:
            g = restrict_to_line(cf, slope, intercept, along)
        except EmptyDomainError:
            continue
        t = _line_minimize(g, float(np.clip(t0, g.lower[0], g.upper[0])), params.scan_points)
        new = np.empty(2)
        if along == "x":
            new[:] = (t, slope * t + intercept)
        else:
            new[:] = (slope * t + intercept, t)
        new = np.clip(new, f.lower, f.upper)
        fn = float(cf.func(new))
        move = 0.0
        if fn <= fx:
            move = float(np.linalg.norm(new - x))
            x, fx = new, fn
        trace.records.append(IterRecord(0, "line", tuple(map(float, x)), fx, math.nan, move))
        still = still + 1 if move < params.move_tol else 0
        if still >= params.still_count:
            status = CONVERGED
            break
    trace.stages.append(StageSummary("line", status, lines, trace.x0, tuple(map(float, x)), fx))
    trace.status = status
    trace.final_point = tuple(map(float, x))
    trace.final_value = fx
    return trace


def homogenized_field(f: ScalarField, h: float, policy=None) -> ScalarField:
    """F(h, .) as a field on the inset box, with the average gradient field as
    its gradient."""
    op = HomogenizationOperator(h, policy or default_policy(f.dim))
    lo, hi = inset_box(f, h)
    if not np.all(hi > lo):
        raise EmptyDomainError(f"inset box for h={h:g} has no interior")

    def func(X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, f.dim)
        return op.average(f, flat).reshape(X.shape[:-1])

    def grad(X):
        X = np.asarray(X, dtype=float)
        flat = X.reshape(-1, f.dim)
        return op.gradient(f, flat).reshape(X.shape)

    return ScalarField(f"F[h={h:g}]({f.name})", lo, hi, func, grad)


def staged_line_decomposition(f: ScalarField, schedule: ContinuationSchedule, x0, seed: int,
                              params: LineParams = None, policy=None) -> SolverTrace:
    """Line decomposition on F(h, .) for every scale of a schedule, then on f."""
    params = params or LineParams()
    x = np.asarray(x0, dtype=float).reshape(2)
    trace = SolverTrace("line-decomposition-staged", tuple(map(float, x)))
    counted = _Counted(f, trace.counts)
    counted.bucket = "quadrature"
    fields = [(h, homogenized_field(counted.field, h, policy)) for h in schedule.scales]
    if schedule.polish:
        fields.append(("raw", counted.field))
    for k, (h, g) in enumerate(fields):
        counted.bucket = "f" if h == "raw" else "quadrature"
        start = np.clip(x, g.lower, g.upper)
        sub = line_decomposition_solve(
            g, seed + k,
            LineParams(tuple(start), params.max_lines, params.move_tol, params.still_count, params.scan_points),
        )
        for r in sub.records:
            r.stage, r.h = k, h
        trace.records.extend(sub.records)
        trace.stages.append(StageSummary(h, sub.status, len(sub.records), tuple(map(float, start)),
                                         sub.final_point, sub.final_value))
        x = np.asarray(sub.final_point)
        trace.status = sub.status
    trace.final_point = tuple(map(float, x))
    trace.final_value = float(f.func(x))
    return trace
