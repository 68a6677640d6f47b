"""Box-kernel averaging: the average gradient T(h, .), its n-D field, and the
homogenized objective F(h, .).

F(h, x) is the mean of f over the cube of side h centred at x. Its gradient is
the mean of grad f over the same cube, and by the fundamental theorem of
calculus component i collapses to an (n-1)-D mean of the difference
f(x + h/2 e_i) - f(x - h/2 e_i), divided by h. Everything here is defined only
where the whole cube fits inside the domain box (the inset domain).
"""

from __future__ import annotations

import functools
import heapq
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import config
from .errors import EmptyDomainError, InsetError, QuadratureError
from .funcmodel import ScalarField

_CHUNK_POINTS = 1 << 20


@dataclass(frozen=True)
class GaussPolicy:
    """Fixed-order tensor-product Gauss-Legendre."""

    order: int = config.GAUSS_ORDER

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("Gauss order must be >= 2")


@dataclass(frozen=True)
class AdaptivePolicy:
    """Panel bisection driven by a Gauss(q) vs Gauss(2q) error estimate."""

    tol: float = config.ADAPTIVE_TOL
    order: int = config.GAUSS_ORDER
    max_panels: int = config.ADAPTIVE_MAX_PANELS

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("adaptive tolerance must be positive")


@dataclass(frozen=True)
class MonteCarloPolicy:
    samples: int = config.MC_SAMPLES
    seed: int = 0
    force: bool = False  # allow on dimensions where tensor rules are affordable

    def __post_init__(self):
        if self.samples < config.MC_MIN_SAMPLES:
            raise ValueError(f"Monte Carlo needs >= {config.MC_MIN_SAMPLES} samples")


Policy = Union[GaussPolicy, AdaptivePolicy, MonteCarloPolicy]


def default_policy(dim, seed=0):
    if dim > config.MC_MAX_EXACT_DIM:
        return MonteCarloPolicy(seed=seed)
    return GaussPolicy()


@dataclass(frozen=True)
class HomogenizationOperator:
    h: float
    policy: Policy = GaussPolicy()

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"scale must be positive and finite, got {self.h}")

    def check_policy(self, f: ScalarField):
        p = self.policy
        if isinstance(p, MonteCarloPolicy) and f.dim <= config.MC_MAX_EXACT_DIM and not p.force:
            raise ValueError(
                f"monte-carlo policy is reserved for dimension > {config.MC_MAX_EXACT_DIM}"
                f" (got {f.dim}); set force=True to override"
            )

    def inset(self, f: ScalarField):
        return inset_box(f, self.h)

    def average(self, f: ScalarField, X) -> np.ndarray:
        """F(h, x) at one point (shape (n,)) or a batch (shape (m, n)); values only."""
        X, single = _as_batch(f, X)
        self.check_policy(f)
        _check_inset(f, self.h, X)
        vals, _, _ = _cube_mean(_shifted(f.func, X, None, 0.0), f.dim, self.h, self.policy,
                                estimate=False, degree=f.poly_degree, stream=0)
        return vals[0] if single else vals

    def gradient(self, f: ScalarField, X) -> np.ndarray:
        """The average gradient field at one point or a batch; values only."""
        X, single = _as_batch(f, X)
        self.check_policy(f)
        _check_inset(f, self.h, X)
        G, _, _ = _field(f, X, self.h, self.policy, estimate=False)
        return G[0] if single else G


class HomogValue(NamedTuple):
    value: float
    error: float
    evaluations: int


class ConvolutionCheck(NamedTuple):
    quotient: float  # (f(x+h/2) - f(x-h/2)) / h
    average: float  # box average of f' by quadrature
    error: float  # quadrature error estimate on ``average``


def inset_box(f: ScalarField, h: float):
    """Centres whose cube of side h fits in the box, as (lower, upper)."""
    lo = f.lower + h / 2
    hi = f.upper - h / 2
    if np.any(lo > hi + _slack(f)):
        raise EmptyDomainError(
            f"empty inset domain: scale h={h:g} exceeds the shortest box edge {f.edges.min():g}"
        )
    return lo, np.maximum(hi, lo)


def _slack(f):
    return 1e-12 * np.maximum(1.0, f.edges)


def _check_inset(f, h, X):
    lo, hi = inset_box(f, h)
    s = _slack(f)
    bad = np.any((X < lo - s) | (X > hi + s), axis=-1)
    if np.any(bad):
        p = X[np.argmax(bad)]
        raise InsetError(
            f"point {tuple(float(v) for v in p)} needs to lie in the inset box "
            f"{[(float(a), float(b)) for a, b in zip(lo, hi)]} for h={h:g}",
            point=tuple(p),
            required=(lo, hi),
        )


def _as_batch(f, X):
    X = np.asarray(X, dtype=float)
    single = X.ndim <= 1
    X = X.reshape(-1, f.dim)
    return X, single


def _shifted(func, X, axis, delta):
    """g(offsets) for every centre: evaluates func at X + embedded offsets.

    ``axis`` is the axis pinned at +-delta (FTC reduction) and left out of the
    offset space; None means offsets span all axes.
    """
    m, n = X.shape
    free = [k for k in range(n) if k != axis]

    def g(U):
        # U: (Q, k) offsets -> values (m, Q)
        P = np.repeat(X[:, None, :], U.shape[0], axis=1)
        if free:
            P[:, :, free] += U[None, :, :]
        if axis is None:
            return func(P)
        P[:, :, axis] += delta
        up = func(P)
        P[:, :, axis] -= 2 * delta
        return up - func(P)

    g.rows = m
    return g


@functools.lru_cache(maxsize=64)
def _gauss_rule(order, k):
    xi, w = np.polynomial.legendre.leggauss(order)
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    grids = np.meshgrid(*([xi] * k), indexing="ij")
    wgrids = np.meshgrid(*([w] * k), indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
    weights = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=-1), axis=-1) / 2.0**k
    return nodes, weights


def _apply_rule(g, nodes, weights, center, half):
    U = center + half * nodes
    rows = g.rows
    step = max(1, _CHUNK_POINTS // max(1, rows))
    out = np.zeros(rows)
    for s in range(0, U.shape[0], step):
        out += g(U[s:s + step]) @ weights[s:s + step]
    return out


def _cube_mean(g, k, h, policy, estimate, degree, stream):
    """Mean of g over the k-cube [-h/2, h/2]^k, for every row of g.

    Returns (values, error estimates, evaluation count per row).
    """
    rows = g.rows
    if k == 0:
        return g(np.zeros((1, 0))), np.zeros(rows), 1
    if isinstance(policy, GaussPolicy):
        nodes, weights = _gauss_rule(policy.order, k)
        vals = _apply_rule(g, nodes, weights, 0.0, h / 2)
        evals = nodes.shape[0]
        err = np.zeros(rows)
        if estimate and not (degree is not None and degree <= 2 * policy.order - 1):
            n2, w2 = _gauss_rule(2 * policy.order, k)
            err = np.abs(vals - _apply_rule(g, n2, w2, 0.0, h / 2))
            evals += n2.shape[0]
        return vals, err, evals
    if isinstance(policy, MonteCarloPolicy):
        rng = np.random.default_rng([policy.seed, k, stream])
        U = rng.uniform(-h / 2, h / 2, size=(policy.samples, k))
        vals = np.empty(rows)
        err = np.empty(rows)
        sq = np.zeros(rows)
        tot = np.zeros(rows)
        step = max(1, _CHUNK_POINTS // max(1, rows))
        for s in range(0, policy.samples, step):
            chunk = g(U[s:s + step])
            tot += chunk.sum(axis=1)
            sq += (chunk**2).sum(axis=1)
        n = policy.samples
        vals[:] = tot / n
        var = np.maximum(sq / n - vals**2, 0.0) * n / (n - 1)
        err[:] = np.sqrt(var / n)
        return vals, err, n
    if isinstance(policy, AdaptivePolicy):
        return _adaptive_mean(g, k, h, policy)
    raise TypeError(f"unknown quadrature policy {policy!r}")


def _adaptive_mean(g, k, h, policy):
    n1, w1 = _gauss_rule(policy.order, k)
    n2, w2 = _gauss_rule(2 * policy.order, k)
    rows = g.rows
    vals = np.empty(rows)
    errs = np.empty(rows)
    evals = 0
    for r in range(rows):
        row = _row(g, r)

        def panel(center, half):
            a = _apply_rule(row, n1, w1, center, half)[0]
            b = _apply_rule(row, n2, w2, center, half)[0]
            return b, abs(a - b)

        center = np.zeros(k)
        half = np.full(k, h / 2)
        v, e = panel(center, half)
        frac = 1.0
        heap = [(-e * frac, 0, center, half, v, e, frac)]
        total_v, total_e = v, e
        panels, counter = 1, 1
        while total_e > policy.tol:
            if panels >= policy.max_panels:
                raise QuadratureError(
                    f"adaptive quadrature stopped at {panels} panels with error {total_e:.3e}",
                    estimate=total_v, error=total_e,
                )
            _, _, c, hw, v, e, frac = heapq.heappop(heap)
            total_v -= frac * v
            total_e -= frac * e
            axis = int(np.argmax(hw))
            for sign in (-1.0, 1.0):
                c2 = c.copy()
                hw2 = hw.copy()
                hw2[axis] /= 2
                c2[axis] += sign * hw2[axis]
                v2, e2 = panel(c2, hw2)
                f2 = frac / 2
                total_v += f2 * v2
                total_e += f2 * e2
                heapq.heappush(heap, (-e2 * f2, counter, c2, hw2, v2, e2, f2))
                counter += 1
            panels += 1
        # re-sum to shed the drift of the running totals
        vals[r] = math.fsum(item[6] * item[4] for item in heap)
        errs[r] = sum(item[6] * item[5] for item in heap)
        evals = max(evals, (2 * panels - 1) * (n1.shape[0] + n2.shape[0]))
    return vals, errs, evals


def _row(g, r):
    def one(U):
        return g(U)[r:r + 1]

    one.rows = 1
    return one


def _field(f, X, h, policy, estimate):
    m, n = X.shape
    G = np.empty((m, n))
    E = np.empty((m, n))
    evals = 0
    for i in range(n):
        g = _shifted(f.func, X, i, h / 2)
        vals, err, cnt = _cube_mean(g, n - 1, h, policy, estimate, f.poly_degree, stream=1 + i)
        G[:, i] = vals / h
        E[:, i] = err / h
        evals += 2 * cnt
    return G, E, evals


def avg_gradient_1d(f: ScalarField, op: HomogenizationOperator, x: float) -> float:
    """(f(x + h/2) - f(x - h/2)) / h, from exactly two evaluations."""
    if f.dim != 1:
        raise ValueError("avg_gradient_1d needs a 1-D field")
    X = np.array([[float(x)]])
    _check_inset(f, op.h, X)
    h = op.h
    return float((f.scalar(x + h / 2) - f.scalar(x - h / 2)) / h)


def avg_gradient_field(f: ScalarField, op: HomogenizationOperator, x) -> np.ndarray:
    X, single = _as_batch(f, x)
    op.check_policy(f)
    _check_inset(f, op.h, X)
    G, E, _ = _field(f, X, op.h, op.policy, estimate=isinstance(op.policy, AdaptivePolicy))
    return G[0] if single else G


def avg_gradient_field_with_error(f, op, x):
    """Like avg_gradient_field but also returns per-component error estimates."""
    X, single = _as_batch(f, x)
    op.check_policy(f)
    _check_inset(f, op.h, X)
    G, E, cnt = _field(f, X, op.h, op.policy, estimate=True)
    return (G[0], E[0], cnt) if single else (G, E, cnt)


def homogenize(f: ScalarField, op: HomogenizationOperator, x) -> HomogValue:
    """F(h, x): the mean of f over the cube of side h centred at x."""
    X, _ = _as_batch(f, x)
    if X.shape[0] != 1:
        raise ValueError("homogenize takes a single point; use op.average for batches")
    op.check_policy(f)
    _check_inset(f, op.h, X)
    vals, err, cnt = _cube_mean(_shifted(f.func, X, None, 0.0), f.dim, op.h, op.policy,
                                estimate=True, degree=f.poly_degree, stream=0)
    return HomogValue(float(vals[0]), float(err[0]), int(cnt))


def kernel_convolution_check(f: ScalarField, op: HomogenizationOperator, x: float) -> ConvolutionCheck:
    """Both sides of the average-gradient identity at one point.

    The difference quotient comes from two evaluations of f; the box average
    of f' is integrated numerically from the analytic derivative.
    """
    if f.dim != 1:
        raise ValueError("kernel_convolution_check needs a 1-D field")
    if f.grad is None:
        raise ValueError(f"{f.name} has no analytic derivative")
    quotient = avg_gradient_1d(f, op, x)
    X = np.array([[float(x)]])
    deriv = lambda P: f.grad(P)[..., 0]
    degree = None if f.poly_degree is None else max(f.poly_degree - 1, 0)
    policy = op.policy
    if isinstance(policy, MonteCarloPolicy):
        raise ValueError("monte-carlo is not used in one dimension")
    vals, err, _ = _cube_mean(_shifted(deriv, X, None, 0.0), 1, op.h, policy,
                              estimate=True, degree=degree, stream=0)
    return ConvolutionCheck(quotient, float(vals[0]), float(err[0]))
