"""Objective functions on axis-aligned boxes, and the built-in test corpus."""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from . import config
from .errors import EmptyDomainError
from .expr import Expression, compile_expression, differentiate, parse, polynomial_degree, to_text
from .search1d import bisect_sign, golden_section


@dataclass(frozen=True, eq=False)
class ScalarField:
    """An n-variate objective on the box ``[lower, upper]``.

    ``func`` maps an array of shape (..., n) to shape (...); ``grad`` (if any)
    maps (..., n) to (..., n).
    """

    name: str
    lower: np.ndarray
    upper: np.ndarray
    func: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    expression: Optional[Expression] = None
    poly_degree: Optional[int] = None

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise ValueError("box bounds must be finite")
        if not np.all(lower < upper):
            raise ValueError(f"empty box: lower={lower}, upper={upper}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self):
        return self.lower.size

    @property
    def edges(self):
        return self.upper - self.lower

    @property
    def box(self):
        return [(float(a), float(b)) for a, b in zip(self.lower, self.upper)]

    def __call__(self, X):
        return self.func(np.asarray(X, dtype=float))

    def value(self, x) -> float:
        return float(self.func(np.asarray(x, dtype=float).reshape(self.dim)))

    def gradient(self, X):
        if self.grad is None:
            raise ValueError(f"{self.name} has no analytic gradient")
        return self.grad(np.asarray(X, dtype=float))

    def scalar(self, x):
        """Evaluate a 1-D field at scalar or array ``x`` (no trailing axis)."""
        return self.func(np.asarray(x, dtype=float)[..., None])

    def scalar_derivative(self, x):
        return self.gradient(np.asarray(x, dtype=float)[..., None])[..., 0]

    def contains(self, x, slack=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - slack) and np.all(x <= self.upper + slack))

    @classmethod
    def from_expression(cls, text, variables, box, name=None):
        e = parse(text, variables)
        return cls.from_parsed(e, box, name=name or text)

    @classmethod
    def from_parsed(cls, e: Expression, box, name=None):
        box = np.asarray(box, dtype=float).reshape(-1, 2)
        if box.shape[0] != len(e.variables):
            raise ValueError(f"box has {box.shape[0]} axes, expression has {len(e.variables)} variables")
        func = compile_expression(e)
        grad = None
        try:
            partials = [compile_expression(differentiate(e, v)) for v in e.variables]
        except ValueError:
            partials = None
        if partials is not None:
            def grad(X, _p=partials):
                return np.stack([p(X) for p in _p], axis=-1)
        return cls(
            name=name or to_text(e),
            lower=box[:, 0],
            upper=box[:, 1],
            func=func,
            grad=grad,
            expression=e,
            poly_degree=polynomial_degree(e),
        )


def restrict_to_line(f: ScalarField, a: float, b: float, along: str = "x") -> ScalarField:
    """The 1-D slice g(t) = f(t, a*t + b) of a 2-D field.

    With ``along="y"`` the roles swap: g(t) = f(a*t + b, t). This is how
    near-vertical lines are handled.
    """
    if f.dim != 2:
        raise ValueError("restrict_to_line needs a 2-D field")
    free, tied = (0, 1) if along == "x" else (1, 0)
    lo, hi = f.lower[free], f.upper[free]
    tlo, thi = f.lower[tied], f.upper[tied]
    if a == 0:
        if not tlo <= b <= thi:
            raise EmptyDomainError(f"line a={a}, b={b} misses the box")
    else:
        r1, r2 = sorted(((tlo - b) / a, (thi - b) / a))
        lo, hi = max(lo, r1), min(hi, r2)
    if not lo < hi:
        raise EmptyDomainError(f"line a={a}, b={b} misses the box")

    def embed(T):
        T = np.asarray(T, dtype=float)[..., 0]
        P = np.empty(T.shape + (2,))
        P[..., free] = T
        P[..., tied] = a * T + b
        # rounding can push the tied coordinate a hair outside the box
        P[..., tied] = np.clip(P[..., tied], f.lower[tied], f.upper[tied])
        return P

    def func(T):
        return f.func(embed(T))

    grad = None
    if f.grad is not None:
        def grad(T):
            G = f.grad(embed(T))
            return (G[..., free] + a * G[..., tied])[..., None]

    return ScalarField(
        name=f"{f.name} | line({along}, a={a:g}, b={b:g})",
        lower=[lo],
        upper=[hi],
        func=func,
        grad=grad,
    )


# -- brute-force extrema -----------------------------------------------------


@dataclass(frozen=True)
class Extremum:
    point: tuple
    value: float
    boundary: bool


@dataclass
class ExtremaReport:
    minima: list
    maxima: list
    grid: int
    equal_tol: float = config.EQUAL_VALUE_TOL

    def _ties(self, items, best):
        return [e for e in items if abs(e.value - best) <= self.equal_tol]

    @property
    def global_minima(self):
        if not self.minima:
            return []
        return self._ties(self.minima, min(e.value for e in self.minima))

    @property
    def global_maxima(self):
        if not self.maxima:
            return []
        return self._ties(self.maxima, max(e.value for e in self.maxima))

    @property
    def interior_minima(self):
        return [e for e in self.minima if not e.boundary]

    @property
    def interior_maxima(self):
        return [e for e in self.maxima if not e.boundary]

    @property
    def equal_minima(self):
        return len(self.global_minima) > 1

    @property
    def equal_maxima(self):
        return len(self.global_maxima) > 1


def _refine_1d(f, lo, hi, sign):
    """Polish a bracketed interior extremum; sign=+1 for minima, -1 for maxima."""
    if f.grad is not None:
        d = lambda t: sign * float(f.scalar_derivative(t))
        dlo, dhi = d(lo), d(hi)
        if dlo < 0 < dhi:
            a, b = bisect_sign(d, lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)), fa=dlo)
            return 0.5 * (a + b)
    x, _ = golden_section(lambda t: sign * float(f.scalar(t)), lo, hi, tol=1e-12 * max(1.0, hi - lo))
    return x


def _extrema_1d(f, grid):
    xs = np.linspace(f.lower[0], f.upper[0], grid)
    ys = f.scalar(xs)
    minima, maxima = [], []
    left, mid, right = ys[:-2], ys[1:-1], ys[2:]
    for i in np.flatnonzero((mid < left) & (mid <= right)) + 1:
        x = _refine_1d(f, xs[i - 1], xs[i + 1], +1)
        minima.append(Extremum((float(x),), float(f.scalar(x)), False))
    for i in np.flatnonzero((mid > left) & (mid >= right)) + 1:
        x = _refine_1d(f, xs[i - 1], xs[i + 1], -1)
        maxima.append(Extremum((float(x),), float(f.scalar(x)), False))
    for i, j in ((0, 1), (grid - 1, grid - 2)):
        e = Extremum((float(xs[i]),), float(ys[i]), True)
        if ys[i] < ys[j]:
            minima.append(e)
        elif ys[i] > ys[j]:
            maxima.append(e)
    minima.sort(key=lambda e: e.point)
    maxima.sort(key=lambda e: e.point)
    return minima, maxima


def _refine_2d(f, p, cell, sign):
    from scipy.optimize import minimize

    lo = np.maximum(p - cell, f.lower)
    hi = np.minimum(p + cell, f.upper)
    fun = lambda x: sign * float(f.func(x))
    jac = None
    if f.grad is not None:
        jac = lambda x: sign * f.grad(x)
    res = minimize(fun, p, jac=jac, bounds=list(zip(lo, hi)), method="L-BFGS-B",
                   options={"ftol": 1e-15, "gtol": 1e-13, "maxiter": 500})
    x = res.x if sign * float(f.func(res.x)) <= sign * float(f.func(p)) else p
    return x


def grid_extrema(Z):
    """Boolean masks (is_min, is_max) of 8-neighbour local extrema on a 2-D grid.

    Comparisons are strict against earlier neighbours and non-strict against
    later ones, so a tied plateau yields exactly one representative. Points
    outside the grid never disqualify a candidate.
    """
    rows, cols = Z.shape
    pad_hi = np.pad(Z, 1, constant_values=np.inf)
    pad_lo = np.pad(Z, 1, constant_values=-np.inf)
    is_min = np.ones_like(Z, dtype=bool)
    is_max = np.ones_like(Z, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            sl = (slice(1 + di, 1 + di + rows), slice(1 + dj, 1 + dj + cols))
            if (di, dj) < (0, 0):
                is_min &= Z < pad_hi[sl]
                is_max &= Z > pad_lo[sl]
            else:
                is_min &= Z <= pad_hi[sl]
                is_max &= Z >= pad_lo[sl]
    return is_min, is_max


def _extrema_2d(f, grid, refine):
    xs = np.linspace(f.lower[0], f.upper[0], grid)
    ys = np.linspace(f.lower[1], f.upper[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = f(np.stack([X, Y], axis=-1))
    is_min, is_max = grid_extrema(Z)
    cell = np.array([xs[1] - xs[0], ys[1] - ys[0]])
    on_edge = np.zeros_like(Z, dtype=bool)
    on_edge[[0, -1], :] = True
    on_edge[:, [0, -1]] = True
    minima, maxima = [], []
    for mask, sign, out in ((is_min, +1, minima), (is_max, -1, maxima)):
        for i, j in zip(*np.nonzero(mask)):
            p = np.array([xs[i], ys[j]])
            boundary = bool(on_edge[i, j])
            if refine:
                p = _refine_2d(f, p, cell, sign)
                tol = 1e-12 * f.edges
                boundary = bool(np.any(p - f.lower <= tol) or np.any(f.upper - p <= tol))
            out.append(Extremum(tuple(float(v) for v in p), float(f.func(p)), boundary))
    minima.sort(key=lambda e: e.point)
    maxima.sort(key=lambda e: e.point)
    return minima, maxima


def brute_force_extrema(f: ScalarField, grid: int, refine: bool = True) -> ExtremaReport:
    """Classify grid points as local extrema by neighbor comparison.

    1-D candidates are polished by golden-section and, when an analytic
    derivative exists, bisection on its sign change. Points on the box
    boundary are flagged separately.
    """
    if grid < config.MIN_ORACLE_GRID:
        raise ValueError(f"grid must be >= {config.MIN_ORACLE_GRID}")
    if f.dim == 1:
        minima, maxima = _extrema_1d(f, grid)
    elif f.dim == 2:
        minima, maxima = _extrema_2d(f, grid, refine)
    else:
        raise ValueError("brute_force_extrema supports 1-D and 2-D fields only")
    return ExtremaReport(minima, maxima, grid)


# -- corpus --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    field: ScalarField
    minimizers: tuple  # tuple of points (tuples); empty when every point ties
    min_value: float
    provenance: str
    local_minima: int
    tags: frozenset = frozenset()
    h_grid: tuple = ()  # (lo, hi, count), geometric
    maximizers: tuple = ()
    max_value: float = math.nan
    note: str = ""

    @property
    def name(self):
        return self.field.name

    @property
    def dim(self):
        return self.field.dim

    def scales(self):
        lo, hi, count = self.h_grid
        return np.geomspace(lo, hi, int(count))

    def nearest_minimizer_distance(self, x):
        x = np.asarray(x, dtype=float)
        return min(float(np.linalg.norm(x - np.asarray(m))) for m in self.minimizers)

    def manifest(self):
        return {
            "name": self.name,
            "dimension": self.dim,
            "box": self.field.box,
            "expression": to_text(self.field.expression) if self.field.expression else None,
            "tags": sorted(self.tags),
            "oracle_minimizers": [list(m) for m in self.minimizers],
            "oracle_min_value": self.min_value,
            "oracle_maximizers": [list(m) for m in self.maximizers],
            "oracle_max_value": None if math.isnan(self.max_value) else self.max_value,
            "local_minima": self.local_minima,
            "h_grid": list(self.h_grid),
            "provenance": self.provenance,
            "note": self.note,
        }


def default_h_grid(f: ScalarField):
    edge = float(f.edges.min())
    return (edge / 40, edge / 2, config.H_GRID_POINTS)


def _entry_1d(name, text, box, tags, dense=10**6, h_grid=None, note=""):
    f = ScalarField.from_expression(text, ["x"], [box], name=name)
    rep = brute_force_extrema(f, dense)
    mins, maxs = rep.global_minima, rep.global_maxima
    return CorpusEntry(
        field=f,
        minimizers=tuple(m.point for m in mins),
        min_value=min(m.value for m in mins) if mins else float(f.scalar(box[0])),
        maximizers=tuple(m.point for m in maxs),
        max_value=max(m.value for m in maxs) if maxs else float(f.scalar(box[0])),
        provenance=f"dense-grid ({dense} points) + golden-section/derivative bisection",
        local_minima=len(rep.interior_minima),
        tags=frozenset(tags),
        h_grid=h_grid or default_h_grid(f),
        note=note,
    )


def _separable_entry(name, axis_terms, variables, box, tags, h_grid, note=""):
    """Oracle for a sum of independent 1-D terms: per-axis dense grids."""
    axis_reports = []
    for term, (a, b) in zip(axis_terms, box):
        g = ScalarField.from_expression(term, ["x"], [(a, b)])
        axis_reports.append(brute_force_extrema(g, 10**6))
    text = " + ".join(
        "(" + re.sub(r"\bx\b", v, term) + ")" for term, v in zip(axis_terms, variables)
    )
    f = ScalarField.from_expression(text, variables, box, name=name)
    per_axis = [r.global_minima for r in axis_reports]
    points = [()]
    for options in per_axis:
        points = [p + m.point for p in points for m in options]
    count = 1
    for r in axis_reports:
        count *= len(r.interior_minima)
    value = sum(r.global_minima[0].value for r in axis_reports)
    return CorpusEntry(
        field=f,
        minimizers=tuple(points),
        min_value=value,
        provenance="separable: per-axis dense-grid (10^6 points) + golden-section/derivative bisection",
        local_minima=count,
        tags=frozenset(tags),
        h_grid=h_grid,
        note=note,
    )


def _entry_2d(name, text, box, tags, grid=1024, provenance=None, h_grid=None):
    f = ScalarField.from_expression(text, ["x", "y"], box, name=name)
    rep = brute_force_extrema(f, grid)
    mins = rep.global_minima
    return CorpusEntry(
        field=f,
        minimizers=tuple(m.point for m in mins),
        min_value=min(m.value for m in mins),
        provenance=provenance or f"dense-grid ({grid}^2 points) + bounded local refinement",
        local_minima=len(rep.interior_minima),
        tags=frozenset(tags),
        h_grid=h_grid or default_h_grid(f),
    )


RASTRIGIN_AMPLITUDE = 2.0
RASTRIGIN_TILT = (1.5, -2.5)


@functools.lru_cache(maxsize=1)
def _build_corpus():
    tx, ty = RASTRIGIN_TILT
    c = RASTRIGIN_AMPLITUDE
    entries = [
        _entry_1d("double_well", "x^4 - x^2", (-2.0, 2.0), {"multimodal", "equal-minima"},
                  note="equal minima at +-1/sqrt(2)"),
        _entry_1d("tilted_double_well", "x^4 - x^2 + 0.2*x", (-2.0, 2.0), {"multimodal"}),
        _entry_1d("triple_well", "x^6 - 3*x^4 + 2*x^2 + 0.5*x", (-2.0, 2.0), {"multimodal"}),
        _entry_1d("ripple_cubic", "x^3 - 3*x + 0.3*sin(8*x)", (-1.9, 1.9),
                  {"multimodal", "interior-extrema"}),
        _entry_1d("cubic", "x^3", (-1.0, 1.0), {"monotone", "boundary-extremum"}),
        _entry_1d("neg_ramp", "-x", (0.0, 1.0), {"monotone", "boundary-extremum"}),
        _constant_entry(),
        _entry_2d("bowl", "x^2 + y^2", [(-2.0, 2.0), (-2.0, 2.0)], {"convex"},
                  provenance="closed form (unique stationary point); confirmed on 1024^2 grid"),
        _separable_entry(
            "tilted_rastrigin",
            [f"x^2 + {c}*(1 - cos(2*pi*x)) + {tx}*x", f"x^2 + {c}*(1 - cos(2*pi*x)) + {ty}*x"],
            ["x", "y"], [(-5.0, 5.0), (-5.0, 5.0)], {"multimodal"},
            h_grid=(0.05, 1.0, 12),
            note="box averaging scales the cosine ripple by sin(pi h)/(pi h); "
                 "it vanishes at integer h and returns with flipped phase between",
        ),
        _entry_2d("himmelblau", "(x^2 + y - 11)^2 + (x + y^2 - 7)^2", [(-5.0, 5.0), (-5.0, 5.0)],
                  {"multimodal", "equal-minima"}),
        _separable_entry(
            "separable_4d",
            ["x^2 - cos(2*pi*x)"] * 4,
            ["x1", "x2", "x3", "x4"], [(-3.0, 3.0)] * 4, {"multimodal"},
            h_grid=(0.15, 3.0, 8),
        ),
    ]
    return tuple(entries)


def _constant_entry():
    f = ScalarField.from_expression("1", ["x"], [(-1.0, 1.0)], name="flat")
    return CorpusEntry(
        field=f,
        minimizers=(),
        min_value=1.0,
        max_value=1.0,
        provenance="closed form (constant)",
        local_minima=0,
        tags=frozenset({"constant"}),
        h_grid=default_h_grid(f),
        note="every point is a global minimizer and maximizer",
    )


def corpus() -> list[CorpusEntry]:
    return list(_build_corpus())


def negative_control() -> CorpusEntry:
    """The tilted double-well with its oracle minimizer moved into the wrong basin."""
    base = get_entry("tilted_double_well")
    shifted = tuple((m[0] + 1.5,) for m in base.minimizers)
    return CorpusEntry(
        field=ScalarField(
            name="negative_control",
            lower=base.field.lower,
            upper=base.field.upper,
            func=base.field.func,
            grad=base.field.grad,
            expression=base.field.expression,
            poly_degree=base.field.poly_degree,
        ),
        minimizers=shifted,
        min_value=base.min_value,
        provenance="deliberately wrong: true minimizer shifted by +1.5",
        local_minima=base.local_minima,
        tags=base.tags | {"negative-control"},
        h_grid=base.h_grid,
    )


def get_entry(name: str) -> CorpusEntry:
    if name == "negative_control":
        return negative_control()
    for e in _build_corpus():
        if e.name == name:
            return e
    raise KeyError(f"unknown corpus entry {name!r}")


def corpus_manifest(entries=None):
    return [e.manifest() for e in (entries if entries is not None else corpus())]
