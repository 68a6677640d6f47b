"""Critical-scale search and continuation schedules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .analysis import scan_zeros
from .errors import HomogoptError
from .funcmodel import ScalarField
from .homog import HomogenizationOperator


class ScaleSearchError(HomogoptError, ValueError):
    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


@dataclass(frozen=True)
class ContinuationSchedule:
    scales: tuple
    rho: float
    polish: bool = True
    heuristic: bool = False  # start scale chosen by rule of thumb, not by a count search

    def __post_init__(self):
        scales = tuple(float(h) for h in self.scales)
        if not scales:
            raise ValueError("schedule needs at least one scale")
        if any(h <= 0 for h in scales):
            raise ValueError("scales must be positive")
        if any(b >= a for a, b in zip(scales, scales[1:])):
            raise ValueError("scales must be strictly decreasing")
        object.__setattr__(self, "scales", scales)

    def to_dict(self):
        return {"scales": list(self.scales), "rho": self.rho, "polish": self.polish,
                "heuristic": self.heuristic}


def make_schedule(h_start: float, rho: float = config.RHO, h_min: float = None, polish: bool = True,
                  heuristic: bool = False) -> ContinuationSchedule:
    """h_start * rho**i for every term not below h_min."""
    if h_min is None:
        h_min = h_start * config.H_MIN_FRACTION
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    if not 0 < h_min < h_start:
        raise ValueError(f"need 0 < h_min < h_start, got h_min={h_min}, h_start={h_start}")
    scales = []
    h = float(h_start)
    while h >= h_min:
        scales.append(h)
        h *= rho
    return ContinuationSchedule(tuple(scales), rho, polish, heuristic)


def default_schedule(f: ScalarField, h_start=None, rho=config.RHO, h_min=None, polish=True):
    """Start at half the shortest box edge unless told otherwise."""
    edge = float(f.edges.min())
    heuristic = h_start is None
    if h_start is None:
        h_start = edge / 2
    if h_start > edge:
        raise ValueError(f"h_start={h_start} exceeds the shortest box edge {edge}")
    if h_min is None:
        h_min = edge * config.H_MIN_FRACTION
    return make_schedule(h_start, rho, h_min, polish, heuristic=heuristic and f.dim > 1)


@dataclass
class CriticalScale:
    h0: float
    count: int
    target: int
    method: str  # "bisection", "lower-bound" or "sweep"
    probes: list = field(default_factory=list)
    note: str = ""

    def to_dict(self):
        return {"h0": self.h0, "count": self.count, "target": self.target, "method": self.method,
                "probes": [list(p) for p in self.probes], "note": self.note}


def find_h0(f: ScalarField, target_count: int, h_bounds=None, grid: int = config.SCAN_GRID,
            rel_tol: float = config.H0_REL_TOL) -> CriticalScale:
    """Smallest scale whose zero count is at most ``target_count``.

    Bisects on the count, assuming it does not increase with h; if the probes
    contradict that, falls back to a linear sweep.
    """
    if f.dim != 1:
        raise ValueError("find_h0 works on 1-D fields")
    edge = float(f.edges[0])
    lo, hi = h_bounds if h_bounds is not None else (edge / 40, edge / 2)
    if not 0 < lo < hi <= edge:
        raise ValueError(f"h bounds ({lo}, {hi}) must satisfy 0 < lo < hi <= {edge}")

    probes = {}

    def count(h):
        if h not in probes:
            probes[h] = scan_zeros(f, HomogenizationOperator(h), grid).count
        return probes[h]

    c_hi = count(hi)
    if c_hi > target_count:
        raise ScaleSearchError(
            f"target count {target_count} not reached: {c_hi} zeros at h={hi:g}", c_hi)
    if count(lo) <= target_count:
        return CriticalScale(lo, probes[lo], target_count, "lower-bound", sorted(probes.items()))

    a, b = lo, hi
    while b - a > rel_tol * b:
        mid = 0.5 * (a + b)
        if count(mid) <= target_count:
            b = mid
        else:
            a = mid
    history = sorted(probes.items())
    counts = [c for _, c in history]
    if all(y <= x for x, y in zip(counts, counts[1:])):
        return CriticalScale(b, probes[b], target_count, "bisection", history)

    for h in np.linspace(lo, hi, config.H0_SWEEP_POINTS):
        h = float(h)
        if count(h) <= target_count:
            return CriticalScale(h, probes[h], target_count, "sweep", sorted(probes.items()),
                                 note="zero count not monotone in h across probes; linear sweep used")
    raise AssertionError("unreachable: the upper bound already qualified")
