"""Sign-changing zeros of the average gradient T(h, .) of 1-D objectives."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import EmptyDomainError
from .funcmodel import CorpusEntry, ScalarField
from .homog import HomogenizationOperator, inset_box
from .search1d import bisect_sign


def avg_gradient_values(f: ScalarField, h: float, xs) -> np.ndarray:
    """T(h, x) at many x; the caller guarantees the inset rule."""
    xs = np.asarray(xs, dtype=float)
    return (f.scalar(xs + h / 2) - f.scalar(xs - h / 2)) / h


@dataclass(frozen=True)
class Zero:
    x: float
    bracket: tuple
    residual: float


@dataclass
class ZeroCrossingReport:
    h: float
    interval: tuple
    grid: int
    zeros: list
    profile: list  # run-length encoded [(sign, run), ...], sign in {"+", "-", "0"}
    max_abs: float
    tau: float

    @property
    def count(self):
        return len(self.zeros)

    @property
    def alternations(self):
        signs = [s for s, _ in self.profile if s != "0"]
        return sum(a != b for a, b in zip(signs, signs[1:]))

    @property
    def identically_zero(self):
        return all(s == "0" for s, _ in self.profile)

    def profile_text(self):
        return " ".join(f"{s}{n}" for s, n in self.profile)

    def to_dict(self):
        return {
            "h": self.h,
            "interval": list(self.interval),
            "grid": self.grid,
            "count": self.count,
            "zeros": [z.x for z in self.zeros],
            "brackets": [list(z.bracket) for z in self.zeros],
            "residuals": [z.residual for z in self.zeros],
            "profile": self.profile_text(),
            "max_abs_T": self.max_abs,
            "tau": self.tau,
        }


def _rle(signs):
    return [(k, len(list(g))) for k, g in itertools.groupby(signs)]


def scan_zeros(f: ScalarField, op: HomogenizationOperator, grid: int = config.SCAN_GRID) -> ZeroCrossingReport:
    """Grid-scan T(h, .) over the inset interval and bisect every sign change.

    Values within the dead-band tau = 1e-12 (1 + max|T|) count as zero; a
    zero run between equal signs is a touching zero and is not counted.
    """
    if f.dim != 1:
        raise ValueError("scan_zeros needs a 1-D field")
    if grid < config.MIN_SCAN_GRID:
        raise ValueError(f"grid must be >= {config.MIN_SCAN_GRID}")
    h = op.h
    lo, hi = (float(v[0]) for v in inset_box(f, h))
    if not hi > lo:
        raise EmptyDomainError(f"empty inset domain: h={h:g} leaves no interior interval")
    xs = np.linspace(lo, hi, grid)
    T = avg_gradient_values(f, h, xs)
    max_abs = float(np.max(np.abs(T)))
    tau = config.DEADBAND_REL * (1.0 + max_abs)
    sign = np.where(T > tau, 1, np.where(T < -tau, -1, 0))
    profile = _rle(["+" if s > 0 else "-" if s < 0 else "0" for s in sign])

    tfun = lambda x: float(avg_gradient_values(f, h, x))
    xtol = config.BISECT_REL_WIDTH * (hi - lo)
    zeros = []
    nz = np.flatnonzero(sign)
    for i, j in zip(nz, nz[1:]):
        if sign[i] == sign[j]:
            continue
        a, b = bisect_sign(tfun, xs[i], xs[j], xtol, fa=float(T[i]))
        x = 0.5 * (a + b)
        zeros.append(Zero(float(x), (float(xs[i]), float(xs[j])), abs(tfun(x))))
    return ZeroCrossingReport(h, (lo, hi), grid, zeros, profile, max_abs, tau)


def zero_count_curve(f: ScalarField, h_values, grid: int = config.SCAN_GRID, policy=None):
    """[(h, count)] for strictly increasing h values.

    ``policy`` is accepted for interface symmetry; T in one dimension needs
    no quadrature.
    """
    h_values = [float(h) for h in h_values]
    if any(b <= a for a, b in zip(h_values, h_values[1:])):
        raise ValueError("h values must be strictly increasing")
    out = []
    for h in h_values:
        rep = scan_zeros(f, HomogenizationOperator(h), grid)
        out.append((h, rep.count))
    return out


def is_non_increasing(counts):
    return all(b <= a for a, b in zip(counts, counts[1:]))


@dataclass(frozen=True)
class ContainmentResult:
    passed: bool
    margin: float
    zero: float = math.nan
    minimizer: tuple = ()


def containment_check(report: ZeroCrossingReport, oracle: CorpusEntry) -> ContainmentResult:
    """Does some zero's interval [x_T - h/2, x_T + h/2] hold a global minimizer?

    The margin is the distance from the minimizer to the nearest interval
    edge (negative when outside); the best zero/minimizer pair is reported.
    """
    half = report.h / 2
    best = ContainmentResult(False, -math.inf)
    for z in report.zeros:
        for m in oracle.minimizers:
            margin = min(m[0] - (z.x - half), (z.x + half) - m[0])
            if margin > best.margin:
                best = ContainmentResult(margin >= 0, margin, z.x, tuple(m))
    return best


@dataclass(frozen=True)
class SignProfileResult:
    passed: bool
    profile: str
    sign: str  # "+", "-", "0" or "mixed"


def sign_profile_check(f: ScalarField, op: HomogenizationOperator, grid: int = config.SCAN_GRID) -> SignProfileResult:
    rep = scan_zeros(f, op, grid)
    signs = {s for s, _ in rep.profile if s != "0"}
    sign = "mixed" if len(signs) > 1 else (signs.pop() if signs else "0")
    return SignProfileResult(rep.alternations == 0, rep.profile_text(), sign)
