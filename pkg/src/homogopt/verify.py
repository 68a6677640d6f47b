"""Numerical checks of the average-gradient claims over the corpus.

Each check yields one or more ``CheckRecord`` values. Failures are data:
a failing check is recorded, never raised. Records marked informational
document behaviour that the claims leave ambiguous and never count as a
pass or a fail.
"""

from __future__ import annotations

import math
import re
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import config
from .analysis import containment_check, is_non_increasing, scan_zeros, sign_profile_check
from .errors import ConfigError
from .expr import to_text
from .funcmodel import CorpusEntry, ScalarField, brute_force_extrema, grid_extrema
from .homog import (
    AdaptivePolicy,
    GaussPolicy,
    HomogenizationOperator,
    MonteCarloPolicy,
    homogenize,
    inset_box,
    kernel_convolution_check,
)
from .parallel import pmap
from .scale import ScaleSearchError, find_h0
from .solver import homogenized_field, line_decomposition_solve

PASS, FAIL, INFO = "pass", "fail", "info"

CHECKS = {
    "avg-gradient-identity": "difference quotient equals the box average of f'",
    "monotone-sign": "monotone f gives T of one fixed sign at every scale",
    "single-zero": "two unequal wells leave one sign-changing zero at large enough h",
    "single-zero-mirrored": "same, with the wells in the opposite positional order",
    "single-zero-reversed-values": "same, with the deeper well on the other side",
    "single-zero-two-maxima": "same, for the negated function (two maxima)",
    "single-zero-sub-interval": "same, on a sub-interval holding both wells",
    "equal-minima-count": "zero count for equal minima (informational)",
    "sign-constancy": "at h0, T keeps one sign on each side of the surviving zero",
    "boundary-sign": "boundary global extremum gives T without sign alternation",
    "sign-profile-control": "the sign-profile check rejects a multi-well profile",
    "containment": "the zero interval [x_T - h0/2, x_T + h0/2] holds the global minimizer",
    "zero-bracketing": "the surviving zero sits between the minimizer's flanking maxima or boundaries",
    "zero-residual": "refined zeros satisfy |T| <= 1e-8 (1 + max|T|)",
    "count-decay": "zero count does not increase with h",
    "terminal-classification": "terminal zero count is 2, 1, 0 or identically zero as classified",
    "equal-extrema-count": "m + n zero count for equal extrema (informational)",
    "potential-field": "finite differences of F match the average gradient field",
    "monte-carlo-average": "monte-carlo F lands within 3 standard errors of a tensor-Gauss reference",
    "census-decay-2d": "grid extreme-point census of F does not increase with h",
    "census-rebound-2d": "census past the ripple-cancelling scale (informational)",
    "containment-2d": "minimizer of F at the largest swept h lies within h/2 of the oracle minimizer",
    "line-decomposition": "random-line minimization reaches the minimizer of a convex quadratic",
    "line-decomposition-homogenized": "random-line minimization of F(h0) lands in the global region",
    "line-decomposition-raw": "random-line minimization of a raw multimodal f (informational)",
}

EQUAL_MINIMA_NOTE = (
    "for x^4 - x^2 the box average of f' is T = 4x^3 + (h^2 - 2)x; its nonzero roots "
    "+-sqrt((2 - h^2)/4) merge into the root at 0 and vanish for h >= sqrt(2), so the single "
    "surviving sign-changing zero marks the central maximum, not the two equal minima"
)


@dataclass(frozen=True)
class CheckRecord:
    check: str
    entry: str
    inputs: dict
    observed: dict
    status: str
    mandatory: bool
    notes: str = ""

    def __post_init__(self):
        if self.check not in CHECKS:
            raise ValueError(f"unknown check id {self.check!r}")
        if self.status not in (PASS, FAIL, INFO):
            raise ValueError(f"bad status {self.status!r}")

    def sort_key(self):
        h = self.inputs.get("h")
        return (self.entry, self.check, -math.inf if h is None else float(h))

    def to_dict(self):
        return {
            "check": self.check,
            "entry": self.entry,
            "inputs": self.inputs,
            "observed": self.observed,
            "status": self.status,
            "mandatory": self.mandatory,
            "notes": self.notes,
        }


@dataclass
class TheoremReport:
    records: list = field(default_factory=list)

    @property
    def mandatory_failures(self):
        return [r for r in self.records if r.mandatory and r.status == FAIL]

    @property
    def passed(self):
        return not self.mandatory_failures

    def summary(self):
        out = {PASS: 0, FAIL: 0, INFO: 0}
        for r in self.records:
            out[r.status] += 1
        out["records"] = len(self.records)
        out["mandatory_failures"] = len(self.mandatory_failures)
        return out

    def to_dict(self):
        return {"summary": self.summary(), "records": [r.to_dict() for r in self.records]}

    CSV_HEADER = ("entry", "check", "status", "mandatory", "h", "inputs", "observed", "notes")

    def csv_rows(self):
        for r in self.records:
            h = r.inputs.get("h", "")
            yield (r.entry, r.check, r.status, str(r.mandatory).lower(), h, r.inputs, r.observed, r.notes)


@dataclass(frozen=True)
class VerifyConfig:
    h_grids: dict = field(default_factory=dict)  # entry name -> (lo, hi, count)
    scan_grid: int = config.SCAN_GRID
    census_grid: int = 256
    identity_samples: int = 20
    potential_points: int = 10
    line_seeds: int = 10
    homogenized_line_seeds: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.scan_grid < config.MIN_SCAN_GRID:
            raise ConfigError(f"scan_grid must be >= {config.MIN_SCAN_GRID}", "verify.scan_grid")
        if self.census_grid < 16:
            raise ConfigError("census_grid must be >= 16", "verify.census_grid")
        for name in ("identity_samples", "potential_points", "line_seeds", "homogenized_line_seeds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", f"verify.{name}")
        for name, spec in self.h_grids.items():
            lo, hi, count = spec
            if not (0 < lo < hi) or int(count) < 2:
                raise ConfigError(f"bad h grid {spec!r}", f"verify.h_grids.{name}")

    def scales(self, entry: CorpusEntry):
        lo, hi, count = self.h_grids.get(entry.name, entry.h_grid)
        return [float(h) for h in np.geomspace(lo, hi, int(count))]

    def rng(self, entry_name, salt):
        return np.random.default_rng([self.seed, zlib.crc32(entry_name.encode()), salt])


# -- helpers -------------------------------------------------------------------


def _record(check, entry, inputs, observed, ok, mandatory=True, notes=""):
    status = (PASS if ok else FAIL) if mandatory else INFO
    return CheckRecord(check, entry, inputs, observed, status, mandatory, notes)


def _status_note(ok):
    return "" if ok else "check failed; recorded as observed"


def _text(f: ScalarField):
    return to_text(f.expression)


def _variant(f: ScalarField, text, box, name):
    return ScalarField.from_expression(text, ["x"], [box], name=name)


def _mirror(f: ScalarField):
    lo, hi = float(f.lower[0]), float(f.upper[0])
    text = re.sub(r"\bx\b", "(-x)", _text(f))
    return _variant(f, text, (-hi, -lo), f"{f.name}_mirrored")


def _negate(f: ScalarField):
    return _variant(f, f"-({_text(f)})", (float(f.lower[0]), float(f.upper[0])), f"{f.name}_negated")


def _interior(point, f, tol=1e-9):
    p = np.asarray(point, dtype=float)
    span = tol * (1.0 + float(np.max(np.abs(f.box))))
    return bool(np.all(p > f.lower + span) and np.all(p < f.upper - span))


def expected_terminal_count(entry: CorpusEntry):
    """Terminal zero count predicted for a 1-D entry: 2, 1, 0 or "identically-zero"."""
    if "constant" in entry.tags:
        return "identically-zero"
    f = entry.field
    n = int(any(_interior(m, f) for m in entry.minimizers)) + int(
        any(_interior(m, f) for m in entry.maximizers))
    return n


def identity_residuals(f: ScalarField, pairs, policy=None):
    """[(h, x, quotient, average, error estimate)] for the average-gradient identity."""
    policy = policy or AdaptivePolicy()
    out = []
    for h, x in pairs:
        q, a, e = kernel_convolution_check(f, HomogenizationOperator(h, policy), x)
        out.append((float(h), float(x), q, a, e))
    return out


def identity_pairs(f: ScalarField, n, rng):
    edge = float(f.edges[0])
    hs = rng.uniform(edge / 40, edge / 2, n)
    xs = [rng.uniform(f.lower[0] + h / 2, f.upper[0] - h / 2) for h in hs]
    return list(zip(hs.tolist(), [float(x) for x in xs]))


def grid_census(f: ScalarField, h, grid, policy=None):
    """Local minima/maxima of F(h, .) on a grid over the inset box.

    Returns (minima count, maxima count, grid argmin point).
    """
    policy = policy or GaussPolicy()
    op = HomogenizationOperator(h, policy)
    lo, hi = inset_box(f, h)
    xs = np.linspace(lo[0], hi[0], grid)
    ys = np.linspace(lo[1], hi[1], grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    P = np.stack([X, Y], axis=-1).reshape(-1, 2)
    Z = op.average(f, P).reshape(grid, grid)
    is_min, is_max = grid_extrema(Z)
    # grid-edge points sit on the inset boundary; they are not interior extrema
    for mask in (is_min, is_max):
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = False
    i = np.unravel_index(int(np.argmin(Z)), Z.shape)
    return int(is_min.sum()), int(is_max.sum()), (float(xs[i[0]]), float(ys[i[1]]))


# -- one-dimensional checks ----------------------------------------------------


def _check_identity(entry, cfg):
    f = entry.field
    pairs = identity_pairs(f, cfg.identity_samples, cfg.rng(entry.name, 1))
    rows = identity_residuals(f, pairs)
    worst = max(rows, key=lambda r: abs(r[2] - r[3]) - max(1e-9, r[4]))
    ok = all(abs(q - a) <= max(1e-9, e) for _, _, q, a, e in rows)
    return [_record(
        "avg-gradient-identity", entry.name,
        {"samples": len(rows), "policy": "adaptive-gauss"},
        {"max_abs_difference": max(abs(r[2] - r[3]) for r in rows),
         "worst_h": worst[0], "worst_x": worst[1], "worst_error_estimate": worst[4]},
        ok, notes=_status_note(ok))]


def _check_counts(entry, cfg):
    """Count decay, terminal classification and zero residuals share one sweep."""
    f = entry.field
    hs = cfg.scales(entry)
    reports = [scan_zeros(f, HomogenizationOperator(h), cfg.scan_grid) for h in hs]
    counts = [r.count for r in reports]
    out = []
    ok = is_non_increasing(counts)
    out.append(_record("count-decay", entry.name, {"h_values": hs, "grid": cfg.scan_grid},
                       {"counts": counts}, ok, notes=_status_note(ok)))

    worst = 0.0
    for r in reports:
        for z in r.zeros:
            worst = max(worst, z.residual / (1.0 + r.max_abs))
    ok = worst <= 1e-8
    out.append(_record("zero-residual", entry.name, {"h_values": hs, "grid": cfg.scan_grid},
                       {"max_scaled_residual": worst, "zeros": sum(counts)}, ok, notes=_status_note(ok)))

    last = reports[-1]
    observed = "identically-zero" if last.identically_zero else last.count
    if "equal-minima" in entry.tags:
        out.append(_equal_extrema_record(entry, hs, counts, last))
    else:
        expected = expected_terminal_count(entry)
        ok = observed == expected
        out.append(_record(
            "terminal-classification", entry.name, {"h": hs[-1], "grid": cfg.scan_grid},
            {"terminal": observed, "expected": expected, "profile": last.profile_text()},
            ok, notes=_status_note(ok)))
    return out


def _equal_extrema_record(entry, hs, counts, last):
    f = entry.field
    m = sum(_interior(p, f) for p in entry.maximizers)
    n = sum(_interior(p, f) for p in entry.minimizers)
    return _record(
        "equal-extrema-count", entry.name, {"h_values": hs},
        {"counts": counts, "terminal": last.count, "predicted_m_plus_n": m + n,
         "interior_global_maxima": m, "interior_global_minima": n},
        True, mandatory=False,
        notes=f"predicted m + n = {m + n}, observed {last.count}; " + EQUAL_MINIMA_NOTE)


def _check_equal_minima(entry, cfg):
    f = entry.field
    hs = cfg.scales(entry)
    counts = [scan_zeros(f, HomogenizationOperator(h), cfg.scan_grid).count for h in hs]
    closed = [3 if h < math.sqrt(2) else 1 for h in hs]
    crit = find_h0(f, 1, grid=cfg.scan_grid)
    return [_record(
        "equal-minima-count", entry.name, {"h_values": hs, "grid": cfg.scan_grid},
        {"counts": counts, "terminal": counts[-1], "claimed": 2,
         "closed_form_counts": closed if entry.name == "double_well" else None,
         "h0_for_one_zero": crit.h0},
        True, mandatory=False,
        notes=f"claimed 2 zeros, observed {counts[-1]} at h={hs[-1]:g}; " + EQUAL_MINIMA_NOTE)]


def _single_zero(check, entry_name, f, cfg, note=""):
    try:
        crit = find_h0(f, 1, grid=cfg.scan_grid)
    except ScaleSearchError as exc:
        return _record(check, entry_name, {"box": f.box, "expression": _text(f)},
                       {"count": exc.count}, False, notes=str(exc))
    rep = scan_zeros(f, HomogenizationOperator(crit.h0), cfg.scan_grid)
    ok = rep.count == 1
    return _record(check, entry_name,
                   {"h": crit.h0, "box": f.box, "expression": _text(f)},
                   {"h0": crit.h0, "count": rep.count, "zeros": [z.x for z in rep.zeros],
                    "method": crit.method},
                   ok, notes=note or _status_note(ok))


def _reversed_values(f: ScalarField):
    """Add a linear tilt twice as strong as needed to swap which well is deeper."""
    rep = brute_force_extrema(f, 20_001)
    wells = sorted(rep.interior_minima, key=lambda m: m.value)
    (g, gv), (o, ov) = (wells[0].point[0], wells[0].value), (wells[1].point[0], wells[1].value)
    slope = 2.0 * (ov - gv) / (g - o)
    text = f"{_text(f)} + ({slope!r})*x"
    return _variant(f, text, (float(f.lower[0]), float(f.upper[0])), f"{f.name}_reversed")


def _check_two_wells(entry, cfg):
    f = entry.field
    lo, hi = float(f.lower[0]), float(f.upper[0])
    edge = hi - lo
    sub = _variant(f, _text(f), (lo + 0.1 * edge, hi - 0.05 * edge), f"{f.name}_sub")
    out = [
        _single_zero("single-zero", entry.name, f, cfg),
        _single_zero("single-zero-mirrored", entry.name, _mirror(f), cfg),
        _single_zero("single-zero-reversed-values", entry.name, _reversed_values(f), cfg,
                     note="variant tilted so the deeper well switches sides"),
        _single_zero("single-zero-two-maxima", entry.name, _negate(f), cfg,
                     note="negated function; its two wells become two maxima"),
        _single_zero("single-zero-sub-interval", entry.name, sub, cfg),
    ]
    crit = find_h0(f, 1, grid=cfg.scan_grid)
    rep = scan_zeros(f, HomogenizationOperator(crit.h0), cfg.scan_grid)
    signs = [s for s, _ in rep.profile if s != "0"]
    ok = rep.count == 1 and signs == ["-", "+"]
    out.append(_record("sign-constancy", entry.name, {"h": crit.h0, "grid": cfg.scan_grid},
                       {"profile": rep.profile_text()}, ok, notes=_status_note(ok)))
    return out


def _check_monotone(entry, cfg):
    f = entry.field
    xs = np.linspace(f.lower[0], f.upper[0], 100_001)
    d = np.diff(f.scalar(xs))
    direction = "+" if np.all(d >= 0) else "-" if np.all(d <= 0) else "mixed"
    hs = cfg.scales(entry)
    results = [sign_profile_check(f, HomogenizationOperator(h), cfg.scan_grid) for h in hs]
    ok = direction != "mixed" and all(r.passed and r.sign in (direction, "0") for r in results)
    return [_record("monotone-sign", entry.name, {"h_values": hs},
                    {"direction": direction, "signs": [r.sign for r in results]},
                    ok, notes=_status_note(ok))]


def _check_boundary(entry, cfg):
    f = entry.field
    on_boundary = not any(_interior(m, f) for m in entry.minimizers)
    hs = cfg.scales(entry)
    results = [sign_profile_check(f, HomogenizationOperator(h), cfg.scan_grid) for h in hs]
    ok = on_boundary and all(r.passed for r in results)
    return [_record("boundary-sign", entry.name, {"h_values": hs},
                    {"global_minimizer_on_boundary": on_boundary,
                     "profiles": [r.profile for r in results]},
                    ok, notes=_status_note(ok))]


def _check_profile_control(entry, cfg):
    res = sign_profile_check(entry.field, HomogenizationOperator(0.5), cfg.scan_grid)
    ok = not res.passed
    return [_record("sign-profile-control", entry.name, {"h": 0.5},
                    {"profile": res.profile, "profile_check_passed": res.passed}, ok,
                    notes="negative control: a passing profile check here would mean the checker is blind")]


def _flanks(f: ScalarField, xmin):
    rep = brute_force_extrema(f, 200_001)
    left = [m.point[0] for m in rep.interior_maxima if m.point[0] < xmin]
    right = [m.point[0] for m in rep.interior_maxima if m.point[0] > xmin]
    return (max(left) if left else float(f.lower[0]), min(right) if right else float(f.upper[0]))


def _check_containment(entry, cfg):
    f = entry.field
    equal = "equal-minima" in entry.tags
    target = 1 if equal else expected_terminal_count(entry)
    crit = find_h0(f, target, grid=cfg.scan_grid)
    rep = scan_zeros(f, HomogenizationOperator(crit.h0), cfg.scan_grid)
    res = containment_check(rep, entry)
    note = "equal minima: containment is reported but not judged" if equal else _status_note(res.passed)
    out = [_record("containment", entry.name, {"h": crit.h0, "target_count": target},
                   {"passed": res.passed, "margin": res.margin, "zero": res.zero,
                    "minimizer": list(res.minimizer)},
                   res.passed, mandatory=not equal, notes=note)]
    if not equal and rep.zeros:
        xmin = entry.minimizers[0][0]
        a, b = _flanks(f, xmin)
        z = min(rep.zeros, key=lambda z: abs(z.x - xmin)).x
        ok = a < z < b
        out.append(_record("zero-bracketing", entry.name, {"h": crit.h0},
                           {"zero": z, "left_flank": a, "right_flank": b, "minimizer": xmin},
                           ok, notes=_status_note(ok)))
    return out


# -- multi-dimensional checks --------------------------------------------------


def _check_potential(entry, cfg):
    f = entry.field
    rng = cfg.rng(entry.name, 2)
    lo_h, hi_h, _ = cfg.h_grids.get(entry.name, entry.h_grid)
    worst_rel, worst_cross = 0.0, 0.0
    for _ in range(cfg.potential_points):
        h = float(rng.uniform(lo_h, hi_h))
        rel, cross = potential_errors(f, h, rng)
        worst_rel, worst_cross = max(worst_rel, rel), max(worst_cross, cross)
    poly = f.poly_degree is not None
    ok = worst_rel <= 1e-5 and (not poly or worst_cross <= 1e-6)
    return [_record("potential-field", entry.name, {"points": cfg.potential_points, "polynomial": poly},
                    {"max_rel_error": worst_rel, "max_cross_asymmetry": worst_cross if poly else None},
                    ok, notes=_status_note(ok))]


def potential_errors(f: ScalarField, h, rng, policy=None):
    """(relative FD mismatch of grad F, cross-derivative asymmetry) at one random point.

    Step 1e-4 h per axis; errors are relative with a unit floor.
    """
    policy = policy or GaussPolicy()
    op = HomogenizationOperator(h, policy)
    lo, hi = inset_box(f, h)
    step = 1e-4 * h
    x = rng.uniform(lo + 2 * step, hi - 2 * step)
    n = f.dim
    E = np.eye(n) * step
    P = np.concatenate([x + E, x - E])
    Fv = op.average(f, P)
    fd = (Fv[:n] - Fv[n:]) / (2 * step)
    g = op.gradient(f, x[None, :])[0]
    rel = float(np.max(np.abs(fd - g)) / max(1.0, float(np.max(np.abs(g)))))
    G = op.gradient(f, P)
    J = (G[:n] - G[n:]) / (2 * step)  # J[j, i] = d G_i / d x_j
    cross = float(np.max(np.abs(J - J.T)) / max(1.0, float(np.max(np.abs(J)))))
    return rel, cross


def _check_monte_carlo(entry, cfg):
    f = entry.field
    x = np.zeros(f.dim)
    mc = homogenize(f, HomogenizationOperator(1.0, MonteCarloPolicy(seed=cfg.seed)), x)
    ref = homogenize(f, HomogenizationOperator(1.0, GaussPolicy(16)), x)
    ok = abs(mc.value - ref.value) <= 3 * mc.error
    return [_record("monte-carlo-average", entry.name, {"h": 1.0, "point": list(x)},
                    {"monte_carlo": mc.value, "standard_error": mc.error, "reference": ref.value,
                     "z": (mc.value - ref.value) / mc.error},
                    ok, notes=_status_note(ok))]


def _check_census(entry, cfg, rebound=False):
    f = entry.field
    hs = cfg.scales(entry)
    rows = [grid_census(f, h, cfg.census_grid) for h in hs]
    census = [a + b for a, b, _ in rows]
    equal = "equal-minima" in entry.tags
    ok = is_non_increasing(census)
    out = [_record("census-decay-2d", entry.name, {"h_values": hs, "grid": cfg.census_grid},
                   {"census": census, "minima": [a for a, _, _ in rows]},
                   ok, notes=_status_note(ok))]
    h_last = hs[-1]
    argmin = np.asarray(rows[-1][2])
    lo, hi = inset_box(f, h_last)
    cell = float(np.max((hi - lo) / (cfg.census_grid - 1)))
    dist = min(float(np.max(np.abs(argmin - np.asarray(m)))) for m in entry.minimizers)
    ok = dist <= h_last / 2 + cell
    out.append(_record("containment-2d", entry.name, {"h": h_last, "grid": cfg.census_grid},
                       {"argmin_F": list(argmin), "max_norm_distance": dist, "half_h": h_last / 2,
                        "grid_cell": cell},
                       ok, mandatory=not equal,
                       notes="equal minima: nearest oracle minimizer used; not judged" if equal
                       else _status_note(ok)))
    if rebound:
        ext = [float(h) for h in np.geomspace(hs[-1], 2.0 * hs[-1], 5)[1:]]
        more = [grid_census(f, h, cfg.census_grid) for h in ext]
        out.append(_record(
            "census-rebound-2d", entry.name, {"h_values": ext, "grid": cfg.census_grid},
            {"census": [a + b for a, b, _ in more], "census_at_sweep_end": census[-1]},
            True, mandatory=False,
            notes="box averaging scales cos(2 pi x) by sin(pi h)/(pi h): the ripple vanishes at "
                  "h = 1 and returns with flipped phase, so extra extrema reappear past it"))
    return out


def _check_lines_convex(entry, cfg):
    f = entry.field
    ok_runs, worst_dist, worst_lines = 0, 0.0, 0
    for seed in range(cfg.line_seeds):
        tr = line_decomposition_solve(f, seed)
        d = entry.nearest_minimizer_distance(tr.final_point)
        lines = len(tr.records)
        worst_dist, worst_lines = max(worst_dist, d), max(worst_lines, lines)
        ok_runs += d <= 1e-6 and lines <= 200
    ok = ok_runs == cfg.line_seeds
    return [_record("line-decomposition", entry.name, {"seeds": cfg.line_seeds},
                    {"successes": ok_runs, "max_distance": worst_dist, "max_lines": worst_lines},
                    ok, notes=_status_note(ok))]


def _check_lines_multimodal(entry, cfg):
    f = entry.field
    hs = cfg.scales(entry)
    h0 = hs[-1]
    g = homogenized_field(f, h0)
    hits_f, hits_raw = 0, 0
    n = cfg.homogenized_line_seeds
    for seed in range(n):
        tr = line_decomposition_solve(g, seed)
        d = min(float(np.max(np.abs(np.asarray(tr.final_point) - np.asarray(m)))) for m in entry.minimizers)
        hits_f += d <= h0 / 2
        raw = line_decomposition_solve(f, seed)
        hits_raw += entry.nearest_minimizer_distance(raw.final_point) <= config.SUCCESS_TOL
    ok = hits_f >= math.ceil(0.9 * n)
    return [
        _record("line-decomposition-homogenized", entry.name, {"h": h0, "seeds": n},
                {"hits": hits_f, "rate": hits_f / n}, ok,
                notes="hit = final point within h/2 (max-norm) of the oracle minimizer"),
        _record("line-decomposition-raw", entry.name, {"seeds": n},
                {"hits": hits_raw, "rate": hits_raw / n}, True, mandatory=False,
                notes="raw line restrictions are multimodal, so the per-line premise does not hold; "
                      "each line is still scanned globally, which can rescue it. "
                      f"success = within {config.SUCCESS_TOL:g} of the oracle minimizer"),
    ]


# -- assembly ------------------------------------------------------------------


def _tasks(entry: CorpusEntry):
    tags = entry.tags
    if entry.dim == 1:
        tasks = [_check_identity, _check_counts]
        if "monotone" in tags:
            tasks.append(_check_monotone)
        if "boundary-extremum" in tags:
            tasks.append(_check_boundary)
        if "multimodal" in tags:
            tasks.append(_check_containment)
            if "equal-minima" in tags:
                tasks += [_check_equal_minima, _check_profile_control]
            elif entry.local_minima == 2:
                tasks.append(_check_two_wells)
        return tasks
    if entry.dim == 2:
        tasks = [_check_potential]
        if "multimodal" in tags and "equal-minima" not in tags:
            tasks += [lambda e, c: _check_census(e, c, rebound=True), _check_lines_multimodal]
        else:
            tasks.append(_check_census)
        if "convex" in tags:
            tasks.append(_check_lines_convex)
        return tasks
    return [_check_monte_carlo]


def verify_theorems(entries, cfg: VerifyConfig = None) -> TheoremReport:
    """Run every applicable check on every entry; never raises on a failing check."""
    cfg = cfg or VerifyConfig()
    entries = list(entries)
    names = {e.name for e in entries}
    unknown = sorted(set(cfg.h_grids) - names)
    if unknown:
        raise ConfigError(f"h grid given for unknown entries {unknown}", "verify.h_grids")
    jobs = [(task, e) for e in entries for task in _tasks(e)]
    results = pmap(lambda job: job[0](job[1], cfg), jobs)
    records = [r for batch in results for r in batch]
    records.sort(key=CheckRecord.sort_key)
    return TheoremReport(records)
