"""Command-line front end: ``homogopt <analyze|verify|solve|bench> [flags]``.

A run is described by a ``RunConfig``, built from an optional JSON config
file with command-line flags layered on top. Every command writes its
outputs into ``--out``; JSON is UTF-8 with sorted keys and CSV files always
carry a header row.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import zlib
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import config
from .analysis import containment_check, is_non_increasing, scan_zeros
from .errors import ConfigError, DomainError, EmptyDomainError, HomogoptError
from .funcmodel import CorpusEntry, ScalarField, corpus, default_h_grid, get_entry, negative_control
from .homog import (
    AdaptivePolicy,
    GaussPolicy,
    HomogenizationOperator,
    MonteCarloPolicy,
    default_policy,
    inset_box,
)
from .io import write_csv, write_json
from .parallel import pmap
from .scale import ScaleSearchError, default_schedule, find_h0
from .solver import (
    DescentParams,
    LineParams,
    line_decomposition_solve,
    plain_descent,
    smoothed_descent,
    staged_line_decomposition,
)
from .verify import VerifyConfig, expected_terminal_count, grid_census, verify_theorems

COMMANDS = ("analyze", "verify", "solve", "bench")
METHODS = ("continuation", "plain", "line-decomposition", "line-decomposition-staged")
POLICIES = ("auto", "gauss", "adaptive", "monte-carlo")
LANDSCAPE_POINTS_1D = 201
LANDSCAPE_POINTS_2D = 41


@dataclass
class RunConfig:
    command: str
    entry: str = None
    expr: str = None
    variables: list = None
    box: list = None
    policy: str = "auto"
    gauss_order: int = config.GAUSS_ORDER
    mc_samples: int = config.MC_SAMPLES
    h_values: list = None
    h_grid: list = None  # [lo, hi, count], geometric
    h_start: float = None
    rho: float = config.RHO
    h_min: float = None
    polish: bool = True
    method: str = "continuation"
    x0: list = None
    seed: int = 0
    runs: int = config.BENCH_RUNS
    entries: list = None
    negative_control: bool = False
    grid: int = None
    max_iters: int = config.STAGE_MAX_ITERS
    max_lines: int = config.LINE_MAX
    success_tol: float = config.SUCCESS_TOL
    out: str = "."

    @classmethod
    def build(cls, command, file_fields=None, overrides=None):
        known = {f.name for f in fields(cls)}
        merged = {}
        for source in (file_fields or {}, overrides or {}):
            for key, value in source.items():
                if key not in known or key == "command":
                    raise ConfigError("unknown configuration field", key)
                if value is not None:
                    merged[key] = value
        cfg = cls(command=command, **merged)
        cfg.validate()
        return cfg

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"must be one of {', '.join(COMMANDS)}", "command")
        has_entry = self.entry is not None
        has_expr = self.expr is not None
        if self.command in ("analyze", "solve"):
            if has_entry == has_expr:
                raise ConfigError("give exactly one function source: a corpus entry or an expression",
                                  "entry/expr")
        elif has_expr:
            raise ConfigError(f"{self.command} runs on corpus entries, not expressions", "expr")
        if has_expr:
            if not self.variables:
                raise ConfigError("expression needs a variable list", "variables")
            if not self.box or len(self.box) != len(self.variables):
                raise ConfigError("box needs one [lo, hi] pair per variable", "box")
            for i, pair in enumerate(self.box):
                if len(pair) != 2 or not float(pair[0]) < float(pair[1]):
                    raise ConfigError(f"need lo < hi, got {pair!r}", f"box[{i}]")
        if self.policy not in POLICIES:
            raise ConfigError(f"must be one of {', '.join(POLICIES)}", "policy")
        if self.method not in METHODS:
            raise ConfigError(f"must be one of {', '.join(METHODS)}", "method")
        if not 0 < self.rho < 1:
            raise ConfigError("must lie in (0, 1)", "rho")
        if self.h_start is not None and not self.h_start > 0:
            raise ConfigError("must be positive", "h_start")
        if self.h_values is not None:
            if not self.h_values:
                raise ConfigError("must not be empty", "h_values")
            for i, h in enumerate(self.h_values):
                if not (isinstance(h, (int, float)) and h > 0 and math.isfinite(h)):
                    raise ConfigError(f"must be a positive number, got {h!r}", f"h_values[{i}]")
            if any(b <= a for a, b in zip(self.h_values, self.h_values[1:])):
                raise ConfigError("must be strictly increasing", "h_values")
        if self.h_grid is not None:
            if len(self.h_grid) != 3 or not 0 < self.h_grid[0] < self.h_grid[1] or int(self.h_grid[2]) < 2:
                raise ConfigError("expected [lo, hi, count] with 0 < lo < hi and count >= 2", "h_grid")
        if self.runs < 1:
            raise ConfigError("must be >= 1", "runs")
        if self.grid is not None and self.grid < 16:
            raise ConfigError("must be >= 16", "grid")
        for name in ("gauss_order", "mc_samples", "max_iters", "max_lines"):
            if getattr(self, name) < 1:
                raise ConfigError("must be >= 1", name)
        if not self.success_tol > 0:
            raise ConfigError("must be positive", "success_tol")
        if self.entries is not None:
            if self.command not in ("verify", "bench"):
                raise ConfigError("only verify and bench take an entry list", "entries")
            valid = {e.name for e in corpus()} | {"negative_control"}
            for i, name in enumerate(self.entries):
                if name not in valid:
                    raise ConfigError(f"unknown corpus entry {name!r}", f"entries[{i}]")
        if self.entry is not None and self.entry not in {e.name for e in corpus()} | {"negative_control"}:
            raise ConfigError(f"unknown corpus entry {self.entry!r}", "entry")

    # -- resolution ----------------------------------------------------------

    def output_dir(self) -> Path:
        out = Path(self.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"cannot create output directory: {exc}", "out") from None
        if not os.access(out, os.W_OK):
            raise ConfigError("output directory is not writable", "out")
        return out

    def source(self):
        """(field, corpus entry or None)."""
        if self.entry is not None:
            e = get_entry(self.entry)
            return e.field, e
        box = [(float(a), float(b)) for a, b in self.box]
        try:
            f = ScalarField.from_expression(self.expr, list(self.variables), box, name="user")
        except HomogoptError as exc:
            raise ConfigError(str(exc), "expr") from None
        return f, None

    def make_policy(self, dim):
        if self.policy == "auto":
            return default_policy(dim, self.seed)
        if self.policy == "gauss":
            return GaussPolicy(self.gauss_order)
        if self.policy == "adaptive":
            return AdaptivePolicy(order=self.gauss_order)
        return MonteCarloPolicy(self.mc_samples, self.seed, force=True)

    def scales(self, f: ScalarField, entry: CorpusEntry = None):
        if self.h_values is not None:
            return [float(h) for h in self.h_values]
        lo, hi, count = self.h_grid or (entry.h_grid if entry else default_h_grid(f))
        return [float(h) for h in np.geomspace(lo, hi, int(count))]

    def schedule(self, f):
        try:
            return default_schedule(f, self.h_start, self.rho, self.h_min, self.polish)
        except ValueError as exc:
            raise ConfigError(str(exc), "h_start") from None


def _check_scales(f, hs):
    edge = float(f.edges.min())
    for h in hs:
        if h >= edge:
            raise EmptyDomainError(f"empty inset domain: h={h:g} does not fit in the box (shortest edge {edge:g})")


def _oracle_gap(entry, point, value):
    if entry is None or not entry.minimizers:
        return None
    d = entry.nearest_minimizer_distance(point)
    return {"distance": d, "value_gap": float(value) - entry.min_value}


# -- analyze -------------------------------------------------------------------


def run_analyze(cfg: RunConfig):
    f, entry = cfg.source()
    if f.dim not in (1, 2):
        raise ConfigError("analyze handles 1-D and 2-D functions", "variables")
    hs = cfg.scales(f, entry)
    _check_scales(f, hs)
    out = cfg.output_dir()
    if f.dim == 1:
        return _analyze_1d(cfg, f, entry, hs, out)
    return _analyze_2d(cfg, f, entry, hs, out)


def _analyze_1d(cfg, f, entry, hs, out):
    grid = cfg.grid or config.SCAN_GRID
    if grid < config.MIN_SCAN_GRID:
        raise ConfigError(f"1-D scans need grid >= {config.MIN_SCAN_GRID}", "grid")
    reports = pmap(lambda h: scan_zeros(f, HomogenizationOperator(h), grid), hs)
    write_csv(out / "zeros.csv",
              ("h", "count", "zeros", "brackets", "residuals", "max_abs_T", "tau", "profile"),
              ((r.h, r.count, ";".join(repr(z.x) for z in r.zeros),
                ";".join(f"{z.bracket[0]!r}:{z.bracket[1]!r}" for z in r.zeros),
                ";".join(repr(z.residual) for z in r.zeros), r.max_abs, r.tau, r.profile_text())
               for r in reports))

    rows = []
    for h in hs:
        op = HomogenizationOperator(h, GaussPolicy(cfg.gauss_order))
        lo, hi = (float(v[0]) for v in inset_box(f, h))
        xs = np.linspace(lo, hi, LANDSCAPE_POINTS_1D)
        fv = f.scalar(xs)
        T = (f.scalar(xs + h / 2) - f.scalar(xs - h / 2)) / h
        F = op.average(f, xs[:, None])
        rows.extend(zip([h] * xs.size, xs.tolist(), fv.tolist(), T.tolist(), F.tolist()))
    write_csv(out / "landscape.csv", ("h", "x", "f", "T", "F"), rows)

    counts = [r.count for r in reports]
    last = reports[-1]
    terminal = "identically-zero" if last.identically_zero else last.count
    summary = {
        "function": _describe(f, entry),
        "dimension": 1,
        "grid": grid,
        "h_values": hs,
        "counts": counts,
        "non_increasing": is_non_increasing(counts),
        "terminal_count": terminal,
        "critical_scale": None,
        "containment": None,
    }
    if entry is not None:
        summary["expected_terminal_count"] = expected_terminal_count(entry)
    if terminal != "identically-zero":
        try:
            crit = find_h0(f, last.count, h_bounds=(hs[0], hs[-1]) if len(hs) > 1 else None, grid=grid)
            summary["critical_scale"] = crit.to_dict()
            rep = scan_zeros(f, HomogenizationOperator(crit.h0), grid)
            if entry is not None and entry.minimizers and rep.zeros:
                res = containment_check(rep, entry)
                summary["containment"] = {"h": crit.h0, "passed": res.passed, "margin": res.margin,
                                          "zero": res.zero, "minimizer": list(res.minimizer)}
        except (ScaleSearchError, ValueError) as exc:
            summary["critical_scale"] = {"error": str(exc)}
    write_json(out / "summary.json", summary)
    return 0


def _analyze_2d(cfg, f, entry, hs, out):
    grid = cfg.grid or 256
    policy = cfg.make_policy(2)
    census = pmap(lambda h: grid_census(f, h, grid, policy), hs)
    write_csv(out / "zeros.csv", ("h", "minima", "maxima", "census", "argmin_x", "argmin_y"),
              ((h, a, b, a + b, p[0], p[1]) for h, (a, b, p) in zip(hs, census)))

    rows = []
    for h in hs:
        op = HomogenizationOperator(h, policy)
        lo, hi = inset_box(f, h)
        xs = np.linspace(lo[0], hi[0], LANDSCAPE_POINTS_2D)
        ys = np.linspace(lo[1], hi[1], LANDSCAPE_POINTS_2D)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        P = np.stack([X, Y], axis=-1).reshape(-1, 2)
        fv = f(P)
        F = op.average(f, P)
        G = op.gradient(f, P)
        rows.extend(zip([h] * len(P), P[:, 0].tolist(), P[:, 1].tolist(), fv.tolist(), F.tolist(),
                        G[:, 0].tolist(), G[:, 1].tolist()))
    write_csv(out / "landscape.csv", ("h", "x", "y", "f", "F", "Tx", "Ty"), rows)

    totals = [a + b for a, b, _ in census]
    summary = {
        "function": _describe(f, entry),
        "dimension": 2,
        "grid": grid,
        "h_values": hs,
        "census": totals,
        "minima": [a for a, _, _ in census],
        "non_increasing": is_non_increasing(totals),
        "terminal_census": totals[-1],
        "argmin_F_at_largest_h": list(census[-1][2]),
        "containment": None,
    }
    if entry is not None and entry.minimizers:
        p = np.asarray(census[-1][2])
        d = min(float(np.max(np.abs(p - np.asarray(m)))) for m in entry.minimizers)
        summary["containment"] = {"h": hs[-1], "max_norm_distance": d, "half_h": hs[-1] / 2}
    write_json(out / "summary.json", summary)
    return 0


def _describe(f, entry):
    from .expr import to_text

    return {
        "name": f.name,
        "expression": to_text(f.expression) if f.expression is not None else None,
        "box": f.box,
        "corpus_entry": entry.name if entry is not None else None,
    }


# -- verify --------------------------------------------------------------------


def run_verify(cfg: RunConfig, h_grids=None):
    names = cfg.entries
    if cfg.entry is not None:
        names = [cfg.entry]
    entries = corpus() if names is None else [get_entry(n) for n in names]
    if cfg.negative_control and all(e.name != "negative_control" for e in entries):
        entries.append(negative_control())
    vcfg_kwargs = {"seed": cfg.seed, "h_grids": dict(h_grids or {})}
    if cfg.grid is not None:
        vcfg_kwargs["scan_grid"] = cfg.grid
    report = verify_theorems(entries, VerifyConfig(**vcfg_kwargs))
    out = cfg.output_dir()
    write_json(out / "theorem_report.json", report.to_dict())
    write_csv(out / "theorem_report.csv", report.CSV_HEADER, report.csv_rows())
    return 0 if report.passed else 1


# -- solve ---------------------------------------------------------------------


def _start_point(cfg, f, schedule, rng):
    if cfg.x0 is not None:
        x0 = np.asarray(cfg.x0, dtype=float)
        if x0.shape != (f.dim,):
            raise ConfigError(f"expected {f.dim} coordinates", "x0")
        if not f.contains(x0):
            raise DomainError(f"x0={tuple(x0.tolist())} lies outside the domain box {f.box}", tuple(x0))
        return x0
    lo, hi = inset_box(f, schedule.scales[0])
    return rng.uniform(lo, hi)


def _run_method(method, f, schedule, x0, seed, cfg, policy):
    params = DescentParams(max_iters=cfg.max_iters)
    lparams = LineParams(x0=tuple(map(float, x0)), max_lines=cfg.max_lines)
    if method == "continuation":
        return smoothed_descent(f, schedule, x0, params, policy)
    if method == "plain":
        return plain_descent(f, x0, params)
    if f.dim != 2:
        raise ConfigError("line decomposition needs a 2-D function", "method")
    if method == "line-decomposition":
        return line_decomposition_solve(f, seed, lparams)
    return staged_line_decomposition(f, schedule, x0, seed, lparams, policy)


def run_solve(cfg: RunConfig):
    f, entry = cfg.source()
    schedule = cfg.schedule(f)
    policy = cfg.make_policy(f.dim)
    x0 = _start_point(cfg, f, schedule, np.random.default_rng(cfg.seed))
    out = cfg.output_dir()
    trace = _run_method(cfg.method, f, schedule, x0, cfg.seed, cfg, policy)
    doc = trace.to_dict()
    doc["schedule"] = schedule.to_dict()
    write_json(out / "trace.json", doc)
    names = [str(v) for v in (f.expression.variables if f.expression else range(f.dim))]
    write_csv(out / "trace.csv", ("stage", "h", *names, "f", "grad_norm", "step", "clipped"),
              ((r.stage, r.h, *r.point, r.value, r.grad_norm, r.step, str(r.clipped).lower())
               for r in trace.records))
    result = {
        "function": _describe(f, entry),
        "method": trace.method,
        "status": trace.status,
        "x0": list(trace.x0),
        "final_point": list(trace.final_point),
        "final_value": trace.final_value,
        "counts": trace.counts,
        "seed": cfg.seed,
        "oracle": _oracle_gap(entry, trace.final_point, trace.final_value),
    }
    write_json(out / "result.json", result)
    return 0


# -- bench ---------------------------------------------------------------------

BENCH_METHODS = ("continuation", "line-decomposition-staged", "plain")


def bench_entries(cfg: RunConfig):
    if cfg.entry is not None:
        return [get_entry(cfg.entry)]
    if cfg.entries is not None:
        return [get_entry(n) for n in cfg.entries]
    return [e for e in corpus() if "multimodal" in e.tags and e.dim <= 2]


def bench_start(cfg: RunConfig, entry: CorpusEntry, schedule, run: int):
    rng = np.random.default_rng([cfg.seed, zlib.crc32(entry.name.encode()), run])
    lo, hi = inset_box(entry.field, schedule.scales[0])
    return rng.uniform(lo, hi)


def _bench_job(job):
    cfg, entry, schedule, run, method = job
    f = entry.field
    x0 = bench_start(cfg, entry, schedule, run)
    if method == "line-decomposition-staged" and f.dim != 2:
        return None
    trace = _run_method(method, f, schedule, x0, cfg.seed + run, cfg, cfg.make_policy(f.dim))
    d = entry.nearest_minimizer_distance(trace.final_point)
    return {
        "entry": entry.name,
        "method": method,
        "run": run,
        "x0": [float(v) for v in x0],
        "final_point": list(trace.final_point),
        "final_value": trace.final_value,
        "distance": d,
        "success": d <= cfg.success_tol,
        "status": trace.status,
        "f_evals": trace.counts["f"],
        "quadrature_evals": trace.counts["quadrature"],
    }


def run_bench(cfg: RunConfig):
    entries = bench_entries(cfg)
    out = cfg.output_dir()
    jobs = []
    schedules = {}
    for e in entries:
        schedules[e.name] = cfg.schedule(e.field)
        for run in range(cfg.runs):
            for method in BENCH_METHODS:
                jobs.append((cfg, e, schedules[e.name], run, method))
    t0 = time.perf_counter()
    results = pmap(_bench_job, jobs)
    wall = time.perf_counter() - t0
    rows = [r for r in results if r is not None]

    header = ("entry", "method", "run", "x0", "final_point", "final_value", "distance", "success",
              "status", "f_evals", "quadrature_evals")
    write_csv(out / "bench.csv", header,
              ([r[k] if k != "success" else str(r[k]).lower() for k in header] for r in rows))

    summary = {"runs": cfg.runs, "seed": cfg.seed, "success_tol": cfg.success_tol, "entries": {}}
    for e in entries:
        per = {"schedule": schedules[e.name].to_dict(), "methods": {}}
        for method in BENCH_METHODS:
            mine = [r for r in rows if r["entry"] == e.name and r["method"] == method]
            if not mine:
                per["methods"][method] = {"applicable": False}
                continue
            wins = sum(r["success"] for r in mine)
            per["methods"][method] = {
                "applicable": True,
                "successes": wins,
                "success_rate": wins / len(mine),
                "mean_f_evals": float(np.mean([r["f_evals"] for r in mine])),
                "mean_quadrature_evals": float(np.mean([r["quadrature_evals"] for r in mine])),
            }
        summary["entries"][e.name] = per
    write_json(out / "bench_summary.json", summary)
    write_json(out / "bench_meta.json", {"wall_time_seconds": wall, "jobs": len(jobs)})
    return 0


# -- argument parsing ----------------------------------------------------------


def _number_list(text):
    text = text.strip()
    if text.startswith("["):
        return [float(v) for v in json.loads(text)]
    return [float(v) for v in text.split(",") if v.strip()]


def _box(text):
    text = text.strip()
    if text.startswith("["):
        return [[float(a), float(b)] for a, b in json.loads(text)]
    return [[float(v) for v in part.split(":")] for part in text.split(",")]


def _names(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser():
    p = argparse.ArgumentParser(prog="homogopt", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--h-start", type=float, dest="h_start")
    p.add_argument("--rho", type=float)
    p.add_argument("--grid", type=int, help="scan grid (1-D) or census grid (2-D)")
    p.add_argument("--entry", help="corpus entry name")
    p.add_argument("--entries", type=_names, help="comma-separated corpus entries (verify, bench)")
    p.add_argument("--expr", help="expression in the function DSL")
    p.add_argument("--vars", type=_names, dest="variables", help="comma-separated variable names")
    p.add_argument("--box", type=_box, help='per-variable bounds, "lo:hi,lo:hi" or JSON')
    p.add_argument("--x0", type=_number_list, help='start point, "a,b" or JSON')
    p.add_argument("--h-values", type=_number_list, dest="h_values")
    p.add_argument("--policy", choices=POLICIES)
    p.add_argument("--runs", "-N", type=int, dest="runs")
    p.add_argument("--negative-control", action="store_true", default=None, dest="negative_control")
    return p


def load_config(argv):
    args = build_parser().parse_args(argv)
    file_fields = {}
    h_grids = None
    if args.config:
        try:
            file_fields = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}", "config") from None
        if not isinstance(file_fields, dict):
            raise ConfigError("config file must hold a JSON object", "config")
        file_fields = dict(file_fields)
        h_grids = file_fields.pop("h_grids", None)
        if file_fields.pop("command", args.command) != args.command:
            raise ConfigError("config file names a different command", "command")
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    cfg = RunConfig.build(args.command, file_fields, overrides)
    if h_grids is not None:
        if cfg.command != "verify" or not isinstance(h_grids, dict):
            raise ConfigError("h_grids is a verify-only mapping of entry name to [lo, hi, count]", "h_grids")
        for name, spec in h_grids.items():
            if not isinstance(spec, list) or len(spec) != 3:
                raise ConfigError("expected [lo, hi, count]", f"h_grids.{name}")
    return cfg, h_grids


def main(argv=None):
    try:
        cfg, h_grids = load_config(argv)
        if cfg.command == "analyze":
            return run_analyze(cfg)
        if cfg.command == "verify":
            return run_verify(cfg, h_grids)
        if cfg.command == "solve":
            return run_solve(cfg)
        return run_bench(cfg)
    except (HomogoptError, ValueError) as exc:
        print(f"homogopt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
