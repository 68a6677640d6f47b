"""One check per acceptance criterion, each logging a PASS/FAIL line.

Run ``pytest -v tests/test_acceptance.py``; the lines are repeated in an
"acceptance criteria" section at the end of the pytest output.
"""

import json
import math

import numpy as np
import pytest
import sympy as sp

from homogopt.analysis import containment_check, is_non_increasing, scan_zeros, zero_count_curve
from homogopt.cli import main
from homogopt.funcmodel import ScalarField, corpus, get_entry
from homogopt.homog import GaussPolicy, HomogenizationOperator, MonteCarloPolicy, homogenize, inset_box
from homogopt.scale import default_schedule, find_h0
from homogopt.solver import line_decomposition_solve, plain_descent, smoothed_descent
from homogopt.verify import expected_terminal_count, identity_pairs, identity_residuals, potential_errors

ONE_D = [e for e in corpus() if e.dim == 1]
TWO_D = [e for e in corpus() if e.dim == 2]


def test_average_gradient_identity(acceptance_log):
    rng = np.random.default_rng(2024)
    worst, n = 0.0, 0
    ok = True
    for k in range(100):
        e = ONE_D[int(rng.integers(len(ONE_D)))]
        (pair,) = identity_pairs(e.field, 1, rng)
        (_, _, q, a, err), = identity_residuals(e.field, [pair])
        diff = abs(q - a)
        ok &= diff <= max(1e-9, err)
        worst = max(worst, diff)
        n += 1
    acceptance_log(1, "average-gradient identity", ok,
                   f"{n} random (entry, h, x) triples, max |T - mean f'| = {worst:.2e} (bound max(1e-9, estimate))")
    assert ok


def test_potential_field(acceptance_log):
    rng = np.random.default_rng(99)
    assert len(TWO_D) >= 3
    worst_rel, worst_cross = 0.0, 0.0
    for e in TWO_D[:3]:
        lo_h, hi_h, _ = e.h_grid
        for _ in range(50):
            h = float(rng.uniform(lo_h, hi_h))
            rel, cross = potential_errors(e.field, h, rng)
            worst_rel = max(worst_rel, rel)
            if e.field.poly_degree is not None:
                worst_cross = max(worst_cross, cross)
    ok = worst_rel <= 1e-5 and worst_cross <= 1e-6
    acceptance_log(2, "potential field", ok,
                   f"50 points x {', '.join(e.name for e in TWO_D[:3])}: max rel FD error {worst_rel:.2e} "
                   f"(<= 1e-5), max cross asymmetry on polynomials {worst_cross:.2e} (<= 1e-6)")
    assert ok


def test_quadrature_exactness(acceptance_log):
    rng = np.random.default_rng(5)
    x, y = sp.symbols("x y")
    worst = 0.0
    for trial in range(40):
        # total degree <= 6
        terms = []
        for _ in range(5):
            px = int(rng.integers(0, 7))
            py = int(rng.integers(0, 7 - px))
            terms.append(f"{int(rng.integers(-9, 10))}*x^{px}*y^{py}")
        text = " + ".join(terms)
        expr = sp.sympify(text.replace("^", "**"))
        f = ScalarField.from_expression(text, ["x", "y"], [(-4, 4), (-4, 4)])
        c = [sp.Rational(int(v), 8) for v in rng.integers(-8, 9, 2)]
        h = sp.Rational(int(rng.integers(1, 17)), 8)
        exact = expr
        for s, ci in zip((x, y), c):
            exact = sp.integrate(exact, (s, ci - h / 2, ci + h / 2)) / h
        exact = float(exact)
        got = homogenize(f, HomogenizationOperator(float(h), GaussPolicy(8)), tuple(map(float, c))).value
        worst = max(worst, abs(got - exact) / max(abs(exact), 1e-300) if exact else abs(got))
    e4 = get_entry("separable_4d")
    mc = homogenize(e4.field, HomogenizationOperator(1.0, MonteCarloPolicy(10**6, seed=0)), (0, 0, 0, 0))
    z = (mc.value - 1 / 3) / mc.error
    ok = worst <= 1e-12 and abs(z) <= 3
    acceptance_log(3, "quadrature exactness", ok,
                   f"gauss-8 on 40 random degree<=6 polynomials: max rel error {worst:.1e} (<= 1e-12); "
                   f"monte-carlo on separable_4d at 0, h=1: {mc.value:.6f} +- {mc.error:.1e}, z = {z:+.2f} (|z| <= 3)")
    assert ok


def test_zero_count_decay_and_classification(acceptance_log):
    lines, ok = [], True
    for e in ONE_D:
        reps = [scan_zeros(e.field, HomogenizationOperator(h)) for h in e.scales()]
        counts = [r.count for r in reps]
        mono = is_non_increasing(counts)
        ok &= mono
        last = reps[-1]
        terminal = "identically-zero" if last.identically_zero else last.count
        if "equal-minima" in e.tags:
            lines.append(f"{e.name} {counts[0]}->{terminal} (equal minima, not classified)")
            continue
        expected = expected_terminal_count(e)
        ok &= terminal == expected
        lines.append(f"{e.name} {counts[0]}->{terminal} (expected {expected})")
    acceptance_log(4, "zero-count decay", ok, "; ".join(lines))
    assert ok


def test_critical_scale_closed_form(acceptance_log):
    crit = find_h0(get_entry("double_well").field, 1)
    rel = abs(crit.h0 - math.sqrt(2)) / math.sqrt(2)
    ok = rel <= 1e-3
    acceptance_log(5, "critical scale", ok, f"double_well h0 = {crit.h0:.6f}, sqrt(2) = {math.sqrt(2):.6f}, rel {rel:.1e} (<= 1e-3)")
    assert ok


def test_containment_at_critical_scale(acceptance_log):
    lines, ok = [], True
    for e in ONE_D:
        if "multimodal" not in e.tags:
            continue
        terminal = scan_zeros(e.field, HomogenizationOperator(e.scales()[-1])).count
        crit = find_h0(e.field, terminal)
        res = containment_check(scan_zeros(e.field, HomogenizationOperator(crit.h0)), e)
        ok &= res.passed
        lines.append(f"{e.name} h0={crit.h0:.4f} margin={res.margin:.2e}")
    acceptance_log(6, "containment", ok, "; ".join(lines))
    assert ok


def _success_rates(entry, runs=20):
    f = entry.field
    sched = default_schedule(f)
    lo, hi = inset_box(f, sched.scales[0])
    cont = plain = 0
    for seed in range(runs):
        x0 = np.random.default_rng(seed).uniform(lo, hi)
        cont += entry.nearest_minimizer_distance(smoothed_descent(f, sched, x0).final_point) <= 1e-3
        plain += entry.nearest_minimizer_distance(plain_descent(f, x0).final_point) <= 1e-3
    return cont / runs, plain / runs


def test_solver_efficacy(acceptance_log):
    c1, p1 = _success_rates(get_entry("tilted_double_well"))
    c2, p2 = _success_rates(get_entry("tilted_rastrigin"))
    ok = c1 > p1 and c2 > p2 and c2 >= 0.9 and p2 <= 0.4
    acceptance_log(7, "solver efficacy", ok,
                   f"tilted_double_well continuation {c1:.0%} vs plain {p1:.0%}; "
                   f"tilted_rastrigin continuation {c2:.0%} (>= 90%) vs plain {p2:.0%} (<= 40%)")
    assert ok


def test_line_decomposition_on_convex_quadratics(acceptance_log):
    cases = [("x^2 + y^2", (0.0, 0.0)), ("x^2 + x*y + y^2", (0.0, 0.0)),
             ("2*x^2 + 0.5*y^2 - x*y + x - y", (0.0, 1.0))]  # 4x - y + 1 = 0, y - x - 1 = 0
    worst_d, worst_lines, ok = 0.0, 0, True
    for text, xstar in cases:
        f = ScalarField.from_expression(text, ["x", "y"], [(-3, 3), (-3, 3)])
        for seed in range(10):
            t = line_decomposition_solve(f, seed)
            d = float(np.linalg.norm(np.subtract(t.final_point, xstar)))
            worst_d, worst_lines = max(worst_d, d), max(worst_lines, len(t.records))
            ok &= d <= 1e-6 and len(t.records) <= 200
    acceptance_log(8, "line decomposition", ok,
                   f"3 quadratics x 10 seeds: max distance {worst_d:.1e} (<= 1e-6), max lines {worst_lines} (<= 200)")
    assert ok


def test_determinism(acceptance_log, full_verify, tmp_path, monkeypatch):
    _, first, _ = full_verify
    monkeypatch.setenv("HOMOGOPT_THREADS", "1")
    again = tmp_path / "verify"
    main(["verify", "--out", str(again), "--seed", "0"])
    same = {"theorem_report.json": (first / "theorem_report.json").read_bytes()
            == (again / "theorem_report.json").read_bytes()}
    monkeypatch.delenv("HOMOGOPT_THREADS")
    runs = {
        "result.json": ["solve", "--entry", "tilted_rastrigin", "--seed", "3"],
        "trace.json": ["solve", "--entry", "tilted_double_well", "--method", "plain", "--seed", "3"],
        "bench_summary.json": ["bench", "--entries", "tilted_double_well,himmelblau", "-N", "2", "--seed", "7"],
    }
    for name, argv in runs.items():
        a, b = tmp_path / f"{name}.a", tmp_path / f"{name}.b"
        main(argv + ["--out", str(a)])
        main(argv + ["--out", str(b)])
        same[name] = (a / name).read_bytes() == (b / name).read_bytes()
    ok = all(same.values())
    acceptance_log(9, "determinism", ok,
                   ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items())
                   + " (verify rerun single-threaded)")
    assert ok


def test_equal_minima_discrepancy_is_documented(acceptance_log, full_verify):
    _, _, report = full_verify
    recs = [r for r in report["records"] if r["check"] == "equal-minima-count" and r["entry"] == "double_well"]
    ok = (len(recs) == 1 and recs[0]["status"] == "info" and not recs[0]["mandatory"]
          and recs[0]["observed"]["terminal"] == 1 and "4x^3 + (h^2 - 2)x" in recs[0]["notes"])
    detail = (f"status={recs[0]['status']}, observed terminal {recs[0]['observed']['terminal']} vs claimed "
              f"{recs[0]['observed']['claimed']}, closed-form note attached") if recs else "record missing"
    acceptance_log(10, "equal-minima record", ok, detail)
    assert ok
