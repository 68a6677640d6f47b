import math

import numpy as np
import pytest
import sympy as sp

from homogopt.errors import InsetError
from homogopt.funcmodel import ScalarField, get_entry
from homogopt.homog import (
    AdaptivePolicy,
    GaussPolicy,
    HomogenizationOperator,
    MonteCarloPolicy,
    avg_gradient_1d,
    avg_gradient_field,
    avg_gradient_field_with_error,
    homogenize,
    inset_box,
    kernel_convolution_check,
)


def field(text, variables, box):
    return ScalarField.from_expression(text, variables, box)


def test_avg_gradient_1d_examples():
    assert avg_gradient_1d(field("x^2", ["x"], [(-5, 5)]), HomogenizationOperator(1.0), 3.0) == pytest.approx(6.0)
    assert avg_gradient_1d(field("x^3", ["x"], [(-3, 3)]), HomogenizationOperator(2.0), 1.0) == pytest.approx(4.0)
    assert avg_gradient_1d(field("4", ["x"], [(-1, 1)]), HomogenizationOperator(0.7), 0.1) == 0.0


def test_inset_violation_carries_required_region():
    f = field("x^2", ["x"], [(-1, 1)])
    with pytest.raises(InsetError) as exc:
        avg_gradient_1d(f, HomogenizationOperator(1.0), 0.8)
    lo, hi = exc.value.required
    assert lo[0] == pytest.approx(-0.5) and hi[0] == pytest.approx(0.5)


def test_operator_rejects_bad_scale():
    with pytest.raises(ValueError):
        HomogenizationOperator(0.0)
    with pytest.raises(ValueError):
        HomogenizationOperator(math.inf)


@pytest.mark.parametrize("text,x,h,expected", [
    ("x^2 + y^2", (1, 2), 0.8, (2, 4)),
    ("x^2*y", (1, 1), 2.0, (2, 4 / 3)),
    ("3", (0, 0), 1.0, (0, 0)),
])
def test_avg_gradient_field_examples(text, x, h, expected):
    f = field(text, ["x", "y"], [(-3, 3), (-3, 3)])
    g = avg_gradient_field(f, HomogenizationOperator(h), x)
    np.testing.assert_allclose(g, expected, atol=1e-13)


def test_field_matches_riemann_sum():
    # x^2 y, h=2, x=(1,1): midpoint sum of the partials over 1000^2 cells
    n = 1000
    c = (np.arange(n) + 0.5) / n * 2.0
    X, Y = np.meshgrid(c, c, indexing="ij")
    fx = (2 * X * Y).mean()
    fy = (X**2).mean()
    f = field("x^2*y", ["x", "y"], [(-3, 3), (-3, 3)])
    g = avg_gradient_field(f, HomogenizationOperator(2.0), (1.0, 1.0))
    np.testing.assert_allclose(g, (fx, fy), rtol=1e-5)


@pytest.mark.parametrize("text,h,x,expected", [
    ("x^2", 1.0, 0.0, 1 / 12),
    ("5*x + 2", 0.3, 1.0, 7.0),
    ("sin(x)", math.pi, math.pi / 2, 2 / math.pi),
])
def test_homogenize_examples(text, h, x, expected):
    f = field(text, ["x"], [(-4, 6)])
    v = homogenize(f, HomogenizationOperator(h), (x,))
    assert v.value == pytest.approx(expected, rel=1e-12)


def test_kernel_convolution_examples():
    q, a, _ = kernel_convolution_check(field("x^3", ["x"], [(-3, 3)]), HomogenizationOperator(2.0), 1.0)
    assert (q, a) == pytest.approx((4.0, 4.0))
    q, a, _ = kernel_convolution_check(field("sin(x)", ["x"], [(-4, 4)]), HomogenizationOperator(math.pi), 0.0)
    assert (q, a) == pytest.approx((2 / math.pi, 2 / math.pi))
    q, a, e = kernel_convolution_check(field("2", ["x"], [(-1, 1)]), HomogenizationOperator(1.0), 0.0)
    assert (q, a) == (0.0, 0.0)


def _exact_box_average(expr, symbols, center, h):
    val = expr
    for s, c in zip(symbols, center):
        val = sp.integrate(val, (s, c - h / 2, c + h / 2)) / h
    return float(val)


def test_gauss_is_exact_on_low_degree_polynomials():
    rng = np.random.default_rng(3)
    x, y = sp.symbols("x y")
    for _ in range(25):
        terms = []
        for _ in range(4):
            px, py = rng.integers(0, 4, 2)
            coef = int(rng.integers(-5, 6))
            terms.append(f"{coef}*x^{px}*y^{py}")
        text = " + ".join(terms)
        expr = sp.sympify(text.replace("^", "**"))
        f = field(text, ["x", "y"], [(-3, 3), (-3, 3)])
        center = tuple(sp.Rational(int(v), 4) for v in rng.integers(-4, 5, 2))
        h = sp.Rational(int(rng.integers(1, 9)), 4)
        exact = _exact_box_average(expr, (x, y), center, h)
        got = homogenize(f, HomogenizationOperator(float(h), GaussPolicy(8)), tuple(map(float, center)))
        assert got.value == pytest.approx(exact, rel=1e-12, abs=1e-12)
        assert got.error == 0.0


def test_adaptive_matches_closed_form_on_smooth_nonpolynomial():
    f = field("exp(x)*cos(y)", ["x", "y"], [(-2, 2), (-2, 2)])
    h, c = 1.3, (0.2, -0.4)
    exact = (math.exp(c[0] + h / 2) - math.exp(c[0] - h / 2)) / h * (
        math.sin(c[1] + h / 2) - math.sin(c[1] - h / 2)) / h
    v = homogenize(f, HomogenizationOperator(h, AdaptivePolicy()), c)
    assert v.value == pytest.approx(exact, abs=1e-10)


def test_monte_carlo_4d_within_three_standard_errors():
    f = field("x1^2 + x2^2 + x3^2 + x4^2", ["x1", "x2", "x3", "x4"], [(-2, 2)] * 4)
    v = homogenize(f, HomogenizationOperator(1.0, MonteCarloPolicy(10**6, seed=5)), (0, 0, 0, 0))
    assert abs(v.value - 1 / 3) <= 3 * v.error
    assert v.error < 1e-3


def test_monte_carlo_is_reproducible_and_restricted():
    f = get_entry("separable_4d").field
    op = HomogenizationOperator(1.0, MonteCarloPolicy(2000, seed=9))
    a = homogenize(f, op, (0, 0, 0, 0))
    b = homogenize(f, op, (0, 0, 0, 0))
    assert a == b
    with pytest.raises(ValueError):
        homogenize(field("x^2", ["x"], [(-1, 1)]), HomogenizationOperator(0.5, MonteCarloPolicy(1000)), (0,))


def test_linear_functions_are_invariant():
    rng = np.random.default_rng(0)
    f = field("3*x - 2*y + 1", ["x", "y"], [(-2, 2), (-2, 2)])
    for _ in range(10):
        h = float(rng.uniform(0.1, 2))
        lo, hi = inset_box(f, h)
        p = rng.uniform(lo, hi)
        op = HomogenizationOperator(h)
        assert homogenize(f, op, p).value == pytest.approx(f.value(p), abs=1e-12)
        np.testing.assert_allclose(avg_gradient_field(f, op, p), (3, -2), atol=1e-12)


def test_field_error_estimate_covers_truth():
    f = field("sin(3*x)*y", ["x", "y"], [(-2, 2), (-2, 2)])
    h, p = 1.0, np.array([0.3, 0.2])
    g, e, _ = avg_gradient_field_with_error(f, HomogenizationOperator(h, GaussPolicy(4)), p)
    exact_x = (math.sin(3 * (p[0] + h / 2)) - math.sin(3 * (p[0] - h / 2))) / h * p[1]
    assert abs(g[0] - exact_x) <= max(e[0], 1e-12) * 10
