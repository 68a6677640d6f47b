import math

import numpy as np
import pytest

from homogopt.errors import DomainError, NotDifferentiableError, ParseError, UnknownIdentifierError
from homogopt.expr import (
    Binary,
    Const,
    Pow,
    Var,
    compile_expression,
    differentiate,
    evaluate,
    free_variables,
    parse,
    polynomial_degree,
    to_text,
)


def test_parse_sum_of_squares_tree():
    e = parse("x^2 + y^2", ["x", "y"])
    assert e.root == Binary("+", Pow(Var("x"), 2), Pow(Var("y"), 2))


def test_unbalanced_paren_reports_offset():
    with pytest.raises(ParseError) as exc:
        parse("x*(", ["x"])
    assert exc.value.offset == 3
    assert "offset 3" in str(exc.value)


def test_unknown_identifier_is_named():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("x + z", ["x"])
    assert exc.value.name == "z"


@pytest.mark.parametrize("text,point,value", [
    ("x*y", (2, 3), 6.0),
    ("7", (1, 1), 7.0),
    ("x^2", (3, 0), 9.0),
    ("-x^2", (3, 0), -9.0),
    ("2^-1 + x", (0, 0), 0.5),
    ("sin(pi/2) + cos(0)", (0, 0), 2.0),
    ("exp(0) + sqrt(4) + abs(-3)", (0, 0), 6.0),
    ("x - y - 1", (5, 2), 2.0),
    ("x / y / 2", (8, 2), 2.0),
])
def test_evaluate(text, point, value):
    assert evaluate(parse(text, ["x", "y"]), point) == pytest.approx(value, abs=1e-15)


def test_pole_raises_domain_error_with_point():
    with pytest.raises(DomainError) as exc:
        evaluate(parse("1/x", ["x"]), (0.0,))
    assert exc.value.point == (0.0,)


def test_compiled_evaluator_is_vectorized():
    fn = compile_expression(parse("x*y + 1", ["x", "y"]))
    P = np.array([[[1.0, 2.0], [3.0, 4.0]], [[0.0, 0.0], [-1.0, 5.0]]])
    np.testing.assert_allclose(fn(P), [[3.0, 13.0], [1.0, -4.0]])


@pytest.mark.parametrize("text,var,expected", [
    ("x^2", "x", "2*x"),
    ("sin(x)", "x", "cos(x)"),
    ("x^2 + y^2", "y", "2*y"),
    ("3*x + 2", "x", "3"),
    ("y", "x", "0"),
])
def test_derivative_simplifies(text, var, expected):
    d = differentiate(parse(text, ["x", "y"]), var)
    assert d == parse(expected, ["x", "y"])


def test_abs_is_not_differentiable():
    with pytest.raises(NotDifferentiableError):
        differentiate(parse("abs(x)", ["x"]), "x")


def test_free_variables_and_degree():
    e = parse("x^3*y + 2*y", ["x", "y", "z"])
    assert free_variables(e) == {"x", "y"}
    assert polynomial_degree(e) == 4
    assert polynomial_degree(parse("sin(x)", ["x"])) is None
    assert polynomial_degree(parse("(x+1)^3/2", ["x"])) == 3


def _random_polynomial(rng, variables, terms=4, max_degree=5):
    parts = []
    for _ in range(terms):
        coef = round(float(rng.uniform(-3, 3)), 3)
        budget = int(rng.integers(0, max_degree + 1))
        powers = rng.multinomial(budget, [1 / len(variables)] * len(variables))
        mono = "*".join(f"{v}^{int(p)}" for v, p in zip(variables, powers))
        parts.append(f"({coef})*{mono}")
    return " + ".join(parts)


def test_random_polynomial_derivatives_match_finite_differences():
    rng = np.random.default_rng(7)
    names = ["x", "y", "z"]
    step = 1e-5
    for _ in range(200):
        variables = names[: int(rng.integers(1, 4))]
        e = parse(_random_polynomial(rng, variables), variables)
        assert polynomial_degree(e) <= 5
        derivs = [differentiate(e, v) for v in variables]
        for _ in range(10):
            p = rng.uniform(-1.5, 1.5, len(variables))
            for i, d in enumerate(derivs):
                hi, lo = p.copy(), p.copy()
                hi[i] += step
                lo[i] -= step
                fd = (evaluate(e, hi) - evaluate(e, lo)) / (2 * step)
                assert evaluate(d, p) == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_printer_round_trips():
    rng = np.random.default_rng(11)
    texts = [_random_polynomial(rng, ["x", "y"]) for _ in range(50)]
    texts += ["-x^2", "-(x^2)", "(-x)^2", "x - (y - 1)", "x/(y*2)", "sin(-x)^3", "2^-2*x",
              "exp(x - y)/sqrt(1 + x^2)", "x^4 - x^2 + 0.2*x"]
    for text in texts:
        e = parse(text, ["x", "y"])
        again = parse(to_text(e), ["x", "y"])
        assert again == e, text


def test_corpus_expressions_round_trip():
    from homogopt.funcmodel import corpus

    for entry in corpus():
        e = entry.field.expression
        once = parse(to_text(e), e.variables)
        assert once == e
        assert to_text(parse(to_text(once), e.variables)) == to_text(once)


def test_negative_exponent_and_pi():
    e = parse("x^-2 + pi", ["x"])
    assert evaluate(e, (2.0,)) == pytest.approx(0.25 + math.pi)
    assert isinstance(parse("pi", ["x"]).root, Const)
