import math

import pytest

from homogopt.funcmodel import ScalarField, get_entry
from homogopt.scale import ScaleSearchError, default_schedule, find_h0, make_schedule


def test_symmetric_double_well_h0_is_sqrt2():
    crit = find_h0(get_entry("double_well").field, 1)
    assert crit.h0 == pytest.approx(math.sqrt(2), rel=1e-3)
    assert crit.count == 1 and crit.method == "bisection"


def test_tilted_double_well_h0_matches_cubic_discriminant():
    # T = 4x^3 + (h^2 - 2)x + 0.2 has three real roots iff
    # -4 (4)(h^2 - 2)^3 - 27 (16)(0.04) > 0
    p = lambda h: (h * h - 2) / 4
    q = 0.05
    disc = lambda h: -(4 * p(h) ** 3 + 27 * q * q)
    lo, hi = 0.5, 1.4
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if disc(mid) > 0 else (lo, mid)
    crit = find_h0(get_entry("tilted_double_well").field, 1)
    assert crit.h0 == pytest.approx(lo, rel=1e-3)


def test_monotone_function_qualifies_at_lower_bound():
    f = ScalarField.from_expression("x^3", ["x"], [(-1, 1)])
    crit = find_h0(f, 0)
    assert crit.method == "lower-bound" and crit.h0 == pytest.approx(2 / 40)


def test_unreachable_target_raises():
    with pytest.raises(ScaleSearchError) as exc:
        find_h0(get_entry("ripple_cubic").field, 0)
    assert exc.value.count == 2


def test_bad_bounds():
    with pytest.raises(ValueError):
        find_h0(get_entry("double_well").field, 1, h_bounds=(1.0, 0.5))


def test_make_schedule():
    s = make_schedule(2.0, 0.5, 0.2)
    assert s.scales == (2.0, 1.0, 0.5, 0.25)
    with pytest.raises(ValueError):
        make_schedule(1.0, 1.5)
    with pytest.raises(ValueError):
        make_schedule(1.0, 0.5, 2.0)


def test_default_schedule_uses_half_shortest_edge():
    s = default_schedule(get_entry("tilted_rastrigin").field)
    assert s.scales[0] == 5.0 and s.rho == 0.5
    assert s.scales[-1] >= 10 * 1e-3
    assert s.heuristic
    with pytest.raises(ValueError):
        default_schedule(get_entry("double_well").field, h_start=5.0)
