import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from treecert.geometry import (
    EMPTY,
    BoxArray,
    HyperRectangle,
    Interval,
    add_down,
    add_up,
    at_most,
    box_intersect,
    format_number,
    greater_than,
    interval_intersect,
    interval_sum,
    make_interval,
    parse_interval,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


@st.composite
def intervals(draw):
    a, b = sorted((draw(finite), draw(finite)))
    lo = draw(st.sampled_from([a, -math.inf]))
    hi = draw(st.sampled_from([b, math.inf]))
    return make_interval(lo, hi, draw(st.booleans()), draw(st.booleans()))


def test_degenerate_intervals_are_empty():
    assert make_interval(1, 1, True, False) is EMPTY
    assert make_interval(2, 1, True, True) is EMPTY
    assert make_interval(1, 1, True, True) == Interval.point(1)


def test_half_lines_meet_only_when_they_overlap():
    assert interval_intersect(at_most(3), greater_than(3)) is EMPTY
    assert interval_intersect(at_most(3), greater_than(2)) == make_interval(2, 3, False, True)


def test_touching_closed_and_open_ends():
    assert interval_intersect(Interval(0, 1, True, True), Interval(1, 2, False, True)) is EMPTY
    assert interval_intersect(Interval(0, 1, True, True), Interval(1, 2, True, True)) == Interval.point(1)


def test_sum_keeps_closedness_only_when_both_ends_closed():
    s = interval_sum(Interval(0, 1, True, False), Interval(-1, 1, True, True))
    assert str(s) == "[-1,2)"


def test_outward_rounding_brackets_the_exact_sum():
    assert add_down(0.1, 0.2) < add_up(0.1, 0.2)
    assert add_down(0.5, 0.25) == add_up(0.5, 0.25) == 0.75


@given(intervals(), intervals())
def test_intersection_is_commutative(a, b):
    assert interval_intersect(a, b) == interval_intersect(b, a)


@given(intervals(), intervals(), finite)
def test_intersection_membership(a, b, v):
    assert interval_intersect(a, b).contains(v) == (a.contains(v) and b.contains(v))


@given(intervals())
def test_intersection_is_idempotent(a):
    assert interval_intersect(a, a) == a


@given(intervals(), intervals(), finite, finite)
def test_sum_contains_pairwise_sums(a, b, x, y):
    if a.contains(x) and b.contains(y):
        assert interval_sum(a, b).contains(x + y)


@given(intervals())
def test_text_round_trip(a):
    assert parse_interval(str(a)) == a


@given(finite)
def test_number_format_round_trip(v):
    assert float(format_number(v)) == v


def test_parse_rejects_garbage():
    for bad in ("", "1,2", "[a,b]", "[nan,1]"):
        with pytest.raises(ValueError):
            parse_interval(bad)
    assert parse_interval("empty") is EMPTY


def test_box_operations():
    h = HyperRectangle.parse(["(-inf,10]", "(4,5]"])
    assert h.contains([10, 5]) and not h.contains([10, 4])
    assert HyperRectangle.full(2).contains([1e300, -1e300])
    assert box_intersect(h, h.replace(1, greater_than(5))).is_empty
    assert h.to_strings() == ["(-inf,10]", "(4,5]"]


def _random_box(rng):
    ivs = []
    for _ in range(2):
        lo, hi = sorted(rng.integers(0, 5, 2).astype(float))
        ivs.append(Interval(lo, hi, True, True) if lo == hi else
                   make_interval(lo, hi, bool(rng.integers(2)), bool(rng.integers(2))))
    return HyperRectangle(ivs)


def test_box_array_matches_scalar_membership():
    rng = np.random.default_rng(0)
    boxes = [_random_box(rng) for _ in range(20)]
    X = rng.integers(0, 5, (50, 2)).astype(float)
    arr = BoxArray(boxes, 2)
    want = np.array([[b.contains(x) for b in boxes] for x in X])
    assert (arr.contains_points(X) == want).all()
    assert (arr.any_contains(X) == want.any(axis=1)).all()
