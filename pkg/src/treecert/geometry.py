"""Real intervals with independently open/closed bounds, and axis-aligned boxes.

Intervals are immutable tuples ``(lo, hi, lo_closed, hi_closed)``. The empty
set is the singleton :data:`EMPTY`, never an interval with crossed bounds, so
``result is EMPTY`` is the emptiness test everywhere in the package.

Textual form is the usual mathematical notation, e.g. ``(5,9]``,
``(-inf,+inf)``, ``[0,0]``; the empty interval renders as ``empty``.
"""
from __future__ import annotations

import math
import re
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

INF = math.inf


class Bound(NamedTuple):
    """One endpoint of an interval. Infinite endpoints are never closed."""

    value: float
    closed: bool


class _EmptyInterval:
    __slots__ = ()
    is_empty = True

    def __repr__(self) -> str:
        return "EMPTY"

    def __str__(self) -> str:
        return "empty"

    def __reduce__(self):
        # unpickle to the module singleton so `is EMPTY` survives process pools
        return "EMPTY"

    def __bool__(self) -> bool:
        return False

    def contains(self, v: float) -> bool:
        return False

    def intersect(self, other: "IntervalLike") -> "_EmptyInterval":
        return self


EMPTY = _EmptyInterval()


class Interval(tuple):
    """A non-empty real interval.

    ``Interval(lo, hi, lo_closed, hi_closed)`` raises ``ValueError`` if the
    arguments describe the empty set; use :func:`make_interval` when emptiness
    is a legitimate outcome.
    """

    __slots__ = ()
    is_empty = False

    def __new__(cls, lo: float = -INF, hi: float = INF,
                lo_closed: bool = False, hi_closed: bool = False):
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval bounds must not be NaN")
        if math.isinf(lo):
            lo_closed = False
        if math.isinf(hi):
            hi_closed = False
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            raise ValueError(f"empty interval {_fmt_parts(lo, hi, lo_closed, hi_closed)}")
        return tuple.__new__(cls, (lo, hi, bool(lo_closed), bool(hi_closed)))

    def __getnewargs__(self):
        return tuple(self)

    @property
    def lo(self) -> float:
        return self[0]

    @property
    def hi(self) -> float:
        return self[1]

    @property
    def lo_closed(self) -> bool:
        return self[2]

    @property
    def hi_closed(self) -> bool:
        return self[3]

    @property
    def lower(self) -> Bound:
        return Bound(self[0], self[2])

    @property
    def upper(self) -> Bound:
        return Bound(self[1], self[3])

    @property
    def is_point(self) -> bool:
        return self[0] == self[1]

    def contains(self, v: float) -> bool:
        lo, hi, lc, hc = self
        return (v > lo or (lc and v == lo)) and (v < hi or (hc and v == hi))

    def __contains__(self, v) -> bool:  # type: ignore[override]
        return self.contains(v)

    def intersect(self, other: "IntervalLike") -> "IntervalLike":
        return interval_intersect(self, other)

    def __add__(self, other):  # type: ignore[override]
        return interval_sum(self, other)

    def issubset(self, other: "IntervalLike") -> bool:
        return interval_intersect(self, other) == self

    def __repr__(self) -> str:
        return f"Interval({self})"

    def __str__(self) -> str:
        return _fmt_parts(*self)

    @classmethod
    def parse(cls, text: str) -> "IntervalLike":
        return parse_interval(text)

    @classmethod
    def point(cls, v: float) -> "Interval":
        return cls(v, v, True, True)


IntervalLike = Union[Interval, _EmptyInterval]

REALS = Interval()


def _new(lo: float, hi: float, lc: bool, hc: bool) -> Interval:
    return tuple.__new__(Interval, (lo, hi, lc, hc))


def make_interval(lo: float, hi: float, lo_closed: bool = False,
                  hi_closed: bool = False) -> IntervalLike:
    """Build an interval, returning :data:`EMPTY` instead of raising."""
    lo = float(lo)
    hi = float(hi)
    if lo == -INF:
        lo_closed = False
    if hi == INF:
        hi_closed = False
    if lo < hi or (lo == hi and lo_closed and hi_closed):
        return _new(lo, hi, bool(lo_closed), bool(hi_closed))
    return EMPTY


def closed(a: float, b: float) -> IntervalLike:
    """``[a, b]``"""
    return make_interval(a, b, True, True)


def open_closed(a: float, b: float) -> IntervalLike:
    """``(a, b]``"""
    return make_interval(a, b, False, True)


def closed_open(a: float, b: float) -> IntervalLike:
    """``[a, b)``"""
    return make_interval(a, b, True, False)


def open_interval(a: float, b: float) -> IntervalLike:
    """``(a, b)``"""
    return make_interval(a, b, False, False)


def at_most(v: float) -> Interval:
    """``(-inf, v]``"""
    return _new(-INF, float(v), False, True)


def greater_than(v: float) -> Interval:
    """``(v, +inf)``"""
    return _new(float(v), INF, False, False)


def interval_intersect(a: IntervalLike, b: IntervalLike) -> IntervalLike:
    if a is EMPTY or b is EMPTY:
        return EMPTY
    alo, ahi, alc, ahc = a
    blo, bhi, blc, bhc = b
    if alo > blo:
        lo, lc = alo, alc
    elif blo > alo:
        lo, lc = blo, blc
    else:
        lo, lc = alo, alc and blc
    if ahi < bhi:
        hi, hc = ahi, ahc
    elif bhi < ahi:
        hi, hc = bhi, bhc
    else:
        hi, hc = ahi, ahc and bhc
    if lo < hi or (lo == hi and lc and hc):
        if lo == alo and hi == ahi and lc == alc and hc == ahc:
            return a
        return _new(lo, hi, lc, hc)
    return EMPTY


def interval_contains(a: IntervalLike, v: float) -> bool:
    return a.contains(v)


def intervals_overlap(a: IntervalLike, b: IntervalLike) -> bool:
    return interval_intersect(a, b) is not EMPTY


# Rounded sums. TwoSum recovers the rounding error exactly, so a bound is only
# nudged by one ulp when the float sum actually lost information.

def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def add_down(a: float, b: float) -> float:
    """Largest float not above the exact sum ``a + b``."""
    s = a + b
    if math.isinf(s) or math.isnan(s):
        return s
    s, err = _two_sum(a, b)
    return math.nextafter(s, -INF) if err < 0 else s


def add_up(a: float, b: float) -> float:
    """Smallest float not below the exact sum ``a + b``."""
    s = a + b
    if math.isinf(s) or math.isnan(s):
        return s
    s, err = _two_sum(a, b)
    return math.nextafter(s, INF) if err > 0 else s


def interval_sum(a: IntervalLike, b: IntervalLike) -> Interval:
    """Minkowski sum. A bound is closed iff both contributing bounds are closed.

    Endpoints are rounded outward, so the result always contains the exact sum.
    """
    if a is EMPTY or b is EMPTY:
        raise ValueError("interval_sum is undefined on the empty interval")
    alo, ahi, alc, ahc = a
    blo, bhi, blc, bhc = b
    return _new(add_down(alo, blo), add_up(ahi, bhi), alc and blc, ahc and bhc)


_NUM = r"[+-]?(?:inf|infinity|nan|(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)"
_INTERVAL_RE = re.compile(
    rf"^\s*([\[(])\s*({_NUM})\s*,\s*({_NUM})\s*([\])])\s*$", re.IGNORECASE)


def format_number(v: float) -> str:
    if v == INF:
        return "+inf"
    if v == -INF:
        return "-inf"
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _fmt_parts(lo: float, hi: float, lc: bool, hc: bool) -> str:
    return f"{'[' if lc else '('}{format_number(lo)},{format_number(hi)}{']' if hc else ')'}"


def format_interval(a: IntervalLike) -> str:
    return str(a)


def parse_interval(text: str) -> IntervalLike:
    """Inverse of :func:`format_interval`. Accepts ``empty`` for the empty set."""
    if text.strip().lower() in ("empty", "∅"):
        return EMPTY
    m = _INTERVAL_RE.match(text.replace("∞", "inf"))
    if m is None:
        raise ValueError(f"cannot parse interval {text!r}")
    left, lo, hi, right = m.groups()
    lo_v, hi_v = float(lo), float(hi)
    if math.isnan(lo_v) or math.isnan(hi_v):
        raise ValueError(f"NaN bound in interval {text!r}")
    # "[-inf,+inf]" is tolerated: make_interval drops closedness at infinity
    return make_interval(lo_v, hi_v, left == "[", right == "]")


class HyperRectangle(tuple):
    """Axis-aligned box: a tuple of d intervals, empty iff any component is."""

    __slots__ = ()

    def __new__(cls, intervals: Iterable[IntervalLike]):
        return tuple.__new__(cls, intervals)

    @classmethod
    def full(cls, d: int) -> "HyperRectangle":
        return tuple.__new__(cls, (REALS,) * d)

    @classmethod
    def parse(cls, parts: Sequence[str]) -> "HyperRectangle":
        return cls(parse_interval(p) for p in parts)

    @property
    def dimension(self) -> int:
        return len(self)

    @property
    def is_empty(self) -> bool:
        return any(c is EMPTY for c in self)

    def replace(self, f: int, interval: IntervalLike) -> "HyperRectangle":
        return tuple.__new__(HyperRectangle, self[:f] + (interval,) + self[f + 1:])

    def contains(self, x: Sequence[float]) -> bool:
        return box_contains(self, x)

    def intersect(self, other: "HyperRectangle") -> "HyperRectangle":
        return box_intersect(self, other)

    def __add__(self, other):  # type: ignore[override]
        return box_sum(self, other)

    def to_strings(self) -> list[str]:
        return [str(c) for c in self]

    def __repr__(self) -> str:
        return "<" + ", ".join(str(c) for c in self) + ">"

    __str__ = __repr__


def _check_dims(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")


def box_intersect(a: HyperRectangle, b: HyperRectangle) -> HyperRectangle:
    _check_dims(a, b)
    return tuple.__new__(HyperRectangle, map(interval_intersect, a, b))


def boxes_overlap(a: HyperRectangle, b: HyperRectangle) -> bool:
    _check_dims(a, b)
    for i, j in zip(a, b):
        if interval_intersect(i, j) is EMPTY:
            return False
    return True


def box_sum(a: HyperRectangle, b: HyperRectangle) -> HyperRectangle:
    _check_dims(a, b)
    return tuple.__new__(HyperRectangle, map(interval_sum, a, b))


def box_contains(h: HyperRectangle, x: Sequence[float]) -> bool:
    _check_dims(h, x)
    for c, v in zip(h, x):
        if not c.contains(v):
            return False
    return True


class BoxArray:
    """Column-wise numpy view of a list of non-empty boxes, for batch queries."""

    def __init__(self, boxes: Sequence[HyperRectangle], d: int):
        self.d = d
        m = len(boxes)
        arr = np.array([list(c) for b in boxes for c in b], dtype=float).reshape(m, d, 4)
        self.lo = arr[:, :, 0]
        self.hi = arr[:, :, 1]
        self.lo_closed = arr[:, :, 2].astype(bool)
        self.hi_closed = arr[:, :, 3].astype(bool)

    def __len__(self) -> int:
        return self.lo.shape[0]

    def contains_points(self, X: np.ndarray) -> np.ndarray:
        """Boolean matrix ``(n_points, n_boxes)``: point i lies in box j."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros((X.shape[0], len(self)), dtype=bool)
        for j in range(len(self)):
            lo, hi = self.lo[j], self.hi[j]
            above = (X > lo) | (self.lo_closed[j] & (X == lo))
            below = (X < hi) | (self.hi_closed[j] & (X == hi))
            out[:, j] = np.all(above & below, axis=1)
        return out

    def any_contains(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        hit = np.zeros(X.shape[0], dtype=bool)
        for j in range(len(self)):
            lo, hi = self.lo[j], self.hi[j]
            above = (X > lo) | (self.lo_closed[j] & (X == lo))
            below = (X < hi) | (self.hi_closed[j] & (X == hi))
            hit |= np.all(above & below, axis=1)
        return hit

    def any_overlaps_closed(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """For each closed box ``[lo_i, hi_i]`` (rows), does it meet any stored box?"""
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        hit = np.zeros(lo.shape[0], dtype=bool)
        for j in range(len(self)):
            blo, bhi = self.lo[j], self.hi[j]
            # lower end of the intersection
            lv = np.maximum(lo, blo)
            lc = np.where(lo > blo, True, self.lo_closed[j])
            hv = np.minimum(hi, bhi)
            hc = np.where(hi < bhi, True, self.hi_closed[j])
            nonempty = (lv < hv) | ((lv == hv) & lc & hc)
            hit |= np.all(nonempty, axis=1)
        return hit
