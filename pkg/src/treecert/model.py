"""Threshold trees in majority-voting ensembles, and the budgeted attacker.

Feature indices are 0-based throughout. A node sends ``x`` left iff
``x[feature] <= threshold``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterator, NamedTuple, Sequence, Union

import numpy as np

from .geometry import HyperRectangle, Interval, add_down, add_up

Label = Hashable


@dataclass(frozen=True)
class Leaf:
    label: Label


@dataclass(frozen=True)
class Node:
    feature: int
    threshold: float
    left: "DecisionTree"
    right: "DecisionTree"

    def __post_init__(self):
        if self.feature < 0:
            raise ValueError(f"negative feature index {self.feature}")
        if not math.isfinite(self.threshold):
            raise ValueError(f"non-finite threshold {self.threshold}")


DecisionTree = Union[Leaf, Node]


def iter_nodes(t: DecisionTree) -> Iterator[DecisionTree]:
    """Pre-order (node, left, right) traversal."""
    stack = [t]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Node):
            stack.append(n.right)
            stack.append(n.left)


def iter_bfs(t: DecisionTree) -> Iterator[DecisionTree]:
    level = [t]
    while level:
        nxt = []
        for n in level:
            yield n
            if isinstance(n, Node):
                nxt.append(n.left)
                nxt.append(n.right)
        level = nxt


def leaves(t: DecisionTree) -> list[Leaf]:
    return [n for n in iter_nodes(t) if isinstance(n, Leaf)]


def tree_depth(t: DecisionTree) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max(tree_depth(t.left), tree_depth(t.right))


def max_feature(t: DecisionTree) -> int:
    """Largest feature index used, or -1 for a single leaf."""
    return max((n.feature for n in iter_nodes(t) if isinstance(n, Node)), default=-1)


def tree_predict(t: DecisionTree, x: Sequence[float], d: int | None = None) -> Label:
    if d is not None and len(x) != d:
        raise ValueError(f"dimension mismatch: instance has {len(x)} features, expected {d}")
    while isinstance(t, Node):
        t = t.left if x[t.feature] <= t.threshold else t.right
    return t.label


def tree_predict_many(t: DecisionTree, X: np.ndarray) -> np.ndarray:
    """Vectorised :func:`tree_predict` over the rows of ``X`` (object array)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    out = np.empty(X.shape[0], dtype=object)

    def walk(node: DecisionTree, idx: np.ndarray) -> None:
        if idx.size == 0:
            return
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        go_left = X[idx, node.feature] <= node.threshold
        walk(node.left, idx[go_left])
        walk(node.right, idx[~go_left])

    walk(t, np.arange(X.shape[0]))
    return out


def tree_predict_box(t: DecisionTree, h: HyperRectangle) -> frozenset:
    """All labels the tree can output on some point of ``h``."""
    if h.is_empty:
        raise ValueError("tree_predict_box on an empty box")
    out: set = set()
    _collect(t, h, out)
    return frozenset(out)


def _collect(t: DecisionTree, h: HyperRectangle, out: set) -> None:
    while isinstance(t, Node):
        lo, hi, lc, hc = h[t.feature]
        v = t.threshold
        # I ∩ (v, +inf) = ∅  <=>  hi <= v ;  I ∩ (-inf, v] = ∅  <=>  lo > v or (lo == v and open)
        if hi <= v:
            t = t.left
        elif lo > v or (lo == v and not lc):
            t = t.right
        else:
            _collect(t.left, h, out)
            t = t.right
    out.add(t.label)


class Vote(NamedTuple):
    label: Label
    tied: bool


@dataclass(frozen=True)
class Ensemble:
    """Majority-voting forest with an odd number of trees.

    ``labels`` fixes the label alphabet and its order; the order is only used
    to break point-prediction ties, which need three or more labels.
    """

    trees: tuple
    labels: tuple
    n_features: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.trees:
            raise ValueError("an ensemble needs at least one tree")
        if len(self.trees) % 2 == 0:
            raise ValueError(f"ensembles must have an odd number of trees, got {len(self.trees)}")
        if len(set(self.labels)) != len(self.labels) or not self.labels:
            raise ValueError("labels must be a non-empty list of distinct values")
        allowed = set(self.labels)
        for i, t in enumerate(self.trees):
            for leaf in leaves(t):
                if leaf.label not in allowed:
                    raise ValueError(f"tree {i} has label {leaf.label!r} outside {list(self.labels)}")
        used = max(max_feature(t) for t in self.trees) + 1
        if self.n_features is None:
            object.__setattr__(self, "n_features", max(used, 1))
        elif self.n_features < used:
            raise ValueError(f"trees use feature {used - 1} but n_features={self.n_features}")

    @classmethod
    def single(cls, tree: DecisionTree, labels: Sequence[Label] | None = None,
               n_features: int | None = None) -> "Ensemble":
        if labels is None:
            labels = sorted({leaf.label for leaf in leaves(tree)}, key=repr)
        return cls((tree,), tuple(labels), n_features)

    def __len__(self) -> int:
        return len(self.trees)

    def vote(self, x: Sequence[float]) -> Vote:
        if len(x) != self.n_features:
            raise ValueError(f"dimension mismatch: instance has {len(x)} features, "
                             f"model expects {self.n_features}")
        counts = Counter(tree_predict(t, x) for t in self.trees)
        return self._tally(counts)

    def _tally(self, counts: Counter) -> Vote:
        n = len(self.trees)
        best = max(counts.values())
        if 2 * best > n:
            return Vote(next(y for y, c in counts.items() if c == best), False)
        # no strict majority: smallest label (alphabet order) among the most voted
        winners = [y for y in self.labels if counts.get(y, 0) == best]
        return Vote(winners[0], True)

    def predict(self, x: Sequence[float]) -> Label:
        return self.vote(x).label

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`predict`; returns an object array of labels."""
        return np.array(self.labels, dtype=object)[self.predict_index_many(X)]

    def predict_index_many(self, X: np.ndarray) -> np.ndarray:
        """Like :meth:`predict_many` but returns positions in ``labels``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(f"dimension mismatch: data has {X.shape[1]} features, "
                             f"model expects {self.n_features}")
        index = {y: i for i, y in enumerate(self.labels)}
        counts = np.zeros((X.shape[0], len(self.labels)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for t in self.trees:
            pred = tree_predict_many(t, X)
            counts[rows, [index[y] for y in pred]] += 1
        # argmax picks the first maximum, i.e. the alphabet-order tie-break
        return np.argmax(counts, axis=1)

    def predict_box(self, h: HyperRectangle) -> frozenset:
        return majority_box([tree_predict_box(t, h) for t in self.trees], self.labels)

    def thresholds(self, d: int | None = None) -> list[np.ndarray]:
        """Sorted distinct thresholds per feature."""
        d = self.n_features if d is None else d
        per: list[set] = [set() for _ in range(d)]
        for t in self.trees:
            for n in iter_nodes(t):
                if isinstance(n, Node):
                    per[n.feature].add(n.threshold)
        return [np.array(sorted(s), dtype=float) for s in per]


def majority_box(tree_sets: Sequence[frozenset], labels: Sequence[Label]) -> frozenset:
    """Box-level majority vote: ``{y}`` if more than half the trees are sure of ``y``."""
    counts: Counter = Counter()
    for s in tree_sets:
        if len(s) == 1:
            counts.update(s)
    n = len(tree_sets)
    for y, c in counts.items():
        if 2 * c > n:
            return frozenset((y,))
    return frozenset(labels)


def ensemble_predict(T: Ensemble, x: Sequence[float]) -> Label:
    return T.predict(x)


def ensemble_predict_box(T: Ensemble, h: HyperRectangle) -> frozenset:
    if h.is_empty:
        raise ValueError("ensemble_predict_box on an empty box")
    return T.predict_box(h)


@dataclass(frozen=True)
class ThreatModel:
    """Budgeted attacker: pay ``costs[f]`` to add any delta in ``intervals[f]``.

    A feature the attacker cannot touch has interval ``[0,0]``.
    """

    intervals: tuple
    costs: tuple
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        object.__setattr__(self, "costs", tuple(int(c) for c in self.costs))
        if len(self.intervals) != len(self.costs):
            raise ValueError("one cost per perturbation interval is required")
        if self.budget < 0 or int(self.budget) != self.budget:
            raise ValueError(f"budget must be a natural number, got {self.budget}")
        object.__setattr__(self, "budget", int(self.budget))
        for f, (iv, c) in enumerate(zip(self.intervals, self.costs)):
            if not isinstance(iv, Interval):
                raise ValueError(f"feature {f}: perturbation interval must be non-empty")
            if not iv.contains(0.0):
                raise ValueError(f"feature {f}: perturbation interval {iv} must contain 0")
            if c < 1:
                # a free manipulation would produce cost-0 attacks with pre != post
                raise ValueError(f"feature {f}: cost must be >= 1, got {c}")

    @property
    def dimension(self) -> int:
        return len(self.intervals)

    @property
    def attack_box(self) -> HyperRectangle:
        return HyperRectangle(self.intervals)

    def delta(self, f: int) -> tuple[float, float]:
        iv = self.intervals[f]
        return iv.lo, iv.hi

    @classmethod
    def uniform(cls, d: int, delta: float, budget: int, cost: int = 1) -> "ThreatModel":
        """Every feature perturbable by ``[-delta, +delta]`` at the same cost."""
        iv = Interval(-delta, delta, True, True)
        return cls((iv,) * d, (cost,) * d, budget)

    @classmethod
    def linf(cls, d: int, delta: float) -> "ThreatModel":
        """L-infinity ball of radius ``delta``: all features, budget ``d``."""
        return cls.uniform(d, delta, budget=d)

    @classmethod
    def l0(cls, d: int, k: int) -> "ThreatModel":
        """Change at most ``k`` features arbitrarily."""
        return cls((Interval(),) * d, (1,) * d, k)


@dataclass(frozen=True)
class Neighborhood:
    """The closed L-infinity ball ``{z : max_f |z_f - x_f| <= radius}``."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        if not self.radius >= 0:
            raise ValueError("neighborhood radius must be >= 0")

    def box(self) -> HyperRectangle:
        return HyperRectangle(Interval(add_down(c, -self.radius), add_up(c, self.radius), True, True)
                              for c in self.center)

    def contains(self, z: Sequence[float]) -> bool:
        return all(abs(a - b) <= self.radius for a, b in zip(z, self.center))
