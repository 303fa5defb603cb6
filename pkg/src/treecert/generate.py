"""Random threshold ensembles for desk-scale experiments and fuzzing."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import DecisionTree, Ensemble, Leaf, Node


@dataclass(frozen=True)
class GenSpec:
    n_trees: int = 1
    depth: int = 3
    n_features: int = 2
    low: float = 0.0
    high: float = 1.0
    labels: tuple = (-1, 1)
    seed: int = 0
    # Snap thresholds to multiples of this step (dyadic steps keep float sums exact).
    threshold_grid: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.n_trees < 1 or self.n_trees % 2 == 0:
            raise ValueError(f"n_trees must be odd and positive, got {self.n_trees}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if not self.low < self.high:
            raise ValueError("threshold bounds need low < high")
        if len(set(self.labels)) < 1:
            raise ValueError("at least one label is required")
        if self.threshold_grid is not None and self.threshold_grid <= 0:
            raise ValueError("threshold_grid must be positive")


def random_tree(depth: int, n_features: int, rng: np.random.Generator, low: float = 0.0,
                high: float = 1.0, labels: Sequence = (-1, 1),
                threshold_grid: float | None = None) -> DecisionTree:
    """Full binary tree of the given depth; every node draws its test uniformly."""
    if depth == 0:
        return Leaf(labels[int(rng.integers(len(labels)))])
    f = int(rng.integers(n_features))
    if threshold_grid is None:
        v = float(rng.uniform(low, high))
    else:
        steps = np.arange(np.ceil(low / threshold_grid), np.floor(high / threshold_grid) + 1)
        v = float(rng.choice(steps) * threshold_grid) if steps.size else float(low)
    left = random_tree(depth - 1, n_features, rng, low, high, labels, threshold_grid)
    right = random_tree(depth - 1, n_features, rng, low, high, labels, threshold_grid)
    return Node(f, v, left, right)


def random_ensemble(spec: GenSpec) -> Ensemble:
    rng = np.random.default_rng(spec.seed)
    trees = [random_tree(spec.depth, spec.n_features, rng, spec.low, spec.high, spec.labels,
                         spec.threshold_grid)
             for _ in range(spec.n_trees)]
    return Ensemble(trees, spec.labels, spec.n_features)
