"""Random models and instance grids for the soundness fuzzers.

Thresholds and perturbation bounds, like grid coordinates, are multiples of
1/8 in a small range, so every float sum the analysis performs is exact and a
violation cannot be blamed on rounding.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from treecert.geometry import BoxArray, Interval
from treecert.model import Ensemble, Leaf, Node, ThreatModel
from treecert.oracle import enumerate_attacks

FIXTURES = Path(__file__).parent / "fixtures"
STEP = 0.125


def random_tree(rng: np.random.Generator, depth: int, d: int, labels=(-1, 1), full: bool = False):
    """Threshold tree with dyadic thresholds in [0, 4]; subtrees may stop early unless ``full``."""
    if depth == 0 or (not full and rng.random() < 0.2):
        return Leaf(labels[int(rng.integers(len(labels)))])
    f = int(rng.integers(d))
    v = float(rng.integers(0, 17)) * 0.25
    return Node(f, v, random_tree(rng, depth - 1, d, labels, full),
                random_tree(rng, depth - 1, d, labels, full))


def random_interval(rng: np.random.Generator) -> Interval:
    kind = rng.integers(6)
    if kind == 0:
        return Interval()  # unbounded, as for L0 attackers
    if kind == 1:
        return Interval(0.0, 0.0, True, True)  # feature cannot be touched
    lo = -float(rng.integers(0, 9)) * STEP
    hi = float(rng.integers(0, 9)) * STEP
    if kind == 2:
        hi = 0.0
    elif kind == 3:
        lo = 0.0
    lc = bool(rng.integers(2)) or lo == 0
    hc = bool(rng.integers(2)) or hi == 0
    return Interval(lo, hi, lc, hc)


def random_threat(rng: np.random.Generator, d: int, max_budget: int = 3) -> ThreatModel:
    intervals = [random_interval(rng) for _ in range(d)]
    costs = [int(rng.integers(1, 3)) for _ in range(d)]
    return ThreatModel(intervals, costs, int(rng.integers(0, max_budget + 1)))


def random_ensemble(rng: np.random.Generator, max_trees: int, max_depth: int, d: int) -> Ensemble:
    n = int(rng.choice([k for k in range(1, max_trees + 1, 2)]))
    trees = [random_tree(rng, int(rng.integers(1, max_depth + 1)), d) for _ in range(n)]
    return Ensemble(trees, (-1, 1), d)


def grid_instances(rng: np.random.Generator, T: Ensemble, threat: ThreatModel, n: int) -> np.ndarray:
    """Up to ``n`` points near thresholds and attack windows, plus a few far away."""
    d = threat.dimension
    axes = []
    for f, ts in enumerate(T.thresholds(d)):
        iv = threat.intervals[f]
        vals = {-1.0, 5.0}
        for v in ts:
            for off in (-1.0, -0.5, -0.25, -STEP, 0.0, STEP, 0.25, 0.5, 1.0):
                vals.add(v + off)
            for w in (iv.lo, iv.hi):
                if math.isfinite(w):
                    vals.update({v - w, v - w + STEP, v - w - STEP})
        axes.append(np.array(sorted(vals)))
    X = np.column_stack([rng.choice(ax, size=n) for ax in axes])
    return np.unique(X, axis=0)


def coverage_violations(T: Ensemble, threat: ThreatModel, attacks, X: np.ndarray,
                        limit: int = 5) -> tuple[list, int]:
    """Oracle-found flips at points of ``X`` that no attack covers.

    Returns the first few violations and the number of flipping pairs checked.
    """
    d = threat.dimension
    ths = T.thresholds(d)
    pres = BoxArray([s.pre for s in attacks], d) if attacks else None
    bad, checked = [], 0
    for x in X:
        Z = enumerate_attacks(threat, x, ths)
        pred = T.predict_index_many(Z)
        flips = Z[pred != pred[0]]
        if flips.shape[0] == 0:
            continue
        checked += flips.shape[0]
        if pres is None:
            bad.append((x, flips[0]))
            continue
        cand = np.nonzero(pres.contains_points(x[None, :])[0])[0]
        if cand.size == 0:
            bad.extend((x, z) for z in flips[:limit])
            continue
        sub = BoxArray([attacks[j].post for j in cand], d)
        ok = sub.contains_points(flips).any(axis=1)
        bad.extend((x, z) for z in flips[~ok][:limit])
        if len(bad) >= limit:
            break
    return bad, checked
