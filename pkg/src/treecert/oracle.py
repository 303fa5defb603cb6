"""Exhaustive attack enumeration for threshold models at desk scale.

Predictions of a threshold model are constant on the cells ``(v_i, v_{i+1}]``
cut by its thresholds, so one representative per reachable cell and feature is
enough to decide stability exactly. For each feature the representatives are
the two ends of ``x_f + I_atk_f``, ``x_f`` itself, and every threshold ``v`` in
reach together with the next float above it.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from .model import Ensemble, ThreatModel

DEFAULT_CAP = 2_000_000


class OracleInfeasible(RuntimeError):
    """The enumeration would exceed the configured size cap."""


def reachable_range(threat: ThreatModel, f: int, x_f: float,
                    thresholds_f: Sequence[float]) -> tuple[float, float, bool, bool]:
    """``x_f + I_atk_f`` as ``(lo, hi, lo_closed, hi_closed)``.

    Infinite ends are truncated one unit beyond every threshold and ``x_f``;
    predictions do not change past the outermost threshold.
    """
    iv = threat.intervals[f]
    ts = np.asarray(thresholds_f, dtype=float)
    lo_ref = min(x_f, ts.min()) if ts.size else x_f
    hi_ref = max(x_f, ts.max()) if ts.size else x_f
    if math.isinf(iv.lo):
        lo, lc = lo_ref - 1.0, True
    else:
        lo, lc = x_f + iv.lo, iv.lo_closed
    if math.isinf(iv.hi):
        hi, hc = hi_ref + 1.0, True
    else:
        hi, hc = x_f + iv.hi, iv.hi_closed
    return lo, hi, lc, hc


def feature_representatives(threat: ThreatModel, f: int, x_f: float,
                            thresholds_f: Sequence[float]) -> np.ndarray:
    lo, hi, lc, hc = reachable_range(threat, f, x_f, thresholds_f)

    def inside(v: float) -> bool:
        return (v > lo or (lc and v == lo)) and (v < hi or (hc and v == hi))

    reps = {x_f}
    reps.add(lo if lc else math.nextafter(lo, math.inf))
    reps.add(hi if hc else math.nextafter(hi, -math.inf))
    for v in thresholds_f:
        v = float(v)
        if inside(v):
            reps.add(v)
        above = math.nextafter(v, math.inf)
        if inside(above):
            reps.add(above)
    return np.array(sorted(r for r in reps if inside(r) or r == x_f), dtype=float)


def maximal_feature_sets(threat: ThreatModel, active: Sequence[int]) -> list[tuple[int, ...]]:
    """Budget-feasible feature sets that cannot be extended.

    Representatives always include the unperturbed value, so enumerating the
    maximal sets covers every feasible set.
    """
    active = list(active)
    b = threat.budget
    costs = threat.costs
    if not active or b == 0:
        return [()]
    if len({costs[f] for f in active}) == 1:
        k = min(b // costs[active[0]], len(active))
        return list(itertools.combinations(active, k))
    out: list[tuple[int, ...]] = []

    def dfs(i: int, chosen: list[int], spent: int) -> None:
        if i == len(active):
            left = b - spent
            if all(costs[f] > left for f in active if f not in chosen):
                out.append(tuple(chosen))
            return
        f = active[i]
        if spent + costs[f] <= b:
            chosen.append(f)
            dfs(i + 1, chosen, spent + costs[f])
            chosen.pop()
        dfs(i + 1, chosen, spent)

    dfs(0, [], 0)
    return out


def enumerate_attacks(threat: ThreatModel, x: Sequence[float],
                      thresholds: Sequence[Sequence[float]],
                      cap: int | None = DEFAULT_CAP) -> np.ndarray:
    """One manipulation per reachable partition cell; rows of the returned array.

    The first row is always ``x`` itself.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if d != threat.dimension:
        raise ValueError(f"dimension mismatch: instance has {d} features, "
                         f"threat model has {threat.dimension}")
    reps = [feature_representatives(threat, f, x[f], thresholds[f] if f < len(thresholds) else ())
            for f in range(d)]
    active = [f for f in range(d) if reps[f].size > 1]
    subsets = maximal_feature_sets(threat, active)
    sizes = [math.prod(reps[f].size for f in F) for F in subsets]
    total = sum(sizes)
    if cap is not None and total > cap:
        raise OracleInfeasible(f"attack enumeration needs {total} points (cap {cap})")
    blocks = [x[None, :]]
    for F in subsets:
        if not F:
            continue
        grid = np.meshgrid(*(reps[f] for f in F), indexing="ij")
        block = np.repeat(x[None, :], grid[0].size, axis=0)
        for j, f in enumerate(F):
            block[:, f] = grid[j].ravel()
        blocks.append(block)
    Z = np.concatenate(blocks, axis=0)
    _, first = np.unique(Z, axis=0, return_index=True)
    return Z[np.sort(first)]


def attack_cost(threat: ThreatModel, x: Sequence[float], z: np.ndarray) -> np.ndarray:
    """Cost actually paid by each row of ``z``: sum of ``c_f`` over changed features."""
    z = np.atleast_2d(z)
    changed = z != np.asarray(x, dtype=float)[None, :]
    return changed @ np.asarray(threat.costs, dtype=np.int64)


def is_stable_exact(T: Ensemble, x: Sequence[float], threat: ThreatModel,
                    cap: int | None = DEFAULT_CAP) -> bool:
    """Decide stability of ``T`` at ``x`` by exhaustive enumeration."""
    Z = enumerate_attacks(threat, x, T.thresholds(threat.dimension), cap)
    pred = T.predict_index_many(Z)
    return bool(np.all(pred == pred[0]))


def find_flip(T: Ensemble, x: Sequence[float], threat: ThreatModel,
              cap: int | None = DEFAULT_CAP) -> np.ndarray | None:
    """An adversarial manipulation that changes the prediction, or ``None``."""
    Z = enumerate_attacks(threat, x, T.thresholds(threat.dimension), cap)
    pred = T.predict_index_many(Z)
    bad = np.nonzero(pred != pred[0])[0]
    return Z[bad[0]] if bad.size else None


def sample_attacks(threat: ThreatModel, x: Sequence[float], n: int,
                   rng: np.random.Generator, spread: float = 1.0) -> np.ndarray:
    """``n`` random members of ``A(x)``; unbounded deltas are drawn within ``±spread``.

    Features are added in random order while the budget allows, then each
    chosen feature gets a uniform delta from its interval.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    out = np.repeat(x[None, :], n, axis=0)
    for i in range(n):
        spent = 0
        for f in rng.permutation(d):
            c = threat.costs[f]
            if spent + c > threat.budget or rng.random() < 0.3:
                continue
            iv = threat.intervals[f]
            lo = max(iv.lo, -spread)
            hi = min(iv.hi, spread)
            out[i, f] = x[f] + rng.uniform(lo, hi)
            spent += c
    return out
