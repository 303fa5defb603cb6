"""Iterative refinement of candidate symbolic attacks for majority-voting ensembles.

Candidates start as the union of the per-tree results. Each iteration pops the
best ``ceil(split_fraction * |C|)`` candidates from a min-priority queue keyed
by ``(split_count, undecided_trees)`` and, comparing the ensemble's box
predictions on pre- and post-image:

* drops the candidate when both are the same singleton (stable there),
* splits it when they overlap,
* moves it to the ended set ``E`` when they are disjoint.

The returned ``C ∪ E`` covers every unstable (instance, manipulation) pair at
any point of the loop, so stopping early is always sound.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .geometry import (
    EMPTY,
    HyperRectangle,
    at_most,
    box_intersect,
    box_sum,
    greater_than,
    interval_intersect,
    make_interval,
)
from .model import Ensemble, Node, ThreatModel, iter_bfs, majority_box, tree_predict_box
from .tree_analysis import SymbolicAttack, analyze_tree

log = logging.getLogger(__name__)


class Unsplittable(Exception):
    """No threshold offers an interior cut of the candidate's pre-image."""


@dataclass(frozen=True)
class AnalysisConfig:
    max_iterations: Optional[int] = None
    split_fraction: float = 0.05
    workers: int = 1
    rng_seed: int = 0  # recorded for reproducibility; the refinement itself is deterministic

    def __post_init__(self):
        if not 0 < self.split_fraction <= 1:
            raise ValueError("split_fraction must lie in (0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


def _tree_sets(T: Ensemble, h: HyperRectangle) -> tuple:
    return tuple(tree_predict_box(t, h) for t in T.trees)


def priority(s: SymbolicAttack, T: Ensemble) -> tuple[int, int]:
    """``(split_count, number of trees that are undecided on s.pre)``."""
    return s.split_count, sum(len(p) > 1 for p in _tree_sets(T, s.pre))


def _interior(iv, v: float) -> bool:
    """Cutting ``iv`` at ``v`` into ``iv ∩ (-inf,v]`` and ``iv ∩ (v,+inf)`` leaves two non-empty parts."""
    if iv is EMPTY:
        return False
    lo, hi, lc, _ = iv
    return (lo < v or (lo == v and lc)) and v < hi


def frozen_features(s: SymbolicAttack, threat: ThreatModel) -> frozenset:
    """Features no manipulation covered by ``s`` can change.

    Where ``pre_f`` and ``post_f`` are disjoint every covered pair changed
    feature ``f``, so at least the sum of those costs is already spent. Any
    other feature costing more than what is left must keep its value.
    """
    crossed = [f for f, (a, b) in enumerate(zip(s.pre, s.post)) if interval_intersect(a, b) is EMPTY]
    left = threat.budget - sum(threat.costs[f] for f in crossed)
    crossed_set = set(crossed)
    return frozenset(f for f, c in enumerate(threat.costs) if f not in crossed_set and c > left)


def _cut_points(v: float, f: int, threat: ThreatModel, frozen: frozenset = frozenset()) -> list[float]:
    if f in frozen:
        return [v]
    dl, dr = threat.delta(f)
    cuts = {v}
    if math.isfinite(dl):
        cuts.add(v + dl)
    if math.isfinite(dr):
        cuts.add(v + dr)
    return sorted(cuts)


def choose_split(s: SymbolicAttack, T: Ensemble, threat: ThreatModel | None = None,
                 tree_sets: Sequence[frozenset] | None = None,
                 post_sets: Sequence[frozenset] | None = None) -> tuple[int, float]:
    """Pick the feature and threshold used to split ``s``.

    First choice: the first threshold, scanning trees that are undecided on
    ``s.pre`` in ensemble order and each tree breadth-first, that lies strictly
    inside the matching component of ``s.pre``. If there is none and a threat
    model is given, trees undecided on ``s.post`` are scanned for a threshold
    whose cut points ``v + delta_l, v, v + delta_r`` fall inside ``s.pre``;
    cutting there separates the post-images on either side of ``v``.

    Raises :class:`Unsplittable` when neither search succeeds.
    """
    if tree_sets is None:
        tree_sets = _tree_sets(T, s.pre)
    for t, labels in zip(T.trees, tree_sets):
        if len(labels) < 2:
            continue
        for n in iter_bfs(t):
            if isinstance(n, Node) and _interior(s.pre[n.feature], n.threshold):
                return n.feature, n.threshold
    if threat is not None:
        if post_sets is None:
            post_sets = _tree_sets(T, s.post)
        for t, labels in zip(T.trees, post_sets):
            if len(labels) < 2:
                continue
            for n in iter_bfs(t):
                if not isinstance(n, Node) or not _interior(s.post[n.feature], n.threshold):
                    continue
                cuts = _cut_points(n.threshold, n.feature, threat, frozen_features(s, threat))
                if any(_interior(s.pre[n.feature], c) for c in cuts):
                    return n.feature, n.threshold
    raise Unsplittable(repr(s))


def split(s: SymbolicAttack, f: int, v: float, threat: ThreatModel) -> list[SymbolicAttack]:
    """Cut ``s.pre`` along feature ``f`` at ``v + delta_l``, ``v``, ``v + delta_r``.

    Each non-empty piece becomes the pre-image of a child; its post-image is
    ``s.post`` restricted to what the piece can reach with the budget left:
    on frozen features (see :func:`frozen_features`) post is cut down to pre,
    and a frozen ``f`` needs only the cut at ``v``. Children whose post-image is
    empty are dropped since they cover no manipulation.
    """
    iv = s.pre[f]
    frozen = frozen_features(s, threat)
    cuts = [c for c in _cut_points(v, f, threat, frozen) if _interior(iv, c)]
    if not cuts:
        raise ValueError(f"no cut point of threshold {v} lies inside {iv}")
    pieces = []
    prev = None
    for c in cuts:
        lower = at_most(c) if prev is None else make_interval(prev, c, False, True)
        pieces.append(interval_intersect(iv, lower))
        prev = c
    pieces.append(interval_intersect(iv, greater_than(prev)))
    atk = threat.attack_box
    children = []
    for p in pieces:
        if p is EMPTY:
            continue
        pre = s.pre.replace(f, p)
        post = box_intersect(s.post, box_sum(pre, atk))
        if frozen:
            post = HyperRectangle(interval_intersect(q, pre[g]) if g in frozen else q
                                  for g, q in enumerate(post))
        if post.is_empty:
            continue
        children.append(SymbolicAttack(pre, post, s.cost, s.split_count + 1))
    return children


@dataclass
class WorkerStats:
    iterations: int = 0
    splits: int = 0
    discarded: int = 0
    ended: int = 0
    unsplittable: int = 0
    history: list = field(default_factory=list)  # (iteration, |C|, |E|) after each iteration


@dataclass
class EnsembleAnalysis:
    candidates: list
    ended: list
    converged: bool
    telemetry: dict

    @property
    def attacks(self) -> list[SymbolicAttack]:
        return self.candidates + self.ended


class _Queue:
    """Min-heap of candidates; ties broken by insertion order for determinism."""

    def __init__(self, T: Ensemble):
        self.T = T
        self.heap: list = []
        self.counter = itertools.count()

    def push(self, s: SymbolicAttack, sets: tuple | None = None) -> None:
        if sets is None:
            sets = _tree_sets(self.T, s.pre)
        n_u = sum(len(p) > 1 for p in sets)
        heapq.heappush(self.heap, (s.split_count, n_u, next(self.counter), s, sets))

    def pop(self):
        return heapq.heappop(self.heap)

    def __len__(self) -> int:
        return len(self.heap)

    def ordered(self) -> list:
        return [e[3] for e in sorted(self.heap)]


def _refine(T: Ensemble, threat: ThreatModel, initial: Sequence[SymbolicAttack],
            max_iterations: Optional[int], split_fraction: float,
            on_iteration: Callable[[int, list, list], None] | None = None):
    queue = _Queue(T)
    for s in initial:
        queue.push(s)
    ended: list[SymbolicAttack] = []
    stats = WorkerStats()
    while len(queue) and (max_iterations is None or stats.iterations < max_iterations):
        quota = max(1, math.ceil(split_fraction * len(queue)))
        batch = [queue.pop() for _ in range(min(quota, len(queue)))]
        fresh = []
        for _, _, _, s, pre_sets in batch:
            pre_pred = majority_box(pre_sets, T.labels)
            post_sets = _tree_sets(T, s.post)
            post_pred = majority_box(post_sets, T.labels)
            if len(pre_pred) == 1 and pre_pred == post_pred:
                stats.discarded += 1
                continue
            if pre_pred & post_pred:
                try:
                    f, v = choose_split(s, T, threat, pre_sets, post_sets)
                except Unsplittable:
                    stats.unsplittable += 1
                    ended.append(s)
                    continue
                fresh.extend(split(s, f, v, threat))
                stats.splits += 1
            else:
                stats.ended += 1
                ended.append(s)
        for c in fresh:
            queue.push(c)
        stats.iterations += 1
        stats.history.append((stats.iterations, len(queue), len(ended)))
        if on_iteration is not None:
            on_iteration(stats.iterations, queue.ordered(), ended)
    return queue.ordered(), ended, stats


def _refine_partition(args):
    T, threat, part, max_iterations, split_fraction = args
    return _refine(T, threat, part, max_iterations, split_fraction)


def initial_candidates(T: Ensemble, threat: ThreatModel) -> list[SymbolicAttack]:
    """Union of the single-tree analyses, deduplicated, in tree order."""
    seen: set = set()
    out = []
    for t in T.trees:
        for s in analyze_tree(t, threat):
            if s not in seen:
                seen.add(s)
                out.append(s)
    return out


def analyze_ensemble(T: Ensemble, threat: ThreatModel, config: AnalysisConfig = AnalysisConfig(),
                     executor: Executor | None = None,
                     on_iteration: Callable[[int, list, list], None] | None = None) -> EnsembleAnalysis:
    """Symbolic attacks covering every unstable (instance, manipulation) pair of ``T``.

    With ``workers > 1`` the priority-ordered candidates are dealt round-robin
    into partitions refined independently (in ``executor`` if given, otherwise
    a fresh process pool) and the results are concatenated in worker order.
    ``on_iteration`` is only honoured for a single worker.
    """
    if threat.dimension < T.n_features:
        raise ValueError(f"threat model covers {threat.dimension} features, model uses {T.n_features}")
    start = time.perf_counter()
    initial = initial_candidates(T, threat)
    t_trees = time.perf_counter() - start
    if config.workers == 1:
        results = [_refine(T, threat, initial, config.max_iterations, config.split_fraction,
                           on_iteration)]
    else:
        queue = _Queue(T)
        for s in initial:
            queue.push(s)
        ordered = queue.ordered()
        parts = [ordered[i::config.workers] for i in range(config.workers)]
        jobs = [(T, threat, p, config.max_iterations, config.split_fraction) for p in parts]
        if executor is None:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_refine_partition, jobs))
        else:
            results = list(executor.map(_refine_partition, jobs))
    candidates = [s for r in results for s in r[0]]
    ended = [s for r in results for s in r[1]]
    elapsed = time.perf_counter() - start
    telemetry = {
        "trees": len(T.trees),
        "workers": config.workers,
        "split_fraction": config.split_fraction,
        "max_iterations": config.max_iterations,
        "initial_candidates": len(initial),
        "iterations": max(r[2].iterations for r in results),
        "candidates": len(candidates),
        "ended": len(ended),
        "converged": not candidates,
        "tree_analysis_seconds": t_trees,
        "wall_seconds": elapsed,
        "per_worker": [
            {
                "iterations": r[2].iterations,
                "splits": r[2].splits,
                "discarded": r[2].discarded,
                "ended": r[2].ended,
                "unsplittable": r[2].unsplittable,
                "history": r[2].history,
            }
            for r in results
        ],
    }
    log.info("ensemble analysis: %d trees, %d initial, %d iterations, |C|=%d |E|=%d, %.2fs",
             len(T.trees), len(initial), telemetry["iterations"], len(candidates), len(ended), elapsed)
    return EnsembleAnalysis(candidates, ended, not candidates, telemetry)
