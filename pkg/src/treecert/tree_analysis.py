"""Stability analysis of a single decision tree via symbolic attacks.

A symbolic attack ``<pre | post | cost>`` stands for every instance in the box
``pre`` together with those of its manipulations that land in ``post`` and cost
at most ``cost``. Annotation pushes symbolic attacks from the root to the
leaves; the unstable region is then read off pairs of leaves with different
labels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .geometry import (
    EMPTY,
    HyperRectangle,
    at_most,
    add_down,
    add_up,
    box_intersect,
    box_sum,
    greater_than,
    interval_intersect,
    interval_sum,
    make_interval,
)
from .model import DecisionTree, Leaf, ThreatModel


@dataclass(frozen=True)
class SymbolicAttack:
    pre: HyperRectangle
    post: HyperRectangle
    cost: int
    split_count: int = field(default=0, compare=False)

    def covers(self, x, z) -> bool:
        return self.pre.contains(x) and self.post.contains(z)

    def sort_key(self):
        return (tuple(self.pre), tuple(self.post), self.cost)

    def __repr__(self) -> str:
        return f"<{', '.join(map(str, self.pre))} | {', '.join(map(str, self.post))} | {self.cost}>"


def initial_attack(d: int) -> SymbolicAttack:
    full = HyperRectangle.full(d)
    return SymbolicAttack(full, full, 0)


def refine_left(s: SymbolicAttack, f: int, v: float, threat: ThreatModel) -> list[SymbolicAttack]:
    """Symbolic attacks for the left child of a node testing ``x_f <= v``."""
    out = []
    pre, post, k = s.pre, s.post, s.cost
    ipre, ipost = pre[f], post[f]
    dl = threat.intervals[f].lo
    untouched = ipre == ipost

    jpost = interval_intersect(ipost, at_most(v))
    if jpost is not EMPTY:
        if untouched:
            jpre = interval_intersect(ipre, at_most(v))
        else:
            jpre = interval_intersect(ipre, at_most(add_up(v, -min(0.0, dl))))
        if jpre is not EMPTY:
            out.append(SymbolicAttack(pre.replace(f, jpre), post.replace(f, jpost), k, s.split_count))

    c = threat.costs[f]
    if untouched and dl < 0 and k + c <= threat.budget:
        jpre = interval_intersect(ipre, make_interval(v, add_up(v, -dl), False, True))
        if jpre is not EMPTY:
            jpost = interval_intersect(ipost, make_interval(add_down(v, dl), v, False, True))
            if jpost is not EMPTY:
                out.append(SymbolicAttack(pre.replace(f, jpre), post.replace(f, jpost), k + c,
                                          s.split_count))
    return out


def refine_right(s: SymbolicAttack, f: int, v: float, threat: ThreatModel) -> list[SymbolicAttack]:
    """Symbolic attacks for the right child of a node testing ``x_f <= v``."""
    out = []
    pre, post, k = s.pre, s.post, s.cost
    ipre, ipost = pre[f], post[f]
    dr = threat.intervals[f].hi
    untouched = ipre == ipost

    jpost = interval_intersect(ipost, greater_than(v))
    if jpost is not EMPTY:
        if untouched:
            jpre = interval_intersect(ipre, greater_than(v))
        else:
            jpre = interval_intersect(ipre, greater_than(add_down(v, -max(0.0, dr))))
        if jpre is not EMPTY:
            out.append(SymbolicAttack(pre.replace(f, jpre), post.replace(f, jpost), k, s.split_count))

    c = threat.costs[f]
    if untouched and dr > 0 and k + c <= threat.budget:
        jpre = interval_intersect(ipre, make_interval(add_down(v, -dr), v, False, True))
        if jpre is not EMPTY:
            jpost = interval_intersect(ipost, make_interval(v, add_up(v, dr), False, True))
            if jpost is not EMPTY:
                out.append(SymbolicAttack(pre.replace(f, jpre), post.replace(f, jpost), k + c,
                                          s.split_count))
    return out


def _canonical(attacks: Iterable[SymbolicAttack]) -> tuple[SymbolicAttack, ...]:
    return tuple(sorted(set(attacks), key=SymbolicAttack.sort_key))


@dataclass
class AnnotatedTree:
    """A tree node together with the symbolic attacks that may reach it."""

    tree: DecisionTree
    sym: tuple
    left: Optional["AnnotatedTree"] = None
    right: Optional["AnnotatedTree"] = None
    # some attack here has cost 0, i.e. the node is reachable without manipulation
    free: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.free = any(s.cost == 0 for s in self.sym)

    @property
    def is_leaf(self) -> bool:
        return isinstance(self.tree, Leaf)

    def nodes(self) -> Iterator["AnnotatedTree"]:
        """Pre-order traversal (node, left subtree, right subtree)."""
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            if n.right is not None:
                stack.append(n.right)
            if n.left is not None:
                stack.append(n.left)

    def leaves(self) -> list["AnnotatedTree"]:
        """Annotated leaves, left to right (unexpanded subtrees are skipped)."""
        return [n for n in self.nodes() if n.is_leaf]

    def size(self) -> int:
        return sum(len(n.sym) for n in self.nodes())


def annotate(t: DecisionTree, S: Iterable[SymbolicAttack], threat: ThreatModel) -> AnnotatedTree:
    """Attach to every node the symbolic attacks refined from ``S`` at the root.

    Sets are deduplicated and stored in a canonical sorted order. Subtrees that
    no attack reaches are not expanded: their root gets an empty annotation and
    no children.
    """
    S = _canonical(S)
    if isinstance(t, Leaf) or not S:
        return AnnotatedTree(t, S)
    left: list[SymbolicAttack] = []
    right: list[SymbolicAttack] = []
    for s in S:
        left.extend(refine_left(s, t.feature, t.threshold, threat))
        right.extend(refine_right(s, t.feature, t.threshold, threat))
    return AnnotatedTree(t, S, annotate(t.left, left, threat), annotate(t.right, right, threat))


def _reach_leaves(node: AnnotatedTree, h: HyperRectangle) -> Iterator[tuple[AnnotatedTree, HyperRectangle]]:
    """Leaves with a cost-0 attack whose path meets ``h``, with ``h`` cut down to that path.

    Components the path does not constrain keep their identity, which lets
    callers skip recomputing them.
    """
    stack = [(node, h)]
    while stack:
        n, h = stack.pop()
        if not n.free:
            continue
        t = n.tree
        if isinstance(t, Leaf):
            yield n, h
            continue
        f = t.feature
        iv = h[f]
        lo, hi, lc, _ = iv
        v = t.threshold
        if hi <= v:
            stack.append((n.left, h))
        elif lo > v or (lo == v and not lc):
            stack.append((n.right, h))
        else:
            stack.append((n.right, h.replace(f, interval_intersect(iv, greater_than(v)))))
            stack.append((n.left, h.replace(f, interval_intersect(iv, at_most(v)))))


def unstable_attacks(root: AnnotatedTree, threat: ThreatModel) -> list[SymbolicAttack]:
    """Pair cost-0 and cost>0 attacks of differently labelled leaves.

    Equivalent to scanning all leaf pairs, but candidate partner leaves are
    found by traversing the tree with the pre-image of the costly attack.
    Output order: by the leaf holding the cost-0 attack, then lexicographic.
    """
    atk = threat.attack_box
    all_leaves = root.leaves()
    index = {id(n): i for i, n in enumerate(all_leaves)}
    found: dict[int, set] = {}
    for other in all_leaves:
        y_other = other.tree.label
        for s2 in other.sym:
            if s2.cost == 0:
                continue
            # post per feature where the pairing leaves pre untouched
            base = box_intersect(s2.post, box_sum(s2.pre, atk))
            for leaf, h in _reach_leaves(root, s2.pre):
                if leaf.tree.label == y_other:
                    continue
                for s1 in leaf.sym:
                    if s1.cost != 0:
                        continue
                    # s1.pre lies inside the leaf's path, so s1.pre ∩ s2.pre = s1.pre ∩ h
                    pre = box_intersect(h, s1.pre)
                    if pre.is_empty:
                        continue
                    post = HyperRectangle(
                        b if p is q else interval_intersect(b2, interval_sum(p, a))
                        for p, q, b, b2, a in zip(pre, s2.pre, base, s2.post, atk))
                    if post.is_empty:
                        continue
                    found.setdefault(index[id(leaf)], set()).add(SymbolicAttack(pre, post, s2.cost))
    out: list[SymbolicAttack] = []
    seen: set = set()
    for i in sorted(found):
        for s in sorted(found[i], key=SymbolicAttack.sort_key):
            if s not in seen:
                seen.add(s)
                out.append(s)
    return out


def analyze_tree(t: DecisionTree, threat: ThreatModel) -> list[SymbolicAttack]:
    """Symbolic attacks whose pre-images cover every instance where ``t`` is unstable."""
    root = annotate(t, [initial_attack(threat.dimension)], threat)
    return unstable_attacks(root, threat)
