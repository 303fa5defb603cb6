"""JSON formats for models and analysis results.

Every document carries ``"version": 1``. Schema violations raise
:class:`FormatError` naming the offending JSON path, e.g. ``$.trees[2].left.threshold``.
Floats go through ``repr`` so values round-trip exactly; intervals use the
textual grammar of :mod:`treecert.geometry` so bound flags survive too.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from typing import Any, Iterable

from .geometry import EMPTY, HyperRectangle, Interval, parse_interval
from .model import DecisionTree, Ensemble, Leaf, Node, ThreatModel
from .tree_analysis import SymbolicAttack

VERSION = 1


class FormatError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(obj: Any, key: str, path: str) -> Any:
    if not isinstance(obj, dict):
        raise FormatError(path, f"expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise FormatError(path, f"missing key {key!r}")
    return obj[key]


def _number(v: Any, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise FormatError(path, f"expected a number, got {v!r}")
    try:
        return float(v)
    except ValueError:
        raise FormatError(path, f"expected a number, got {v!r}") from None


def _integer(v: Any, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(path, f"expected an integer, got {v!r}")
    return v


def _check_version(doc: Any, path: str = "$") -> None:
    v = _require(doc, "version", path)
    if v != VERSION:
        raise FormatError(f"{path}.version", f"unsupported version {v!r} (expected {VERSION})")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file beside ``path`` and rename it into place."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(path: str | os.PathLike, doc: Any) -> None:
    atomic_write(path, json.dumps(doc, indent=2) + "\n")


def read_json(path: str | os.PathLike) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError("$", f"invalid JSON in {path}: {e}") from None


# -- models ------------------------------------------------------------------

def tree_to_json(t: DecisionTree) -> dict:
    if isinstance(t, Leaf):
        return {"leaf": t.label}
    return {"feature": t.feature, "threshold": t.threshold,
            "left": tree_to_json(t.left), "right": tree_to_json(t.right)}


def tree_from_json(obj: Any, path: str = "$") -> DecisionTree:
    if isinstance(obj, dict) and "leaf" in obj:
        return Leaf(_label(obj["leaf"], f"{path}.leaf"))
    feature = _integer(_require(obj, "feature", path), f"{path}.feature")
    if feature < 0:
        raise FormatError(f"{path}.feature", "feature index must be >= 0")
    threshold = _number(_require(obj, "threshold", path), f"{path}.threshold")
    if not math.isfinite(threshold):
        raise FormatError(f"{path}.threshold", "threshold must be finite")
    left = tree_from_json(_require(obj, "left", path), f"{path}.left")
    right = tree_from_json(_require(obj, "right", path), f"{path}.right")
    return Node(feature, threshold, left, right)


def _label(v: Any, path: str):
    if isinstance(v, (list, dict)) or v is None:
        raise FormatError(path, f"labels must be scalars, got {v!r}")
    return v


def ensemble_to_json(T: Ensemble) -> dict:
    return {"version": VERSION, "labels": list(T.labels), "n_features": T.n_features,
            "trees": [tree_to_json(t) for t in T.trees]}


def ensemble_from_json(doc: Any) -> Ensemble:
    _check_version(doc)
    labels = _require(doc, "labels", "$")
    if not isinstance(labels, list):
        raise FormatError("$.labels", "expected a list")
    labels = [_label(v, f"$.labels[{i}]") for i, v in enumerate(labels)]
    trees_doc = _require(doc, "trees", "$")
    if not isinstance(trees_doc, list):
        raise FormatError("$.trees", "expected a list")
    trees = [tree_from_json(t, f"$.trees[{i}]") for i, t in enumerate(trees_doc)]
    d = doc.get("n_features")
    if d is not None:
        d = _integer(d, "$.n_features")
    try:
        return Ensemble(trees, labels, d)
    except ValueError as e:
        raise FormatError("$", str(e)) from None


def save_model(path: str | os.PathLike, T: Ensemble) -> None:
    dump_json(path, ensemble_to_json(T))


def load_model(path: str | os.PathLike) -> Ensemble:
    return ensemble_from_json(read_json(path))


# -- threat models -----------------------------------------------------------

def _interval_json(iv: Interval) -> Any:
    if iv.lo_closed and iv.hi_closed:
        return [iv.lo, iv.hi]
    return str(iv)


def threat_to_json(threat: ThreatModel) -> dict:
    return {"version": VERSION, "budget": threat.budget,
            "features": [{"interval": _interval_json(iv), "cost": c}
                         for iv, c in zip(threat.intervals, threat.costs)]}


def threat_from_json(doc: Any) -> ThreatModel:
    """``interval`` is either ``[lo, hi]`` (closed; infinite ends may be the strings
    ``"-inf"``/``"+inf"``) or an interval string such as ``"(-inf,+inf)"``."""
    if "version" in doc:
        _check_version(doc)
    budget = _integer(_require(doc, "budget", "$"), "$.budget")
    feats = _require(doc, "features", "$")
    if not isinstance(feats, list):
        raise FormatError("$.features", "expected a list")
    intervals, costs = [], []
    for i, fdoc in enumerate(feats):
        p = f"$.features[{i}]"
        raw = _require(fdoc, "interval", p)
        if isinstance(raw, str):
            try:
                iv = parse_interval(raw)
            except ValueError as e:
                raise FormatError(f"{p}.interval", str(e)) from None
        elif isinstance(raw, list) and len(raw) == 2:
            lo = _number(raw[0], f"{p}.interval[0]")
            hi = _number(raw[1], f"{p}.interval[1]")
            if lo > hi:
                raise FormatError(f"{p}.interval", f"empty interval [{lo},{hi}]")
            iv = Interval(lo, hi, True, True)
        else:
            raise FormatError(f"{p}.interval", "expected [lo, hi] or an interval string")
        if iv is EMPTY:
            raise FormatError(f"{p}.interval", "perturbation interval is empty")
        intervals.append(iv)
        costs.append(_integer(fdoc.get("cost", 1), f"{p}.cost"))
    try:
        return ThreatModel(intervals, costs, budget)
    except ValueError as e:
        raise FormatError("$", str(e)) from None


def load_threat(path: str | os.PathLike) -> ThreatModel:
    return threat_from_json(read_json(path))


def save_threat(path: str | os.PathLike, threat: ThreatModel) -> None:
    dump_json(path, threat_to_json(threat))


# -- symbolic attacks --------------------------------------------------------

def attack_to_json(s: SymbolicAttack) -> dict:
    return {"pre": s.pre.to_strings(), "post": s.post.to_strings(), "cost": s.cost}


def attack_from_json(obj: Any, path: str = "$") -> SymbolicAttack:
    boxes = []
    for key in ("pre", "post"):
        parts = _require(obj, key, path)
        if not isinstance(parts, list):
            raise FormatError(f"{path}.{key}", "expected a list of interval strings")
        ivs = []
        for j, txt in enumerate(parts):
            if not isinstance(txt, str):
                raise FormatError(f"{path}.{key}[{j}]", "expected an interval string")
            try:
                ivs.append(parse_interval(txt))
            except ValueError as e:
                raise FormatError(f"{path}.{key}[{j}]", str(e)) from None
        boxes.append(HyperRectangle(ivs))
    if len(boxes[0]) != len(boxes[1]):
        raise FormatError(path, "pre and post have different dimensions")
    cost = _integer(_require(obj, "cost", path), f"{path}.cost")
    return SymbolicAttack(boxes[0], boxes[1], cost)


def attacks_to_json(attacks: Iterable[SymbolicAttack], d: int, **extra) -> dict:
    doc = {"version": VERSION, "dimension": d, "attacks": [attack_to_json(s) for s in attacks]}
    doc.update(extra)
    return doc


def attacks_from_json(doc: Any) -> tuple[int, list[SymbolicAttack]]:
    _check_version(doc)
    d = _integer(_require(doc, "dimension", "$"), "$.dimension")
    items = _require(doc, "attacks", "$")
    if not isinstance(items, list):
        raise FormatError("$.attacks", "expected a list")
    out = []
    for i, obj in enumerate(items):
        s = attack_from_json(obj, f"$.attacks[{i}]")
        if s.pre.dimension != d:
            raise FormatError(f"$.attacks[{i}]", f"dimension {s.pre.dimension}, expected {d}")
        out.append(s)
    return d, out


def save_attacks(path: str | os.PathLike, attacks: Iterable[SymbolicAttack], d: int, **extra) -> None:
    dump_json(path, attacks_to_json(attacks, d, **extra))


def load_attacks(path: str | os.PathLike) -> tuple[int, list[SymbolicAttack]]:
    return attacks_from_json(read_json(path))
