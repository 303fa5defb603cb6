"""Certified stable region and the accuracy/robustness/resilience measures.

Fractions are over the test set ``D``:

* ``a``: accuracy
* ``r``: robustness (correct and stable), exact via the oracle
* ``r_hat``: correct and certified stable by the analysis
* ``R_hat``: correct and the whole ``eps``-neighbourhood certified stable

``R_hat <= r_hat <= r <= a`` always holds when the analysis is sound.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .data import Dataset, DataError
from .geometry import BoxArray, HyperRectangle, box_intersect
from .model import Ensemble, Label, ThreatModel
from .oracle import DEFAULT_CAP, is_stable_exact
from .tree_analysis import SymbolicAttack

log = logging.getLogger(__name__)

BOTTOM = None  # abstention of the globally robust classifier


class OrderingViolation(AssertionError):
    """A measure ordering that soundness guarantees was observed to fail."""


@dataclass
class StableRegion:
    """Complement of the union of ``unstable_pres`` in R^d."""

    unstable_pres: list
    dimension: int
    _array: BoxArray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        seen: set = set()
        uniq = []
        for h in self.unstable_pres:
            if len(h) != self.dimension:
                raise ValueError(f"box of dimension {len(h)} in a region of dimension {self.dimension}")
            if h not in seen and not h.is_empty:
                seen.add(h)
                uniq.append(h)
        self.unstable_pres = uniq
        self._array = BoxArray(uniq, self.dimension)

    @classmethod
    def from_attacks(cls, attacks: Iterable[SymbolicAttack], d: int) -> "StableRegion":
        return cls([s.pre for s in attacks], d)

    def __len__(self) -> int:
        return len(self.unstable_pres)

    def certified_mask(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_dim(X.shape[1], self.dimension)
        return ~self._array.any_contains(X)

    def certified_box_mask(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Closed boxes ``[lo_i, hi_i]`` lying wholly inside the region."""
        return ~self._array.any_overlaps_closed(lo, hi)


def _check_dim(got: int, want: int) -> None:
    if got != want:
        raise ValueError(f"dimension mismatch: {got} features, region has {want}")


def stable_region(U: Iterable[SymbolicAttack], d: int) -> StableRegion:
    return StableRegion.from_attacks(U, d)


def is_certified_stable(region: StableRegion, x: Sequence[float]) -> bool:
    return bool(region.certified_mask(np.asarray(x, dtype=float)[None, :])[0])


def is_certified_stable_box(region: StableRegion, H: HyperRectangle) -> bool:
    if H.is_empty:
        raise ValueError("empty box")
    _check_dim(len(H), region.dimension)
    return not any(not box_intersect(H, p).is_empty for p in region.unstable_pres)


def _round_sum(a: np.ndarray, b: float, down: bool) -> np.ndarray:
    # TwoSum: the rounding error tells which side of the exact sum s lies on
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if down:
        return np.where(err < 0, np.nextafter(s, -np.inf), s)
    return np.where(err > 0, np.nextafter(s, np.inf), s)


def neighborhood_bounds(X: np.ndarray, eps: float,
                        clip_domain: tuple[float, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Outward-rounded closed boxes ``N(x, eps)``, optionally clipped to a domain."""
    if not eps >= 0:
        raise ValueError("epsilon must be >= 0")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    lo = _round_sum(X, -eps, down=True)
    hi = _round_sum(X, eps, down=False)
    if clip_domain is not None:
        lo = np.maximum(lo, clip_domain[0])
        hi = np.minimum(hi, clip_domain[1])
        # points outside the domain keep at least the point itself
        lo = np.minimum(lo, X)
        hi = np.maximum(hi, X)
    return lo, hi


def _nonempty(D: Dataset) -> None:
    if len(D) == 0:
        raise DataError("empty dataset")


def correct_mask(T: Ensemble, D: Dataset) -> np.ndarray:
    pred = T.predict_many(D.X)
    return np.array([p == y for p, y in zip(pred, D.y)], dtype=bool)


def accuracy(T: Ensemble, D: Dataset) -> float:
    _nonempty(D)
    return float(correct_mask(T, D).mean())


def robustness_lower_bound(region: StableRegion, T: Ensemble, D: Dataset) -> float:
    """``r_hat``."""
    _nonempty(D)
    return float((correct_mask(T, D) & region.certified_mask(D.X)).mean())


def resilience_lower_bound(region: StableRegion, T: Ensemble, D: Dataset, eps: float,
                           clip_domain: tuple[float, float] | None = None) -> float:
    """``R_hat``: correct and ``N(z, eps)`` disjoint from every unstable pre-image."""
    _nonempty(D)
    lo, hi = neighborhood_bounds(D.X, eps, clip_domain)
    return float((correct_mask(T, D) & region.certified_box_mask(lo, hi)).mean())


def stable_mask(T: Ensemble, X: np.ndarray, threat: ThreatModel,
                cap: int | None = DEFAULT_CAP) -> np.ndarray:
    return np.array([is_stable_exact(T, x, threat, cap) for x in np.atleast_2d(X)], dtype=bool)


def exact_robustness(T: Ensemble, D: Dataset, threat: ThreatModel,
                     cap: int | None = DEFAULT_CAP) -> float:
    """``r`` via exhaustive enumeration; raises :class:`OracleInfeasible` past ``cap``."""
    _nonempty(D)
    ok = correct_mask(T, D)
    idx = np.nonzero(ok)[0]
    ok[idx] = stable_mask(T, D.X[idx], threat, cap)
    return float(ok.mean())


def globally_robust_predict(region: StableRegion, T: Ensemble, x: Sequence[float]) -> Optional[Label]:
    """``T(x)`` on the certified region, ``BOTTOM`` (None) elsewhere."""
    if not is_certified_stable(region, x):
        return BOTTOM
    return T.predict(x)


@dataclass
class NeighborhoodResult:
    r_min: float
    r_max: float
    a_min: float
    a_max: float
    r_bar: float
    worst: Dataset  # the "most unlucky" dataset
    set_robustness: list
    set_accuracy: list


def neighborhood_experiment(T: Ensemble, D: Dataset, eps: float, threat: ThreatModel,
                            n_sets: int = 100, seed: int = 0,
                            cap: int | None = DEFAULT_CAP) -> NeighborhoodResult:
    """Robustness and accuracy spread over ``n_sets`` synthetic test sets.

    Each set replaces every instance by a uniform sample of its closed
    ``eps``-neighbourhood (one RNG stream per set). Extremes are taken over the
    synthetic sets together with ``D`` itself, so ``r_min <= r <= r_max``. The
    worst dataset keeps, per instance, the first sampled neighbour that is not
    robust, or the original instance when every sample was robust.
    """
    _nonempty(D)
    if n_sets < 1:
        raise ValueError("n_sets must be >= 1")
    if not eps >= 0:
        raise ValueError("epsilon must be >= 0")
    streams = np.random.SeedSequence(seed).spawn(n_sets)
    correct0 = correct_mask(T, D)
    robust0 = correct0.copy()
    robust0[correct0] = stable_mask(T, D.X[correct0], threat, cap)
    accs = [float(correct0.mean())]
    robs = [float(robust0.mean())]
    worst_X = D.X.copy()
    found = np.zeros(len(D), dtype=bool)
    for ss in streams:
        rng = np.random.default_rng(ss)
        Z = D.X + rng.uniform(-eps, eps, size=D.X.shape) if eps > 0 else D.X.copy()
        Di = Dataset(Z, D.y)
        corr = correct_mask(T, Di)
        rob = corr.copy()
        rob[corr] = stable_mask(T, Z[corr], threat, cap)
        accs.append(float(corr.mean()))
        robs.append(float(rob.mean()))
        pick = ~rob & ~found
        worst_X[pick] = Z[pick]
        found |= ~rob
    worst = Dataset(worst_X, D.y)
    # an instance of the worst set is robust only if it and all its samples were
    r_bar = float((robust0 & ~found).mean())
    return NeighborhoodResult(min(robs), max(robs), min(accs), max(accs), r_bar, worst,
                              robs[1:], accs[1:])


CSV_COLUMNS = ("dataset", "model", "b", "epsilon", "n", "a", "r", "r_hat", "R_hat",
               "r_bar", "r_min", "r_max", "a_min", "a_max",
               "analysis_seconds", "measure_seconds", "oracle_seconds")


@dataclass
class MeasureReport:
    dataset: str
    model: str
    b: int
    epsilon: float
    n: int
    a: float
    r_hat: float
    R_hat: float
    r: Optional[float] = None
    r_bar: Optional[float] = None
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    a_min: Optional[float] = None
    a_max: Optional[float] = None
    analysis_seconds: Optional[float] = None
    measure_seconds: Optional[float] = None
    oracle_seconds: Optional[float] = None
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.check()

    def check(self) -> None:
        """Raise :class:`OrderingViolation` unless both measure chains hold."""
        for chain in (("R_hat", "r_hat", "r", "a"), ("r_bar", "r_min", "r", "r_max")):
            vals = [(k, getattr(self, k)) for k in chain if getattr(self, k) is not None]
            for (k1, v1), (k2, v2) in zip(vals, vals[1:]):
                if v1 > v2:
                    raise OrderingViolation(f"{k1}={v1} > {k2}={v2} "
                                            f"(dataset={self.dataset}, eps={self.epsilon}, b={self.b})")

    def row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_COLUMNS}

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def reports_to_csv(reports: Sequence[MeasureReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rep in reports:
        w.writerow({k: ("" if v is None else v) for k, v in rep.row().items()})
    return buf.getvalue()


def measure(T: Ensemble, D: Dataset, region: StableRegion, threat: ThreatModel, eps: float,
            dataset: str = "", model: str = "", exact: bool = True,
            clip_domain: tuple[float, float] | None = None,
            cap: int | None = DEFAULT_CAP, **extra) -> MeasureReport:
    """All single-set measures for one ``eps``; ``r`` is skipped if ``exact`` is False."""
    t0 = time.perf_counter()
    a = accuracy(T, D)
    r_hat = robustness_lower_bound(region, T, D)
    R_hat = resilience_lower_bound(region, T, D, eps, clip_domain)
    t1 = time.perf_counter()
    r = exact_robustness(T, D, threat, cap) if exact else None
    t2 = time.perf_counter()
    return MeasureReport(dataset, model, threat.budget, eps, len(D), a, r_hat, R_hat, r,
                         measure_seconds=t1 - t0, oracle_seconds=(t2 - t1) if exact else None,
                         **extra)
