"""LIBSVM datasets with min-max normalisation and stratified splitting."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Hashable

import numpy as np


class DataError(ValueError):
    """Malformed or unusable dataset."""


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray  # (n, d) float
    y: np.ndarray  # (n,) object array of labels

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=object).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} instances but {y.shape[0]} labels")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])

    def with_dimension(self, d: int) -> "Dataset":
        """Pad with zero columns (missing sparse features) up to ``d``."""
        if d < self.dimension:
            raise DataError(f"dataset has {self.dimension} features, model expects {d}")
        if d == self.dimension:
            return self
        pad = np.zeros((len(self), d - self.dimension))
        return Dataset(np.hstack([self.X, pad]), self.y)


def _parse_label(tok: str) -> Hashable:
    v = float(tok)
    return int(v) if v.is_integer() else v


def parse_libsvm(text: str, source: str = "<string>", n_features: int | None = None) -> Dataset:
    rows: list[dict[int, float]] = []
    labels: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(_parse_label(tokens[0]))
        except ValueError:
            raise DataError(f"{source}:{lineno}: bad label {tokens[0]!r}") from None
        row: dict[int, float] = {}
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            try:
                if not sep:
                    raise ValueError
                i = int(idx)
                v = float(val)
            except ValueError:
                raise DataError(f"{source}:{lineno}: malformed feature {tok!r}") from None
            if i < 1:
                raise DataError(f"{source}:{lineno}: feature index {i} (indices are 1-based)")
            if i in row:
                raise DataError(f"{source}:{lineno}: duplicate feature index {i}")
            if not np.isfinite(v):
                raise DataError(f"{source}:{lineno}: non-finite value {val!r}")
            row[i] = v
        rows.append(row)
    if not rows:
        raise DataError(f"{source}: empty dataset")
    d = max((max(r) for r in rows if r), default=0)
    if n_features is not None:
        if n_features < d:
            raise DataError(f"{source}: feature index {d} exceeds n_features={n_features}")
        d = n_features
    X = np.zeros((len(rows), max(d, 1)))
    for n, r in enumerate(rows):
        for i, v in r.items():
            X[n, i - 1] = v
    return Dataset(X, np.array(labels, dtype=object))


def load_libsvm(path: str | os.PathLike, n_features: int | None = None) -> Dataset:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e.strerror}") from None
    return parse_libsvm(text, str(path), n_features)


def format_libsvm(D: Dataset) -> str:
    lines = []
    for x, y in zip(D.X, D.y):
        feats = " ".join(f"{i + 1}:{v!r}" for i, v in enumerate(x.tolist()) if v != 0)
        lines.append(f"{y} {feats}".rstrip())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Scaling:
    lo: np.ndarray
    span: np.ndarray  # max - min, with 0 for constant features

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        safe = np.where(self.span > 0, self.span, 1.0)
        return np.where(self.span > 0, (X - self.lo) / safe, 0.0)

    def invert(self, Z: np.ndarray) -> np.ndarray:
        return np.asarray(Z, dtype=float) * self.span + self.lo


def normalize(D: Dataset, scaling: Scaling | None = None) -> tuple[Dataset, Scaling]:
    """Min-max scale every feature into [0, 1]; constant features become 0."""
    if len(D) == 0:
        raise DataError("cannot normalise an empty dataset")
    if scaling is None:
        lo = D.X.min(axis=0)
        scaling = Scaling(lo, D.X.max(axis=0) - lo)
    return Dataset(scaling.apply(D.X), D.y), scaling


def stratified_split(D: Dataset, ratio: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    from sklearn.model_selection import train_test_split

    if not 0 < ratio < 1:
        raise DataError("split ratio must lie in (0, 1)")
    labels, counts = np.unique(D.y.astype(str), return_counts=True)
    small = labels[counts < 2]
    if small.size:
        raise DataError(f"labels with fewer than two instances cannot be split: {list(small)}")
    idx = np.arange(len(D))
    train, test = train_test_split(idx, train_size=ratio, random_state=seed,
                                   stratify=D.y.astype(str))
    return D.subset(np.sort(train)), D.subset(np.sort(test))
