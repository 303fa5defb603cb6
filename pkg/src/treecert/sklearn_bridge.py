"""Import fitted scikit-learn trees and forests.

scikit-learn casts inputs to float32 before comparing against its float64
thresholds; the converted model compares float64 inputs directly. The two
agree except for inputs within float32 rounding of a threshold.
"""
from __future__ import annotations

from typing import Sequence

from .model import DecisionTree, Ensemble, Leaf, Node


def _convert(tree_, classes: Sequence, node: int = 0) -> DecisionTree:
    left = tree_.children_left[node]
    if left == -1:
        return Leaf(_label(classes[int(tree_.value[node][0].argmax())]))
    return Node(int(tree_.feature[node]), float(tree_.threshold[node]),
                _convert(tree_, classes, left), _convert(tree_, classes, tree_.children_right[node]))


def _label(v):
    # numpy scalars are not JSON friendly
    return v.item() if hasattr(v, "item") else v


def tree_from_sklearn(estimator) -> DecisionTree:
    return _convert(estimator.tree_, estimator.classes_)


def ensemble_from_sklearn(estimator) -> Ensemble:
    """A ``DecisionTreeClassifier`` or a ``RandomForestClassifier`` with an odd number of trees.

    Forest members vote with hard labels, which differs from scikit-learn's
    probability averaging; the converted model is what gets certified.
    """
    labels = [_label(c) for c in estimator.classes_]
    d = int(estimator.n_features_in_)
    if hasattr(estimator, "estimators_"):
        trees = [_convert(e.tree_, estimator.classes_) for e in estimator.estimators_]
    else:
        trees = [tree_from_sklearn(estimator)]
    return Ensemble(trees, labels, d)
