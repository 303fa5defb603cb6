import numpy as np
import pytest

from treecert.geometry import HyperRectangle
from treecert.model import Ensemble, Leaf, Neighborhood, Node, ThreatModel, majority_box, tree_depth

WORKED = Node(0, 10, Node(1, 5, Leaf(1), Leaf(-1)), Node(1, 8, Leaf(1), Leaf(-1)))


def test_worked_predictions():
    T = Ensemble.single(WORKED, (-1, 1), 2)
    assert T.predict([12, 7]) == 1
    assert T.predict([8, 6]) == -1
    assert list(T.predict_many(np.array([[12, 7], [8, 6], [0, 0]]))) == [1, -1, 1]


def test_box_prediction():
    T = Ensemble.single(WORKED, (-1, 1), 2)
    assert T.predict_box(HyperRectangle.parse(["(9,11]", "(4,6]"])) == {1, -1}
    assert T.predict_box(HyperRectangle.parse(["(11,12]", "(8,9]"])) == {-1}


def test_majority_box():
    assert majority_box([{1}, {1}, {-1}], (-1, 1)) == {1}
    assert majority_box([{1}, {1, -1}, {-1}], (-1, 1)) == {-1, 1}


def test_even_ensembles_rejected():
    with pytest.raises(ValueError):
        Ensemble([WORKED, WORKED], (-1, 1), 2)


def test_threat_model_validation():
    with pytest.raises(ValueError):
        ThreatModel.uniform(2, 1, 1, cost=0)
    t = ThreatModel.linf(3, 0.5)
    assert t.budget == 3 and t.delta(0) == (-0.5, 0.5)
    assert ThreatModel.l0(2, 1).attack_box == HyperRectangle.full(2)


def test_neighborhood_and_depth():
    n = Neighborhood([0.5, 0.5], 0.5)
    assert n.contains([0, 1]) and not n.contains([1.1, 0.5])
    assert tree_depth(WORKED) == 2
