import json

import pytest

from treecert.formats import (
    FormatError,
    attacks_from_json,
    attacks_to_json,
    ensemble_from_json,
    ensemble_to_json,
    load_model,
    load_threat,
    save_model,
    threat_from_json,
    threat_to_json,
)
from treecert.geometry import Interval
from treecert.model import Ensemble, ThreatModel
from treecert.tree_analysis import analyze_tree

from _support import FIXTURES
from test_tree_analysis import WORKED, THREAT


def test_model_round_trip(tmp_path):
    T = Ensemble([WORKED] * 3, (-1, 1), 2)
    save_model(tmp_path / "m.json", T)
    assert load_model(tmp_path / "m.json") == T


def test_fixture_files_load():
    assert load_model(FIXTURES / "worked_tree.json").trees[0] == WORKED
    assert load_threat(FIXTURES / "worked_threat.json") == THREAT


def test_threat_round_trip_keeps_open_ends():
    t = ThreatModel([Interval(-1, 1, True, False), Interval()], [1, 2], 2)
    assert threat_from_json(json.loads(json.dumps(threat_to_json(t)))) == t


def test_attacks_round_trip():
    U = analyze_tree(WORKED, THREAT)
    d, back = attacks_from_json(json.loads(json.dumps(attacks_to_json(U, 2))))
    assert d == 2 and back == U


def test_unknown_version():
    doc = ensemble_to_json(Ensemble.single(WORKED, (-1, 1), 2))
    doc["version"] = 99
    with pytest.raises(FormatError, match=r"\$\.version"):
        ensemble_from_json(doc)


def test_error_points_at_the_bad_field():
    doc = ensemble_to_json(Ensemble.single(WORKED, (-1, 1), 2))
    doc["trees"][0]["left"]["threshold"] = "abc"
    with pytest.raises(FormatError) as err:
        ensemble_from_json(doc)
    assert "trees[0].left" in err.value.path
