import pytest

from treecert.geometry import Interval
from treecert.model import Ensemble, Leaf, Node, ThreatModel
from treecert.ensemble_analysis import (
    AnalysisConfig,
    Unsplittable,
    analyze_ensemble,
    choose_split,
    frozen_features,
    priority,
    split,
)
from treecert.tree_analysis import analyze_tree, initial_attack

from test_tree_analysis import A, WORKED, THREAT

T1 = Ensemble.single(WORKED, (-1, 1), 2)


def test_priority_counts_undecided_trees():
    assert priority(initial_attack(2), T1) == (0, 1)
    leafish = A(["(11,12]", "(8,9]"], ["(11,12]", "(8,9]"], 0)
    assert priority(leafish, T1) == (0, 0)


def test_root_split_is_the_root_threshold():
    assert choose_split(initial_attack(2), T1) == (0, 10)


def test_pre_only_search_can_be_stuck():
    # the pre-image sits inside one leaf; only the post-image straddles a threshold
    s = A(["(10,11]", "(5,8]"], ["(9,10]", "(5,9]"], 1)
    with pytest.raises(Unsplittable):
        choose_split(s, T1)


def test_post_search_finds_a_cut():
    s = A(["(10,12]", "(5,8]"], ["(9,11]", "(5,9]"], 1)
    f, v = choose_split(s, T1, THREAT)
    assert (f, v) == (0, 10)


def test_split_into_four_pieces():
    pieces = split(initial_attack(2), 0, 10, THREAT)
    assert [str(c.pre[0]) for c in pieces] == ["(-inf,9]", "(9,10]", "(10,11]", "(11,+inf)"]
    assert [str(c.post[0]) for c in pieces] == ["(-inf,10]", "(8,11]", "(9,12]", "(10,+inf)"]
    assert all(c.split_count == 1 for c in pieces)


def test_split_without_perturbation_is_binary():
    fixed = ThreatModel([Interval(0, 0, True, True)] * 2, [1, 1], 1)
    assert len(split(initial_attack(2), 0, 10, fixed)) == 2


def test_spent_budget_freezes_other_features():
    s = A(["(10,11]", "(5,8]"], ["(9,10]", "(5,9]"], 1)
    assert frozen_features(s, THREAT) == {1}
    assert frozen_features(initial_attack(2), THREAT) == frozenset()


def test_split_never_loses_points():
    s = initial_attack(2)
    pieces = split(s, 1, 5, THREAT)
    for x in (4.0, 4.5, 5.0, 5.5, 6.0, 7.0):
        assert sum(c.pre.contains([0, x]) for c in pieces) == 1


def test_copies_of_one_tree_give_its_attacks():
    res = analyze_ensemble(Ensemble([WORKED] * 3, (-1, 1), 2), THREAT)
    assert res.converged and set(res.attacks) == set(analyze_tree(WORKED, THREAT))


def test_constant_trees_give_nothing():
    assert analyze_ensemble(Ensemble([Leaf(1)] * 3, (-1, 1), 2), THREAT).attacks == []


def test_zero_iterations_keep_initial_candidates():
    res = analyze_ensemble(T1, THREAT, AnalysisConfig(max_iterations=0))
    assert res.attacks == analyze_tree(WORKED, THREAT)
    assert not res.converged or res.telemetry["iterations"] == 0


def test_deterministic_across_runs(pool):
    T = Ensemble([WORKED, Node(1, 6, Leaf(1), Leaf(-1)), Node(0, 9, Leaf(-1), Leaf(1))], (-1, 1), 2)
    a = analyze_ensemble(T, THREAT, AnalysisConfig(workers=1))
    b = analyze_ensemble(T, THREAT, AnalysisConfig(workers=1))
    c = analyze_ensemble(T, THREAT, AnalysisConfig(workers=4), executor=pool)
    assert a.attacks == b.attacks
    assert set(a.attacks) == set(c.attacks)


def test_config_validation():
    for bad in (dict(split_fraction=0), dict(workers=0), dict(max_iterations=-1)):
        with pytest.raises(ValueError):
            AnalysisConfig(**bad)


def test_telemetry_fields():
    tel = analyze_ensemble(T1, THREAT).telemetry
    for key in ("iterations", "candidates", "ended", "converged", "wall_seconds", "per_worker"):
        assert key in tel
