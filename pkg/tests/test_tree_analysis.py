from treecert.geometry import HyperRectangle
from treecert.model import Leaf, Node, ThreatModel
from treecert.tree_analysis import SymbolicAttack, analyze_tree, annotate, initial_attack, refine_left, refine_right

WORKED = Node(0, 10, Node(1, 5, Leaf(1), Leaf(-1)), Node(1, 8, Leaf(1), Leaf(-1)))
THREAT = ThreatModel.uniform(2, 1, 1)


def A(pre, post, cost):
    return SymbolicAttack(HyperRectangle.parse(pre), HyperRectangle.parse(post), cost)


def test_refine_root_left():
    got = refine_left(initial_attack(2), 0, 10, THREAT)
    assert got == [A(["(-inf,10]", "(-inf,+inf)"], ["(-inf,10]", "(-inf,+inf)"], 0),
                   A(["(10,11]", "(-inf,+inf)"], ["(9,10]", "(-inf,+inf)"], 1)]


def test_refine_root_right():
    got = refine_right(initial_attack(2), 0, 10, THREAT)
    assert got == [A(["(10,+inf)", "(-inf,+inf)"], ["(10,+inf)", "(-inf,+inf)"], 0),
                   A(["(9,10]", "(-inf,+inf)"], ["(10,11]", "(-inf,+inf)"], 1)]


def test_exhausted_budget_cannot_cross():
    s = A(["(10,11]", "(-inf,+inf)"], ["(9,10]", "(-inf,+inf)"], 1)
    assert refine_left(s, 1, 5, THREAT) == [A(["(10,11]", "(-inf,5]"], ["(9,10]", "(-inf,5]"], 1)]


def test_zero_budget_gives_no_unstable_attacks():
    assert analyze_tree(WORKED, ThreatModel.uniform(2, 1, 0)) == []


def test_constant_tree_is_stable():
    assert analyze_tree(Node(0, 1, Leaf(1), Leaf(1)), THREAT) == []


def test_costly_attack_is_out_of_reach():
    assert analyze_tree(WORKED, ThreatModel([THREAT.intervals[0]] * 2, [2, 2], 1)) == []


def test_every_node_gets_a_cost_free_attack():
    root = annotate(WORKED, [initial_attack(2)], THREAT)
    assert all(any(s.cost == 0 for s in n.sym) for n in root.nodes())
