"""
Unstable regions of a single tree
=================================

A depth-two tree over two features, an attacker who may move one feature by
at most one unit, and the symbolic attacks that describe where the tree can
be flipped.
"""

# %%
# The model and the attacker
# --------------------------
# The root tests ``x0 <= 10``; both children test the second feature.
from treecert import Ensemble, Leaf, Node, ThreatModel
from treecert.tree_analysis import analyze_tree, annotate, initial_attack

tree = Node(0, 10, Node(1, 5, Leaf(1), Leaf(-1)), Node(1, 8, Leaf(1), Leaf(-1)))
threat = ThreatModel.uniform(2, delta=1, budget=1)

# %%
# Annotating the tree
# -------------------
# Every node carries the symbolic attacks ``<pre | post | cost>`` that reach
# it. Cost 0 attacks describe unperturbed instances.
root = annotate(tree, [initial_attack(2)], threat)
for i, node in enumerate(root.nodes(), 1):
    print(i, node.sym)

# %%
# The unstable attacks
# --------------------
# Pairing leaves with different labels leaves six attacks. Their pre-images
# cover every instance the attacker can flip.
U = analyze_tree(tree, threat)
for s in U:
    print(s)

# %%
# Checking against brute force
# ----------------------------
# ``10.5, 7`` lies in an unstable pre-image and the oracle finds the flip.
from treecert.oracle import find_flip
from treecert.metrics import StableRegion, is_certified_stable

region = StableRegion.from_attacks(U, 2)
T = Ensemble.single(tree, (-1, 1), 2)
for x in ([10.5, 7], [0, 0]):
    print(x, "certified" if is_certified_stable(region, x) else "uncertified",
          "flip:", find_flip(T, x, threat))
