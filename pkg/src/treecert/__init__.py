"""Certified stability of tree ensembles under a budgeted attacker."""
from __future__ import annotations

__version__ = "0.1.0"

from .geometry import EMPTY, HyperRectangle, Interval, parse_interval
from .model import Ensemble, Leaf, Neighborhood, Node, ThreatModel
from .tree_analysis import SymbolicAttack, analyze_tree, annotate
from .ensemble_analysis import AnalysisConfig, analyze_ensemble
from .metrics import StableRegion, globally_robust_predict, stable_region
from .oracle import OracleInfeasible, is_stable_exact
from .data import Dataset, load_libsvm
from .generate import GenSpec

__all__ = [
    "EMPTY", "HyperRectangle", "Interval", "parse_interval",
    "Ensemble", "Leaf", "Neighborhood", "Node", "ThreatModel",
    "SymbolicAttack", "analyze_tree", "annotate",
    "AnalysisConfig", "analyze_ensemble",
    "StableRegion", "globally_robust_predict", "stable_region",
    "OracleInfeasible", "is_stable_exact",
    "Dataset", "load_libsvm", "GenSpec",
]
