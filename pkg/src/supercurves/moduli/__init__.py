"""
Stable supercurves over labelled trees, their equivalence, the distance rho_eps
and the Gromov convergence checker.
"""

from supercurves.moduli.convergence import (
    Axiom,
    ConvergenceCase,
    ConvergenceReport,
    bubbling_case,
    gromov_convergence_check,
    planted_defect,
)
from supercurves.moduli.distance import (
    EquivalenceWitness,
    RhoBreakdown,
    apply_equivalence,
    equivalent,
    parallel_transport,
    rho_distance,
    rho_eval,
    rho_search,
)
from supercurves.moduli.stable import (
    MassTable,
    ModuliClass,
    StableSupercurve,
    component_masses,
    epsilon_auto,
    moduli_class,
    restricted_energy,
    restriction,
    single_vertex,
    special_points,
    validate_stable,
)
from supercurves.moduli.trees import (
    LabelledTree,
    brute_force_trees,
    enumerate_trees,
    subtree,
    tree_homomorphisms,
    tree_isomorphisms,
)

__all__ = [
    "Axiom",
    "ConvergenceCase",
    "ConvergenceReport",
    "EquivalenceWitness",
    "LabelledTree",
    "MassTable",
    "ModuliClass",
    "RhoBreakdown",
    "StableSupercurve",
    "apply_equivalence",
    "brute_force_trees",
    "bubbling_case",
    "component_masses",
    "enumerate_trees",
    "epsilon_auto",
    "equivalent",
    "gromov_convergence_check",
    "moduli_class",
    "parallel_transport",
    "planted_defect",
    "restricted_energy",
    "restriction",
    "rho_distance",
    "rho_eval",
    "rho_search",
    "single_vertex",
    "special_points",
    "subtree",
    "tree_homomorphisms",
    "tree_isomorphisms",
    "validate_stable",
]
