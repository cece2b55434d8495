"""Gromov convergence of sequences of stable supercurves, checked axiom by axiom."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from logging import getLogger
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from supercurves.exceptions import InvalidInputError
from supercurves.fields import GlobalCurve, SuperSection, make_instance
from supercurves.geometry import MoebiusTransform, SpherePoint
from supercurves.moduli.distance import (
    DEFAULT_SAMPLES,
    DistanceContext,
    MoebiusTuple,
    check_tree_map,
    energy_terms,
    map_terms,
    marked_term,
    nodal_term,
    rescaling_term,
    rho_search,
)
from supercurves.moduli.stable import StableSupercurve
from supercurves.moduli.trees import LabelledTree, TreeMap

logger = getLogger(__name__)

Witness = Tuple[TreeMap, MoebiusTuple]

CONVERGENCE_TOL = 1e-2
BUBBLING_EPSILON = 0.5


class Axiom(str, Enum):
    MAP = "Map"
    ENERGY = "Energy"
    RESCALING = "Rescaling"
    NODAL = "Nodal Points"
    MARKED = "Marked Points"


@dataclass
class ConvergenceReport:
    nus: List[float]
    epsilon: float
    tolerance: float
    residuals: Dict[Axiom, List[float]]

    @property
    def flags(self) -> Dict[Axiom, bool]:
        return {axiom: ladder[-1] <= self.tolerance for axiom, ladder in self.residuals.items()}

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    @property
    def failed(self) -> List[Axiom]:
        return [axiom for axiom, flag in self.flags.items() if not flag]

    def rows(self) -> List[Tuple[float, ...]]:
        return [
            (nu, *(self.residuals[axiom][index] for axiom in Axiom))
            for index, nu in enumerate(self.nus)
        ]


def axiom_residuals(
    limit: StableSupercurve,
    member: StableSupercurve,
    witness: Witness,
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
) -> Dict[Axiom, float]:
    tree_map, moebius = witness
    checked = check_tree_map(limit, member, tree_map)
    context = DistanceContext(limit, member, epsilon, samples)
    energy_phi, energy_psi = energy_terms(context, checked, moebius)
    map_phi, map_psi = map_terms(context, checked, moebius)
    return {
        Axiom.MAP: max(map_phi, map_psi),
        Axiom.ENERGY: max(energy_phi, energy_psi),
        Axiom.RESCALING: rescaling_term(context, checked, moebius, adjacent_only=True),
        Axiom.NODAL: nodal_term(context, checked, moebius, adjacent_only=True),
        Axiom.MARKED: marked_term(context, checked, moebius, own_vertex_only=True),
    }


def gromov_convergence_check(
    sequence: Sequence[StableSupercurve],
    limit: StableSupercurve,
    epsilon: float,
    witnesses: Optional[Sequence[Witness]] = None,
    tolerance: float = CONVERGENCE_TOL,
    nus: Optional[Sequence[float]] = None,
    samples: int = DEFAULT_SAMPLES,
) -> ConvergenceReport:
    """
    Residual ladders of the five axioms along the sequence. Without witnesses the
    tree maps and Moebius tuples come from the distance search.
    """
    if not sequence:
        raise InvalidInputError("the sequence is empty")
    labels = list(nus) if nus is not None else [float(index) for index in range(1, len(sequence) + 1)]
    if len(labels) != len(sequence):
        raise InvalidInputError(f"{len(labels)} ladder values for {len(sequence)} sequence members")
    if witnesses is not None and len(witnesses) != len(sequence):
        raise InvalidInputError(f"{len(witnesses)} witnesses for {len(sequence)} sequence members")
    residuals: Dict[Axiom, List[float]] = {axiom: [] for axiom in Axiom}
    for index, member in enumerate(sequence):
        if witnesses is not None:
            witness = witnesses[index]
        else:
            found = rho_search(limit, member, epsilon, samples=samples)
            if found is None:
                raise InvalidInputError(
                    f"member {index + 1} admits no tree homomorphism from the limit"
                )
            witness = (found.tree_map, found.moebius)
        for axiom, value in axiom_residuals(limit, member, witness, epsilon, samples).items():
            residuals[axiom].append(value)
    report = ConvergenceReport(labels, epsilon, tolerance, residuals)
    if report.failed:
        logger.info(f"failed axioms: {', '.join(axiom.value for axiom in report.failed)}")
    return report


@dataclass
class ConvergenceCase:
    limit: StableSupercurve
    sequence: List[StableSupercurve]
    witnesses: List[Witness]
    nus: List[float]
    epsilon: float = BUBBLING_EPSILON


def _bubble_limit(nodal_offset: complex = 0j, bundle_degree: int = -1) -> StableSupercurve:
    principal = GlobalCurve.projective(np.array([[0, 1], [1, 0]]))
    bubble = GlobalCurve.projective(np.array([[1, 0], [0, 1]]))
    return StableSupercurve(
        LabelledTree((1,), (2,)),
        {
            1: (principal, SuperSection.zero(principal, bundle_degree)),
            2: (bubble, SuperSection.zero(bubble, bundle_degree)),
        },
        {(1, 2): SpherePoint(0, nodal_offset), (2, 1): SpherePoint.infinity()},
        {1: SpherePoint(0, 1.0)},
    )


def _single_member(curve: GlobalCurve, bundle_degree: int, marked: complex) -> StableSupercurve:
    return StableSupercurve(
        LabelledTree((), (1,)),
        {1: (curve, SuperSection.zero(curve, bundle_degree))},
        {},
        {1: SpherePoint(0, marked)},
    )


def _second_bubble(nu: float) -> GlobalCurve:
    """``z + 1/(nu z) + nu^-1.5 / (z - nu^-0.5)``: an extra bubble between both scales."""
    center, weight = nu**-0.5, nu**-1.5
    return GlobalCurve.projective(
        np.array(
            [
                [-center / nu, 1 / nu + weight, -center, 1],
                [0, -center, 1, 0],
            ]
        )
    )


def bubbling_case(nus: Sequence[float], bundle_degree: int = -1) -> ConvergenceCase:
    """
    ``z + 1/(nu z)`` with one marked point at ``1/nu``, converging to the identity
    with the bubble ``1/w`` attached at 0 and the marked point at ``w = 1``.
    """
    sequence = [
        _single_member(make_instance("bubble", eps=1.0 / nu)[0], bundle_degree, 1.0 / nu)
        for nu in nus
    ]
    witnesses: List[Witness] = [
        ((1, 1), {1: MoebiusTransform.identity(), 2: MoebiusTransform.scaling(1.0 / nu)})
        for nu in nus
    ]
    return ConvergenceCase(_bubble_limit(bundle_degree=bundle_degree), sequence, witnesses, list(nus))


def planted_defect(axiom: Axiom, nus: Sequence[float]) -> ConvergenceCase:
    """The bubbling case with one defect that only the given axiom detects."""
    case = bubbling_case(nus)
    if axiom is Axiom.MAP:
        case.witnesses = [
            (tree_map, {1: MoebiusTransform.rotation(0.3), 2: moebius[2]})
            for tree_map, moebius in case.witnesses
        ]
    elif axiom is Axiom.ENERGY:
        case.sequence = [_single_member(_second_bubble(nu), -1, 1.0 / nu) for nu in nus]
    elif axiom is Axiom.RESCALING:
        case.limit = _bubble_limit(nodal_offset=0.1)
    elif axiom is Axiom.NODAL:
        moved = _bubble_limit()
        moved.nodal[(1, 2)] = SpherePoint(0, 0.1)
        case.sequence = [moved for _ in nus]
        case.witnesses = [
            ((1, 2), {1: MoebiusTransform.identity(), 2: MoebiusTransform.identity()}) for _ in nus
        ]
    else:
        case.sequence = [
            _single_member(make_instance("bubble", eps=1.0 / nu)[0], -1, 1.3 / nu) for nu in nus
        ]
    return case
