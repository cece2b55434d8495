"""Stable supercurves modelled over labelled trees."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from supercurves.energy import EnergyMethod, energy_curve, energy_section
from supercurves.exceptions import InvalidInputError, TreeError
from supercurves.fields import GlobalCurve, SuperSection
from supercurves.geometry import SpherePoint, TargetKind, target_distance
from supercurves.moduli.trees import LabelledTree, subtree
from supercurves.quadrature import DEFAULT_REL_TOL, Disc, Region, Sphere

logger = getLogger(__name__)

Member = Tuple[GlobalCurve, SuperSection]
Edge = Tuple[int, int]

NODAL_TOLERANCE = 1e-8
DISTINCT_TOLERANCE = 1e-12
SMALLEST_EPSILON = 1e-6


@dataclass
class StableSupercurve:
    tree: LabelledTree
    components: Dict[int, Member]
    nodal: Dict[Edge, SpherePoint]
    marked: Dict[int, SpherePoint] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if sorted(self.components) != self.tree.vertices:
            raise InvalidInputError(
                f"components must be given for the vertices {self.tree.vertices}, "
                f"got {sorted(self.components)}",
                "components",
            )
        if sorted(self.nodal) != self.tree.oriented_edges:
            raise InvalidInputError(
                f"nodal points must be given for the oriented edges {self.tree.oriented_edges}",
                "nodal",
            )
        expected = list(range(1, self.tree.marked_count + 1))
        if sorted(self.marked) != expected:
            raise InvalidInputError(
                f"marked points must be given for {expected}, got {sorted(self.marked)}",
                "marked",
            )
        targets = {curve.target for curve, _ in self.components.values()}
        degrees = {section.bundle.degree for _, section in self.components.values()}
        if len(targets) > 1 or len(degrees) > 1:
            raise InvalidInputError("all components must share the target and the bundle degree")

    @property
    def target(self) -> TargetKind:
        return self.components[1][0].target

    @property
    def bundle_degree(self) -> int:
        return self.components[1][1].bundle.degree

    def curve(self, alpha: int) -> GlobalCurve:
        return self.components[alpha][0]

    def section(self, alpha: int) -> SuperSection:
        return self.components[alpha][1]

    def marked_vertex(self, index: int) -> int:
        return self.tree.labels[index - 1]

    def nodal_points(self, alpha: int) -> List[SpherePoint]:
        """``Z_alpha``."""
        return [self.nodal[(alpha, beta)] for beta in self.tree.neighbours(alpha)]

    def toward(self, alpha: int, beta: int) -> SpherePoint:
        """``z_{alpha beta}``, also for non-adjacent ``beta``: the nodal point toward it."""
        return self.nodal[(alpha, self.tree.toward(alpha, beta))]

    def marked_reference(self, alpha: int, index: int) -> SpherePoint:
        """``z_{alpha i}``: the marked point itself or the nodal point toward it."""
        vertex = self.marked_vertex(index)
        if vertex == alpha:
            return self.marked[index]
        return self.toward(alpha, vertex)


def special_points(x: StableSupercurve, alpha: int) -> List[Tuple[str, SpherePoint]]:
    """``Y_alpha`` with a name per point, nodal points first."""
    named = [
        (f"z_{alpha},{beta}", x.nodal[(alpha, beta)]) for beta in x.tree.neighbours(alpha)
    ]
    named.extend((f"z_{index}", x.marked[index]) for index in x.tree.marked_on(alpha))
    return named


def validate_stable(x: StableSupercurve, tolerance: float = NODAL_TOLERANCE) -> List[str]:
    """Diagnostics for nodal matching, distinct special points and stability; empty iff valid."""
    diagnostics = []
    for alpha, beta in x.tree.edges:
        first = x.curve(alpha).evaluate(x.nodal[(alpha, beta)])
        second = x.curve(beta).evaluate(x.nodal[(beta, alpha)])
        distance = float(target_distance(x.target, first, second))
        if distance > tolerance:
            diagnostics.append(
                f"nodal mismatch on edge {alpha}-{beta}: target distance {distance:.3e}"
            )
    for alpha in x.tree.vertices:
        points = special_points(x, alpha)
        for (first_name, first), (second_name, second) in itertools.combinations(points, 2):
            if first.chordal_distance(second) <= DISTINCT_TOLERANCE:
                diagnostics.append(
                    f"special points {first_name} and {second_name} coincide on sphere {alpha}"
                )
        if x.curve(alpha).is_constant():
            if len(points) < 3:
                diagnostics.append(
                    f"sphere {alpha} is constant with only {len(points)} special points"
                )
            if not x.section(alpha).is_zero():
                diagnostics.append(f"sphere {alpha} is constant with a nonzero section")
    for message in diagnostics:
        logger.debug(message)
    return diagnostics


def component_energies(
    x: StableSupercurve, rel_tol: float = DEFAULT_REL_TOL
) -> Dict[int, Tuple[float, float]]:
    return {
        alpha: (
            energy_curve(x.curve(alpha), Sphere(), EnergyMethod.FLUX, rel_tol),
            0.0 if x.section(alpha).is_zero() else energy_section(x.section(alpha), Sphere(), rel_tol),
        )
        for alpha in x.tree.vertices
    }


@dataclass
class MassTable:
    energies: Dict[int, Tuple[float, float]]
    edges: Dict[Edge, Tuple[float, float]]

    @property
    def total_phi(self) -> float:
        return math.fsum(value for value, _ in self.energies.values())

    @property
    def total_psi(self) -> float:
        return math.fsum(value for _, value in self.energies.values())


def component_masses(x: StableSupercurve, rel_tol: float = DEFAULT_REL_TOL) -> MassTable:
    """``m_{alpha beta}`` as sums of component energies over ``T_{alpha beta}``."""
    energies = component_energies(x, rel_tol)
    edges = {}
    for alpha, beta in x.tree.oriented_edges:
        side = subtree(x.tree, alpha, beta)
        edges[(alpha, beta)] = (
            math.fsum(energies[gamma][0] for gamma in side),
            math.fsum(energies[gamma][1] for gamma in side),
        )
    return MassTable(energies, edges)


def restricted_energy(
    x: StableSupercurve,
    alpha: int,
    region: Region,
    masses: Optional[MassTable] = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Tuple[float, float]:
    """``E_alpha(phi, U)`` and ``E_alpha(psi, U)``: the energy on U plus the masses of nodal points in U."""
    masses = masses or component_masses(x, rel_tol)
    curve, section = x.components[alpha]
    phi = energy_curve(curve, region, EnergyMethod.FLUX, rel_tol)
    psi = 0.0 if section.is_zero() else energy_section(section, region, rel_tol)
    for beta in x.tree.neighbours(alpha):
        if region.contains(x.nodal[(alpha, beta)]):
            phi += masses.edges[(alpha, beta)][0]
            psi += masses.edges[(alpha, beta)][1]
    return phi, psi


def restriction(x: StableSupercurve, vertices: Iterable[int]) -> StableSupercurve:
    """
    The stable supercurve on the subtree ``vertices``. Vertices are renumbered in
    increasing order; nodal points toward removed vertices become marked points
    after the original ones.
    """
    kept: FrozenSet[int] = frozenset(vertices)
    if not x.tree.is_connected(kept):
        raise TreeError(f"vertices {sorted(kept)} do not span a subtree")
    order = sorted(kept)
    renumber = {vertex: index for index, vertex in enumerate(order, start=1)}
    parents = tuple(renumber[x.tree.parents[vertex - 2]] for vertex in order[1:])
    labels: List[int] = []
    marked: Dict[int, SpherePoint] = {}
    for index in range(1, x.tree.marked_count + 1):
        if x.marked_vertex(index) in kept:
            labels.append(renumber[x.marked_vertex(index)])
            marked[len(labels)] = x.marked[index]
    for alpha, beta in x.tree.oriented_edges:
        if alpha in kept and beta not in kept:
            labels.append(renumber[alpha])
            marked[len(labels)] = x.nodal[(alpha, beta)]
    return StableSupercurve(
        LabelledTree(parents, tuple(labels)),
        {renumber[alpha]: x.components[alpha] for alpha in order},
        {
            (renumber[alpha], renumber[beta]): point
            for (alpha, beta), point in x.nodal.items()
            if alpha in kept and beta in kept
        },
        marked,
    )


def _coordinate_gap(first: SpherePoint, second: SpherePoint) -> float:
    try:
        return abs(first.z - second.to_chart(first.chart))
    except InvalidInputError:
        return math.inf


def _balls_disjoint(points: List[SpherePoint], epsilon: float) -> bool:
    return all(
        _coordinate_gap(first, second) >= 2 * epsilon
        for first, second in itertools.combinations(points, 2)
    )


def epsilon_auto(
    x: StableSupercurve,
    hbar: float = math.pi,
    start: float = 0.5,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """
    The largest ``epsilon`` on the ladder ``start * 2^-k`` for which every sphere
    has ``E(phi_alpha, B_eps(z)) < hbar / 2`` at its nodal points and the nodal
    balls of each sphere are pairwise disjoint.
    """
    epsilon = start
    while epsilon >= SMALLEST_EPSILON:
        if all(_epsilon_fits(x, alpha, epsilon, hbar, rel_tol) for alpha in x.tree.vertices):
            logger.info(f"epsilon_0 = {epsilon:.6g}")
            return epsilon
        epsilon *= 0.5
    raise InvalidInputError(
        f"no epsilon down to {SMALLEST_EPSILON} separates the nodal points with small energy"
    )


def _epsilon_fits(
    x: StableSupercurve, alpha: int, epsilon: float, hbar: float, rel_tol: float
) -> bool:
    points = x.nodal_points(alpha)
    if not _balls_disjoint(points, epsilon):
        return False
    curve = x.curve(alpha)
    energy = math.fsum(
        energy_curve(curve, Disc(point, epsilon), EnergyMethod.FLUX, rel_tol) for point in points
    )
    return energy < hbar / 2


@dataclass(frozen=True)
class ModuliClass:
    bundle_degree: int
    marked_count: int
    total_degree: int
    psi_energy: float

    def __str__(self) -> str:
        return (
            f"M_0,{self.bundle_degree},{self.marked_count}"
            f"(degree {self.total_degree}, E(psi) = {self.psi_energy:.6g})"
        )


def moduli_class(x: StableSupercurve, rel_tol: float = DEFAULT_REL_TOL) -> ModuliClass:
    """The moduli set of ``x``: bundle degree, marked points, total degree and section energy."""
    energies = component_energies(x, rel_tol)
    return ModuliClass(
        x.bundle_degree,
        x.tree.marked_count,
        sum(x.curve(alpha).degree for alpha in x.tree.vertices),
        math.fsum(psi for _, psi in energies.values()),
    )


def single_vertex(
    curve: GlobalCurve, section: SuperSection, marked: Iterable[SpherePoint] = ()
) -> StableSupercurve:
    points = list(marked)
    return StableSupercurve(
        LabelledTree((), tuple(1 for _ in points)),
        {1: (curve, section)},
        {},
        {index: point for index, point in enumerate(points, start=1)},
    )
