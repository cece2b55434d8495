"""
Equivalence of stable supercurves and the Gromov distance ``rho_eps``.

``rho_eval`` evaluates the seven suprema for a fixed tree homomorphism ``f`` and
Moebius tuple ``{m_alpha}``; ``rho_search`` minimizes over the tuples for every
admissible ``f``. Suprema over sphere regions are taken on a Fibonacci sample
refined around its top decile, so they are lower bounds of the true suprema and
the searched distance is an upper bound of the infimum.
"""

from __future__ import annotations

import copy
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from logging import getLogger
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg, optimize

from supercurves.exceptions import InvalidInputError, TreeError
from supercurves.fields import GlobalCurve, SuperSection
from supercurves.geometry import (
    MoebiusTransform,
    SpherePoint,
    TargetKind,
    fibonacci_sphere,
    fs_distance,
    homogeneous_points,
    homogeneous_unit_vectors,
    recentering,
    target_distance,
)
from supercurves.moduli.stable import (
    MassTable,
    StableSupercurve,
    component_masses,
    restricted_energy,
)
from supercurves.moduli.trees import TreeMap, tree_homomorphisms, tree_isomorphisms
from supercurves.quadrature import DEFAULT_REL_TOL, Disc

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
Gap = Callable[[ComplexArray, int], RealArray]
MoebiusTuple = Dict[int, MoebiusTransform]

SEARCH_TOL = 1e-4
DEFAULT_SAMPLES = 4000
SEARCH_SAMPLES = 400
INJECTIVITY_RADIUS = 0.5 * math.pi
PENALTY = 1e6
GRAPH_SAMPLES = 24
GRAPH_GRID = 4000


@lru_cache(maxsize=8)
def _chart_samples(count: int) -> Tuple[Tuple[int, ComplexArray], ...]:
    (south, north), _ = fibonacci_sphere(count)
    return ((0, south), (1, north))


def _in_disc(disc: Disc, chart: int, z: ComplexArray) -> npt.NDArray[np.bool_]:
    if chart == disc.chart:
        coordinates = z
        finite = np.ones(z.shape, dtype=bool)
    else:
        finite = z != 0
        coordinates = np.where(finite, 1.0 / np.where(finite, z, 1.0), 0.0)
    inside = finite & (np.abs(coordinates - disc.center.z) < disc.radius)
    return inside != disc.exterior


def _outside(discs: Sequence[Disc], chart: int, z: ComplexArray) -> npt.NDArray[np.bool_]:
    keep = np.ones(z.shape, dtype=bool)
    for disc in discs:
        keep &= ~_in_disc(disc, chart, z)
    return keep


def sup_outside(gap: Gap, excluded: Sequence[Disc], samples: int = DEFAULT_SAMPLES) -> float:
    """``sup`` of ``gap`` on the sphere minus ``excluded``, on samples refined near the top decile."""
    best = 0.0
    step = 0.5 * math.sqrt(4 * math.pi / samples)
    offsets = step * np.array([1, -1, 1j, -1j])
    for chart, z in _chart_samples(samples):
        points = z[_outside(excluded, chart, z)]
        if points.size == 0:
            continue
        values = gap(points, chart)
        if not np.all(np.isfinite(values)):
            return math.inf
        top = points[values >= np.quantile(values, 0.9)]
        jitter = (top[:, None] + offsets[None, :]).ravel()
        jitter = jitter[_outside(excluded, chart, jitter)]
        if jitter.size:
            refined = gap(jitter, chart)
            if not np.all(np.isfinite(refined)):
                return math.inf
            values = np.concatenate([values, refined])
        best = max(best, float(values.max()))
    return best


def curve_gap(curve: GlobalCurve, other: GlobalCurve) -> Gap:
    """Pointwise target distance ``d(other, curve)``."""

    def gap(z: ComplexArray, chart: int) -> RealArray:
        first, _ = curve.chart_lift(z, chart)
        second, _ = other.chart_lift(z, chart)
        return np.asarray(target_distance(curve.target, first, second))

    return gap


def _horizontal(lift: ComplexArray, tangent: ComplexArray) -> Tuple[ComplexArray, ComplexArray]:
    norm = np.linalg.norm(lift, axis=-1, keepdims=True)
    unit, vector = lift / norm, tangent / norm
    pairing = np.sum(unit.conj() * vector, axis=-1, keepdims=True)
    return unit, vector - pairing * unit


def parallel_transport(start: ComplexArray, vector: ComplexArray, end: ComplexArray) -> ComplexArray:
    """
    Transport a horizontal vector at the unit lift ``start`` along the minimal
    Fubini-Study geodesic to the unit lift ``end``.
    """
    pairing = np.sum(start.conj() * end, axis=-1)
    modulus = np.abs(pairing)
    phase = np.where(modulus > 0, pairing / np.where(modulus > 0, modulus, 1.0), 1.0)
    aligned = end * phase.conj()[..., None]
    cos = np.clip(modulus, 0.0, 1.0)[..., None]
    sin = np.sqrt(1.0 - cos**2)
    moving = sin > 1e-12
    direction = np.where(moving, (aligned - cos * start) / np.where(moving, sin, 1.0), 0.0)
    along = np.sum(direction.conj() * vector, axis=-1, keepdims=True)
    moved = vector + along * (-sin * start + (cos - 1.0) * direction)
    return moved * phase[..., None]


def section_gap(section: SuperSection, other: SuperSection) -> Gap:
    """
    Pointwise fiber distance of two sections, ``other`` moved into the fibers of
    ``section`` by parallel transport; infinite beyond the injectivity radius.
    """

    def gap(z: ComplexArray, chart: int) -> RealArray:
        weight = section.bundle.weight(z)
        first, _ = section.chart_tangent(z, chart)
        second, _ = other.chart_tangent(z, chart)
        if section.curve.target is TargetKind.FLAT:
            difference = first - second
        else:
            lift, _ = section.curve.chart_lift(z, chart)
            other_lift, _ = other.curve.chart_lift(z, chart)
            if np.any(fs_distance(lift, other_lift) >= INJECTIVITY_RADIUS):
                return np.full(np.shape(z), np.inf)
            unit, horizontal = _horizontal(lift, first)
            other_unit, other_horizontal = _horizontal(other_lift, second)
            difference = horizontal - parallel_transport(other_unit, other_horizontal, unit)
        return np.sqrt(0.5 * weight * np.sum(np.abs(difference) ** 2, axis=-1))

    return gap


def point_gap(moebius: MoebiusTransform, point: SpherePoint) -> Gap:
    """Chordal distance of ``moebius(z)`` from a fixed point."""
    reference = point.unit_vector()

    def gap(z: ComplexArray, chart: int) -> RealArray:
        images = moebius.apply_homogeneous(homogeneous_points(z, chart))
        return np.linalg.norm(homogeneous_unit_vectors(images) - reference, axis=-1)

    return gap


@dataclass
class RhoBreakdown:
    energy_phi: float
    energy_psi: float
    map_phi: float
    map_psi: float
    rescaling: float
    nodal: float
    marked: float
    tree_map: TreeMap
    moebius: MoebiusTuple
    epsilon: float

    @property
    def terms(self) -> List[float]:
        return [
            self.energy_phi,
            self.energy_psi,
            self.map_phi,
            self.map_psi,
            self.rescaling,
            self.nodal,
            self.marked,
        ]

    @property
    def total(self) -> float:
        return math.fsum(self.terms)


@dataclass
class DistanceContext:
    """Inputs shared by every evaluation of ``rho_eps(x, x')``."""

    x: StableSupercurve
    other: StableSupercurve
    epsilon: float
    samples: int = DEFAULT_SAMPLES
    rel_tol: float = DEFAULT_REL_TOL
    masses: MassTable = field(init=False)
    other_masses: MassTable = field(init=False)
    own_energies: Dict[Tuple[int, int], Tuple[float, float]] = field(init=False)

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")
        self.masses = component_masses(self.x, self.rel_tol)
        self.other_masses = component_masses(self.other, self.rel_tol)
        self.own_energies = {
            edge: restricted_energy(
                self.x, edge[0], self.ball(*edge), self.masses, self.rel_tol
            )
            for edge in self.x.tree.oriented_edges
        }

    def ball(self, alpha: int, beta: int) -> Disc:
        """``B_eps(z_{alpha beta})``, using the nodal point toward ``beta``."""
        return Disc(self.x.toward(alpha, beta), self.epsilon)

    def nodal_balls(self, alpha: int) -> List[Disc]:
        return [Disc(point, self.epsilon) for point in self.x.nodal_points(alpha)]

    def with_samples(self, samples: int) -> DistanceContext:
        clone = copy.copy(self)
        clone.samples = samples
        return clone


def check_tree_map(x: StableSupercurve, other: StableSupercurve, tree_map: Sequence[int]) -> TreeMap:
    candidate = tuple(int(value) for value in tree_map)
    if candidate not in tree_homomorphisms(x.tree, other.tree):
        raise TreeError(
            f"{list(candidate)} is not a surjective label-preserving tree homomorphism"
        )
    return candidate


def energy_terms(
    context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple
) -> Tuple[float, float]:
    """Largest restricted-energy deviations over the oriented edges, for phi and psi."""
    phi_gap = psi_gap = 0.0
    identity = MoebiusTransform.identity()
    for (alpha, beta), (phi, psi) in context.own_energies.items():
        ball = context.ball(alpha, beta)
        image = ball if moebius[alpha].acts_like(identity) else ball.transformed(moebius[alpha])
        other_phi, other_psi = restricted_energy(
            context.other, tree_map[alpha - 1], image, context.other_masses, context.rel_tol
        )
        phi_gap = max(phi_gap, abs(phi - other_phi))
        psi_gap = max(psi_gap, abs(psi - other_psi))
    return phi_gap, psi_gap


def map_terms(
    context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple
) -> Tuple[float, float]:
    """``sup d(phi'_{f(alpha)} o m_alpha, phi_alpha)`` and its section analogue off ``B_eps(Z_alpha)``."""
    phi_gap = psi_gap = 0.0
    for alpha in context.x.tree.vertices:
        curve, section = context.x.components[alpha]
        other_curve, other_section = context.other.components[tree_map[alpha - 1]]
        excluded = context.nodal_balls(alpha)
        phi_gap = max(
            phi_gap,
            sup_outside(curve_gap(curve, other_curve.pullback(moebius[alpha])), excluded, context.samples),
        )
        psi_gap = max(
            psi_gap,
            sup_outside(
                section_gap(section, other_section.pullback(moebius[alpha])), excluded, context.samples
            ),
        )
    return phi_gap, psi_gap


def rescaling_term(
    context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple, adjacent_only: bool = False
) -> float:
    """``sup d(m_beta^-1 o m_alpha, z_{beta alpha})`` off ``B_eps(z_{alpha beta})`` over collapsed pairs."""
    worst = 0.0
    tree = context.x.tree
    for alpha in tree.vertices:
        for beta in tree.vertices:
            if alpha == beta or tree_map[alpha - 1] != tree_map[beta - 1]:
                continue
            if adjacent_only and not tree.adjacent(alpha, beta):
                continue
            composite = moebius[beta].inverse().compose(moebius[alpha])
            gap = point_gap(composite, context.x.toward(beta, alpha))
            worst = max(worst, sup_outside(gap, [context.ball(alpha, beta)], context.samples))
    return worst


def nodal_term(
    context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple, adjacent_only: bool = False
) -> float:
    """``sup d(m_beta^-1(z'_{f(beta) f(alpha)}), z_{beta alpha})`` over pairs with ``f(alpha) != f(beta)``."""
    worst = 0.0
    tree = context.x.tree
    for alpha in tree.vertices:
        for beta in tree.vertices:
            image_alpha, image_beta = tree_map[alpha - 1], tree_map[beta - 1]
            if image_alpha == image_beta:
                continue
            if adjacent_only and not tree.adjacent(alpha, beta):
                continue
            moved = moebius[beta].inverse().apply(context.other.toward(image_beta, image_alpha))
            worst = max(worst, moved.chordal_distance(context.x.toward(beta, alpha)))
    return worst


def marked_term(
    context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple, own_vertex_only: bool = False
) -> float:
    """``sup d(m_alpha^-1(z'_{f(alpha) i}), z_{alpha i})``."""
    worst = 0.0
    for index in range(1, context.x.tree.marked_count + 1):
        vertices = (
            [context.x.marked_vertex(index)] if own_vertex_only else context.x.tree.vertices
        )
        for alpha in vertices:
            target = context.other.marked_reference(tree_map[alpha - 1], index)
            moved = moebius[alpha].inverse().apply(target)
            worst = max(worst, moved.chordal_distance(context.x.marked_reference(alpha, index)))
    return worst


def evaluate_terms(context: DistanceContext, tree_map: TreeMap, moebius: MoebiusTuple) -> RhoBreakdown:
    energy_phi, energy_psi = energy_terms(context, tree_map, moebius)
    map_phi, map_psi = map_terms(context, tree_map, moebius)
    return RhoBreakdown(
        energy_phi,
        energy_psi,
        map_phi,
        map_psi,
        rescaling_term(context, tree_map, moebius),
        nodal_term(context, tree_map, moebius),
        marked_term(context, tree_map, moebius),
        tree_map,
        dict(moebius),
        context.epsilon,
    )


def rho_eval(
    x: StableSupercurve,
    other: StableSupercurve,
    tree_map: Sequence[int],
    moebius: MoebiusTuple,
    epsilon: float,
    samples: int = DEFAULT_SAMPLES,
    rel_tol: float = DEFAULT_REL_TOL,
) -> RhoBreakdown:
    """``rho_eps(x, x'; f, {m_alpha})`` term by term."""
    checked = check_tree_map(x, other, tree_map)
    if sorted(moebius) != x.tree.vertices:
        raise InvalidInputError("one Moebius transform per vertex of x is required")
    context = DistanceContext(x, other, epsilon, samples, rel_tol)
    return evaluate_terms(context, checked, moebius)


def _correspondences(
    x: StableSupercurve, other: StableSupercurve, tree_map: TreeMap, alpha: int
) -> List[Tuple[SpherePoint, SpherePoint]]:
    image = tree_map[alpha - 1]
    pairs = [
        (x.nodal[(alpha, beta)], other.nodal[(image, tree_map[beta - 1])])
        for beta in x.tree.neighbours(alpha)
        if tree_map[beta - 1] != image
    ]
    pairs.extend(
        (x.marked[index], other.marked[index])
        for index in x.tree.marked_on(alpha)
        if other.marked_vertex(index) == image
    )
    distinct: List[Tuple[SpherePoint, SpherePoint]] = []
    for source, target in pairs:
        if all(source.chordal_distance(kept) > 1e-9 for kept, _ in distinct):
            distinct.append((source, target))
    return distinct


def point_seed(
    x: StableSupercurve, other: StableSupercurve, tree_map: TreeMap, alpha: int
) -> Optional[MoebiusTransform]:
    """The Moebius map fixed by three special-point correspondences, if there are three."""
    pairs = _correspondences(x, other, tree_map, alpha)
    if len(pairs) < 3:
        return None
    sources, targets = zip(*pairs[:3])
    try:
        return MoebiusTransform.three_point(sources, targets)
    except InvalidInputError:
        return None


def _preimage(curve: GlobalCurve, value: ComplexArray, grid: ComplexArray, images: ComplexArray) -> ComplexArray:
    start = grid[int(np.argmin(fs_distance(images, value)))]
    chart = 0 if abs(start[0]) <= abs(start[1]) else 1
    z0 = start[0] / start[1] if chart == 0 else start[1] / start[0]

    def objective(parameters: RealArray) -> float:
        point = homogeneous_points(np.array([complex(*parameters)]), chart)
        return float(fs_distance(curve.lift_homogeneous(point), value)[0])

    result = optimize.minimize(
        objective, np.array([z0.real, z0.imag]), method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 2000},
    )
    return homogeneous_points(np.array([complex(*result.x)]), chart)[0]


def graph_seed(curve: GlobalCurve, other: GlobalCurve) -> Optional[MoebiusTransform]:
    """
    Least-squares Moebius map ``m`` with ``other o m = curve`` on sample points,
    from nearest preimages of the sampled values.
    """
    if curve.is_constant() or other.is_constant() or curve.target != other.target:
        return None
    (south, north), _ = fibonacci_sphere(GRAPH_SAMPLES)
    sources = np.concatenate([homogeneous_points(south, 0), homogeneous_points(north, 1)])
    (grid_south, grid_north), _ = fibonacci_sphere(GRAPH_GRID)
    grid = np.concatenate([homogeneous_points(grid_south, 0), homogeneous_points(grid_north, 1)])
    images = other.lift_homogeneous(grid)
    values = curve.lift_homogeneous(sources)
    targets = np.array([_preimage(other, value, grid, images) for value in values])
    rows = np.stack(
        [
            -targets[:, 1] * sources[:, 0],
            -targets[:, 1] * sources[:, 1],
            targets[:, 0] * sources[:, 0],
            targets[:, 0] * sources[:, 1],
        ],
        axis=1,
    )
    _, _, vh = np.linalg.svd(rows)
    try:
        return MoebiusTransform.from_matrix(vh[-1].conj().reshape(2, 2))
    except InvalidInputError:
        return None


def _mean_square_gap(curve: GlobalCurve, other: GlobalCurve, points: ComplexArray) -> float:
    return float(np.mean(fs_distance(curve.lift_homogeneous(points), other.lift_homogeneous(points)) ** 2))


def collapsed_seed(
    parent: MoebiusTransform,
    parent_node: SpherePoint,
    child_node: SpherePoint,
    child_curve: GlobalCurve,
    other: GlobalCurve,
) -> MoebiusTransform:
    """
    ``m_beta = m_alpha o (0 -> z_{alpha beta}) o (w -> delta w) o (z_{beta alpha} -> infinity)``
    with ``delta`` chosen so that ``other o m_beta`` matches the child curve.
    """
    to_infinity = MoebiusTransform.chart_swap().compose(recentering(child_node))
    outer = parent.compose(recentering(parent_node).inverse())

    def candidate(parameters: Sequence[float]) -> MoebiusTransform:
        factor = 10.0 ** parameters[0] * complex(math.cos(parameters[1]), math.sin(parameters[1]))
        return outer.compose(MoebiusTransform.scaling(factor)).compose(to_infinity)

    if child_curve.is_constant() or child_curve.target is TargetKind.FLAT:
        return candidate((-3.0, 0.0))
    (south, north), vectors = fibonacci_sphere(200)
    points = np.concatenate([homogeneous_points(south, 0), homogeneous_points(north, 1)])
    points = points[np.linalg.norm(vectors - child_node.unit_vector(), axis=-1) > 0.5]

    def objective(parameters: RealArray) -> float:
        return _mean_square_gap(child_curve, other.pullback(candidate(parameters)), points)

    starts = [np.array([exponent, angle]) for exponent in range(-12, 1) for angle in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)]
    start = min(starts, key=objective)
    result = optimize.minimize(objective, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-20})
    return candidate(result.x)


def seed_tuples(x: StableSupercurve, other: StableSupercurve, tree_map: TreeMap) -> List[MoebiusTuple]:
    """Starting tuples: point and graph correspondences, extended across collapsed edges."""
    seeds: MoebiusTuple = {}
    anchored: Dict[int, bool] = {}
    for alpha in x.tree.vertices:
        candidate = point_seed(x, other, tree_map, alpha)
        anchored[alpha] = candidate is not None
        if candidate is None:
            candidate = graph_seed(x.curve(alpha), other.curve(tree_map[alpha - 1]))
        seeds[alpha] = candidate if candidate is not None else MoebiusTransform.identity()
    for parent, child in x.tree.edges:
        if tree_map[parent - 1] == tree_map[child - 1] and not anchored[child]:
            seeds[child] = collapsed_seed(
                seeds[parent],
                x.nodal[(parent, child)],
                x.nodal[(child, parent)],
                x.curve(child),
                other.curve(tree_map[child - 1]),
            )
    identity = {alpha: MoebiusTransform.identity() for alpha in x.tree.vertices}
    return [seeds, identity]


def _algebra_element(parameters: Sequence[float]) -> MoebiusTransform:
    a, b, c = (complex(parameters[i], parameters[i + 1]) for i in range(0, 6, 2))
    return MoebiusTransform.from_matrix(linalg.expm(np.array([[a, b], [c, -a]])))


def _perturbed(seeds: MoebiusTuple, parameters: RealArray) -> MoebiusTuple:
    return {
        alpha: seed.compose(_algebra_element(parameters[6 * index : 6 * index + 6]))
        for index, (alpha, seed) in enumerate(sorted(seeds.items()))
    }


def _search_branch(
    context: DistanceContext, tree_map: TreeMap, search_tol: float, search_samples: int
) -> RhoBreakdown:
    coarse = context.with_samples(search_samples)

    def total(moebius: MoebiusTuple) -> float:
        try:
            value = evaluate_terms(coarse, tree_map, moebius).total
        except InvalidInputError:
            return PENALTY
        return value if math.isfinite(value) else PENALTY

    seeds = min(seed_tuples(context.x, context.other, tree_map), key=total)
    best = seeds
    if total(seeds) > 0.1 * search_tol:
        dimension = 6 * context.x.tree.size
        result = optimize.minimize(
            lambda parameters: total(_perturbed(seeds, parameters)),
            np.zeros(dimension),
            method="Nelder-Mead",
            options={
                "xatol": 1e-2 * search_tol,
                "fatol": 1e-2 * search_tol,
                "maxiter": 200 * dimension,
                "adaptive": True,
            },
        )
        logger.debug(f"f = {tree_map}: search stopped after {result.nfev} evaluations at {result.fun:.3e}")
        best = _perturbed(seeds, result.x)
    return evaluate_terms(context, tree_map, best)


def rho_search(
    x: StableSupercurve,
    other: StableSupercurve,
    epsilon: float,
    search_tol: float = SEARCH_TOL,
    samples: int = DEFAULT_SAMPLES,
    search_samples: int = SEARCH_SAMPLES,
    threads: int = 1,
    rel_tol: float = DEFAULT_REL_TOL,
) -> Optional[RhoBreakdown]:
    """The smallest breakdown found over all admissible ``f``; ``None`` when there is none."""
    tree_maps = tree_homomorphisms(x.tree, other.tree)
    if not tree_maps:
        logger.info("no surjective label-preserving tree homomorphism exists")
        return None
    context = DistanceContext(x, other, epsilon, samples, rel_tol)

    def branch(tree_map: TreeMap) -> RhoBreakdown:
        return _search_branch(context, tree_map, search_tol, search_samples)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(branch, tree_maps))
    else:
        results = [branch(tree_map) for tree_map in tree_maps]
    return min(results, key=lambda breakdown: (breakdown.total, breakdown.tree_map))


def rho_distance(
    x: StableSupercurve,
    other: StableSupercurve,
    epsilon: float,
    search_tol: float = SEARCH_TOL,
    samples: int = DEFAULT_SAMPLES,
    threads: int = 1,
) -> float:
    """``rho_eps(x, x')``, infinite when no admissible tree homomorphism exists."""
    breakdown = rho_search(x, other, epsilon, search_tol, samples, threads=threads)
    return math.inf if breakdown is None else breakdown.total


@dataclass
class EquivalenceWitness:
    tree_map: TreeMap
    moebius: MoebiusTuple


def _fit_component(
    curve: GlobalCurve, other: GlobalCurve, seed: MoebiusTransform
) -> MoebiusTransform:
    (south, north), _ = fibonacci_sphere(200)
    points = np.concatenate([homogeneous_points(south, 0), homogeneous_points(north, 1)])

    def objective(parameters: RealArray) -> float:
        return _mean_square_gap(curve, other.pullback(seed.compose(_algebra_element(parameters))), points)

    if objective(np.zeros(6)) <= 1e-24:
        return seed
    result = optimize.minimize(
        objective, np.zeros(6), method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-26, "maxiter": 6000, "adaptive": True},
    )
    return seed.compose(_algebra_element(result.x))


def equivalent(
    x: StableSupercurve, other: StableSupercurve, tolerance: float = 1e-6, samples: int = DEFAULT_SAMPLES
) -> Optional[EquivalenceWitness]:
    """
    A tree isomorphism ``f`` and Moebius maps with ``phi'_{f(alpha)} o m_alpha = phi_alpha``,
    the sections and special points matching within ``tolerance``.
    """
    for tree_map in tree_isomorphisms(x.tree, other.tree):
        moebius: MoebiusTuple = {}
        for alpha in x.tree.vertices:
            image = tree_map[alpha - 1]
            seed = point_seed(x, other, tree_map, alpha)
            if seed is None:
                seed = graph_seed(x.curve(alpha), other.curve(image)) or MoebiusTransform.identity()
                seed = _fit_component(x.curve(alpha), other.curve(image), seed)
            moebius[alpha] = seed
        if _matches(x, other, tree_map, moebius, tolerance, samples):
            logger.info(f"equivalent through f = {list(tree_map)}")
            return EquivalenceWitness(tree_map, moebius)
    return None


def _matches(
    x: StableSupercurve,
    other: StableSupercurve,
    tree_map: TreeMap,
    moebius: MoebiusTuple,
    tolerance: float,
    samples: int,
) -> bool:
    for alpha in x.tree.vertices:
        image = tree_map[alpha - 1]
        curve, section = x.components[alpha]
        other_curve, other_section = other.components[image]
        if sup_outside(curve_gap(curve, other_curve.pullback(moebius[alpha])), [], samples) > tolerance:
            return False
        if sup_outside(section_gap(section, other_section.pullback(moebius[alpha])), [], samples) > tolerance:
            return False
        for beta in x.tree.neighbours(alpha):
            moved = moebius[alpha].apply(x.nodal[(alpha, beta)])
            if moved.chordal_distance(other.nodal[(image, tree_map[beta - 1])]) > tolerance:
                return False
    for index in range(1, x.tree.marked_count + 1):
        moved = moebius[x.marked_vertex(index)].apply(x.marked[index])
        if moved.chordal_distance(other.marked[index]) > tolerance:
            return False
    return True


def apply_equivalence(x: StableSupercurve, moebius: MoebiusTuple) -> StableSupercurve:
    """The stable supercurve ``x'`` with ``phi'_alpha = phi_alpha o m_alpha^-1`` and moved special points."""
    components = {
        alpha: (curve.pullback(moebius[alpha].inverse()), section.pullback(moebius[alpha].inverse()))
        for alpha, (curve, section) in x.components.items()
    }
    nodal = {(alpha, beta): moebius[alpha].apply(point) for (alpha, beta), point in x.nodal.items()}
    marked = {
        index: moebius[x.marked_vertex(index)].apply(point) for index, point in x.marked.items()
    }
    return StableSupercurve(x.tree, components, nodal, marked)
