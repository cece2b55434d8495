"""
Energy concentration, rescaling and bubble limits of degenerating families.

The pipeline run by ``analyze_family``:

1. ``detect_concentration``: finds the points where a definite amount of energy
   concentrates at the largest ladder index.
2. ``select_rescaling``: recenters each point and normalizes the derivative.
3. ``rescaled_limit``: fits the bubble of minimal degree.
4. ``conservation_check``: compares the bubble energies with the masses. Secondary
   concentration on the bubble is handled by recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from logging import getLogger
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import optimize, stats

from supercurves.energy import (
    EnergyMethod,
    MassProfile,
    energy_curve,
    energy_section,
    geometric_ladder,
    mass_profile,
)
from supercurves.exceptions import InvalidInputError, NoBubbleError
from supercurves.families import Family
from supercurves.fields import GlobalCurve, SuperSection, affine_data
from supercurves.geometry import (
    MoebiusTransform,
    SpherePoint,
    TargetKind,
    fibonacci_sphere,
    fs_distance,
    fs_metric,
    homogeneous_points,
    recentering,
    target_distance,
)
from supercurves.quadrature import Annulus, Disc, Sphere

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

LATTICE_RESOLUTION = 11
BALL_FRACTION = 0.75
DEDUPLICATION_DISTANCE = 0.1
SMALLEST_REFINEMENT = 1e-5
MIN_BLOWUP_SLOPE = 0.25
FIT_TOLERANCE = 1e-3
MAX_FIT_DEGREE = 6
MAX_DEPTH = 3
SECONDARY_RADIUS = 4.0


def _ball_energy(curve: GlobalCurve, point: SpherePoint, radius: float) -> float:
    return energy_curve(curve, Disc(point, radius), EnergyMethod.FLUX)


def _refine(curve: GlobalCurve, point: SpherePoint, radius: float) -> SpherePoint:
    """Weighted centroid of ball energies on a shrinking stencil."""
    center = point.z
    offsets = np.linspace(-0.6, 0.6, 5)
    stencil = (offsets[:, None] + 1j * offsets[None, :]).ravel()
    scale = radius
    while scale > SMALLEST_REFINEMENT * max(radius, 1.0):
        candidates = center + scale * stencil
        energies = np.array(
            [_ball_energy(curve, SpherePoint(point.chart, z), scale) for z in candidates]
        )
        weights = np.clip(energies - 0.5 * energies.max(), 0.0, None)
        if weights.sum() <= 0:
            break
        center = complex(np.sum(weights * candidates) / weights.sum())
        scale *= 0.5
    return SpherePoint(point.chart, center)


def detect_concentration(
    family: Family,
    hbar: float = math.pi,
    resolution: int = LATTICE_RESOLUTION,
    charts: Sequence[int] = (0, 1),
    radius: float = 1.0,
) -> List[SpherePoint]:
    """
    Points where ``E(phi^nu, B_eps(z))`` of the last ladder member has a local
    maximum above ``hbar / 2`` on a lattice of both chart discs, refined by
    shrinking weighted centroids.
    """
    curve, _ = family.last()
    if curve.is_constant() or curve.target is TargetKind.FLAT:
        return []
    axis = np.linspace(-radius, radius, resolution)
    spacing = axis[1] - axis[0]
    ball = BALL_FRACTION * spacing
    found: List[Tuple[float, SpherePoint]] = []
    for chart in charts:
        lattice = (axis[:, None] + 1j * axis[None, :]).ravel()
        lattice = lattice[np.abs(lattice) <= radius + 1e-12]
        energies = np.array(
            [_ball_energy(curve, SpherePoint(chart, z), ball) for z in lattice]
        )
        for index, z in enumerate(lattice):
            if energies[index] <= hbar / 2:
                continue
            neighbours = np.abs(lattice - z) <= 1.5 * spacing
            if energies[index] < energies[neighbours].max():
                continue
            refined = _refine(curve, SpherePoint(chart, z), ball)
            found.append((_ball_energy(curve, refined, ball), refined.canonical()))
    points: List[Tuple[float, SpherePoint]] = []
    for mass, point in sorted(found, key=lambda item: -item[0]):
        if all(point.chordal_distance(kept) > DEDUPLICATION_DISTANCE for _, kept in points):
            points.append((mass, point))
    logger.info(
        f"{family.name}: concentration at {', '.join(str(point) for _, point in points) or 'no points'}"
    )
    return [point for _, point in points]


def derivative_sup(curve: GlobalCurve, radius: float) -> float:
    """``sup_{B_radius(0)} |d phi|`` with the flat source metric, in chart 0."""
    if curve.is_constant():
        return 0.0

    def norm(z: ComplexArray) -> RealArray:
        return np.sqrt(2.0 * curve.energy_density(z, 0))

    radii = radius * np.geomspace(1e-9, 1.0, 80)
    angles = 2 * math.pi * np.arange(24) / 24
    grid = np.concatenate([[0j], (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()])
    values = norm(grid)
    best = int(np.argmax(values))
    start = grid[best]

    def objective(x: RealArray) -> float:
        z = complex(x[0], x[1])
        if abs(z) > radius:
            return 0.0
        return -float(norm(np.array([z]))[0])

    step = max(0.5 * abs(start), 1e-12 * radius)
    simplex = np.array(
        [[start.real, start.imag], [start.real + step, start.imag], [start.real, start.imag + step]]
    )
    result = optimize.minimize(
        objective,
        np.array([start.real, start.imag]),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-3 * step, "fatol": 1e-12},
    )
    return max(float(values[best]), -float(result.fun))


@dataclass
class RescalingSequence:
    center: SpherePoint
    recenter: MoebiusTransform
    nus: List[float]
    sups: List[float]
    deltas: List[float]
    moebius: List[MoebiusTransform]
    blowup_slope: float

    @property
    def delta_slope(self) -> float:
        return -self.blowup_slope

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.nus, self.deltas))


def _rescaling_from_deltas(
    center: SpherePoint, nus: Sequence[float], deltas: Sequence[float], sups: Sequence[float], slope: float
) -> RescalingSequence:
    recenter = recentering(center)
    back = recenter.inverse()
    return RescalingSequence(
        center,
        recenter,
        list(nus),
        list(sups),
        list(deltas),
        [back.compose(MoebiusTransform.scaling(delta)) for delta in deltas],
        slope,
    )


def select_rescaling(family: Family, center: SpherePoint, radius: float = 0.5) -> RescalingSequence:
    """
    ``delta^nu = 1 / sup_{B_radius} |d phi^nu|`` after recentering ``center`` to 0,
    and ``m^nu = recenter^-1 o (z -> delta^nu z)``.
    """
    back = recentering(center).inverse()
    sups = [derivative_sup(family.member(nu)[0].pullback(back), radius) for nu in family.nus]
    if min(sups) <= 0:
        raise NoBubbleError(f"{family.name}: the derivative vanishes near {center}; detect again")
    slope = float(stats.linregress(np.log(family.nus), np.log(sups)).slope)
    if slope < MIN_BLOWUP_SLOPE:
        raise NoBubbleError(
            f"{family.name}: sup |d phi| grows like nu^{slope:.3f} at {center}; no bubble forms, "
            "detect the concentration points again"
        )
    deltas = [1.0 / value for value in sups]
    logger.info(f"{family.name}: rescaling at {center} with blow-up slope {slope:.4f}")
    return _rescaling_from_deltas(center, family.nus, deltas, sups, slope)


def power_rescaling(family: Family, center: SpherePoint, exponent: float) -> RescalingSequence:
    """The rescaling ``delta^nu = nu^-exponent``, for probing mis-selected rescalings."""
    deltas = [nu ** (-exponent) for nu in family.nus]
    return _rescaling_from_deltas(center, family.nus, deltas, [1 / delta for delta in deltas], exponent)


@dataclass
class CurveFit:
    curve: GlobalCurve
    degree: int
    residual: float
    converged: bool


def fit_curve(
    points: ComplexArray,
    values: ComplexArray,
    max_degree: int = MAX_FIT_DEGREE,
    tolerance: float = FIT_TOLERANCE,
) -> CurveFit:
    """
    Rational map of minimal degree through homogeneous samples.

    For each degree the coefficients minimize the stacked cross products
    ``Q_i W_l - Q_l W_i`` (smallest singular vector); the first degree whose sup
    Fubini-Study residual is below ``tolerance`` is accepted.
    """
    samples = points / np.linalg.norm(points, axis=-1, keepdims=True)
    targets = values / np.linalg.norm(values, axis=-1, keepdims=True)
    rows = targets.shape[-1]
    best: Optional[CurveFit] = None
    for degree in range(max_degree + 1):
        powers = np.arange(degree + 1)
        monomials = samples[:, 0, None] ** powers * samples[:, 1, None] ** (degree - powers)
        blocks = []
        for first in range(rows):
            for second in range(first + 1, rows):
                block = np.zeros((len(samples), rows * (degree + 1)), dtype=np.complex128)
                block[:, second * (degree + 1) : (second + 1) * (degree + 1)] = (
                    targets[:, first, None] * monomials
                )
                block[:, first * (degree + 1) : (first + 1) * (degree + 1)] = (
                    -targets[:, second, None] * monomials
                )
                blocks.append(block)
        _, _, vh = np.linalg.svd(np.concatenate(blocks), full_matrices=False)
        coefficients = vh[-1].conj().reshape(rows, degree + 1)
        coefficients = coefficients / coefficients.ravel()[np.argmax(np.abs(coefficients))]
        fitted = monomials @ coefficients.T
        residual = float(fs_distance(fitted, targets).max())
        try:
            curve = GlobalCurve.projective(coefficients)
        except InvalidInputError:
            continue
        candidate = CurveFit(curve, degree, residual, residual <= tolerance)
        if candidate.converged:
            logger.info(f"fitted degree {degree} with residual {residual:.3e}")
            return candidate
        if best is None or residual < best.residual:
            best = candidate
    if best is None:
        raise InvalidInputError("no rational map could be fitted to the samples")
    logger.warning(f"bubble fit did not converge; best residual {best.residual:.3e}")
    return best


def _affine_tangents(
    lift: ComplexArray, tangent: ComplexArray, charts: npt.NDArray[np.int64]
) -> Tuple[ComplexArray, ComplexArray]:
    """Affine points and tangent vectors, each row in its own target chart."""
    rows = lift.shape[-1]
    points = np.zeros(lift.shape[:-1] + (rows - 1,), dtype=np.complex128)
    vectors = np.zeros_like(points)
    zeros = np.zeros_like(lift)
    for chart in range(rows):
        mask = charts == chart
        if not np.any(mask):
            continue
        u, _, xi, _ = affine_data(lift[mask], zeros[mask], tangent[mask], zeros[mask], chart)
        points[mask], vectors[mask] = u, xi
    return points, vectors


def _section_basis(curve: GlobalCurve, degree: int) -> List[Tuple[ComplexArray, complex]]:
    formal = curve.degree + degree
    basis: List[Tuple[ComplexArray, complex]] = []
    for row in range(curve.rows):
        for power in range(max(formal + 1, 0)):
            coefficients = np.zeros((curve.rows, formal + 1), dtype=np.complex128)
            coefficients[row, power] = 1.0
            basis.append((coefficients, 0j))
    if degree == -2 and not curve.is_constant():
        basis.append((np.zeros((curve.rows, max(formal + 1, 0)), dtype=np.complex128), 1.0 + 0j))
    return basis


@dataclass
class SectionFit:
    section: SuperSection
    residual: float


def fit_section(curve: GlobalCurve, target: SuperSection, samples: ComplexArray) -> SectionFit:
    """
    Least-squares section over ``curve`` matching the affine tangent vectors of
    ``target`` at chart-0 samples; the residual is the sup fiber norm of the misfit.
    """
    bundle = target.bundle
    if target.is_zero():
        return SectionFit(SuperSection.zero(curve, bundle.degree), 0.0)
    lift, _ = curve.chart_lift(samples, 0)
    charts = np.argmax(np.abs(lift), axis=-1)
    target_lift, _ = target.curve.chart_lift(samples, 0)
    target_tangent, _ = target.chart_tangent(samples, 0)
    _, wanted = _affine_tangents(target_lift, target_tangent, charts)
    basis = _section_basis(curve, bundle.degree)
    if not basis:
        return SectionFit(SuperSection.zero(curve, bundle.degree), float("inf"))
    columns = []
    for coefficients, derivative in basis:
        candidate = SuperSection(curve, bundle, coefficients, derivative)
        tangent, _ = candidate.chart_tangent(samples, 0)
        columns.append(_affine_tangents(lift, tangent, charts)[1].ravel())
    solution, *_ = np.linalg.lstsq(np.stack(columns, axis=1), wanted.ravel(), rcond=None)
    weights = solution[: len(basis) - (1 if basis[-1][1] else 0)]
    formal = curve.degree + bundle.degree
    coefficients = (
        weights.reshape(curve.rows, formal + 1)
        if formal >= 0
        else np.zeros((curve.rows, 0), dtype=np.complex128)
    )
    derivative = complex(solution[-1]) if basis[-1][1] else 0j
    fitted = SuperSection(curve, bundle, coefficients, derivative)
    tangent, _ = fitted.chart_tangent(samples, 0)
    u, obtained = _affine_tangents(lift, tangent, charts)
    difference = obtained - wanted
    metric = fs_metric(u)
    norms = 0.5 * bundle.weight(samples) * np.real(
        np.einsum("...i,...ij,...j->...", difference.conj(), metric, difference)
    )
    return SectionFit(fitted, float(np.sqrt(np.clip(norms, 0.0, None)).max()))


def annulus_samples(inner: float = 0.5, outer: float = 2.0, radii: int = 6, angles: int = 24) -> ComplexArray:
    rings = np.geomspace(inner, outer, radii)
    phases = np.exp(2j * math.pi * (np.arange(angles) + 0.5) / angles)
    return (rings[:, None] * phases[None, :]).ravel()


@dataclass
class BubbleFit:
    curve: GlobalCurve
    section: SuperSection
    degree: int
    curve_residual: float
    section_residual: float
    converged: bool
    nu: float


def rescaled_limit(
    family: Family,
    rescaling: RescalingSequence,
    tolerance: float = FIT_TOLERANCE,
    max_degree: int = MAX_FIT_DEGREE,
) -> BubbleFit:
    """Fit ``(phi^nu o m^nu, pulled-back psi^nu)`` at the largest nu on ``0.5 <= |w| <= 2``."""
    nu = family.nus[-1]
    curve, section = family.member(nu)
    moebius = rescaling.moebius[-1]
    rescaled_curve, rescaled_section = curve.pullback(moebius), section.pullback(moebius)
    samples = annulus_samples()
    points = homogeneous_points(samples, 0)
    fit = fit_curve(points, rescaled_curve.lift_homogeneous(points), max_degree, tolerance)
    section_fit = fit_section(fit.curve, rescaled_section, samples)
    return BubbleFit(
        fit.curve,
        section_fit.section,
        fit.degree,
        fit.residual,
        section_fit.residual,
        fit.converged,
        nu,
    )


def principal_limit(
    family: Family,
    excluded: Sequence[SpherePoint],
    distance: float = 0.5,
    samples: int = 400,
    tolerance: float = FIT_TOLERANCE,
) -> CurveFit:
    """Fit the last member on sample points at chordal distance ``distance`` from ``excluded``."""
    curve, _ = family.last()
    (south, north), vectors = fibonacci_sphere(samples)
    points = np.concatenate([homogeneous_points(south, 0), homogeneous_points(north, 1)])
    keep = np.ones(len(points), dtype=bool)
    for point in excluded:
        keep &= np.linalg.norm(vectors - point.unit_vector(), axis=-1) > distance
    if keep.sum() < 10:
        raise InvalidInputError("too few sample points remain away from the concentration points")
    points = points[keep]
    return fit_curve(points, curve.lift_homogeneous(points), tolerance=tolerance)


def connect_check(
    limit: GlobalCurve,
    bubble: GlobalCurve,
    center: SpherePoint,
    infinity: SpherePoint = SpherePoint.infinity(),
) -> float:
    """``d(limit(center), bubble(infinity))`` in the target."""
    if limit.target != bubble.target:
        raise InvalidInputError("limit and bubble map into different targets")
    return float(target_distance(limit.target, limit.evaluate(center), bubble.evaluate(infinity)))


@dataclass
class Conservation:
    residual_iii: float
    residual_v: Optional[float]
    v_skipped: bool
    bubble_energy_phi: float
    bubble_energy_psi: float
    secondary_phi: float
    secondary_psi: float
    mass_phi: float
    mass_psi: float


@dataclass
class PointAnalysis:
    center: SpherePoint
    profile: MassProfile
    rescaling: Optional[RescalingSequence] = None
    bubble: Optional[BubbleFit] = None
    secondary: List[PointAnalysis] = field(default_factory=list)
    conservation: Optional[Conservation] = None
    depth: int = 0
    note: str = ""


@dataclass
class BubbleReport:
    family: str
    nus: List[float]
    hbar: float
    points: List[PointAnalysis]
    limit: Optional[CurveFit] = None
    connections: List[float] = field(default_factory=list)

    @property
    def centers(self) -> List[SpherePoint]:
        return [analysis.center for analysis in self.points]


def conservation_check(family: Family, analysis: PointAnalysis) -> Conservation:
    """
    ``|E(phi~) + sum m_j^phi - m_0^phi|`` and, for ``d = -1`` only, the analogous
    section residual; other bundle degrees are flagged as skipped.
    """
    if analysis.bubble is None:
        raise InvalidInputError("conservation needs a fitted bubble")
    bubble = analysis.bubble
    energy_phi = energy_curve(bubble.curve, Sphere(), EnergyMethod.FLUX)
    energy_psi = 0.0 if bubble.section.is_zero() else energy_section(bubble.section, Sphere())
    secondary_phi = sum(child.profile.m_phi for child in analysis.secondary)
    secondary_psi = sum(child.profile.m_psi for child in analysis.secondary)
    residual_iii = abs(energy_phi + secondary_phi - analysis.profile.m_phi)
    skipped = family.bundle_degree != -1
    if skipped:
        logger.warning(
            f"{family.name}: section conservation is only asserted for d = -1; "
            f"measured for d = {family.bundle_degree} but reported as skipped"
        )
    residual_v = abs(energy_psi + secondary_psi - analysis.profile.m_psi)
    return Conservation(
        residual_iii,
        None if skipped else residual_v,
        skipped,
        energy_phi,
        energy_psi,
        secondary_phi,
        secondary_psi,
        analysis.profile.m_phi,
        analysis.profile.m_psi,
    )


@dataclass
class LadderSettings:
    eps0: float = 0.4
    count: int = 4
    rel_tol: float = 1e-8
    threads: int = 1

    @property
    def epsilons(self) -> List[float]:
        return geometric_ladder(self.eps0, 0.5, self.count)


def analyze_point(
    family: Family,
    center: SpherePoint,
    hbar: float,
    settings: LadderSettings,
    depth: int = 0,
) -> PointAnalysis:
    profile = mass_profile(
        family.member, center, settings.epsilons, family.nus, settings.rel_tol, settings.threads
    )
    analysis = PointAnalysis(center, profile, depth=depth)
    try:
        analysis.rescaling = select_rescaling(family, center)
    except NoBubbleError as error:
        analysis.note = str(error)
        return analysis
    analysis.bubble = rescaled_limit(family, analysis.rescaling)
    if depth + 1 < MAX_DEPTH:
        rescaled = family.reparameterized(f"{family.name}@{center}", analysis.rescaling.moebius)
        for point in detect_concentration(rescaled, hbar, charts=(0,), radius=SECONDARY_RADIUS):
            analysis.secondary.append(analyze_point(rescaled, point, hbar, settings, depth + 1))
    analysis.conservation = conservation_check(family, analysis)
    return analysis


def analyze_family(
    family: Family,
    hbar: float = math.pi,
    settings: Optional[LadderSettings] = None,
) -> BubbleReport:
    settings = settings or LadderSettings()
    centers = detect_concentration(family, hbar)
    report = BubbleReport(family.name, list(family.nus), hbar, [])
    for center in centers:
        report.points.append(analyze_point(family, center, hbar, settings))
    if centers:
        report.limit = principal_limit(family, centers)
        for analysis in report.points:
            if analysis.bubble is not None:
                report.connections.append(
                    connect_check(report.limit.curve, analysis.bubble.curve, analysis.center)
                )
    return report


def misselected_residual(
    family: Family, center: SpherePoint, exponent: float = 2.0, settings: Optional[LadderSettings] = None
) -> float:
    """Energy conservation residual when ``delta^nu = nu^-exponent`` replaces the selected rescaling."""
    settings = settings or LadderSettings()
    profile = mass_profile(family.member, center, settings.epsilons, family.nus, settings.rel_tol)
    rescaling = power_rescaling(family, center, exponent)
    bubble = rescaled_limit(family, rescaling)
    analysis = PointAnalysis(center, profile, rescaling, bubble)
    return conservation_check(family, analysis).residual_iii


def neck_energy_ladder(
    family: Family, rescaling: RescalingSequence, eps: Optional[float] = None
) -> List[Tuple[float, float, float]]:
    """
    ``(nu, delta^nu, int_{A(delta/eps, eps)} |psi^nu|^(-4/d) dvol)`` along the ladder;
    without ``eps`` the neck uses ``eps = delta^(1/4)``.
    """
    rows = []
    center = rescaling.center
    for nu, delta in zip(rescaling.nus, rescaling.deltas):
        width = eps if eps is not None else delta**0.25
        if not delta / width < width:
            raise InvalidInputError(f"the neck A({delta / width:.3g}, {width:.3g}) is empty")
        _, section = family.member(nu)
        value = 0.0 if section.is_zero() else 2.0 * energy_section(section, Annulus(center, delta / width, width))
        rows.append((nu, delta, value))
    return rows


