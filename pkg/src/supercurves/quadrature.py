"""
Adaptive quadrature over sphere regions and planar discs.

Every region is covered by polar patches (annular sectors in one chart). Patches
start from geometrically graded radial panels, so integrands concentrated at the
patch center are resolved, and panels are split into four until the difference of
a 5-point and a 10-point tensor Gauss-Legendre rule meets the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from logging import getLogger
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from supercurves.exceptions import InvalidInputError, QuadratureError
from supercurves.geometry import MoebiusTransform, SpherePoint

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

SphereDensity = Callable[[ComplexArray, int], RealArray]
PlanarDensity = Callable[[ComplexArray], RealArray]

DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-12
DEFAULT_MAX_PANELS = 60_000
LOW_ORDER, HIGH_ORDER = 5, 10
ANGULAR_PANELS = 8
SMALLEST_RADIUS_FRACTION = 1e-7
RADIAL_RATIO = 0.25


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> Tuple[RealArray, RealArray]:
    """Nodes and weights on [0, 1]."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@dataclass(frozen=True)
class PolarPatch:
    chart: int
    center: complex
    inner: float
    outer: float

    def initial_panels(self) -> RealArray:
        """Rows of ``(r0, r1, theta0, theta1)``."""
        if self.inner == 0.0:
            radii = [0.0]
            radius = self.outer * SMALLEST_RADIUS_FRACTION
            while radius < self.outer:
                radii.append(radius)
                radius /= RADIAL_RATIO
            radii.append(self.outer)
        else:
            count = max(1, math.ceil(math.log(self.outer / self.inner) / math.log(2.0)))
            radii = list(np.geomspace(self.inner, self.outer, count + 1))
        angles = np.linspace(0.0, 2 * math.pi, ANGULAR_PANELS + 1)
        return np.array(
            [
                (r0, r1, t0, t1)
                for r0, r1 in zip(radii[:-1], radii[1:])
                for t0, t1 in zip(angles[:-1], angles[1:])
            ]
        )


@dataclass
class QuadratureResult:
    value: float
    error: float
    panels: int


def _panel_rules(
    panels: RealArray, order: int
) -> Tuple[RealArray, RealArray]:
    """Polar node coordinates (radius, angle) and weights (with Jacobian r)."""
    nodes, weights = gauss_legendre(order)
    r0, r1, t0, t1 = (panels[:, i : i + 1] for i in range(4))
    radius = r0 + (r1 - r0) * nodes[None, :]
    angle = t0 + (t1 - t0) * nodes[None, :]
    node_radius = np.repeat(radius, order, axis=1)
    node_angle = np.tile(angle, (1, order))
    weight = (
        np.repeat(weights[None, :] * (r1 - r0), order, axis=1)
        * np.tile(weights[None, :] * (t1 - t0), (1, order))
        * node_radius
    )
    return np.stack([node_radius, node_angle]), weight


def _evaluate_panels(
    density: PlanarDensity, center: complex, panels: RealArray
) -> Tuple[RealArray, RealArray]:
    estimates = []
    for order in (LOW_ORDER, HIGH_ORDER):
        (radius, angle), weight = _panel_rules(panels, order)
        points = center + radius * np.exp(1j * angle)
        values = np.asarray(density(points), dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("density is not finite on the integration region")
        estimates.append(np.sum(values * weight, axis=1))
    low, high = estimates
    return high, np.abs(high - low)


def _split(panels: RealArray) -> RealArray:
    r0, r1, t0, t1 = panels.T
    rm, tm = 0.5 * (r0 + r1), 0.5 * (t0 + t1)
    return np.concatenate(
        [
            np.stack([r0, rm, t0, tm], axis=1),
            np.stack([rm, r1, t0, tm], axis=1),
            np.stack([r0, rm, tm, t1], axis=1),
            np.stack([rm, r1, tm, t1], axis=1),
        ]
    )


def integrate_patches(
    density: SphereDensity,
    patches: Sequence[PolarPatch],
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_panels: int = DEFAULT_MAX_PANELS,
) -> QuadratureResult:
    """Globally adaptive integration over a union of polar patches."""
    if rel_tol <= 0 or abs_tol <= 0:
        raise InvalidInputError("quadrature tolerances must be positive")
    if not patches:
        return QuadratureResult(0.0, 0.0, 0)
    work = [(patch, patch.initial_panels()) for patch in patches]
    accepted_value, accepted_error = 0.0, 0.0
    rounds = 0
    while True:
        rounds += 1
        results = []
        for patch, panels in work:
            values, errors = _evaluate_panels(
                lambda z, chart=patch.chart: density(z, chart), patch.center, panels
            )
            results.append((patch, panels, values, errors))
        active = sum(len(panels) for _, panels, _, _ in results)
        value = accepted_value + sum(float(np.sum(v)) for _, _, v, _ in results)
        error = accepted_error + sum(float(np.sum(e)) for _, _, _, e in results)
        target = max(rel_tol * abs(value), abs_tol)
        logger.debug(
            f"quadrature round {rounds}: value={value:.17g} error={error:.3e} "
            f"active panels={active}"
        )
        if error <= target:
            return QuadratureResult(value, error, active)
        if active * 4 > max_panels:
            raise QuadratureError(
                "adaptive quadrature exceeded the panel budget", value, error, active
            )
        # panels whose error is small against their share of the budget are frozen
        threshold = 0.5 * target / max(active, 1)
        work = []
        for patch, panels, values, errors in results:
            settled = errors <= threshold
            accepted_value += float(np.sum(values[settled]))
            accepted_error += float(np.sum(errors[settled]))
            if np.any(~settled):
                work.append((patch, _split(panels[~settled])))
        if not work:
            return QuadratureResult(
                accepted_value, accepted_error, active
            )


def integrate_planar(
    density: PlanarDensity,
    center: complex,
    radius: float,
    inner: float = 0.0,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> float:
    """Integral over the planar disc (or annulus) with respect to ``ds dt``."""
    patch = PolarPatch(0, complex(center), float(inner), float(radius))
    return integrate_patches(
        lambda z, chart: density(z), [patch], rel_tol, abs_tol
    ).value


@dataclass(frozen=True)
class Sphere:
    """The whole sphere, covered by the unit discs of both charts."""

    def patches(self) -> List[PolarPatch]:
        return [PolarPatch(0, 0j, 0.0, 1.0), PolarPatch(1, 0j, 0.0, 1.0)]

    def contains(self, point: SpherePoint) -> bool:
        return True

    def transformed(self, moebius: MoebiusTransform) -> Sphere:
        return self


@dataclass(frozen=True)
class Disc:
    """
    The Euclidean disc ``|z - c| < r`` in the chart of its center, or its
    complement in the sphere when ``exterior`` is set.
    """

    center: SpherePoint
    radius: float
    exterior: bool = False

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidInputError(f"disc radius must be positive, got {self.radius}")

    @property
    def chart(self) -> int:
        return self.center.chart

    def patches(self) -> List[PolarPatch]:
        return [PolarPatch(self.chart, self.center.z, 0.0, self.radius)]

    def contains(self, point: SpherePoint) -> bool:
        if point.chart != self.chart and point.z == 0:
            inside = False
        else:
            inside = abs(point.to_chart(self.chart) - self.center.z) < self.radius
        return inside != self.exterior

    def boundary(self, count: int) -> ComplexArray:
        angles = 2 * math.pi * np.arange(count) / count
        return self.center.z + self.radius * np.exp(1j * angles)

    def transformed(self, moebius: MoebiusTransform) -> Disc:
        """The image ``m(U)``, again a disc or a disc complement in some chart."""
        boundary = [
            moebius.apply(SpherePoint(self.chart, z)) for z in self.boundary(3)
        ]
        inside_reference = moebius.apply(self.center)
        candidates = []
        for chart in (0, 1):
            if any(point.chart != chart and point.z == 0 for point in boundary):
                continue
            circle = _circumcircle([point.to_chart(chart) for point in boundary])
            if circle is None:
                continue
            center, radius = circle
            if inside_reference.chart != chart and inside_reference.z == 0:
                reference_inside = False
            else:
                reference_inside = (
                    abs(inside_reference.to_chart(chart) - center) < radius
                )
            exterior = reference_inside == self.exterior
            compact = abs(center) + radius <= 2.0
            rank = (not compact, exterior, radius)
            candidates.append((rank, Disc(SpherePoint(chart, center), radius, exterior)))
        if not candidates:
            raise InvalidInputError(
                "the image circle passes through both 0 and infinity"
            )
        return min(candidates, key=lambda candidate: candidate[0])[1]

    def __str__(self) -> str:
        prefix = "S2 minus " if self.exterior else ""
        return f"{prefix}B({self.center}, {self.radius:.6g})"


def _circumcircle(points: Sequence[complex]) -> Optional[Tuple[complex, float]]:
    first, second, third = points
    ax, ay = first.real, first.imag
    bx, by = second.real, second.imag
    cx, cy = third.real, third.imag
    determinant = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    scale = max(abs(first), abs(second), abs(third), 1.0) ** 2
    if abs(determinant) <= 1e-14 * scale:
        return None
    a2, b2, c2 = abs(first) ** 2, abs(second) ** 2, abs(third) ** 2
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / determinant
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / determinant
    center = complex(ux, uy)
    return center, abs(first - center)


@dataclass(frozen=True)
class Annulus:
    """``r < |z - c| < R`` in the chart of the center."""

    center: SpherePoint
    inner: float
    outer: float

    def __post_init__(self) -> None:
        if not 0 < self.inner < self.outer:
            raise InvalidInputError(
                f"annulus radii must satisfy 0 < r < R, got {self.inner}, {self.outer}"
            )

    def patches(self) -> List[PolarPatch]:
        return [PolarPatch(self.center.chart, self.center.z, self.inner, self.outer)]

    def contains(self, point: SpherePoint) -> bool:
        if point.chart != self.center.chart and point.z == 0:
            return False
        distance = abs(point.to_chart(self.center.chart) - self.center.z)
        return self.inner < distance < self.outer


@dataclass(frozen=True)
class Complement:
    """The sphere minus a collection of pairwise disjoint discs."""

    discs: Tuple[Disc, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if any(disc.exterior for disc in self.discs):
            raise InvalidInputError("complements are built from interior discs only")

    def contains(self, point: SpherePoint) -> bool:
        return not any(disc.contains(point) for disc in self.discs)


Region = Union[Sphere, Disc, Annulus, Complement]


def integrate_with_error(
    density: SphereDensity,
    region: Region,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_panels: int = DEFAULT_MAX_PANELS,
) -> QuadratureResult:
    """Integral of a chart density (w.r.t. coordinate area) over a region."""

    def run(patches: Sequence[PolarPatch]) -> QuadratureResult:
        return integrate_patches(density, patches, rel_tol, abs_tol, max_panels)

    if isinstance(region, (Sphere, Annulus)):
        return run(region.patches())
    if isinstance(region, Disc):
        inner = run(region.patches())
        if not region.exterior:
            return inner
        whole = run(Sphere().patches())
        return QuadratureResult(
            whole.value - inner.value, whole.error + inner.error, whole.panels + inner.panels
        )
    whole = run(Sphere().patches())
    value, error, panels = whole.value, whole.error, whole.panels
    for disc in region.discs:
        part = run(disc.patches())
        value, error, panels = value - part.value, error + part.error, panels + part.panels
    return QuadratureResult(value, error, panels)


def integrate(
    density: SphereDensity,
    region: Region,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
) -> float:
    return integrate_with_error(density, region, rel_tol, abs_tol).value


def integrate_loop(
    integrand: Callable[[RealArray], RealArray],
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    max_points: int = 1 << 22,
) -> float:
    """
    Integral of a smooth 2 pi-periodic function over one period.

    The trapezoidal rule converges geometrically for periodic analytic
    integrands; the number of nodes doubles until two estimates agree.
    """
    count = 64
    previous = None
    while count <= max_points:
        angles = 2 * math.pi * np.arange(count) / count
        estimate = float(np.mean(integrand(angles))) * 2 * math.pi
        if previous is not None and abs(estimate - previous) <= max(
            rel_tol * abs(estimate), abs_tol
        ):
            return estimate
        previous = estimate
        count *= 2
    raise QuadratureError(
        "periodic trapezoidal rule did not converge",
        previous if previous is not None else math.nan,
        math.nan,
        max_points,
    )
