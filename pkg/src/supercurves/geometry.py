"""
Charts and metrics on the sphere, the Moebius group with its spin lifts, the line
bundles L_d and the target metrics.

Points of the sphere are stored as a chart index and a complex coordinate. Chart 0
covers everything but infinity with coordinate ``z``, chart 1 covers everything but
the origin with coordinate ``w = 1/z``. The homogeneous representative of a point is
``(z, 1)`` in chart 0 and ``(1, w)`` in chart 1, so ``z = Z0 / Z1``.

A fiber vector of L_d at ``[Z]`` is represented homogeneously by pairs ``(Z, v)``
modulo ``(tZ, t^d v)``. Its chart-j value is ``v`` evaluated at the representative
normalized in that chart, which gives the transition ``xi_1 = z^(-d) xi_0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from logging import getLogger
from typing import Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from supercurves.exceptions import InvalidInputError

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

DETERMINANT_TOLERANCE = 1e-12
CHART_HYSTERESIS = 1.1


def normalizing_index(chart: int) -> int:
    """Index of the homogeneous component that equals 1 in the given chart."""
    return 1 - chart


@dataclass(frozen=True)
class SpherePoint:
    chart: int
    z: complex

    def __post_init__(self) -> None:
        if self.chart not in (0, 1):
            raise InvalidInputError(f"chart must be 0 or 1, got {self.chart}")
        if not cmath.isfinite(self.z):
            raise InvalidInputError(f"coordinate must be finite, got {self.z}")
        object.__setattr__(self, "z", complex(self.z))

    @classmethod
    def origin(cls) -> SpherePoint:
        return cls(0, 0j)

    @classmethod
    def infinity(cls) -> SpherePoint:
        return cls(1, 0j)

    @classmethod
    def from_homogeneous(cls, z0: complex, z1: complex) -> SpherePoint:
        """Canonical point for the homogeneous coordinates ``[z0 : z1]``."""
        if not (cmath.isfinite(z0) and cmath.isfinite(z1)):
            raise InvalidInputError("homogeneous coordinates must be finite")
        if z0 == 0 and z1 == 0:
            raise InvalidInputError("[0 : 0] is not a point of the sphere")
        if abs(z0) <= abs(z1):
            return cls(0, z0 / z1)
        return cls(1, z1 / z0)

    @classmethod
    def from_unit_vector(cls, vector: Sequence[float]) -> SpherePoint:
        x, y, height = (float(value) for value in vector)
        if height <= 0.0:
            return cls(0, complex(x, y) / (1.0 - height))
        return cls(1, complex(x, -y) / (1.0 + height))

    @property
    def is_infinity(self) -> bool:
        return self.chart == 1 and self.z == 0

    def homogeneous(self) -> ComplexArray:
        if self.chart == 0:
            return np.array([self.z, 1.0], dtype=np.complex128)
        return np.array([1.0, self.z], dtype=np.complex128)

    def to_chart(self, chart: int) -> complex:
        """Coordinate of this point in the requested chart."""
        if chart == self.chart:
            return self.z
        if self.z == 0:
            raise InvalidInputError(
                f"{'infinity' if self.chart == 1 else 'the origin'} is not "
                f"representable in chart {chart}"
            )
        return 1.0 / self.z

    def canonical(self) -> SpherePoint:
        """Chart 0 when |z| <= 1 in chart 0 coordinates, chart 1 otherwise."""
        return SpherePoint.from_homogeneous(*self.homogeneous())

    def rechart(self) -> SpherePoint:
        """Switch charts only once the coordinate leaves the hysteresis band."""
        if abs(self.z) > CHART_HYSTERESIS:
            return SpherePoint(1 - self.chart, 1.0 / self.z)
        return self

    def unit_vector(self) -> RealArray:
        return unit_vectors(np.array([self.z]), self.chart)[0]

    def chordal_distance(self, other: SpherePoint) -> float:
        return float(np.linalg.norm(self.unit_vector() - other.unit_vector()))

    def __str__(self) -> str:
        return f"{'z' if self.chart == 0 else 'w'}={self.z:.6g}"


def unit_vectors(z: npt.ArrayLike, chart: int) -> RealArray:
    """Points of the unit sphere in R^3 for chart coordinates (vectorized)."""
    values = np.asarray(z, dtype=np.complex128)
    modulus = np.abs(values) ** 2
    scale = 1.0 / (1.0 + modulus)
    if chart == 0:
        parts = (2 * values.real, 2 * values.imag, modulus - 1.0)
    else:
        parts = (2 * values.real, -2 * values.imag, 1.0 - modulus)
    return np.stack([part * scale for part in parts], axis=-1)


def chordal_distances(
    z: npt.ArrayLike, chart: int, other: npt.ArrayLike, other_chart: int
) -> RealArray:
    return np.linalg.norm(
        unit_vectors(z, chart) - unit_vectors(other, other_chart), axis=-1
    )


def homogeneous_points(z: npt.ArrayLike, chart: int) -> ComplexArray:
    """Chart-normalized homogeneous representatives, shape ``(..., 2)``."""
    values = np.asarray(z, dtype=np.complex128)
    ones = np.ones_like(values)
    if chart == 0:
        return np.stack([values, ones], axis=-1)
    return np.stack([ones, values], axis=-1)


def homogeneous_unit_vectors(points: npt.ArrayLike) -> RealArray:
    """Unit vectors in R^3 of homogeneous points ``[Z0 : Z1]`` of shape ``(..., 2)``."""
    values = np.asarray(points, dtype=np.complex128)
    first, second = values[..., 0], values[..., 1]
    norm = np.abs(first) ** 2 + np.abs(second) ** 2
    planar = 2.0 * first * second.conj() / norm
    height = (np.abs(first) ** 2 - np.abs(second) ** 2) / norm
    return np.stack([planar.real, planar.imag, height], axis=-1)


def fibonacci_sphere(count: int) -> Tuple[Tuple[ComplexArray, ComplexArray], RealArray]:
    """
    Quasi-uniform sample of the sphere.

    Returns the chart-0 coordinates of the southern hemisphere, the chart-1
    coordinates of the northern hemisphere and the unit vectors of all samples.
    """
    index = np.arange(count) + 0.5
    height = 1.0 - 2.0 * index / count
    radius = np.sqrt(np.clip(1.0 - height**2, 0.0, None))
    angle = math.pi * (3.0 - math.sqrt(5.0)) * index
    x, y = radius * np.cos(angle), radius * np.sin(angle)
    south = height <= 0
    z0 = (x[south] + 1j * y[south]) / (1.0 - height[south])
    north = ~south
    z1 = (x[north] - 1j * y[north]) / (1.0 + height[north])
    vectors = np.stack([x, y, height], axis=-1)
    return (z0, z1), np.concatenate([vectors[south], vectors[north]])


@dataclass(frozen=True)
class MoebiusTransform:
    """
    An SL(2,C) representative ``z -> (az + b)/(cz + d)`` of a sphere automorphism.

    The matrix and its negative act identically on points; for odd bundle degree
    their spin lifts differ by a sign, and that sign is the one stored here.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        entries = (self.a, self.b, self.c, self.d)
        if not all(cmath.isfinite(entry) for entry in entries):
            raise InvalidInputError("Moebius entries must be finite")
        for name, entry in zip("abcd", entries):
            object.__setattr__(self, name, complex(entry))
        scale = max(1.0, abs(self.a * self.d), abs(self.b * self.c))
        deviation = abs(self.a * self.d - self.b * self.c - 1.0)
        if deviation > DETERMINANT_TOLERANCE * scale:
            raise InvalidInputError(
                f"determinant deviates from 1 by {deviation:.3e}; use from_matrix "
                "to normalize"
            )

    @classmethod
    def from_matrix(cls, matrix: npt.ArrayLike) -> MoebiusTransform:
        values = np.asarray(matrix, dtype=np.complex128).reshape(2, 2)
        determinant = values[0, 0] * values[1, 1] - values[0, 1] * values[1, 0]
        if abs(determinant) == 0 or not cmath.isfinite(determinant):
            raise InvalidInputError("matrix is singular")
        values = values / cmath.sqrt(determinant)
        return cls(values[0, 0], values[0, 1], values[1, 0], values[1, 1])

    @classmethod
    def identity(cls) -> MoebiusTransform:
        return cls(1, 0, 0, 1)

    @classmethod
    def rotation(cls, angle: float) -> MoebiusTransform:
        """Rotation about the poles, ``z -> exp(i angle) z``."""
        half = cmath.exp(0.5j * angle)
        return cls(half, 0, 0, 1 / half)

    @classmethod
    def unitary(cls, alpha: complex, beta: complex) -> MoebiusTransform:
        """The rotation with ``a = alpha, b = beta, c = -conj(beta), d = conj(alpha)``."""
        norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        if norm == 0:
            raise InvalidInputError("alpha and beta cannot both vanish")
        alpha, beta = alpha / norm, beta / norm
        return cls(alpha, beta, -beta.conjugate(), alpha.conjugate())

    @classmethod
    def scaling(cls, factor: complex) -> MoebiusTransform:
        """``z -> factor * z``."""
        if factor == 0:
            raise InvalidInputError("scaling factor must be nonzero")
        root = cmath.sqrt(factor)
        return cls(root, 0, 0, 1 / root)

    @classmethod
    def translation(cls, shift: complex) -> MoebiusTransform:
        return cls(1, shift, 0, 1)

    @classmethod
    def chart_swap(cls) -> MoebiusTransform:
        """``z -> 1/z``."""
        return cls(0, 1j, 1j, 0)

    @classmethod
    def random(
        cls, rng: np.random.Generator, spread: float = 1.0
    ) -> MoebiusTransform:
        matrix = np.eye(2) + spread * (
            rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        )
        return cls.from_matrix(matrix)

    @classmethod
    def random_rotation(cls, rng: np.random.Generator) -> MoebiusTransform:
        alpha, beta = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        return cls.unitary(alpha, beta)

    @classmethod
    def three_point(
        cls, source: Sequence[SpherePoint], target: Sequence[SpherePoint]
    ) -> MoebiusTransform:
        """The unique transform mapping three distinct points onto three others."""
        to_standard = _standard_frame(source)
        from_standard = _standard_frame(target)
        inverse = np.array(
            [
                [from_standard[1, 1], -from_standard[0, 1]],
                [-from_standard[1, 0], from_standard[0, 0]],
            ]
        )
        return cls.from_matrix(inverse @ to_standard)

    @classmethod
    def from_reals(cls, values: Sequence[float]) -> MoebiusTransform:
        if len(values) != 8:
            raise InvalidInputError(f"expected 8 reals, got {len(values)}")
        entries = [complex(values[i], values[i + 1]) for i in range(0, 8, 2)]
        return cls.from_matrix(np.array(entries).reshape(2, 2))

    @property
    def matrix(self) -> ComplexArray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)

    def to_reals(self) -> Tuple[float, ...]:
        return tuple(
            part for entry in (self.a, self.b, self.c, self.d)
            for part in (entry.real, entry.imag)
        )

    def compose(self, other: MoebiusTransform) -> MoebiusTransform:
        """``self o other``."""
        return MoebiusTransform.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> MoebiusTransform:
        return MoebiusTransform(self.d, -self.b, -self.c, self.a)

    def negated(self) -> MoebiusTransform:
        return MoebiusTransform(-self.a, -self.b, -self.c, -self.d)

    def apply(self, point: SpherePoint) -> SpherePoint:
        image = self.matrix @ point.homogeneous()
        return SpherePoint.from_homogeneous(image[0], image[1])

    def apply_homogeneous(self, points: ComplexArray) -> ComplexArray:
        """Apply to homogeneous representatives of shape ``(..., 2)``."""
        return np.einsum("ij,...j->...i", self.matrix, points)

    def apply_chart(self, z: npt.ArrayLike, chart: int) -> ComplexArray:
        """Images of chart coordinates as homogeneous vectors scaled to unit length."""
        images = self.apply_homogeneous(homogeneous_points(z, chart))
        return images / np.linalg.norm(images, axis=-1, keepdims=True)

    def derivative(self, z: complex) -> complex:
        """``m'(z)`` in chart-0 coordinates on both sides."""
        return 1.0 / (self.c * z + self.d) ** 2

    def acts_like(self, other: MoebiusTransform, tolerance: float = 1e-10) -> bool:
        """True when both matrices agree up to sign."""
        difference = min(
            np.abs(self.matrix - other.matrix).max(),
            np.abs(self.matrix + other.matrix).max(),
        )
        return bool(difference <= tolerance)


def _standard_frame(points: Sequence[SpherePoint]) -> ComplexArray:
    """Matrix sending the three points to 0, 1 and infinity."""
    if len(points) != 3:
        raise InvalidInputError(f"need exactly three points, got {len(points)}")
    first, second, third = (point.homogeneous() for point in points)

    def bracket(x: ComplexArray, y: ComplexArray) -> complex:
        return complex(x[0] * y[1] - x[1] * y[0])

    k1 = bracket(second, third)
    k2 = bracket(second, first)
    if min(abs(k1), abs(k2), abs(bracket(first, third))) < 1e-14:
        raise InvalidInputError("the three points must be distinct")
    return np.array(
        [[k1 * first[1], -k1 * first[0]], [k2 * third[1], -k2 * third[0]]]
    )


def compose(first: MoebiusTransform, second: MoebiusTransform) -> MoebiusTransform:
    """``first o second``, renormalized to determinant one."""
    return first.compose(second)


def recentering(point: SpherePoint) -> MoebiusTransform:
    """A Moebius transform sending ``point`` to the origin, a translation in its chart."""
    if point.chart == 0:
        return MoebiusTransform.translation(-point.z)
    return MoebiusTransform.translation(-point.z).compose(MoebiusTransform.chart_swap())


def conformal_factor(moebius: MoebiusTransform, point: SpherePoint) -> float:
    """
    The factor ``lambda`` in ``m* h = lambda h`` for the round metric h.

    In chart 0 this is ``|m'(z)|^2 (1+|z|^2)^2 / (1+|m(z)|^2)^2``; homogeneously
    it equals ``(|Z| / |MZ|)^4``, which needs no chart switch.
    """
    representative = point.homogeneous()
    image = moebius.matrix @ representative
    return float(
        (np.linalg.norm(representative) / np.linalg.norm(image)) ** 4
    )


def lift_factor(moebius: MoebiusTransform, degree: int, point: SpherePoint) -> complex:
    """
    Scalar by which the spin lift of ``moebius`` acts on chart-trivialized fibers.

    The source fiber is trivialized in the chart of ``point``, the target fiber in
    the canonical chart of the image. For chart 0 on both sides this is
    ``(cz + d)^(-degree)``.
    """
    if degree == 0:
        raise InvalidInputError("bundle degree must be nonzero")
    image = moebius.matrix @ point.homogeneous()
    target = SpherePoint.from_homogeneous(image[0], image[1])
    scale = complex(image[normalizing_index(target.chart)])
    if scale == 0 or not cmath.isfinite(scale):
        raise InvalidInputError(f"lift undefined at {point}")
    return scale ** (-degree)


@dataclass(frozen=True)
class LineBundleSpec:
    degree: int

    def __post_init__(self) -> None:
        if self.degree == 0:
            raise InvalidInputError("the bundle degree d must be nonzero")

    def transition(self, z: complex) -> complex:
        """Factor turning a chart-0 fiber value into the chart-1 value at ``z``."""
        if z == 0:
            raise InvalidInputError("the transition is undefined at the origin")
        return z ** (-self.degree)

    def weight(self, z: npt.ArrayLike) -> RealArray:
        """``|theta|_H^2`` of the chart frame, ``(1+|z|^2)^(-d)`` in both charts."""
        values = np.asarray(z, dtype=np.complex128)
        return (1.0 + np.abs(values) ** 2) ** (-self.degree)


class MetricWeights:
    """Round metric density and fiber weights used by the integrals."""

    @staticmethod
    def sphere_density(z: npt.ArrayLike) -> RealArray:
        values = np.asarray(z, dtype=np.complex128)
        return (1.0 + np.abs(values) ** 2) ** -2

    @staticmethod
    def fiber_weight(degree: int, point: SpherePoint) -> float:
        return float(LineBundleSpec(degree).weight(point.z))


def fiber_weight(degree: int, point: SpherePoint) -> float:
    return MetricWeights.fiber_weight(degree, point)


def sphere_density(z: npt.ArrayLike) -> RealArray:
    return MetricWeights.sphere_density(z)


def check_hermitian_metric(metric: npt.ArrayLike) -> ComplexArray:
    values = np.atleast_2d(np.asarray(metric, dtype=np.complex128))
    if values.shape[0] != values.shape[1]:
        raise InvalidInputError(f"target metric must be square, got {values.shape}")
    scale = max(1.0, float(np.abs(values).max()))
    if np.abs(values - values.conj().T).max() > 1e-10 * scale:
        raise InvalidInputError("target metric must be Hermitian")
    if np.linalg.eigvalsh(values).min() <= 0:
        raise InvalidInputError("target metric must be positive definite")
    return values


def bundle_inner(
    degree: int,
    point: SpherePoint,
    target_metric: npt.ArrayLike,
    first: npt.ArrayLike,
    second: npt.ArrayLike,
) -> float:
    """
    Real bundle metric of two fiber vectors in the chart trivialization at ``point``.

    The real part of the Hermitian pairing is halved, so that a vector and its
    image under i are orthogonal and ``|xi|^2 = 1/2 |xi|_H^2 |v|_g^2``.
    """
    metric = check_hermitian_metric(target_metric)
    left = np.atleast_1d(np.asarray(first, dtype=np.complex128))
    right = np.atleast_1d(np.asarray(second, dtype=np.complex128))
    hermitian = complex(left.conj() @ metric @ right)
    return 0.5 * hermitian.real * fiber_weight(degree, point)


class TargetKind(str, Enum):
    """The supported target manifolds."""

    PROJECTIVE = "CP"
    FLAT = "C"


def fs_metric(u: npt.ArrayLike) -> ComplexArray:
    """Fubini-Study metric matrix at affine coordinates ``u`` (shape ``(..., n)``)."""
    values = np.asarray(u, dtype=np.complex128)
    modulus = 1.0 + np.sum(np.abs(values) ** 2, axis=-1)
    identity = np.eye(values.shape[-1])
    outer = np.einsum("...i,...j->...ij", values.conj(), values)
    return (
        modulus[..., None, None] * identity - outer
    ) / modulus[..., None, None] ** 2


def fs_quotient_norm_squared(lift: ComplexArray, tangent: ComplexArray) -> RealArray:
    """
    Fubini-Study norm of the tangent vector ``[V]`` at ``[W]`` from homogeneous data.

    ``(|V|^2 |W|^2 - |<W, V>|^2) / |W|^4``, invariant under ``(W, V) -> (tW, tV)``.
    """
    lift_norm = np.sum(np.abs(lift) ** 2, axis=-1)
    tangent_norm = np.sum(np.abs(tangent) ** 2, axis=-1)
    pairing = np.sum(lift.conj() * tangent, axis=-1)
    numerator = tangent_norm * lift_norm - np.abs(pairing) ** 2
    return np.clip(numerator, 0.0, None) / lift_norm**2


def fs_distance(first: npt.ArrayLike, second: npt.ArrayLike) -> RealArray:
    """Fubini-Study distance of homogeneous points; the diameter is pi/2."""
    left = np.asarray(first, dtype=np.complex128)
    right = np.asarray(second, dtype=np.complex128)
    left = left / np.linalg.norm(left, axis=-1, keepdims=True)
    right = right / np.linalg.norm(right, axis=-1, keepdims=True)
    pairing = np.sum(left.conj() * right, axis=-1)
    modulus = np.abs(pairing)
    phase = np.where(modulus > 0, pairing / np.where(modulus > 0, modulus, 1.0), 1.0)
    # chord between unit lifts in phase: 2 sin(d / 2)
    chord = np.linalg.norm(left - right * phase.conj()[..., None], axis=-1)
    return 2.0 * np.arcsin(np.clip(0.5 * chord, 0.0, math.sqrt(0.5)))


def target_distance(
    kind: TargetKind, first: npt.ArrayLike, second: npt.ArrayLike
) -> RealArray:
    """Riemannian distance in the target for lifts (CP^n) or points (C^n)."""
    if kind is TargetKind.PROJECTIVE:
        return fs_distance(first, second)
    difference = np.asarray(first) - np.asarray(second)
    return np.sqrt(np.sum(np.abs(difference) ** 2, axis=-1))


def parse_target(value: str, location: Optional[str] = None) -> TargetKind:
    try:
        return TargetKind(value)
    except ValueError as error:
        raise InvalidInputError(
            f"unknown target {value!r}, expected one of "
            f"{', '.join(kind.value for kind in TargetKind)}",
            location,
        ) from error
