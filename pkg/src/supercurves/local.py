"""
Local holomorphic supercurves on planar domains.

A local pair consists of maps ``phi, psi`` from a planar domain into R^2n together
with an almost complex structure ``J~(z)`` and a zeroth-order term ``D~(z)`` and
solves

    d_s phi + J~ d_t phi = 0,    d_s psi + J~ d_t psi + D~ psi = 0.

Vectors of R^2n are stored in blocks ``[Re, Im]``, so the standard structure J0 is
multiplication by i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from logging import getLogger
from typing import Callable, Optional, Tuple

import numpy as np
import numpy.polynomial.polynomial as poly
import numpy.typing as npt

from supercurves.exceptions import InvalidInputError

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

FieldMap = Callable[[ComplexArray], RealArray]
StructureField = Callable[[RealArray], RealArray]
ConnectionField = Callable[[RealArray, RealArray], RealArray]

STRUCTURE_TOLERANCE = 1e-10
DEFAULT_STEP = 1e-3
INTERNAL_STEP = 1e-5


def complex_to_real(values: npt.ArrayLike) -> RealArray:
    array = np.asarray(values, dtype=np.complex128)
    return np.concatenate([array.real, array.imag], axis=-1)


def real_to_complex(values: npt.ArrayLike, dimension: int) -> ComplexArray:
    array = np.asarray(values, dtype=np.float64)
    return array[..., :dimension] + 1j * array[..., dimension:]


def complex_matrix_to_real(matrix: npt.ArrayLike) -> RealArray:
    values = np.asarray(matrix, dtype=np.complex128)
    top = np.concatenate([values.real, -values.imag], axis=-1)
    bottom = np.concatenate([values.imag, values.real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def standard_structure(dimension: int) -> RealArray:
    """J0 = [[0, -I], [I, 0]]."""
    return complex_matrix_to_real(1j * np.eye(dimension))


def apply_matrix(matrix: RealArray, vector: RealArray) -> RealArray:
    return np.einsum("...ij,...j->...i", matrix, vector)


@dataclass(frozen=True)
class PlanarDomain:
    """An open disc ``|z - center| < radius`` or an open axis-parallel rectangle."""

    kind: str
    center: complex = 0j
    radius: float = 1.0
    corner: complex = 0j
    opposite: complex = 0j

    def __post_init__(self) -> None:
        if self.kind == "disc":
            if not self.radius > 0:
                raise InvalidInputError(f"disc radius must be positive, got {self.radius}")
        elif self.kind == "rectangle":
            if not (self.opposite.real > self.corner.real and self.opposite.imag > self.corner.imag):
                raise InvalidInputError("rectangle corners must be ordered lower-left, upper-right")
        else:
            raise InvalidInputError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def disc(cls, center: complex, radius: float) -> PlanarDomain:
        return cls("disc", center=complex(center), radius=float(radius))

    @classmethod
    def rectangle(cls, corner: complex, opposite: complex) -> PlanarDomain:
        return cls("rectangle", corner=complex(corner), opposite=complex(opposite))

    def margin(self, points: npt.ArrayLike) -> RealArray:
        """Distance of each point to the boundary, negative outside."""
        z = np.asarray(points, dtype=np.complex128)
        if self.kind == "disc":
            return self.radius - np.abs(z - self.center)
        return np.minimum.reduce(
            [
                z.real - self.corner.real,
                self.opposite.real - z.real,
                z.imag - self.corner.imag,
                self.opposite.imag - z.imag,
            ]
        )

    def contains_disc(self, center: complex, radius: float) -> bool:
        return bool(self.margin(np.array([center]))[0] >= radius)

    def grid(self, resolution: int, margin: float = 0.0) -> ComplexArray:
        """Tensor grid of the bounding box, keeping points at least ``margin`` inside."""
        if resolution < 2:
            raise InvalidInputError(f"grid resolution must be >= 2, got {resolution}")
        if self.kind == "disc":
            low = self.center - complex(self.radius, self.radius)
            high = self.center + complex(self.radius, self.radius)
        else:
            low, high = self.corner, self.opposite
        s = np.linspace(low.real, high.real, resolution)
        t = np.linspace(low.imag, high.imag, resolution)
        ss, tt = np.meshgrid(s, t, indexing="xy")
        points = (ss + 1j * tt).ravel()
        return points[self.margin(points) >= margin]


@dataclass(frozen=True)
class LocalDerivatives:
    """Closed-form partial derivatives of ``phi`` and ``psi``."""

    phi_s: FieldMap
    phi_t: FieldMap
    psi_s: FieldMap
    psi_t: FieldMap


@dataclass(frozen=True)
class LocalPair:
    """
    A local supercurve. ``structure`` and ``connection`` are fields on the target
    (``J(x)`` and ``D(x, v)``) and are pulled back along ``phi``; ``j_tilde`` and
    ``d_tilde`` give ``J~(z)`` and ``D~(z)`` directly and take precedence.
    """

    phi: FieldMap
    psi: FieldMap
    dimension: int
    domain: PlanarDomain
    structure: Optional[StructureField] = None
    connection: Optional[ConnectionField] = None
    j_tilde: Optional[FieldMap] = None
    d_tilde: Optional[FieldMap] = None
    derivatives: Optional[LocalDerivatives] = None

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidInputError(f"target dimension must be >= 1, got {self.dimension}")

    def _values(self, field_map: FieldMap, z: ComplexArray) -> RealArray:
        values = np.asarray(field_map(z), dtype=np.float64)
        if values.shape != z.shape + (2 * self.dimension,):
            raise InvalidInputError(
                f"field returned shape {values.shape}, expected {z.shape + (2 * self.dimension,)}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("field evaluation produced NaN or infinite values")
        return values

    def phi_at(self, z: npt.ArrayLike) -> RealArray:
        return self._values(self.phi, np.asarray(z, dtype=np.complex128))

    def psi_at(self, z: npt.ArrayLike) -> RealArray:
        return self._values(self.psi, np.asarray(z, dtype=np.complex128))

    def partials(
        self, z: npt.ArrayLike, h: Optional[float] = None
    ) -> Tuple[RealArray, RealArray, RealArray, RealArray]:
        """``(d_s phi, d_t phi, d_s psi, d_t psi)``; closed forms unless ``h`` is given."""
        points = np.asarray(z, dtype=np.complex128)
        if h is None and self.derivatives is not None:
            closed = self.derivatives
            return (
                self._values(closed.phi_s, points),
                self._values(closed.phi_t, points),
                self._values(closed.psi_s, points),
                self._values(closed.psi_t, points),
            )
        step = DEFAULT_STEP if h is None else h

        def central(field_map: FieldMap, direction: complex) -> RealArray:
            forward = self._values(field_map, points + step * direction)
            backward = self._values(field_map, points - step * direction)
            return (forward - backward) / (2 * step)

        return (
            central(self.phi, 1.0),
            central(self.phi, 1j),
            central(self.psi, 1.0),
            central(self.psi, 1j),
        )

    def structure_at(self, z: npt.ArrayLike) -> RealArray:
        points = np.asarray(z, dtype=np.complex128)
        size = 2 * self.dimension
        if self.j_tilde is not None:
            values = np.asarray(self.j_tilde(points), dtype=np.float64)
        elif self.structure is not None:
            values = np.asarray(self.structure(self.phi_at(points)), dtype=np.float64)
        else:
            values = np.broadcast_to(standard_structure(self.dimension), points.shape + (size, size))
        square = np.einsum("...ij,...jk->...ik", values, values)
        defect = np.abs(square + np.eye(size)).max(initial=0.0)
        if defect > STRUCTURE_TOLERANCE:
            raise InvalidInputError(f"J~ does not square to -id (defect {defect:.3e})")
        return values

    def connection_at(self, z: npt.ArrayLike) -> RealArray:
        points = np.asarray(z, dtype=np.complex128)
        size = 2 * self.dimension
        if self.d_tilde is not None:
            return np.asarray(self.d_tilde(points), dtype=np.float64)
        if self.connection is None:
            return np.zeros(points.shape + (size, size))
        phi_s = self.partials(points, None if self.derivatives else INTERNAL_STEP)[0]
        return np.asarray(self.connection(self.phi_at(points), phi_s), dtype=np.float64)


def pointwise_residuals(
    pair: LocalPair,
    points: npt.ArrayLike,
    h: float = DEFAULT_STEP,
    closed_forms: bool = True,
) -> Tuple[RealArray, RealArray]:
    """Euclidean norms of both defining equations at every point."""
    z = np.asarray(points, dtype=np.complex128)
    margin = pair.domain.margin(z)
    if z.size and margin.min() < 2 * h:
        raise InvalidInputError(
            f"evaluation grid comes within {margin.min():.3e} of the domain boundary; "
            f"a margin of 2h = {2 * h:.3e} is required"
        )
    phi_s, phi_t, psi_s, psi_t = pair.partials(z, None if closed_forms else h)
    structure = pair.structure_at(z)
    curve = phi_s + apply_matrix(structure, phi_t)
    section = psi_s + apply_matrix(structure, psi_t) + apply_matrix(pair.connection_at(z), pair.psi_at(z))
    return np.linalg.norm(curve, axis=-1), np.linalg.norm(section, axis=-1)


def residual_local(
    pair: LocalPair,
    grid: npt.ArrayLike,
    h: float = DEFAULT_STEP,
    closed_forms: bool = False,
) -> Tuple[float, float]:
    """
    Sup residuals over the grid. Central differences of step ``h`` are used unless
    ``closed_forms`` is set and the pair carries closed-form derivatives.
    """
    if not h > 0:
        raise InvalidInputError(f"finite-difference step must be positive, got {h}")
    curve, section = pointwise_residuals(pair, grid, h, closed_forms)
    if curve.size == 0:
        return 0.0, 0.0
    return float(curve.max()), float(section.max())


def polynomial_pair(
    phi_coefficients: npt.ArrayLike,
    psi_coefficients: npt.ArrayLike,
    domain: Optional[PlanarDomain] = None,
) -> LocalPair:
    """
    Flat-target pair with ``J~ = J0`` and ``D~ = 0`` from complex polynomials,
    given as ascending coefficients of shape ``(n, degree + 1)``.
    """
    phi_rows = np.atleast_2d(np.asarray(phi_coefficients, dtype=np.complex128))
    psi_rows = np.atleast_2d(np.asarray(psi_coefficients, dtype=np.complex128))
    if phi_rows.shape[0] != psi_rows.shape[0]:
        raise InvalidInputError("phi and psi must have the same number of components")

    def evaluator(rows: ComplexArray, factor: complex = 1.0, derive: bool = False) -> FieldMap:
        coefficients = poly.polyder(rows.T, axis=0).T if derive and rows.shape[1] > 1 else rows
        if derive and rows.shape[1] <= 1:
            coefficients = np.zeros_like(rows[:, :1])

        def field_map(z: ComplexArray) -> RealArray:
            values = np.moveaxis(np.asarray(poly.polyval(z, coefficients.T)), 0, -1)
            return complex_to_real(factor * values)

        return field_map

    return LocalPair(
        phi=evaluator(phi_rows),
        psi=evaluator(psi_rows),
        dimension=phi_rows.shape[0],
        domain=domain or PlanarDomain.disc(0j, 1.0),
        derivatives=LocalDerivatives(
            phi_s=evaluator(phi_rows, 1.0, True),
            phi_t=evaluator(phi_rows, 1j, True),
            psi_s=evaluator(psi_rows, 1.0, True),
            psi_t=evaluator(psi_rows, 1j, True),
        ),
    )


@dataclass(frozen=True)
class _RealPolynomialMap:
    """A map R^2 -> R^2 given by bivariate coefficient grids ``c[i, j] s^i t^j``."""

    first: RealArray
    second: RealArray

    def derived(self, axis: int) -> _RealPolynomialMap:
        return _RealPolynomialMap(
            poly.polyder(self.first, axis=axis), poly.polyder(self.second, axis=axis)
        )

    def __call__(self, z: ComplexArray) -> RealArray:
        return np.stack(
            [poly.polyval2d(z.real, z.imag, self.first), poly.polyval2d(z.real, z.imag, self.second)],
            axis=-1,
        )


def _random_real_polynomial(rng: np.random.Generator, degree: int) -> RealArray:
    coefficients = rng.uniform(-1.0, 1.0, (degree + 1, degree + 1))
    i, j = np.indices(coefficients.shape)
    coefficients[i + j > degree] = 0.0
    return coefficients


def random_local_instance(
    rng: np.random.Generator,
    eps: float = 0.01,
    section_scale: float = 0.1,
    radius: float = 1.0,
) -> LocalPair:
    """
    Exact local supercurve with non-constant ``J~`` and ``D~`` on the disc of the
    given radius, for target dimension 1.

    ``phi = z + eps g`` with a random real cubic ``g``; with ``P = d phi``,
    ``J~ = P J0 P^-1`` makes ``phi`` holomorphic, and ``psi = P chi`` for a random
    holomorphic ``chi`` solves the section equation for
    ``D~ = -(d_s P + J~ d_t P) P^-1``.
    """
    if not 0 < eps * radius**2 < 0.1:
        raise InvalidInputError(f"perturbation size {eps} is too large for radius {radius}")
    g = _RealPolynomialMap(_random_real_polynomial(rng, 3), _random_real_polynomial(rng, 3))
    g_s, g_t = g.derived(0), g.derived(1)
    g_ss, g_st, g_tt = g_s.derived(0), g_s.derived(1), g_t.derived(1)
    chi = section_scale * (rng.standard_normal(3) + 1j * rng.standard_normal(3))
    chi_prime = poly.polyder(chi)
    j0 = standard_structure(1)

    def jacobian(z: ComplexArray) -> RealArray:
        return np.eye(2) + eps * np.stack([g_s(z), g_t(z)], axis=-1)

    def jacobian_s(z: ComplexArray) -> RealArray:
        return eps * np.stack([g_ss(z), g_st(z)], axis=-1)

    def jacobian_t(z: ComplexArray) -> RealArray:
        return eps * np.stack([g_st(z), g_tt(z)], axis=-1)

    def structure(z: ComplexArray) -> RealArray:
        p = jacobian(z)
        return p @ j0 @ np.linalg.inv(p)

    def d_tilde(z: ComplexArray) -> RealArray:
        p = jacobian(z)
        combined = jacobian_s(z) + structure(z) @ jacobian_t(z)
        return -combined @ np.linalg.inv(p)

    def chi_values(z: ComplexArray, coefficients: ComplexArray, factor: complex = 1.0) -> RealArray:
        values = poly.polyval(z, coefficients) * factor
        return np.stack([values.real, values.imag], axis=-1)

    def phi(z: ComplexArray) -> RealArray:
        return np.stack([z.real, z.imag], axis=-1) + eps * g(z)

    def psi(z: ComplexArray) -> RealArray:
        return apply_matrix(jacobian(z), chi_values(z, chi))

    def psi_s(z: ComplexArray) -> RealArray:
        return apply_matrix(jacobian_s(z), chi_values(z, chi)) + apply_matrix(
            jacobian(z), chi_values(z, chi_prime)
        )

    def psi_t(z: ComplexArray) -> RealArray:
        return apply_matrix(jacobian_t(z), chi_values(z, chi)) + apply_matrix(
            jacobian(z), chi_values(z, chi_prime, 1j)
        )

    return LocalPair(
        phi=phi,
        psi=psi,
        dimension=1,
        domain=PlanarDomain.disc(0j, radius),
        j_tilde=structure,
        d_tilde=d_tilde,
        derivatives=LocalDerivatives(
            phi_s=lambda z: np.stack([np.ones_like(z.real), np.zeros_like(z.real)], axis=-1)
            + eps * g_s(z),
            phi_t=lambda z: np.stack([np.zeros_like(z.real), np.ones_like(z.real)], axis=-1)
            + eps * g_t(z),
            psi_s=psi_s,
            psi_t=psi_t,
        ),
    )


def derivative_norm_squared(pair: LocalPair, z: npt.ArrayLike) -> Tuple[RealArray, RealArray]:
    """``|d phi|^2`` and ``|d psi|^2`` with the flat norms ``|d_s .|^2 + |d_t .|^2``."""
    phi_s, phi_t, psi_s, psi_t = pair.partials(z, None if pair.derivatives else INTERNAL_STEP)
    return (
        np.sum(phi_s**2 + phi_t**2, axis=-1),
        np.sum(psi_s**2 + psi_t**2, axis=-1),
    )


def circle_points(center: complex, radius: float, count: int) -> ComplexArray:
    return center + radius * np.exp(2j * math.pi * np.arange(count) / count)
