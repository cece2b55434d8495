"""
Global holomorphic supercurves on the sphere.

A curve into CP^n is stored as ``n + 1`` homogeneous polynomials of formal degree
``k``; coefficient ``j`` multiplies ``Z0^j Z1^(k-j)``, which is the coefficient of
``z^j`` of the chart-0 lift ``W(z, 1)``. The chart-1 lift ``W(1, w)`` uses the
reversed arrays.

A section of ``L_d (x) phi*T CP^n`` is stored through the Euler sequence as a
homogeneous tuple ``V`` of formal degree ``k + d``; the tangent vector at a point is
``[V]`` at ``W``. For ``d = -2`` one extra coefficient multiplies the section
``d phi``, which spans the part that has no polynomial lift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import numpy.polynomial.polynomial as poly
import numpy.typing as npt

from supercurves.exceptions import (
    GhostSectionError,
    InvalidInputError,
    UnsupportedConnectionError,
)
from supercurves.geometry import (
    LineBundleSpec,
    MoebiusTransform,
    SpherePoint,
    TargetKind,
    fs_quotient_norm_squared,
)
from supercurves.local import (
    LocalDerivatives,
    LocalPair,
    PlanarDomain,
    complex_to_real,
    complex_matrix_to_real,
    pointwise_residuals,
    real_to_complex,
)

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

COPRIME_MARGIN = 1e-10


class Connection(str, Enum):
    """Connections on the target available to the section equation."""

    TRIVIAL = "trivial"
    LEVI_CIVITA = "levi-civita"


def _as_coefficients(values: npt.ArrayLike, name: str) -> ComplexArray:
    array = np.array(values, dtype=np.complex128)
    if array.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-dimensional array, got {array.ndim}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    array.setflags(write=False)
    return array


def chart_coefficients(coefficients: ComplexArray, chart: int) -> ComplexArray:
    """Ascending coefficients of the chart polynomials, shape ``(rows, degree + 1)``."""
    return coefficients if chart == 0 else coefficients[:, ::-1]


def evaluate_rows(coefficients: ComplexArray, z: npt.ArrayLike) -> ComplexArray:
    """Evaluate every row polynomial at ``z``; result has shape ``z.shape + (rows,)``."""
    points = np.asarray(z, dtype=np.complex128)
    if coefficients.shape[1] == 0:
        return np.zeros(points.shape + (coefficients.shape[0],), dtype=np.complex128)
    values = poly.polyval(points, coefficients.T)
    return np.moveaxis(np.asarray(values, dtype=np.complex128), 0, -1)


def derivative_rows(coefficients: ComplexArray) -> ComplexArray:
    if coefficients.shape[1] <= 1:
        return np.zeros((coefficients.shape[0], 1), dtype=np.complex128)
    return np.asarray(poly.polyder(coefficients.T, axis=0).T, dtype=np.complex128)


def compose_homogeneous(coefficients: ComplexArray, moebius: MoebiusTransform) -> ComplexArray:
    """Coefficients of ``V(MZ)`` for homogeneous ``V``, by exact polynomial algebra."""
    rows, length = coefficients.shape
    if length == 0:
        return coefficients.copy()
    degree = length - 1
    numerator = np.array([moebius.b, moebius.a])
    denominator = np.array([moebius.d, moebius.c])
    result = np.zeros((rows, length), dtype=np.complex128)
    for j in range(length):
        term = poly.polymul(
            poly.polypow(numerator, j), poly.polypow(denominator, degree - j)
        )
        term = np.asarray(term, dtype=np.complex128)[:length]
        result[:, : term.size] += np.outer(coefficients[:, j], term)
    return result


@dataclass(frozen=True)
class GlobalCurve:
    """
    Homogeneous polynomial lift ``W = (W_0, ..., W_n)`` of a map into CP^n, or the
    value of a constant map into flat C^n.

    Row ``j`` holds the ascending chart-0 coefficients of ``W_j``. On CP^1 the map is
    ``z -> W_0(z) / W_1(z)``, matching ``z = Z0 / Z1`` on the source.
    """

    target: TargetKind
    coefficients: ComplexArray

    def __post_init__(self) -> None:
        coefficients = _as_coefficients(self.coefficients, "curve coefficients")
        object.__setattr__(self, "coefficients", coefficients)
        if self.target is TargetKind.FLAT:
            if coefficients.shape[1] != 1:
                raise InvalidInputError(
                    "maps from the sphere into flat C^n are constant; store them "
                    "with degree 0"
                )
        elif coefficients.shape[0] < 2:
            raise InvalidInputError("a curve into CP^n needs at least 2 components")
        elif not np.any(coefficients):
            raise InvalidInputError("curve coefficients are all zero")
        else:
            margin = self.common_zero_margin()
            if margin < COPRIME_MARGIN:
                raise InvalidInputError(
                    f"components have a common zero (margin {margin:.3e}); "
                    "the lift must be coprime"
                )

    @classmethod
    def projective(cls, coefficients: npt.ArrayLike) -> GlobalCurve:
        return cls(TargetKind.PROJECTIVE, np.asarray(coefficients, dtype=np.complex128))

    @classmethod
    def constant(cls, point: npt.ArrayLike, target: TargetKind = TargetKind.PROJECTIVE) -> GlobalCurve:
        values = np.asarray(point, dtype=np.complex128).reshape(-1, 1)
        return cls(target, values)

    @property
    def degree(self) -> int:
        return int(self.coefficients.shape[1] - 1)

    @property
    def rows(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def dimension(self) -> int:
        """Complex dimension n of the target."""
        return self.rows - 1 if self.target is TargetKind.PROJECTIVE else self.rows

    def is_constant(self) -> bool:
        return self.degree == 0

    def common_zero_margin(self) -> float:
        """
        Smallest value of ``|W|`` over the zeros of the first nonzero component,
        with ``W`` evaluated at unit homogeneous representatives and scaled by the
        largest coefficient.
        """
        if self.degree == 0:
            return 1.0
        scale = float(np.abs(self.coefficients).max())
        leading = next(row for row in self.coefficients if np.any(row))
        trimmed = poly.polytrim(leading)
        candidates: List[ComplexArray] = []
        if trimmed.size - 1 < self.degree:
            candidates.append(np.array([1.0, 0.0], dtype=np.complex128))
        if trimmed.size > 1:
            for root in poly.polyroots(trimmed):
                candidates.append(np.array([root, 1.0]) / math.hypot(abs(root), 1.0))
        margins = [
            float(np.linalg.norm(self.lift_homogeneous(candidate))) / scale
            for candidate in candidates
        ]
        return min(margins, default=1.0)

    def lift_homogeneous(self, points: npt.ArrayLike) -> ComplexArray:
        """``W(Z)`` for homogeneous ``Z`` of shape ``(..., 2)``."""
        values = np.asarray(points, dtype=np.complex128)
        powers = np.arange(self.degree + 1)
        monomials = values[..., 0, None] ** powers * values[..., 1, None] ** (
            self.degree - powers
        )
        return np.asarray(monomials @ self.coefficients.T, dtype=np.complex128)

    def chart_lift(self, z: npt.ArrayLike, chart: int) -> Tuple[ComplexArray, ComplexArray]:
        """Lift ``W`` and its derivative in the chart coordinate, shape ``(..., rows)``."""
        coefficients = chart_coefficients(self.coefficients, chart)
        return evaluate_rows(coefficients, z), evaluate_rows(
            derivative_rows(coefficients), z
        )

    def evaluate(self, point: SpherePoint) -> ComplexArray:
        """Unit homogeneous vector (CP^n) or point (C^n) of ``phi(point)``."""
        lift, _ = self.chart_lift(np.array([point.z]), point.chart)
        value = lift[0]
        if self.target is TargetKind.PROJECTIVE:
            return value / np.linalg.norm(value)
        return value

    def energy_density(self, z: npt.ArrayLike, chart: int) -> RealArray:
        """``1/2 |d phi|^2 dvol`` per unit of coordinate area, i.e. ``g(u', u')``."""
        if self.target is TargetKind.FLAT or self.is_constant():
            return np.zeros(np.shape(z))
        lift, derivative = self.chart_lift(z, chart)
        return fs_quotient_norm_squared(lift, derivative)

    def pullback(self, moebius: MoebiusTransform) -> GlobalCurve:
        return GlobalCurve(self.target, compose_homogeneous(self.coefficients, moebius))

    def normalized(self) -> ComplexArray:
        if self.target is TargetKind.FLAT:
            return self.coefficients
        flat = self.coefficients.ravel()
        return self.coefficients / flat[np.argmax(np.abs(flat))]

    def same_as(self, other: GlobalCurve, tolerance: float = 1e-10) -> bool:
        if self.target != other.target or self.coefficients.shape != other.coefficients.shape:
            return False
        return bool(np.abs(self.normalized() - other.normalized()).max() <= tolerance)


@dataclass(frozen=True)
class SuperSection:
    curve: GlobalCurve
    bundle: LineBundleSpec
    coefficients: ComplexArray
    derivative_coefficient: complex = 0j

    def __post_init__(self) -> None:
        coefficients = _as_coefficients(self.coefficients, "section coefficients")
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "derivative_coefficient", complex(self.derivative_coefficient))
        if coefficients.shape[0] != self.curve.rows:
            raise InvalidInputError(
                f"section has {coefficients.shape[0]} components, curve has {self.curve.rows}"
            )
        expected = max(self.formal_degree + 1, 0)
        if coefficients.shape[1] != expected:
            if np.any(coefficients):
                if self.formal_degree < 0:
                    self._refuse_negative_degree()
                raise InvalidInputError(
                    f"section polynomials must have formal degree {self.formal_degree} "
                    f"({expected} coefficients), got {coefficients.shape[1]}"
                )
            object.__setattr__(
                self, "coefficients", np.zeros((self.curve.rows, expected), dtype=np.complex128)
            )
        if self.derivative_coefficient != 0:
            if self.bundle.degree != -2:
                raise InvalidInputError("the d phi component only exists for d = -2")
            if self.curve.is_constant():
                raise GhostSectionError(
                    "d phi vanishes for a constant map; psi = 0 vanishes identically"
                )

    def _refuse_negative_degree(self) -> None:
        if self.curve.is_constant() and self.bundle.degree < 0:
            raise GhostSectionError(
                "a constant map admits no nonzero section for negative bundle degree "
                "(psi = 0 vanishes identically); no finite-energy smooth instance exists"
            )
        raise InvalidInputError(
            f"formal section degree {self.formal_degree} is negative, only psi = 0 exists"
        )

    @classmethod
    def zero(cls, curve: GlobalCurve, degree: int) -> SuperSection:
        return cls(curve, LineBundleSpec(degree), np.zeros((curve.rows, 0), dtype=np.complex128))

    @property
    def formal_degree(self) -> int:
        if self.curve.target is TargetKind.FLAT:
            return self.bundle.degree
        return self.curve.degree + self.bundle.degree

    def is_zero(self) -> bool:
        if self.derivative_coefficient != 0:
            return False
        if self.curve.target is TargetKind.FLAT:
            return not np.any(self.coefficients)
        return self._lifts_into_curve()

    def _lifts_into_curve(self) -> bool:
        """True when ``V = W q``, i.e. ``[V] = 0`` everywhere."""
        if not np.any(self.coefficients):
            return True
        samples = np.exp(2j * np.pi * np.arange(7) / 7) * 0.7
        lift, _ = self.curve.chart_lift(samples, 0)
        tangent, _ = self.chart_tangent(samples, 0)
        scale = max(float(np.abs(self.coefficients).max()), 1e-300)
        norms = fs_quotient_norm_squared(lift, tangent)
        return bool(np.sqrt(norms.max()) <= 1e-12 * scale)

    def chart_tangent(self, z: npt.ArrayLike, chart: int) -> Tuple[ComplexArray, ComplexArray]:
        """
        The homogeneous tangent vector in the given source chart and its derivative.

        The value is chart-trivialized: ``V`` is evaluated at the chart-normalized
        representative, and for ``d = -2`` the ``d phi`` part is ``dW/dz`` in chart 0
        and ``-dW/dw`` in chart 1.
        """
        coefficients = chart_coefficients(self.coefficients, chart)
        value = evaluate_rows(coefficients, z)
        derivative = evaluate_rows(derivative_rows(coefficients), z)
        if self.derivative_coefficient != 0:
            lift_coefficients = chart_coefficients(self.curve.coefficients, chart)
            first = derivative_rows(lift_coefficients)
            second = derivative_rows(first)
            sign = 1.0 if chart == 0 else -1.0
            factor = sign * self.derivative_coefficient
            value = value + factor * evaluate_rows(first, z)
            derivative = derivative + factor * evaluate_rows(second, z)
        return value, derivative

    def fiber_weight(self, z: npt.ArrayLike) -> RealArray:
        return self.bundle.weight(z)

    def norm_squared(self, z: npt.ArrayLike, chart: int) -> RealArray:
        """Pointwise ``|psi|^2``, including the 1/2 of the bundle metric."""
        points = np.asarray(z, dtype=np.complex128)
        tangent, _ = self.chart_tangent(points, chart)
        if self.curve.target is TargetKind.FLAT:
            target_norm = np.sum(np.abs(tangent) ** 2, axis=-1)
        else:
            lift, _ = self.curve.chart_lift(points, chart)
            target_norm = fs_quotient_norm_squared(lift, tangent)
        return 0.5 * self.fiber_weight(points) * target_norm

    def pullback(self, moebius: MoebiusTransform) -> SuperSection:
        """``Phi_m^-1 o psi o m``: the homogeneous data composed with ``M``."""
        return SuperSection(
            self.curve.pullback(moebius),
            self.bundle,
            compose_homogeneous(self.coefficients, moebius),
            self.derivative_coefficient,
        )

    def scaled(self, factor: complex) -> SuperSection:
        return SuperSection(
            self.curve,
            self.bundle,
            self.coefficients * factor,
            self.derivative_coefficient * factor,
        )


def pullback_curve(curve: GlobalCurve, moebius: MoebiusTransform) -> GlobalCurve:
    """``phi o m`` by exact polynomial composition; the degree is preserved."""
    return curve.pullback(moebius)


def pullback_section(section: SuperSection, moebius: MoebiusTransform) -> SuperSection:
    """
    ``Phi_m^-1 o psi o m``.

    Composing the homogeneous data with the SL(2,C) matrix realizes the inverse
    spin lift: in chart 0 the new chart value is ``(cz + d)^d psi(m(z))``, which is
    ``lift_factor(m, d, z)^-1`` times the old value at ``m(z)``.
    """
    if section.bundle.degree == 0:
        raise InvalidInputError("bundle degree must be nonzero")
    return section.pullback(moebius)


def affine_data(
    lift: ComplexArray,
    lift_derivative: ComplexArray,
    tangent: ComplexArray,
    tangent_derivative: ComplexArray,
    chart: int,
) -> Tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]:
    """
    Affine coordinates ``u`` and tangent coordinates ``xi`` in target chart ``chart``
    (where ``W_chart != 0``), with their derivatives.
    """
    others = [index for index in range(lift.shape[-1]) if index != chart]
    base = lift[..., chart : chart + 1]
    base_derivative = lift_derivative[..., chart : chart + 1]
    tangent_base = tangent[..., chart : chart + 1]
    tangent_base_derivative = tangent_derivative[..., chart : chart + 1]
    w, w_prime = lift[..., others], lift_derivative[..., others]
    v, v_prime = tangent[..., others], tangent_derivative[..., others]
    u = w / base
    u_prime = (w_prime * base - w * base_derivative) / base**2
    numerator = v * base - w * tangent_base
    numerator_prime = (
        v_prime * base + v * base_derivative - w_prime * tangent_base - w * tangent_base_derivative
    )
    xi = numerator / base**2
    xi_prime = (numerator_prime * base - 2 * numerator * base_derivative) / base**3
    return u, u_prime, xi, xi_prime


def christoffel_action(u: ComplexArray, direction: ComplexArray) -> ComplexArray:
    """
    Matrix of ``xi -> Gamma_u(direction, xi)`` for the Fubini-Study metric in affine
    coordinates, where ``Gamma^i_jk = -(delta^i_j conj(u_k) + delta^i_k conj(u_j)) / (1 + |u|^2)``.
    """
    modulus = 1.0 + np.sum(np.abs(u) ** 2, axis=-1)
    pairing = np.sum(u.conj() * direction, axis=-1)
    identity = np.eye(u.shape[-1])
    matrix = np.einsum("...i,...k->...ik", direction, u.conj()) + pairing[..., None, None] * identity
    return -matrix / modulus[..., None, None]


def levi_civita_connection(dimension: int) -> Callable[[RealArray, RealArray], RealArray]:
    """
    ``D(x, v) = Gamma_x(v, .) + J0 Gamma_x(J0 v, .)`` in real form.

    ``D(phi) . d_s phi`` is then the zeroth-order term of the section equation for
    the pulled-back Levi-Civita connection along a J0-holomorphic map.
    """

    def connection(point: RealArray, direction: RealArray) -> RealArray:
        u = real_to_complex(point, dimension)
        v = real_to_complex(direction, dimension)
        action = christoffel_action(u, v) + 1j * christoffel_action(u, 1j * v)
        return complex_matrix_to_real(action)

    return connection


@dataclass
class ResidualReport:
    curve: float
    section: float
    evaluated_points: int
    derivative_method: str
    per_chart: Dict[str, Tuple[float, float]] = field(default_factory=dict)


def source_grid(resolution: int, radius: float = 1.0) -> ComplexArray:
    axis = np.linspace(-radius, radius, resolution)
    s, t = np.meshgrid(axis, axis, indexing="xy")
    points = (s + 1j * t).ravel()
    return points[np.abs(points) <= radius]


def global_local_pair(
    section: SuperSection, source_chart: int, target_chart: Optional[int], connection: Connection
) -> LocalPair:
    """The local supercurve seen through one source chart and one target chart."""
    curve = section.curve
    dimension = curve.dimension

    def data(z: ComplexArray) -> Tuple[ComplexArray, ComplexArray, ComplexArray, ComplexArray]:
        lift, lift_derivative = curve.chart_lift(z, source_chart)
        tangent, tangent_derivative = section.chart_tangent(z, source_chart)
        if target_chart is None:
            return lift, lift_derivative, tangent, tangent_derivative
        return affine_data(lift, lift_derivative, tangent, tangent_derivative, target_chart)

    def phi(z: ComplexArray) -> RealArray:
        return complex_to_real(data(z)[0])

    def psi(z: ComplexArray) -> RealArray:
        return complex_to_real(data(z)[2])

    def derivative(index: int, direction: complex) -> Callable[[ComplexArray], RealArray]:
        return lambda z: complex_to_real(direction * data(z)[index])

    closed_forms = LocalDerivatives(
        phi_s=derivative(1, 1.0),
        phi_t=derivative(1, 1j),
        psi_s=derivative(3, 1.0),
        psi_t=derivative(3, 1j),
    )
    use_levi_civita = connection is Connection.LEVI_CIVITA and target_chart is not None
    return LocalPair(
        phi=phi,
        psi=psi,
        dimension=dimension,
        domain=PlanarDomain.disc(0j, 1.5),
        connection=levi_civita_connection(dimension) if use_levi_civita else None,
        derivatives=closed_forms,
    )


def residual_global(
    curve: GlobalCurve,
    section: SuperSection,
    connection: Connection = Connection.LEVI_CIVITA,
    resolution: int = 41,
    h: Optional[float] = None,
) -> ResidualReport:
    """
    Sup residuals of both defining equations over the two source-chart unit discs.

    Each sample point uses the target chart in which its lift component is largest.
    With ``h`` omitted the closed-form chart derivatives are used; otherwise
    central differences of step ``h``.
    """
    if section.curve is not curve and not section.curve.same_as(curve):
        raise InvalidInputError("section does not lie over the given curve")
    if curve.target is TargetKind.PROJECTIVE and connection is Connection.TRIVIAL:
        raise UnsupportedConnectionError(
            "the trivial connection is not a connection on T CP^n; use levi-civita"
        )
    if h is not None and not 0 < h <= 0.1:
        raise InvalidInputError(f"finite-difference step must lie in (0, 0.1], got {h}")
    points = source_grid(resolution)
    use_closed_forms = h is None
    step = 1e-3 if h is None else h
    report = ResidualReport(0.0, 0.0, 0, "closed-form" if use_closed_forms else f"central h={step:g}")
    for source_chart in (0, 1):
        lift, _ = curve.chart_lift(points, source_chart)
        if curve.target is TargetKind.PROJECTIVE:
            choice = np.argmax(np.abs(lift), axis=-1)
            target_charts: List[Optional[int]] = list(range(curve.rows))
        else:
            choice = np.zeros(points.shape, dtype=int)
            target_charts = [None]
        for index, target_chart in enumerate(target_charts):
            selected = points[choice == index]
            if selected.size == 0:
                continue
            pair = global_local_pair(section, source_chart, target_chart, connection)
            curve_residual, section_residual = pointwise_residuals(
                pair, selected, step, use_closed_forms
            )
            label = f"source {source_chart} / target {target_chart}"
            report.per_chart[label] = (float(curve_residual.max()), float(section_residual.max()))
            report.curve = max(report.curve, float(curve_residual.max()))
            report.section = max(report.section, float(section_residual.max()))
            report.evaluated_points += int(selected.size)
    logger.debug(f"global residuals ({report.derivative_method}): {report.curve:.3e}, {report.section:.3e}")
    return report


class InstanceKind(str, Enum):
    """Catalog of exact holomorphic supercurves."""

    IDENTITY = "identity"
    POWER = "power"
    BUBBLE = "bubble"
    NESTED = "nested"
    RANDOM = "random"
    CONSTANT = "constant"
    FLAT = "flat"


def _power_coefficients(degree: int) -> ComplexArray:
    coefficients = np.zeros((2, degree + 1), dtype=np.complex128)
    coefficients[0, degree] = 1.0
    coefficients[1, 0] = 1.0
    return coefficients


def _section_for(
    curve: GlobalCurve, degree: int, kind: str, rng: np.random.Generator, scale: float
) -> SuperSection:
    if kind == "zero":
        return SuperSection.zero(curve, degree)
    if kind == "derivative":
        base = SuperSection.zero(curve, degree)
        return SuperSection(curve, base.bundle, base.coefficients, scale)
    if kind != "random":
        raise InvalidInputError(f"unknown section kind {kind!r}", "section")
    formal = degree if curve.target is TargetKind.FLAT else curve.degree + degree
    length = formal + 1
    if length <= 0:
        if curve.is_constant() and degree < 0:
            raise GhostSectionError(
                "a constant map admits no nonzero section for negative bundle degree "
                "(psi = 0 vanishes identically)"
            )
        raise InvalidInputError(f"no nonzero section exists for d = {degree} over this curve")
    values = scale * (
        rng.standard_normal((curve.rows, length)) + 1j * rng.standard_normal((curve.rows, length))
    )
    derivative = 0j
    if degree == -2 and not curve.is_constant():
        derivative = complex(scale * rng.standard_normal(), scale * rng.standard_normal())
    return SuperSection(curve, LineBundleSpec(degree), values, derivative)


def make_instance(kind: str, **params: Any) -> Tuple[GlobalCurve, SuperSection]:
    """
    Build a catalog supercurve.

    Parameters (all optional): ``degree`` (power/random), ``eps`` (bubble/nested),
    ``point`` (constant), ``bundle_degree`` (default -1), ``section`` one of
    ``zero``, ``random``, ``derivative`` (default ``zero``), ``scale``, ``seed``.
    """
    try:
        instance = InstanceKind(kind)
    except ValueError as error:
        raise InvalidInputError(
            f"unknown instance kind {kind!r}; expected one of "
            f"{', '.join(item.value for item in InstanceKind)}",
            "kind",
        ) from error
    bundle_degree = int(params.get("bundle_degree", -1))
    section_kind = str(params.get("section", "zero"))
    scale = float(params.get("scale", 1.0))
    rng = np.random.default_rng(params.get("seed", 0))
    if instance is InstanceKind.IDENTITY:
        curve = GlobalCurve.projective(_power_coefficients(1))
    elif instance is InstanceKind.POWER:
        degree = int(params.get("degree", 2))
        if degree < 1:
            raise InvalidInputError(f"power degree must be >= 1, got {degree}", "degree")
        curve = GlobalCurve.projective(_power_coefficients(degree))
    elif instance is InstanceKind.BUBBLE:
        eps = float(params.get("eps", 0.01))
        if eps == 0:
            raise InvalidInputError("eps = 0 is the singular member of the bubble family", "eps")
        curve = GlobalCurve.projective([[eps, 0, 1], [0, 1, 0]])
    elif instance is InstanceKind.NESTED:
        eps = float(params.get("eps", 0.01))
        if eps == 0:
            raise InvalidInputError("eps = 0 is the singular member of the nested family", "eps")
        curve = GlobalCurve.projective(
            [[0, eps + eps**3, 0, 1], [eps**3, 0, 1, 0]]
        )
    elif instance is InstanceKind.RANDOM:
        degree = int(params.get("degree", 2))
        if degree < 1:
            raise InvalidInputError(f"random degree must be >= 1, got {degree}", "degree")
        spread = float(params.get("spread", 0.3))
        dimension = int(params.get("dimension", 1))
        coefficients = np.zeros((dimension + 1, degree + 1), dtype=np.complex128)
        coefficients[0, 0] = 1.0
        for row in range(1, dimension + 1):
            coefficients[row, min(row, degree)] = 1.0
        coefficients += spread * (
            rng.uniform(-1, 1, coefficients.shape) + 1j * rng.uniform(-1, 1, coefficients.shape)
        )
        curve = GlobalCurve.projective(coefficients)
    elif instance is InstanceKind.FLAT:
        point = np.asarray(params.get("point", [0.5, -0.25]), dtype=np.complex128)
        curve = GlobalCurve.constant(point, TargetKind.FLAT)
    else:
        point = np.asarray(params.get("point", [1.0, 0.5]), dtype=np.complex128)
        curve = GlobalCurve.constant(point)
    section = _section_for(curve, bundle_degree, section_kind, rng, scale)
    logger.debug(f"built {instance.value} instance of degree {curve.degree}, d={bundle_degree}")
    return curve, section


def random_moebius_pair(seed: int, spread: float = 0.5) -> Tuple[MoebiusTransform, MoebiusTransform]:
    rng = np.random.default_rng(seed)
    return MoebiusTransform.random(rng, spread), MoebiusTransform.random(rng, spread)


__all__ = [
    "Connection",
    "GlobalCurve",
    "InstanceKind",
    "ResidualReport",
    "SuperSection",
    "make_instance",
    "pullback_curve",
    "pullback_section",
    "residual_global",
]
