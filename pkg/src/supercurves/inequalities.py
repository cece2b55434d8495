"""
Checks of the mean value inequalities, the local isoperimetric inequality and the
decay diagnostic on local supercurves.

All checks return an ``InequalityReport``; violated hypotheses are reported as
flags and never raised. Sup norms of the structure fields and their derivatives are
taken over a tensor grid of the relevant disc and multiplied by ``SAFETY_FACTOR``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from logging import getLogger
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import stats

from supercurves.exceptions import InvalidInputError
from supercurves.local import (
    LocalPair,
    PlanarDomain,
    circle_points,
    derivative_norm_squared,
    polynomial_pair,
    random_local_instance,
    standard_structure,
)
from supercurves.quadrature import integrate_loop, integrate_planar

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
MatrixField = Callable[[ComplexArray], RealArray]

SAFETY_FACTOR = 2.0
DEFAULT_RESOLUTION = 256
DERIVATIVE_STEP = 1e-3
COMPARISON_SLACK = 1e-9
ISOPERIMETRIC_CONSTANT = 1 / (4 * math.pi)


@dataclass
class HypothesisCheck:
    name: str
    value: float
    bound: float
    passed: bool


@dataclass
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    constants: Dict[str, float] = field(default_factory=dict)
    hypothesis_checks: List[HypothesisCheck] = field(default_factory=list)
    passed: bool = field(init=False)

    def __post_init__(self) -> None:
        self.passed = self.applicable and self.lhs <= self.rhs + COMPARISON_SLACK * (
            1.0 + abs(self.rhs)
        )

    @property
    def applicable(self) -> bool:
        return all(check.passed for check in self.hypothesis_checks)


def _below(name: str, value: float, bound: float) -> HypothesisCheck:
    return HypothesisCheck(name, value, bound, value < bound)


def _partial(matrix: MatrixField, direction: complex, h: float) -> MatrixField:
    return lambda z: (matrix(z + h * direction) - matrix(z - h * direction)) / (2 * h)


def _product(first: MatrixField, second: MatrixField) -> MatrixField:
    return lambda z: np.einsum("...ij,...jk->...ik", first(z), second(z))


def _sum(*terms: MatrixField, signs: Sequence[float] = ()) -> MatrixField:
    factors = list(signs) or [1.0] * len(terms)
    return lambda z: sum(factor * term(z) for factor, term in zip(factors, terms))


class StructureCalculus:
    """
    The coefficient fields of the second-order equations satisfied by ``psi``:
    ``L = -d_s D + d_t(J D)``, ``M = -D + d_t J`` and ``N = -d_s J + J D``, plus
    the first derivatives used by the second mean value inequality.
    """

    def __init__(self, pair: LocalPair, h: float = DERIVATIVE_STEP) -> None:
        self.pair = pair
        self.h = h
        structure: MatrixField = pair.structure_at
        connection: MatrixField = pair.connection_at

        def d_s(matrix: MatrixField) -> MatrixField:
            return _partial(matrix, 1.0, h)

        def d_t(matrix: MatrixField) -> MatrixField:
            return _partial(matrix, 1j, h)

        self.L = _sum(d_s(connection), d_t(_product(structure, connection)), signs=(-1.0, 1.0))
        self.M = _sum(connection, d_t(structure), signs=(-1.0, 1.0))
        self.N = _sum(d_s(structure), _product(structure, connection), signs=(-1.0, 1.0))
        self.X = d_s(self.L)
        self.Y = _sum(self.L, d_s(self.M))
        self.Z = d_s(self.N)
        self.X_mirror = d_t(self.L)
        self.Y_mirror = _sum(self.L, d_t(self.N))
        self.Z_mirror = d_t(self.M)

    def sup_norms(self, center: complex, radius: float, resolution: int) -> Dict[str, float]:
        reach = radius + 3 * self.h
        if not self.pair.domain.contains_disc(center, reach):
            raise InvalidInputError(
                f"the disc of radius {radius} (plus derivative margin) leaves the domain"
            )
        points = PlanarDomain.disc(center, radius).grid(resolution)
        norms = {}
        for name in ("L", "M", "N", "X", "Y", "Z", "X_mirror", "Y_mirror", "Z_mirror"):
            values = getattr(self, name)(points)
            norms[name] = SAFETY_FACTOR * float(
                np.linalg.norm(values, ord=2, axis=(-2, -1)).max(initial=0.0)
            )
        return norms


def _first_constant(norms: Dict[str, float]) -> float:
    """``a`` from ``2 sqrt(a) = 2|L| + |M|^2/2 + |N|^2/2``."""
    return (0.5 * (2 * norms["L"] + 0.5 * norms["M"] ** 2 + 0.5 * norms["N"] ** 2)) ** 2


def _second_constants(norms: Dict[str, float]) -> Dict[str, float]:
    a = _first_constant(norms)
    base = norms["M"] ** 2 + norms["N"] ** 2 + 4
    p = (norms["X"] ** 2 + 4 * norms["Y"] + norms["Z"] ** 2 + base) ** 2 / 64
    q = (norms["X_mirror"] ** 2 + 4 * norms["Y_mirror"] + norms["Z_mirror"] ** 2 + base) ** 2 / 64
    return {"a": a, "P": p, "Q": q, "c": (p + q) / 4, "d": a / 16}


def _psi_integral(pair: LocalPair, center: complex, radius: float) -> float:
    return integrate_planar(
        lambda z: np.sum(pair.psi_at(z) ** 2, axis=-1), center, radius, rel_tol=1e-8
    )


def _dpsi_integral(pair: LocalPair, center: complex, radius: float) -> float:
    return integrate_planar(
        lambda z: derivative_norm_squared(pair, z)[1], center, radius, rel_tol=1e-8
    )


def _require_radius(radius: float) -> None:
    if not radius > 0:
        raise InvalidInputError(f"radius must be positive, got {radius}")


def mvi1_check(
    pair: LocalPair,
    radius: float,
    resolution: int = DEFAULT_RESOLUTION,
    center: complex = 0j,
) -> InequalityReport:
    """``|psi(0)|^2 <= a r^2 / 8 + 8 / (pi r^2) int_{B_r} |psi|^2``."""
    _require_radius(radius)
    norms = StructureCalculus(pair).sup_norms(center, radius, resolution)
    a = _first_constant(norms)
    mass = _psi_integral(pair, center, radius)
    lhs = float(np.sum(pair.psi_at(np.array([center]))[0] ** 2))
    rhs = a * radius**2 / 8 + 8 / (math.pi * radius**2) * mass
    report = InequalityReport(
        "first mean value inequality",
        lhs,
        rhs,
        {"a": a, "L": norms["L"], "M": norms["M"], "N": norms["N"], "r": radius},
        [_below("int_B_r |psi|^2", mass, math.pi / 16)],
    )
    logger.debug(f"mvi1: lhs={lhs:.6e} rhs={rhs:.6e} a={a:.6e}")
    return report


def mvi2_check(
    pair: LocalPair,
    radius: float,
    resolution: int = DEFAULT_RESOLUTION,
    center: complex = 0j,
) -> InequalityReport:
    """
    ``|d psi(0)|^2 <= 1/4 + c r^2 + d r^4 + 8 / (pi r^2) int_{B_r} |d psi|^2`` with
    ``c = (P + Q) / 4`` and ``d = a / 16``; the constants are taken over ``B_2r``.
    """
    _require_radius(radius)
    norms = StructureCalculus(pair).sup_norms(center, 2 * radius, resolution)
    constants = _second_constants(norms)
    outer_mass = _psi_integral(pair, center, 2 * radius)
    derivative_mass = _dpsi_integral(pair, center, radius)
    lhs = float(derivative_norm_squared(pair, np.array([center]))[1][0])
    rhs = (
        0.25
        + constants["c"] * radius**2
        + constants["d"] * radius**4
        + 8 / (math.pi * radius**2) * derivative_mass
    )
    constants["r"] = radius
    return InequalityReport(
        "second mean value inequality",
        lhs,
        rhs,
        constants,
        [
            _below("int_B_2r |psi|^2", outer_mass, math.pi / 16),
            _below("int_B_r |d psi|^2", derivative_mass, math.pi / 64),
        ],
    )


def mvi_corollary_check(
    pair: LocalPair,
    radius: float,
    resolution: int = DEFAULT_RESOLUTION,
    angles: int = 64,
) -> InequalityReport:
    """
    ``max_theta |d psi(r e^(i theta))|^2 <= C + 8 / (pi r^2) int_{B_2r} |d psi|^2`` with
    ``C = 1/4 + c r^2 + d r^4`` and constants over ``B_3r``.
    """
    _require_radius(radius)
    norms = StructureCalculus(pair).sup_norms(0j, 3 * radius, resolution)
    constants = _second_constants(norms)
    outer_mass = _psi_integral(pair, 0j, 3 * radius)
    derivative_mass = _dpsi_integral(pair, 0j, 2 * radius)
    circle = circle_points(0j, radius, angles)
    lhs = float(derivative_norm_squared(pair, circle)[1].max())
    offset = 0.25 + constants["c"] * radius**2 + constants["d"] * radius**4
    constants["C"] = offset
    constants["r"] = radius
    return InequalityReport(
        "mean value corollary",
        lhs,
        offset + 8 / (math.pi * radius**2) * derivative_mass,
        constants,
        [
            _below("int_B_3r |psi|^2", outer_mass, math.pi / 16),
            _below("int_B_2r |d psi|^2", derivative_mass, math.pi / 64),
        ],
    )


def heinz_check(
    w: Callable[[ComplexArray], RealArray],
    radius: float,
    a: float,
    b: float,
    resolution: int = 128,
    h: float = DERIVATIVE_STEP,
) -> InequalityReport:
    """
    The scalar estimate under both mean value inequalities: if ``w >= 0``,
    ``Laplacian w >= -a - b w^2`` and ``int_{B_r} w < pi / (16 b)`` then
    ``w(0) <= a r^2 / 8 + 8 / (pi r^2) int_{B_r} w``.
    """
    _require_radius(radius)
    if a < 0 or not b > 0:
        raise InvalidInputError(f"need a >= 0 and b > 0, got a={a}, b={b}")
    points = PlanarDomain.disc(0j, radius).grid(resolution)
    values = np.asarray(w(points), dtype=np.float64)
    laplacian = (
        w(points + h) + w(points - h) + w(points + 1j * h) + w(points - 1j * h) - 4 * values
    ) / h**2
    subsolution_defect = float(np.max(-a - b * values**2 - laplacian, initial=-math.inf))
    mass = integrate_planar(w, 0j, radius, rel_tol=1e-8)
    lhs = float(np.asarray(w(np.array([0j])))[0])
    rhs = a * radius**2 / 8 + 8 / (math.pi * radius**2) * mass
    return InequalityReport(
        "heinz estimate",
        lhs,
        rhs,
        {"a": a, "b": b, "r": radius},
        [
            HypothesisCheck("min w", float(values.min(initial=0.0)), 0.0, bool(values.min(initial=0.0) >= 0)),
            HypothesisCheck(
                "max(-a - b w^2 - Laplacian w)",
                subsolution_defect,
                0.0,
                subsolution_defect <= 1e-6 * (1 + a),
            ),
            _below("int_B_r w", mass, math.pi / (16 * b)),
        ],
    )


def _averaged_metric(metric: Optional[npt.ArrayLike], dimension: int) -> RealArray:
    size = 2 * dimension
    if metric is None:
        return np.eye(size)
    values = np.asarray(metric, dtype=np.float64)
    if values.shape != (size, size):
        raise InvalidInputError(f"metric must have shape {(size, size)}, got {values.shape}")
    values = 0.5 * (values + values.T)
    j0 = standard_structure(dimension)
    values = 0.5 * (values + j0.T @ values @ j0)
    if np.linalg.eigvalsh(values).min() <= 0:
        raise InvalidInputError("metric must be positive definite")
    return values


def isoperimetric_check(
    pair: LocalPair,
    radius: float,
    constant: float = ISOPERIMETRIC_CONSTANT,
    metric: Optional[npt.ArrayLike] = None,
) -> InequalityReport:
    """
    ``int_{B_r} psi* omega_0 <= c l(gamma_r)^2`` for the loop ``gamma_r = psi(r e^(i theta))``,
    with ``omega_0(v, w) = <J0 v, w>`` for the J0-averaged scalar product.
    """
    _require_radius(radius)
    if constant < 0:
        raise InvalidInputError(f"isoperimetric constant must be >= 0, got {constant}")
    if not pair.domain.contains_disc(0j, radius):
        raise InvalidInputError("the disc leaves the domain of the pair")
    gram = _averaged_metric(metric, pair.dimension)
    j0 = standard_structure(pair.dimension)
    form = j0.T @ gram

    def area_density(z: ComplexArray) -> RealArray:
        _, _, psi_s, psi_t = pair.partials(z)
        return np.einsum("...i,ij,...j->...", psi_s, form, psi_t)

    def speed(angles: RealArray) -> RealArray:
        z = radius * np.exp(1j * angles)
        _, _, psi_s, psi_t = pair.partials(z)
        tangent = radius * (-np.sin(angles)[..., None] * psi_s + np.cos(angles)[..., None] * psi_t)
        return np.sqrt(np.einsum("...i,ij,...j->...", tangent, gram, tangent))

    area = integrate_planar(area_density, 0j, radius, rel_tol=1e-10)
    length = integrate_loop(speed, 1e-10)
    return InequalityReport(
        "local isoperimetric inequality",
        area,
        constant * length**2,
        {"c": constant, "length": length, "r": radius},
    )


@dataclass
class DecayFit:
    radii: List[float]
    sup_values: List[float]
    slope: float
    intercept: float
    nu: float
    constant: float


def decay_fit(pair: LocalPair, radii: Sequence[float], angles: int = 64) -> DecayFit:
    """
    Least-squares fit of ``log sup_theta |d psi(r, theta)|^2`` against ``log r``;
    ``nu = 1 + slope / 2`` and ``B = exp(intercept)``, so ``|d psi|^2 ~ B r^(2 nu - 2)``.
    """
    if len(radii) < 4:
        raise InvalidInputError(f"decay fits need at least 4 radii, got {len(radii)}")
    if any(radius <= 0 for radius in radii):
        raise InvalidInputError("decay radii must be positive")
    sups = []
    for radius in radii:
        values = derivative_norm_squared(pair, circle_points(0j, radius, angles))[1]
        sups.append(float(values.max()))
    if min(sups) <= 0:
        raise InvalidInputError("|d psi| vanishes on a ladder circle; the fit is undefined")
    fit = stats.linregress(np.log(radii), np.log(sups))
    slope, intercept = float(fit.slope), float(fit.intercept)
    return DecayFit(list(radii), sups, slope, intercept, 1 + slope / 2, math.exp(intercept))


@dataclass
class SweepRow:
    index: int
    name: str
    applicable: bool
    passed: bool
    lhs: float
    rhs: float


@dataclass
class SweepSummary:
    rows: List[SweepRow]

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if row.applicable and not row.passed)

    @property
    def applicable(self) -> int:
        return sum(1 for row in self.rows if row.applicable)

    @property
    def total(self) -> int:
        return len(self.rows)


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _run_sweep(task: Callable[[int], List[SweepRow]], count: int, threads: int) -> SweepSummary:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            batches = list(executor.map(task, range(count)))
    else:
        batches = [task(index) for index in range(count)]
    return SweepSummary([row for batch in batches for row in batch])


def mvi_sweep(
    count: int,
    seed: int,
    radius: float = 0.15,
    resolution: int = 32,
    threads: int = 1,
) -> SweepSummary:
    """Both mean value inequalities on random exact local instances."""

    def task(index: int) -> List[SweepRow]:
        pair = random_local_instance(instance_rng(seed, index))
        rows = []
        for report in (
            mvi1_check(pair, radius, resolution),
            mvi2_check(pair, radius, resolution),
        ):
            rows.append(
                SweepRow(index, report.name, report.applicable, report.passed, report.lhs, report.rhs)
            )
        return rows

    summary = _run_sweep(task, count, threads)
    logger.info(
        f"mean value sweep: {summary.applicable}/{summary.total} applicable, "
        f"{summary.failures} failures"
    )
    return summary


def random_holomorphic_pair(rng: np.random.Generator, degree: int = 3, dimension: int = 1) -> LocalPair:
    shape = (dimension, degree + 1)
    psi = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.arange(1, degree + 2)
    return polynomial_pair(np.zeros((dimension, 1)), psi, PlanarDomain.disc(0j, 1.0))


def isoperimetric_sweep(
    count: int,
    seed: int,
    constant: float = ISOPERIMETRIC_CONSTANT,
    radius: float = 0.5,
    threads: int = 1,
) -> SweepSummary:
    def task(index: int) -> List[SweepRow]:
        pair = random_holomorphic_pair(instance_rng(seed, index))
        report = isoperimetric_check(pair, radius, constant)
        return [SweepRow(index, report.name, report.applicable, report.passed, report.lhs, report.rhs)]

    return _run_sweep(task, count, threads)
