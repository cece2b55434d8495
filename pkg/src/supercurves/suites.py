"""
Property suites run by ``supercurves verify``.

Every suite returns a ``SuiteResult`` whose rows become the CSV output; random
instances draw from ``instance_rng(seed, index)`` so reruns are reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy import stats

from supercurves.energy import EnergyMethod, energy_curve, energy_section, estimate_hbar
from supercurves.exceptions import InvalidInputError
from supercurves.fields import Connection, make_instance, residual_global
from supercurves.geometry import (
    MoebiusTransform,
    SpherePoint,
    conformal_factor,
    fiber_weight,
    lift_factor,
)
from supercurves.inequalities import (
    ISOPERIMETRIC_CONSTANT,
    instance_rng,
    isoperimetric_check,
    isoperimetric_sweep,
    mvi_sweep,
)
from supercurves.local import PlanarDomain, polynomial_pair
from supercurves.quadrature import DEFAULT_REL_TOL, Disc, Sphere

logger = getLogger(__name__)

INVARIANCE_TOL = 1e-6
CONFORMALITY_TOL = 1e-9
QUANTIZATION_TOL = 1e-6
RESIDUAL_FLOOR = 1e-6
SLOPE_TARGET = 2.0
SLOPE_TOL = 0.1
NOISE_FLOOR = 1e-9
RESIDUAL_STEPS = (4e-3, 2e-3, 1e-3)
SATURATION_TOL = 1e-6

Row = Tuple[Any, ...]


class SuiteName(str, Enum):
    INVARIANCE = "invariance"
    MVI = "mvi"
    ISOPERIMETRIC = "isoperimetric"
    RESIDUALS = "residuals"
    CONFORMALITY = "conformality"
    QUANTIZATION = "quantization"


@dataclass
class SuiteResult:
    name: str
    count: int
    seed: int
    header: List[str]
    rows: List[Row]
    total: int
    applicable: int
    failures: int
    details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _map(task: Callable[[int], Row], count: int, threads: int) -> List[Row]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return list(executor.map(task, range(count)))
    return [task(index) for index in range(count)]


def _result(
    name: SuiteName, count: int, seed: int, header: Sequence[str], rows: List[Row], details: Sequence[str] = ()
) -> SuiteResult:
    """Rows end with ``(applicable, passed)``."""
    applicable = sum(1 for row in rows if row[-2])
    failures = sum(1 for row in rows if row[-2] and not row[-1])
    result = SuiteResult(name.value, count, seed, list(header), rows, len(rows), applicable, failures, list(details))
    logger.info(f"suite {name.value}: {failures} failures in {len(rows)} instances")
    return result


def invariance_suite(count: int, seed: int, threads: int = 1, rel_tol: float = DEFAULT_REL_TOL) -> SuiteResult:
    """``E(phi o m, m^-1 U) = E(phi, U)`` and the same for psi, on random discs."""

    def task(index: int) -> Row:
        rng = instance_rng(seed, index)
        degree = int(rng.integers(1, 5))
        bundle_degree = int(rng.choice([-2, -1]))
        curve, section = make_instance(
            "random",
            degree=degree,
            bundle_degree=bundle_degree,
            section="random",
            scale=0.3,
            seed=[seed, index],
        )
        moebius = MoebiusTransform.random(rng, 0.3)
        center = complex(*rng.uniform(-0.5, 0.5, 2))
        disc = Disc(SpherePoint(0, center), float(rng.uniform(0.2, 0.8)))
        pulled = disc.transformed(moebius.inverse())
        phi = energy_curve(curve, disc, EnergyMethod.AREA, rel_tol)
        phi_pulled = energy_curve(curve.pullback(moebius), pulled, EnergyMethod.AREA, rel_tol)
        psi = energy_section(section, disc, rel_tol)
        psi_pulled = energy_section(section.pullback(moebius), pulled, rel_tol)
        phi_gap = abs(phi_pulled - phi) / (1.0 + phi)
        psi_gap = abs(psi_pulled - psi) / (1.0 + psi)
        passed = max(phi_gap, psi_gap) <= INVARIANCE_TOL
        return (index, degree, bundle_degree, phi, phi_gap, psi, psi_gap, True, passed)

    rows = _map(task, count, threads)
    return _result(
        SuiteName.INVARIANCE,
        count,
        seed,
        ["index", "degree", "bundle_degree", "E_phi", "phi_gap", "E_psi", "psi_gap", "applicable", "passed"],
        rows,
    )


def conformality_suite(count: int, seed: int, threads: int = 1) -> SuiteResult:
    """``|lift|^2 H(m z) / H(z) = lambda_m^(d/2)`` for d in {-2, -1, 1, 2}."""
    degrees = (-2, -1, 1, 2)

    def task(index: int) -> Row:
        rng = instance_rng(seed, index)
        degree = degrees[index % len(degrees)]
        moebius = MoebiusTransform.random(rng, 0.5)
        point = SpherePoint(int(rng.integers(0, 2)), complex(*rng.uniform(-1.0, 1.0, 2)))
        image = moebius.apply(point).canonical()
        lifted = abs(lift_factor(moebius, degree, point)) ** 2
        measured = lifted * fiber_weight(degree, image) / fiber_weight(degree, point)
        expected = conformal_factor(moebius, point) ** (degree / 2)
        error = abs(measured - expected) / expected
        return (index, degree, measured, expected, error, True, error <= CONFORMALITY_TOL)

    rows = _map(task, count, threads)
    return _result(
        SuiteName.CONFORMALITY,
        count,
        seed,
        ["index", "bundle_degree", "measured", "expected", "relative_error", "applicable", "passed"],
        rows,
    )


def quantization_suite(count: int, seed: int, rel_tol: float = DEFAULT_REL_TOL) -> SuiteResult:
    """``E(z^k) = k pi`` for k = 1..5 and the hbar estimate; ``count`` sets the hbar samples."""
    rows: List[Row] = []
    for degree in range(1, 6):
        curve, _ = make_instance("power", degree=degree)
        value = energy_curve(curve, Sphere(), EnergyMethod.AREA, rel_tol)
        error = abs(value - degree * math.pi)
        rows.append((f"z^{degree}", value, degree * math.pi, error, True, error <= QUANTIZATION_TOL))
    hbar = estimate_hbar(max(count, 1), seed, rel_tol)
    error = abs(hbar - math.pi)
    rows.append(("hbar", hbar, math.pi, error, True, error <= QUANTIZATION_TOL))
    return _result(
        SuiteName.QUANTIZATION,
        count,
        seed,
        ["instance", "energy", "expected", "error", "applicable", "passed"],
        rows,
    )


CATALOG_INSTANCES: List[Tuple[str, Dict[str, Any]]] = [
    ("identity", {"section": "random"}),
    ("power", {"degree": 2, "section": "random"}),
    ("power", {"degree": 3, "bundle_degree": -2, "section": "derivative"}),
    ("bubble", {"eps": 0.1, "section": "random"}),
    ("nested", {"eps": 0.5}),
    ("random", {"degree": 2, "section": "random", "seed": 3}),
    ("constant", {}),
    ("flat", {"bundle_degree": 2, "section": "random"}),
]


def residual_suite(resolution: int = 41) -> SuiteResult:
    """
    Closed-form residual floors of the catalog instances, and the convergence order
    of central differences where the residual rises above the noise floor.
    """
    rows: List[Row] = []
    details: List[str] = []
    for kind, params in CATALOG_INSTANCES:
        curve, section = make_instance(kind, **params)
        exact = residual_global(curve, section, Connection.LEVI_CIVITA, resolution)
        floor = max(exact.curve, exact.section)
        sups = [
            max(report.curve, report.section)
            for report in (
                residual_global(curve, section, Connection.LEVI_CIVITA, resolution, h) for h in RESIDUAL_STEPS
            )
        ]
        slope = math.nan
        slope_ok = True
        if min(sups) > NOISE_FLOOR:
            slope = float(stats.linregress(np.log(RESIDUAL_STEPS), np.log(sups)).slope)
            slope_ok = abs(slope - SLOPE_TARGET) <= SLOPE_TOL
        else:
            details.append(f"{kind} {params}: finite differences at the noise floor, no slope")
        label = f"{kind}:{','.join(f'{key}={value}' for key, value in params.items())}"
        rows.append((label, floor, sups[-1], slope, True, floor <= RESIDUAL_FLOOR and slope_ok))
    return _result(
        SuiteName.RESIDUALS,
        len(rows),
        0,
        ["instance", "closed_form", "central_1e-3", "slope", "applicable", "passed"],
        rows,
        details,
    )


def _sweep_result(name: SuiteName, count: int, seed: int, summary: Any) -> SuiteResult:
    rows: List[Row] = [
        (row.index, row.name, row.lhs, row.rhs, row.applicable, row.passed) for row in summary.rows
    ]
    details = [f"hypotheses applicable in {summary.applicable} of {summary.total} checks"]
    return _result(name, count, seed, ["index", "check", "lhs", "rhs", "applicable", "passed"], rows, details)


def mvi_suite(count: int, seed: int, threads: int = 1) -> SuiteResult:
    return _sweep_result(SuiteName.MVI, count, seed, mvi_sweep(count, seed, threads=threads))


def isoperimetric_suite(
    count: int, seed: int, constant: float = ISOPERIMETRIC_CONSTANT, threads: int = 1
) -> SuiteResult:
    """Random holomorphic psi, plus the affine psi that saturate the inequality."""
    result = _sweep_result(
        SuiteName.ISOPERIMETRIC, count, seed, isoperimetric_sweep(count, seed, constant, threads=threads)
    )
    rng = instance_rng(seed, count)
    for index in range(3):
        coefficients = rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2))
        pair = polynomial_pair(np.zeros((1, 1)), coefficients, PlanarDomain.disc(0j, 1.0))
        report = isoperimetric_check(pair, 0.5, constant)
        gap = abs(report.lhs - report.rhs) / (1.0 + abs(report.rhs))
        saturated = gap <= SATURATION_TOL
        result.rows.append((f"affine-{index}", "saturation", report.lhs, report.rhs, True, saturated))
        result.total += 1
        result.applicable += 1
        if not saturated:
            result.failures += 1
    result.details.append(f"isoperimetric constant c = {constant:.17g}")
    return result


def run_suite(
    name: str,
    count: int,
    seed: int,
    threads: int = 1,
    rel_tol: float = DEFAULT_REL_TOL,
    constant: float = ISOPERIMETRIC_CONSTANT,
) -> SuiteResult:
    try:
        suite = SuiteName(name)
    except ValueError as error:
        raise InvalidInputError(
            f"unknown suite {name!r}; expected one of {', '.join(item.value for item in SuiteName)}",
            "suite",
        ) from error
    if count < 1:
        raise InvalidInputError(f"count must be positive, got {count}", "count")
    if suite is SuiteName.INVARIANCE:
        return invariance_suite(count, seed, threads, rel_tol)
    if suite is SuiteName.MVI:
        return mvi_suite(count, seed, threads)
    if suite is SuiteName.ISOPERIMETRIC:
        return isoperimetric_suite(count, seed, constant, threads)
    if suite is SuiteName.RESIDUALS:
        return residual_suite()
    if suite is SuiteName.CONFORMALITY:
        return conformality_suite(count, seed, threads)
    return quantization_suite(count, seed, rel_tol)
