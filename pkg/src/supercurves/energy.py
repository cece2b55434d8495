"""
Classical, sectional and local super energies and energy concentration profiles.

The classical energy of a holomorphic map has two evaluation methods:

- ``EnergyMethod.AREA`` integrates the energy density over the region with the
  adaptive quadrature of ``supercurves.quadrature``.
- ``EnergyMethod.FLUX`` uses that the energy density of a holomorphic map is
  ``1/4 Laplacian log |W|^2`` and integrates the normal derivative over the
  boundary circles instead. This stays exact for maps whose energy is packed into
  a tiny part of the region.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from supercurves.exceptions import InvalidInputError
from supercurves.fields import Connection, GlobalCurve, SuperSection, global_local_pair
from supercurves.geometry import (
    MoebiusTransform,
    SpherePoint,
    TargetKind,
    sphere_density,
)
from supercurves.local import LocalPair, PlanarDomain, derivative_norm_squared
from supercurves.quadrature import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    Annulus,
    Disc,
    QuadratureResult,
    Region,
    Sphere,
    integrate_loop,
    integrate_planar,
    integrate_with_error,
)

logger = getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

FamilyMember = Callable[[float], Tuple[GlobalCurve, SuperSection]]

AITKEN_GUARD = 1e-9
MONOTONE_SLACK = 1e-8


class EnergyMethod(str, Enum):
    AREA = "area"
    FLUX = "flux"


def _flux(curve: GlobalCurve, chart: int, center: complex, radius: float, rel_tol: float) -> float:
    """``E(phi, B_radius(center))`` in the given chart via the boundary loop."""

    def integrand(angles: RealArray) -> RealArray:
        direction = np.exp(1j * angles)
        lift, derivative = curve.chart_lift(center + radius * direction, chart)
        pairing = np.sum(lift.conj() * derivative, axis=-1)
        modulus = np.sum(np.abs(lift) ** 2, axis=-1)
        return 0.5 * np.real(pairing * radius * direction) / modulus

    return integrate_loop(integrand, rel_tol, DEFAULT_ABS_TOL)


def _flux_energy(curve: GlobalCurve, region: Region, rel_tol: float) -> float:
    if isinstance(region, Sphere):
        return _flux(curve, 0, 0j, 1.0, rel_tol) + _flux(curve, 1, 0j, 1.0, rel_tol)
    if isinstance(region, Disc):
        inner = _flux(curve, region.chart, region.center.z, region.radius, rel_tol)
        if not region.exterior:
            return inner
        return _flux_energy(curve, Sphere(), rel_tol) - inner
    if isinstance(region, Annulus):
        chart, center = region.center.chart, region.center.z
        return _flux(curve, chart, center, region.outer, rel_tol) - _flux(
            curve, chart, center, region.inner, rel_tol
        )
    total = _flux_energy(curve, Sphere(), rel_tol)
    return total - sum(_flux_energy(curve, disc, rel_tol) for disc in region.discs)


def energy_curve_with_error(
    curve: GlobalCurve, region: Region, rel_tol: float = DEFAULT_REL_TOL
) -> QuadratureResult:
    if curve.target is TargetKind.FLAT or curve.is_constant():
        return QuadratureResult(0.0, 0.0, 0)
    return integrate_with_error(curve.energy_density, region, rel_tol)


def energy_curve(
    curve: GlobalCurve,
    region: Region,
    method: EnergyMethod = EnergyMethod.AREA,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """``E(phi, U) = 1/2 int_U |d phi|^2 dvol``."""
    if curve.target is TargetKind.FLAT or curve.is_constant():
        return 0.0
    if method is EnergyMethod.FLUX:
        return _flux_energy(curve, region, rel_tol)
    return energy_curve_with_error(curve, region, rel_tol).value


def _check_section_degree(section: SuperSection) -> None:
    degree = section.bundle.degree
    if degree == 0:
        raise InvalidInputError("the super energy is undefined for d = 0")
    if degree not in (-1, -2):
        logger.warning(
            f"section energy for d = {degree} uses the exponent -4/d verbatim; "
            "this path is experimental"
        )


def energy_section_with_error(
    section: SuperSection, region: Region, rel_tol: float = DEFAULT_REL_TOL
) -> QuadratureResult:
    _check_section_degree(section)
    if section.is_zero():
        return QuadratureResult(0.0, 0.0, 0)
    exponent = -2.0 / section.bundle.degree

    def density(z: ComplexArray, chart: int) -> RealArray:
        return 0.5 * section.norm_squared(z, chart) ** exponent * sphere_density(z)

    return integrate_with_error(density, region, rel_tol)


def energy_section(
    section: SuperSection, region: Region, rel_tol: float = DEFAULT_REL_TOL
) -> float:
    """``E(psi, U) = 1/2 int_U |psi|^(-4/d) dvol``."""
    return energy_section_with_error(section, region, rel_tol).value


@dataclass
class EnergyBreakdown:
    curve: float
    curve_error: float
    section: float
    section_error: float

    @property
    def total(self) -> float:
        return self.curve + self.section


def super_energy(
    curve: GlobalCurve,
    section: SuperSection,
    region: Optional[Region] = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> EnergyBreakdown:
    """``E(phi, psi, U) = E(phi, U) + E(psi, U)`` with quadrature error estimates."""
    region = region or Sphere()
    curve_part = energy_curve_with_error(curve, region, rel_tol)
    section_part = energy_section_with_error(section, region, rel_tol)
    return EnergyBreakdown(
        curve_part.value, curve_part.error, section_part.value, section_part.error
    )


def local_super_energy(
    pair: LocalPair,
    domain: PlanarDomain,
    rel_tol: float = DEFAULT_REL_TOL,
) -> float:
    """``int_U (|d phi|^2 + |psi|^2 + |d psi|^2) ds dt`` over a disc ``U``."""
    if domain.kind != "disc":
        raise InvalidInputError("local super energies are integrated over discs")
    if not pair.domain.contains_disc(domain.center, domain.radius):
        raise InvalidInputError("the integration disc must lie inside the pair's domain")

    def density(z: ComplexArray) -> RealArray:
        phi_part, psi_part = derivative_norm_squared(pair, z)
        return phi_part + np.sum(pair.psi_at(z) ** 2, axis=-1) + psi_part

    return integrate_planar(density, domain.center, domain.radius, rel_tol=rel_tol)


@dataclass
class Comparability:
    local_energy: float
    super_energy: float
    constant: float


def comparability(
    curve: GlobalCurve,
    section: SuperSection,
    radius: float = 0.5,
    rel_tol: float = 1e-6,
) -> Comparability:
    """
    ``C = E_loc(U') / (E + sqrt E)`` for the chart-0 disc ``U'`` of the given radius,
    with the local pair taken in the target chart that is largest at the origin.
    """
    target_chart: Optional[int] = None
    if curve.target is TargetKind.PROJECTIVE:
        lift, _ = curve.chart_lift(np.array([0j]), 0)
        target_chart = int(np.argmax(np.abs(lift[0])))
    pair = global_local_pair(section, 0, target_chart, Connection.LEVI_CIVITA)
    local = local_super_energy(pair, PlanarDomain.disc(0j, radius), rel_tol)
    total = super_energy(curve, section, Sphere(), rel_tol).total
    denominator = total + math.sqrt(total)
    constant = local / denominator if denominator > 0 else (0.0 if local == 0 else math.inf)
    return Comparability(local, total, constant)


def estimate_hbar(samples: int = 8, seed: int = 0, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    Minimal energy of a nonconstant holomorphic sphere, taken over the identity and
    random Moebius images of it (all of degree one).
    """
    rng = np.random.default_rng(seed)
    identity = GlobalCurve.projective([[0, 1], [1, 0]])
    candidates = [identity] + [
        identity.pullback(MoebiusTransform.random(rng, 1.0)) for _ in range(samples)
    ]
    energies = [energy_curve(curve, Sphere(), EnergyMethod.FLUX, rel_tol) for curve in candidates]
    logger.debug(f"hbar candidates: {', '.join(f'{value:.12f}' for value in energies)}")
    return min(energies)


def aitken(values: Sequence[float]) -> float:
    """
    Aitken delta-squared limit of the last three values.

    Falls back to the last value when the denominator is negligible or the tail is
    not monotone.
    """
    if not values:
        raise InvalidInputError("cannot extrapolate an empty ladder")
    if len(values) < 3:
        return float(values[-1])
    x0, x1, x2 = (float(value) for value in values[-3:])
    first, second = x1 - x0, x2 - x1
    denominator = second - first
    if first * second < 0 or abs(denominator) <= AITKEN_GUARD * (1.0 + abs(x2)):
        return x2
    return x2 - second**2 / denominator


def geometric_ladder(start: float, ratio: float, count: int) -> List[float]:
    if count < 1:
        raise InvalidInputError(f"ladder count must be positive, got {count}")
    return [start * ratio**index for index in range(count)]


@dataclass
class MassProfile:
    center: SpherePoint
    epsilons: List[float]
    nus: List[float]
    phi_ladder: List[List[float]]
    psi_ladder: List[List[float]]
    mass_phi: List[float] = field(default_factory=list)
    mass_psi: List[float] = field(default_factory=list)
    m_phi: float = 0.0
    m_psi: float = 0.0
    monotone: bool = True

    def rows(self) -> List[Tuple[float, float, float, float]]:
        """``(epsilon, nu, mass_phi, mass_psi)`` for every evaluated pair."""
        return [
            (epsilon, nu, self.phi_ladder[i][j], self.psi_ladder[i][j])
            for i, epsilon in enumerate(self.epsilons)
            for j, nu in enumerate(self.nus)
        ]


def _is_nonincreasing(values: Sequence[float]) -> bool:
    return all(
        later <= earlier + MONOTONE_SLACK * (1.0 + abs(earlier))
        for earlier, later in zip(values, values[1:])
    )


def mass_profile(
    family: FamilyMember,
    center: SpherePoint,
    epsilons: Sequence[float],
    nus: Sequence[float],
    rel_tol: float = DEFAULT_REL_TOL,
    threads: int = 1,
) -> MassProfile:
    """
    Energies of the family members on shrinking balls around ``center``.

    For every epsilon the nu-ladder is extrapolated to a limit; the epsilon-limits
    are then extrapolated to ``m_phi`` and ``m_psi``. Ladders must be ordered with
    decreasing epsilon and increasing nu.
    """
    if len(epsilons) < 1 or len(nus) < 1:
        raise InvalidInputError("mass profiles need nonempty epsilon and nu ladders")
    if any(later >= earlier for earlier, later in zip(epsilons, epsilons[1:])):
        raise InvalidInputError("epsilons must be strictly decreasing")
    if any(later <= earlier for earlier, later in zip(nus, nus[1:])):
        raise InvalidInputError("nus must be strictly increasing")

    def column(nu: float) -> Tuple[List[float], List[float]]:
        curve, section = family(nu)
        phi_values, psi_values = [], []
        for epsilon in epsilons:
            disc = Disc(center, epsilon)
            phi_values.append(energy_curve(curve, disc, EnergyMethod.FLUX, rel_tol))
            psi_values.append(energy_section(section, disc, rel_tol) if not section.is_zero() else 0.0)
        return phi_values, psi_values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            columns = list(executor.map(column, nus))
    else:
        columns = [column(nu) for nu in nus]
    phi_ladder = [[columns[j][0][i] for j in range(len(nus))] for i in range(len(epsilons))]
    psi_ladder = [[columns[j][1][i] for j in range(len(nus))] for i in range(len(epsilons))]
    mass_phi = [aitken(row) for row in phi_ladder]
    mass_psi = [aitken(row) for row in psi_ladder]
    monotone = _is_nonincreasing(mass_phi) and _is_nonincreasing(mass_psi)
    if not monotone:
        logger.warning(f"mass profile at {center} is not monotone in epsilon")
    profile = MassProfile(
        center=center,
        epsilons=list(epsilons),
        nus=list(nus),
        phi_ladder=phi_ladder,
        psi_ladder=psi_ladder,
        mass_phi=mass_phi,
        mass_psi=mass_psi,
        m_phi=aitken(mass_phi),
        m_psi=aitken(mass_psi),
        monotone=monotone,
    )
    logger.info(f"mass at {center}: m_phi={profile.m_phi:.6g}, m_psi={profile.m_psi:.6g}")
    return profile


__all__ = [
    "Comparability",
    "EnergyBreakdown",
    "EnergyMethod",
    "MassProfile",
    "aitken",
    "comparability",
    "energy_curve",
    "energy_section",
    "estimate_hbar",
    "geometric_ladder",
    "local_super_energy",
    "mass_profile",
    "super_energy",
]
