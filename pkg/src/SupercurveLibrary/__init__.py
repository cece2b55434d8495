"""
# SupercurveLibrary for Robot Framework

Keywords over the supercurves package: catalog instances, super energies,
residuals of the defining equations, the property suites, bubbling analysis,
the distance between stable supercurves and the Gromov convergence checker.

Arguments that hold curves, reports or stable supercurves are the objects
returned by other keywords of this library.
"""

import math
from importlib.metadata import version
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from robot.api.deco import keyword, library

from SupercurveLibrary.logger import Logger
from supercurves.bubbling import BubbleReport, LadderSettings, analyze_family
from supercurves.energy import EnergyMethod, energy_curve, energy_section
from supercurves.families import make_family, nu_ladder
from supercurves.fields import Connection, GlobalCurve, SuperSection, make_instance, residual_global
from supercurves.geometry import MoebiusTransform, SpherePoint
from supercurves.moduli import (
    Axiom,
    ConvergenceReport,
    StableSupercurve,
    bubbling_case,
    enumerate_trees,
    epsilon_auto,
    gromov_convergence_check,
    planted_defect,
    rho_search,
    validate_stable,
)
from supercurves.records import load_curve, load_stable, parse_region
from supercurves.suites import SuiteResult, run_suite

try:
    __version__ = version("robotframework-supercurves")
except Exception:  # pragma: no cover
    pass

Member = Tuple[GlobalCurve, SuperSection]

__all__ = ["SupercurveLibrary"]


def _literal(value: Any) -> Any:
    if not isinstance(value, str):
        return value
    for converter in (int, float):
        try:
            return converter(value)
        except ValueError:
            continue
    return value


@library(scope="SUITE", doc_format="ROBOT")
class SupercurveLibrary:
    """
    Main class providing the keywords for numerical checks of holomorphic supercurves.

    `rel_tol` is the relative quadrature tolerance used by the energy keywords,
    `threads` caps the worker threads of the suites and the distance search.
    """

    def __init__(self, rel_tol: float = 1e-8, seed: int = 42, threads: int = 1) -> None:
        self.rel_tol = rel_tol
        self.seed = seed
        self.threads = threads
        self.logger = Logger()

    @keyword
    def make_instance(self, kind: str, **params: Any) -> Member:
        """
        Return a catalog supercurve as a (curve, section) pair.

        `kind` is one of identity, power, bubble, nested, random, constant or flat.
        Named arguments such as `degree=3` or `section=random` are passed on.
        """
        member = make_instance(kind, **{key: _literal(value) for key, value in params.items()})
        self.logger.debug(f"{kind}: degree {member[0].degree}, d = {member[1].bundle.degree}")
        return member

    @keyword
    def load_curve_file(self, path: Union[str, Path]) -> Member:
        return load_curve(Path(path))

    @keyword
    def curve_energy(self, member: Member, region: str = "sphere") -> float:
        """Return `E(phi, U)` for the region given as `sphere`, `disc:CHART:RE:IM:R` and the like."""
        value = energy_curve(member[0], parse_region(region), EnergyMethod.AREA, self.rel_tol)
        self.logger.info(f"E(phi, {region}) = {value!r}")
        return value

    @keyword
    def section_energy(self, member: Member, region: str = "sphere") -> float:
        value = energy_section(member[1], parse_region(region), self.rel_tol)
        self.logger.info(f"E(psi, {region}) = {value!r}")
        return value

    @keyword
    def value_should_be_close_to(self, actual: float, expected: float, tolerance: float = 1e-6) -> None:
        if not abs(actual - expected) <= tolerance:
            raise AssertionError(f"{actual!r} differs from {expected!r} by more than {tolerance}")

    @keyword
    def value_should_be_below(self, actual: float, bound: float) -> None:
        if not actual <= bound:
            raise AssertionError(f"{actual!r} is not below {bound!r}")

    @keyword
    def pull_back(self, member: Member, *reals: float) -> Member:
        """Return `(phi o m, m* psi)` for the Moebius transform given by its 8 matrix reals."""
        moebius = MoebiusTransform.from_reals([float(value) for value in reals])
        return member[0].pullback(moebius), member[1].pullback(moebius)

    @keyword
    def residuals_should_be_below(
        self, member: Member, bound: float = 1e-6, connection: str = "levi-civita"
    ) -> None:
        curve, section = member
        report = residual_global(curve, section, Connection(connection))
        self.logger.info(f"residuals: curve {report.curve:.3e}, section {report.section:.3e}")
        if max(report.curve, report.section) > bound:
            raise AssertionError(
                f"residuals {report.curve:.3e} / {report.section:.3e} exceed {bound:.3e}"
            )

    @keyword
    def run_verification_suite(
        self, name: str, count: int = 10, seed: Optional[int] = None, constant: Optional[float] = None
    ) -> SuiteResult:
        """Run one of the `verify` suites and return its result without failing."""
        options = {} if constant is None else {"constant": constant}
        result = run_suite(
            name, count, self.seed if seed is None else seed, self.threads, self.rel_tol, **options
        )
        self.logger.log_rows(f"suite {name}", result.header, result.rows)
        return result

    @keyword
    def suite_should_pass(self, result: SuiteResult) -> None:
        if not result.passed:
            raise AssertionError(f"suite {result.name}: {result.failures} of {result.total} checks failed")

    @keyword
    def suite_should_fail(self, result: SuiteResult) -> None:
        if result.passed:
            raise AssertionError(f"suite {result.name} passed all {result.total} checks")

    @keyword
    def analyze_catalog_family(
        self,
        kind: str,
        nu0: float = 1250.0,
        count: int = 4,
        bundle_degree: int = -1,
        base: str = "identity",
    ) -> BubbleReport:
        family = make_family(kind, nu_ladder(nu0, count), bundle_degree=bundle_degree, base=base)
        report = analyze_family(family, math.pi, LadderSettings(count=count, rel_tol=self.rel_tol))
        self.logger.info(f"{kind}: concentration at {', '.join(str(point) for point in report.centers)}")
        return report

    @keyword
    def concentration_points_should_be(self, report: BubbleReport, *points: str) -> None:
        """
        Check the detected points, each given as `CHART:RE:IM`, to 1e-3 in chordal distance.
        """
        expected: List[SpherePoint] = []
        for point in points:
            chart, real, imag = point.split(":")
            expected.append(SpherePoint(int(chart), complex(float(real), float(imag))))
        found = report.centers
        if len(found) != len(expected):
            raise AssertionError(f"found {len(found)} points ({', '.join(map(str, found))}), expected {len(expected)}")
        for point in expected:
            if not any(point.chordal_distance(other) <= 1e-3 for other in found):
                raise AssertionError(f"no concentration point near {point}")

    @keyword
    def conservation_residuals_should_be_below(self, report: BubbleReport, bound: float) -> None:
        for analysis in report.points:
            conservation = analysis.conservation
            if conservation is None:
                raise AssertionError(f"no bubble was fitted at {analysis.center}: {analysis.note}")
            residuals = [conservation.residual_iii]
            if conservation.residual_v is not None:
                residuals.append(conservation.residual_v)
            if max(residuals) > bound:
                raise AssertionError(f"conservation residuals {residuals} at {analysis.center} exceed {bound}")

    @keyword
    def load_stable_supercurve(self, path: Union[str, Path]) -> StableSupercurve:
        return load_stable(Path(path))

    @keyword
    def stable_supercurve_should_be_valid(self, x: StableSupercurve) -> None:
        diagnostics = validate_stable(x)
        if diagnostics:
            raise AssertionError("; ".join(diagnostics))

    @keyword
    def rho_distance(self, x: StableSupercurve, other: StableSupercurve, eps: str = "auto") -> float:
        """Return `rho_eps(x, x')`; `eps` is a number or `auto`."""
        epsilon = epsilon_auto(x) if eps == "auto" else float(eps)
        breakdown = rho_search(x, other, epsilon, threads=self.threads, rel_tol=self.rel_tol)
        if breakdown is None:
            self.logger.info("no tree homomorphism: rho is infinite")
            return math.inf
        self.logger.info(f"rho terms {breakdown.terms} with f = {breakdown.tree_map}")
        return breakdown.total

    @keyword
    def check_catalog_convergence(
        self, case: str = "bubbling", nu0: float = 1250.0, count: int = 4, tolerance: float = 1e-2
    ) -> ConvergenceReport:
        """`case` is bubbling, or the axiom name of a planted defect (map, energy, ...)."""
        nus = nu_ladder(nu0, count)
        built = bubbling_case(nus) if case == "bubbling" else planted_defect(Axiom[case.upper()], nus)
        report = gromov_convergence_check(
            built.sequence, built.limit, built.epsilon, built.witnesses, tolerance, built.nus
        )
        self.logger.log_rows("axiom residuals", ["nu", *(axiom.value for axiom in Axiom)], report.rows())
        return report

    @keyword
    def failed_axioms_should_be(self, report: ConvergenceReport, *axioms: str) -> None:
        failed = sorted(axiom.value for axiom in report.failed)
        expected = sorted(Axiom[name.upper()].value for name in axioms)
        if failed != expected:
            raise AssertionError(f"failed axioms {failed}, expected {expected}")

    @keyword
    def count_labelled_trees(self, size: int) -> int:
        return sum(1 for _ in enumerate_trees(size))
