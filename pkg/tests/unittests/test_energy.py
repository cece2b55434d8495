# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest

import numpy as np

from supercurves.energy import (
    EnergyMethod,
    aitken,
    comparability,
    energy_curve,
    energy_section,
    estimate_hbar,
    geometric_ladder,
    mass_profile,
    super_energy,
)
from supercurves.exceptions import InvalidInputError
from supercurves.fields import make_instance
from supercurves.geometry import MoebiusTransform, SpherePoint
from supercurves.quadrature import Annulus, Disc, Sphere


class TestCurveEnergy(unittest.TestCase):
    def test_identity(self) -> None:
        curve, _ = make_instance("identity")
        for method in EnergyMethod:
            with self.subTest(method=method):
                self.assertAlmostEqual(energy_curve(curve, Sphere(), method), math.pi, delta=1e-6)

    def test_energy_is_quantized_by_degree(self) -> None:
        for degree in range(1, 5):
            with self.subTest(degree=degree):
                curve, _ = make_instance("power", degree=degree)
                self.assertAlmostEqual(energy_curve(curve, Sphere()), degree * math.pi, delta=1e-6)

    def test_hemisphere(self) -> None:
        curve, _ = make_instance("identity")
        disc = Disc(SpherePoint.origin(), 1.0)
        self.assertAlmostEqual(energy_curve(curve, disc), math.pi / 2, delta=1e-8)
        self.assertAlmostEqual(energy_curve(curve, disc, EnergyMethod.FLUX), math.pi / 2, delta=1e-8)

    def test_flux_and_area_agree_on_annuli_and_exteriors(self) -> None:
        curve, _ = make_instance("random", degree=3, seed=2)
        for region in (
            Annulus(SpherePoint(0, 0.1j), 0.2, 0.9),
            Disc(SpherePoint(1, 0.3), 0.4, exterior=True),
        ):
            with self.subTest(region=str(region)):
                area = energy_curve(curve, region, EnergyMethod.AREA)
                flux = energy_curve(curve, region, EnergyMethod.FLUX)
                self.assertAlmostEqual(area, flux, delta=1e-6)

    def test_constant_maps_have_no_energy(self) -> None:
        for kind in ("constant", "flat"):
            curve, _ = make_instance(kind)
            self.assertEqual(energy_curve(curve, Sphere()), 0.0)

    def test_moebius_invariance(self) -> None:
        curve, section = make_instance("random", degree=2, section="random", scale=0.3, seed=5)
        moebius = MoebiusTransform.random(np.random.default_rng(3), 0.3)
        disc = Disc(SpherePoint(0, 0.1 - 0.2j), 0.5)
        pulled = disc.transformed(moebius.inverse())
        phi = energy_curve(curve, disc)
        psi = energy_section(section, disc)
        self.assertAlmostEqual(energy_curve(curve.pullback(moebius), pulled), phi, delta=1e-6 * (1 + phi))
        self.assertAlmostEqual(energy_section(section.pullback(moebius), pulled), psi, delta=1e-6 * (1 + psi))

    def test_hbar(self) -> None:
        self.assertAlmostEqual(estimate_hbar(4, seed=1), math.pi, delta=1e-6)


class TestSuperEnergy(unittest.TestCase):
    def test_zero_section(self) -> None:
        curve, section = make_instance("power", degree=2)
        breakdown = super_energy(curve, section)
        self.assertEqual(breakdown.section, 0.0)
        self.assertAlmostEqual(breakdown.total, 2 * math.pi, delta=1e-6)
        self.assertLess(breakdown.curve_error, 1e-6)

    def test_section_energy_adds_up(self) -> None:
        curve, section = make_instance("identity", section="random", scale=0.5, seed=8)
        breakdown = super_energy(curve, section, Sphere())
        self.assertGreater(breakdown.section, 0.0)
        self.assertAlmostEqual(breakdown.total, breakdown.curve + breakdown.section)
        self.assertAlmostEqual(breakdown.section, energy_section(section, Sphere()), delta=1e-9)

    def test_positive_bundle_degree_is_flagged(self) -> None:
        _, section = make_instance("identity", bundle_degree=1)
        with self.assertLogs("supercurves.energy", level="WARNING") as captured:
            self.assertEqual(energy_section(section, Sphere()), 0.0)
        self.assertIn("experimental", captured.output[0])

    def test_comparability(self) -> None:
        curve, section = make_instance("identity", section="random", scale=0.5)
        result = comparability(curve, section)
        self.assertGreater(result.local_energy, 0.0)
        self.assertTrue(math.isfinite(result.constant))
        self.assertGreater(result.constant, 0.0)


class TestExtrapolation(unittest.TestCase):
    def test_aitken_on_geometric_tail(self) -> None:
        self.assertAlmostEqual(aitken([1.5, 1.25, 1.125]), 1.0)

    def test_aitken_fallbacks(self) -> None:
        self.assertEqual(aitken([2.0, 1.0]), 1.0)
        self.assertEqual(aitken([1.0, 2.0, 1.0]), 1.0)
        with self.assertRaises(InvalidInputError):
            aitken([])

    def test_geometric_ladder(self) -> None:
        self.assertEqual(geometric_ladder(1.0, 2.0, 3), [1.0, 2.0, 4.0])
        with self.assertRaises(InvalidInputError):
            geometric_ladder(1.0, 2.0, 0)


class TestMassProfile(unittest.TestCase):
    def test_bubble_carries_one_quantum(self) -> None:
        profile = mass_profile(
            lambda nu: make_instance("bubble", eps=1.0 / nu),
            SpherePoint.origin(),
            [0.4, 0.2, 0.1, 0.05],
            [1250.0, 2500.0, 5000.0, 10000.0],
        )
        self.assertTrue(profile.monotone)
        self.assertAlmostEqual(profile.m_phi, math.pi, delta=1e-2)
        self.assertEqual(profile.m_psi, 0.0)
        self.assertEqual(len(profile.rows()), 16)

    def test_ladders_are_ordered(self) -> None:
        def member(nu):
            return make_instance("identity")

        with self.assertRaises(InvalidInputError):
            mass_profile(member, SpherePoint.origin(), [0.1, 0.2], [1.0, 2.0])
        with self.assertRaises(InvalidInputError):
            mass_profile(member, SpherePoint.origin(), [0.2, 0.1], [2.0, 1.0])


if __name__ == "__main__":
    unittest.main()
