# pylint: disable="missing-class-docstring", "missing-function-docstring"
import unittest

import numpy as np

from supercurves.bubbling import (
    analyze_family,
    annulus_samples,
    connect_check,
    detect_concentration,
    fit_curve,
    misselected_residual,
    power_rescaling,
    rescaled_limit,
    select_rescaling,
)
from supercurves.exceptions import InvalidInputError, NoBubbleError
from supercurves.families import make_family, nu_ladder
from supercurves.fields import GlobalCurve, make_instance
from supercurves.geometry import SpherePoint, fs_distance, homogeneous_points

LADDER = [1250.0, 2500.0, 5000.0, 10000.0]


class TestLadders(unittest.TestCase):
    def test_nu_ladder(self) -> None:
        self.assertEqual(nu_ladder(1250, 4), LADDER)
        with self.assertRaises(InvalidInputError):
            nu_ladder(1250, 2)
        with self.assertRaises(InvalidInputError):
            nu_ladder(0, 4)

    def test_unknown_family(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "unknown family"):
            make_family("spiral", LADDER)

    def test_family_ladder_must_increase(self) -> None:
        with self.assertRaises(InvalidInputError):
            make_family("bubble", [2.0, 1.0, 3.0])

    def test_rescaled_family_only_exists_on_the_ladder(self) -> None:
        family = make_family("bubble", LADDER)
        rescaling = select_rescaling(family, SpherePoint.origin())
        rescaled = family.reparameterized("rescaled", rescaling.moebius)
        with self.assertRaises(InvalidInputError):
            rescaled.member(3000.0)


class TestDetection(unittest.TestCase):
    def test_constant_family_has_no_concentration(self) -> None:
        self.assertEqual(detect_concentration(make_family("constant", LADDER)), [])

    def test_constant_family_does_not_bubble(self) -> None:
        with self.assertRaises(NoBubbleError):
            select_rescaling(make_family("constant", LADDER), SpherePoint.origin())

    def test_bubble_family_blows_up_at_the_origin(self) -> None:
        family = make_family("bubble", LADDER)
        rescaling = select_rescaling(family, SpherePoint.origin())
        self.assertGreater(rescaling.blowup_slope, 0.9)
        self.assertTrue(all(later < earlier for earlier, later in zip(rescaling.deltas, rescaling.deltas[1:])))


class TestCurveFit(unittest.TestCase):
    def test_recovers_degree(self) -> None:
        for degree in (1, 2, 3):
            with self.subTest(degree=degree):
                curve, _ = make_instance("power", degree=degree)
                points = homogeneous_points(annulus_samples(), 0)
                fit = fit_curve(points, curve.lift_homogeneous(points))
                self.assertEqual(fit.degree, degree)
                self.assertTrue(fit.converged)
                self.assertLess(fit.residual, 1e-6)

    def test_connection_of_identical_points(self) -> None:
        curve, _ = make_instance("identity")
        self.assertLess(connect_check(curve, curve, SpherePoint.infinity()), 1e-12)
        flat, _ = make_instance("flat")
        with self.assertRaises(InvalidInputError):
            connect_check(curve, flat, SpherePoint.origin())


class TestRescaledLimit(unittest.TestCase):
    def test_bubble_family_rescales_to_inversion(self) -> None:
        family = make_family("bubble", LADDER)
        rescaling = power_rescaling(family, SpherePoint.origin(), 1.0)
        fit = rescaled_limit(family, rescaling)
        self.assertEqual(fit.nu, LADDER[-1])
        self.assertEqual(fit.degree, 1)
        self.assertTrue(fit.converged)
        samples = annulus_samples()
        points = homogeneous_points(samples, 0)
        inversion = GlobalCurve.projective([[1, 0], [0, 1]])
        distances = fs_distance(fit.curve.lift_homogeneous(points), inversion.lift_homogeneous(points))
        self.assertLess(float(distances.max()), 1e-3)
        for w in (0.5, -1.0j, 2.0):
            value = fit.curve.evaluate(SpherePoint(0, w))
            self.assertAlmostEqual(complex(value[0] / value[1]), 1 / w, delta=5e-3)


class TestAnalyzeFamily(unittest.TestCase):
    def test_bubble_family(self) -> None:
        report = analyze_family(make_family("bubble", LADDER))
        self.assertEqual(len(report.points), 1)
        analysis = report.points[0]
        self.assertLess(analysis.center.chordal_distance(SpherePoint.origin()), 1e-3)
        self.assertIsNotNone(analysis.bubble)
        self.assertEqual(analysis.bubble.degree, 1)
        self.assertTrue(analysis.bubble.converged)
        self.assertLess(analysis.conservation.residual_iii, 1e-2)
        self.assertFalse(analysis.conservation.v_skipped)
        self.assertLess(analysis.conservation.residual_v, 1e-9)
        self.assertEqual(report.limit.degree, 1)
        self.assertLess(max(report.connections), 1e-2)

    def test_constant_family(self) -> None:
        report = analyze_family(make_family("constant", LADDER))
        self.assertEqual(report.points, [])
        self.assertIsNone(report.limit)

    def test_misselected_rescaling_loses_energy(self) -> None:
        family = make_family("bubble", LADDER)
        self.assertGreater(misselected_residual(family, SpherePoint.origin()), 1.0)

    def test_samples_avoid_the_origin(self) -> None:
        samples = annulus_samples()
        self.assertGreaterEqual(float(np.abs(samples).min()), 0.5 - 1e-12)
        self.assertLessEqual(float(np.abs(samples).max()), 2.0 + 1e-12)


if __name__ == "__main__":
    unittest.main()
