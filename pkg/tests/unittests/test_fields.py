# pylint: disable="missing-class-docstring", "missing-function-docstring"
import unittest
from dataclasses import FrozenInstanceError

import numpy as np

from supercurves.exceptions import GhostSectionError, InvalidInputError, UnsupportedConnectionError
from supercurves.fields import (
    Connection,
    GlobalCurve,
    SuperSection,
    make_instance,
    pullback_section,
    residual_global,
)
from supercurves.geometry import LineBundleSpec, MoebiusTransform, SpherePoint, TargetKind


class TestGlobalCurve(unittest.TestCase):
    def test_common_zero_is_refused(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "common zero"):
            GlobalCurve.projective([[1, 1], [2, 2]])

    def test_projective_needs_two_components(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "at least 2"):
            GlobalCurve.projective([[1, 0]])

    def test_flat_maps_are_constant(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "constant"):
            GlobalCurve(TargetKind.FLAT, np.array([[1, 2]], dtype=np.complex128))

    def test_evaluate(self) -> None:
        curve, _ = make_instance("power", degree=2)
        value = curve.evaluate(SpherePoint(0, 2.0))
        self.assertAlmostEqual(float(np.linalg.norm(value)), 1.0)
        self.assertAlmostEqual(complex(value[0] / value[1]), 4.0)
        self.assertEqual(curve.degree, 2)
        self.assertEqual(curve.dimension, 1)

    def test_catalog_maps_are_ratios_of_the_first_row_over_the_second(self) -> None:
        z = 0.7 - 1.3j
        for kind, parameters, expected in (
            ("identity", {}, z),
            ("power", {"degree": 1}, z),
            ("power", {"degree": 2}, z**2),
            ("power", {"degree": 3}, z**3),
            ("bubble", {"eps": 0.01}, z + 0.01 / z),
        ):
            with self.subTest(kind=kind, **parameters):
                curve, _ = make_instance(kind, **parameters)
                value = curve.evaluate(SpherePoint(0, z))
                self.assertAlmostEqual(complex(value[0] / value[1]), expected)

    def test_bubble_at_two(self) -> None:
        curve, _ = make_instance("bubble", eps=0.01)
        value = curve.evaluate(SpherePoint(0, 2.0))
        self.assertAlmostEqual(complex(value[0] / value[1]), 2.005)

    def test_curves_are_frozen(self) -> None:
        curve, _ = make_instance("identity")
        with self.assertRaises(FrozenInstanceError):
            curve.target = TargetKind.FLAT  # type: ignore[misc]

    def test_pullback_by_identity(self) -> None:
        curve, _ = make_instance("random", degree=3, seed=1)
        self.assertTrue(curve.pullback(MoebiusTransform.identity()).same_as(curve))

    def test_pullback_composes_pointwise(self) -> None:
        curve, _ = make_instance("random", degree=2, seed=4)
        moebius = MoebiusTransform.random(np.random.default_rng(9), 0.4)
        pulled = curve.pullback(moebius)
        self.assertEqual(pulled.degree, curve.degree)
        for z in (0.3 + 0.2j, -0.5j, 0.9):
            point = SpherePoint(0, z)
            first = pulled.evaluate(point)
            second = curve.evaluate(moebius.apply(point))
            self.assertAlmostEqual(abs(np.vdot(first, second)), 1.0)


class TestSuperSection(unittest.TestCase):
    def test_coefficient_count(self) -> None:
        curve, _ = make_instance("identity")
        with self.assertRaisesRegex(InvalidInputError, "formal degree"):
            SuperSection(curve, LineBundleSpec(1), np.ones((2, 2)))

    def test_derivative_part_needs_degree_minus_two(self) -> None:
        curve, _ = make_instance("identity")
        zero = SuperSection.zero(curve, -1)
        with self.assertRaisesRegex(InvalidInputError, "d = -2"):
            SuperSection(curve, zero.bundle, zero.coefficients, 0.5)

    def test_ghost_section(self) -> None:
        with self.assertRaises(GhostSectionError):
            make_instance("constant", section="random")

    def test_section_along_the_curve_is_zero(self) -> None:
        curve, _ = make_instance("power", degree=2)
        section = SuperSection(curve, LineBundleSpec(1), np.zeros((2, 4)))
        self.assertTrue(section.is_zero())
        along = SuperSection(curve, LineBundleSpec(1), np.hstack([curve.coefficients, np.zeros((2, 1))]))
        self.assertTrue(along.is_zero())
        self.assertFalse(make_instance("power", degree=2, bundle_degree=1, section="random")[1].is_zero())

    def test_pullback_keeps_bundle_degree(self) -> None:
        _, section = make_instance("identity", section="random")
        pulled = pullback_section(section, MoebiusTransform.rotation(0.4))
        self.assertEqual(pulled.bundle.degree, -1)


class TestCatalog(unittest.TestCase):
    def test_unknown_kind(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "unknown instance kind"):
            make_instance("helix")

    def test_invalid_parameters(self) -> None:
        with self.assertRaises(InvalidInputError):
            make_instance("power", degree=0)
        with self.assertRaises(InvalidInputError):
            make_instance("bubble", eps=0.0)
        with self.assertRaises(InvalidInputError):
            make_instance("identity", bundle_degree=0)

    def test_seeded_instances_repeat(self) -> None:
        first = make_instance("random", degree=2, section="random", seed=11)
        second = make_instance("random", degree=2, section="random", seed=11)
        self.assertTrue(first[0].same_as(second[0]))
        np.testing.assert_array_equal(first[1].coefficients, second[1].coefficients)


class TestResiduals(unittest.TestCase):
    def test_exact_instances_have_small_residuals(self) -> None:
        for kind, params in (
            ("identity", {"section": "random"}),
            ("power", {"degree": 3, "bundle_degree": -2, "section": "derivative"}),
            ("bubble", {"eps": 0.1, "section": "random"}),
            ("flat", {"bundle_degree": 2, "section": "random"}),
        ):
            with self.subTest(kind=kind, **params):
                curve, section = make_instance(kind, **params)
                report = residual_global(curve, section)
                self.assertLessEqual(report.curve, 1e-6)
                self.assertLessEqual(report.section, 1e-6)
                self.assertEqual(report.derivative_method, "closed-form")
                self.assertGreater(report.evaluated_points, 0)

    def test_central_differences(self) -> None:
        curve, section = make_instance("identity", section="random")
        report = residual_global(curve, section, h=1e-3)
        self.assertEqual(report.derivative_method, "central h=0.001")
        self.assertLessEqual(max(report.curve, report.section), 1e-3)

    def test_trivial_connection_on_projective_target(self) -> None:
        curve, section = make_instance("identity")
        with self.assertRaises(UnsupportedConnectionError):
            residual_global(curve, section, Connection.TRIVIAL)

    def test_step_range(self) -> None:
        curve, section = make_instance("identity")
        with self.assertRaises(InvalidInputError):
            residual_global(curve, section, h=0.5)

    def test_section_over_another_curve(self) -> None:
        curve, _ = make_instance("identity")
        _, section = make_instance("power", degree=2)
        with self.assertRaises(InvalidInputError):
            residual_global(curve, section)


if __name__ == "__main__":
    unittest.main()
