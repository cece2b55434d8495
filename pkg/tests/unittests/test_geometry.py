# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from supercurves.exceptions import InvalidInputError
from supercurves.geometry import (
    LineBundleSpec,
    MoebiusTransform,
    SpherePoint,
    conformal_factor,
    fiber_weight,
    fs_distance,
    lift_factor,
    recentering,
)

coordinates = st.complex_numbers(max_magnitude=5.0, allow_nan=False, allow_infinity=False)


@st.composite
def moebius_transforms(draw):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    spread = draw(st.floats(min_value=0.05, max_value=0.3))
    return MoebiusTransform.random(np.random.default_rng(seed), spread)


class TestSpherePoint(unittest.TestCase):
    def test_invalid_chart(self) -> None:
        with self.assertRaises(InvalidInputError):
            SpherePoint(2, 0j)

    def test_zero_vector_is_not_a_point(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "not a point"):
            SpherePoint.from_homogeneous(0, 0)

    def test_chart_change(self) -> None:
        point = SpherePoint(0, 2.0)
        self.assertAlmostEqual(point.to_chart(1), 0.5)
        self.assertEqual(point.canonical(), SpherePoint(1, 0.5))
        with self.assertRaises(InvalidInputError):
            SpherePoint.origin().to_chart(1)

    def test_poles(self) -> None:
        self.assertTrue(SpherePoint.infinity().is_infinity)
        self.assertFalse(SpherePoint.origin().is_infinity)
        self.assertAlmostEqual(SpherePoint.origin().chordal_distance(SpherePoint.infinity()), 2.0)

    def test_rechart_keeps_coordinates_inside_band(self) -> None:
        point = SpherePoint(0, 1.05)
        self.assertIs(point.rechart(), point)
        self.assertEqual(SpherePoint(0, 4.0).rechart(), SpherePoint(1, 0.25))

    @given(coordinates)
    def test_unit_vector_round_trip(self, z: complex) -> None:
        point = SpherePoint(0, z)
        again = SpherePoint.from_unit_vector(point.unit_vector())
        self.assertLess(point.chordal_distance(again), 1e-12)
        self.assertAlmostEqual(float(np.linalg.norm(point.unit_vector())), 1.0)

    @given(coordinates, coordinates)
    def test_chordal_distance_is_symmetric_and_bounded(self, z: complex, w: complex) -> None:
        first, second = SpherePoint(0, z), SpherePoint(1, w)
        self.assertAlmostEqual(first.chordal_distance(second), second.chordal_distance(first))
        self.assertLessEqual(first.chordal_distance(second), 2.0 + 1e-12)


class TestMoebiusTransform(unittest.TestCase):
    def test_determinant_is_checked(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "determinant"):
            MoebiusTransform(2, 0, 0, 1)
        normalized = MoebiusTransform.from_matrix([[2, 0], [0, 1]])
        self.assertAlmostEqual(abs(normalized.a * normalized.d - normalized.b * normalized.c), 1.0)

    def test_singular_matrix(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "singular"):
            MoebiusTransform.from_matrix([[1, 2], [2, 4]])

    def test_from_reals_needs_eight_values(self) -> None:
        with self.assertRaises(InvalidInputError):
            MoebiusTransform.from_reals([1.0, 0.0, 0.0])

    def test_translation_and_swap(self) -> None:
        image = MoebiusTransform.translation(1.0).apply(SpherePoint.origin())
        self.assertEqual(image, SpherePoint(0, 1.0))
        self.assertTrue(MoebiusTransform.chart_swap().apply(SpherePoint.origin()).is_infinity)

    def test_recentering(self) -> None:
        for point in (SpherePoint(0, 0.3 - 0.2j), SpherePoint(1, 0.1j), SpherePoint.infinity()):
            moved = recentering(point).apply(point)
            self.assertLess(moved.chordal_distance(SpherePoint.origin()), 1e-12)

    def test_three_point(self) -> None:
        source = [SpherePoint(0, 0j), SpherePoint(0, 1.0), SpherePoint.infinity()]
        target = [SpherePoint(0, 0.5j), SpherePoint(0, -1.0), SpherePoint(0, 2.0)]
        moebius = MoebiusTransform.three_point(source, target)
        for point, expected in zip(source, target):
            self.assertLess(moebius.apply(point).chordal_distance(expected), 1e-10)

    def test_three_point_needs_distinct_points(self) -> None:
        points = [SpherePoint.origin(), SpherePoint.origin(), SpherePoint.infinity()]
        with self.assertRaisesRegex(InvalidInputError, "distinct"):
            MoebiusTransform.three_point(points, points)

    @given(moebius_transforms())
    def test_inverse(self, moebius: MoebiusTransform) -> None:
        self.assertTrue(moebius.compose(moebius.inverse()).acts_like(MoebiusTransform.identity(), 1e-8))


class TestConformality(unittest.TestCase):
    def test_identity_is_isometric(self) -> None:
        point = SpherePoint(0, 0.4 + 0.1j)
        self.assertAlmostEqual(conformal_factor(MoebiusTransform.identity(), point), 1.0)
        self.assertAlmostEqual(abs(lift_factor(MoebiusTransform.identity(), -1, point)), 1.0)

    def test_scaling_at_origin(self) -> None:
        self.assertAlmostEqual(conformal_factor(MoebiusTransform.scaling(2.0), SpherePoint.origin()), 4.0)

    def test_rotations_are_isometric(self) -> None:
        rotation = MoebiusTransform.random_rotation(np.random.default_rng(5))
        for z in (0j, 0.7 - 0.3j, 3.0 + 1.0j):
            self.assertAlmostEqual(conformal_factor(rotation, SpherePoint(0, z)), 1.0)

    @given(moebius_transforms(), coordinates, st.sampled_from([-2, -1, 1, 2]))
    @settings(max_examples=50)
    def test_spin_lift_scales_fiber_metric(self, moebius: MoebiusTransform, z: complex, degree: int) -> None:
        point = SpherePoint(0, z)
        image = moebius.apply(point).canonical()
        measured = abs(lift_factor(moebius, degree, point)) ** 2 * fiber_weight(degree, image) / fiber_weight(
            degree, point
        )
        expected = conformal_factor(moebius, point) ** (degree / 2)
        self.assertLess(abs(measured - expected) / expected, 1e-9)

    def test_lift_refuses_degree_zero(self) -> None:
        with self.assertRaises(InvalidInputError):
            lift_factor(MoebiusTransform.identity(), 0, SpherePoint.origin())


class TestBundleAndTarget(unittest.TestCase):
    def test_degree_zero_bundle_is_refused(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "nonzero"):
            LineBundleSpec(0)

    def test_transition(self) -> None:
        self.assertAlmostEqual(LineBundleSpec(-2).transition(2.0), 4.0)
        with self.assertRaises(InvalidInputError):
            LineBundleSpec(1).transition(0j)

    def test_weight_is_chart_symmetric(self) -> None:
        bundle = LineBundleSpec(-1)
        self.assertAlmostEqual(float(bundle.weight(2.0)), 5.0)
        self.assertAlmostEqual(float(bundle.weight(0.5)), 1.25)

    def test_fubini_study_diameter(self) -> None:
        self.assertAlmostEqual(float(fs_distance([1, 0], [0, 1])), math.pi / 2)
        self.assertAlmostEqual(float(fs_distance([1, 1j], [2, 2j])), 0.0)


if __name__ == "__main__":
    unittest.main()
