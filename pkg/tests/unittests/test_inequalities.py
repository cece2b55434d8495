# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest

import numpy as np

from supercurves.exceptions import InvalidInputError
from supercurves.inequalities import (
    ISOPERIMETRIC_CONSTANT,
    decay_fit,
    heinz_check,
    instance_rng,
    isoperimetric_check,
    isoperimetric_sweep,
    mvi1_check,
    mvi2_check,
    mvi_sweep,
    random_holomorphic_pair,
)
from supercurves.local import PlanarDomain, polynomial_pair, random_local_instance, residual_local


def affine_pair(slope: complex = 1 + 2j):
    return polynomial_pair(np.zeros((1, 1)), [[0.3, slope]], PlanarDomain.disc(0j, 1.0))


class TestMeanValueInequalities(unittest.TestCase):
    def test_flat_structure_has_no_correction(self) -> None:
        pair = polynomial_pair(np.zeros((1, 1)), [[0.1, 0.1]], PlanarDomain.disc(0j, 1.0))
        report = mvi1_check(pair, 0.5, resolution=16)
        self.assertEqual(report.constants["a"], 0.0)
        self.assertTrue(report.applicable)
        self.assertTrue(report.passed)

    def test_random_exact_instances(self) -> None:
        for index in range(3):
            pair = random_local_instance(instance_rng(0, index))
            with self.subTest(index=index):
                for report in (mvi1_check(pair, 0.15, 32), mvi2_check(pair, 0.15, 32)):
                    self.assertTrue(report.applicable, report.name)
                    self.assertTrue(report.passed, report.name)

    def test_random_instances_solve_the_equations(self) -> None:
        pair = random_local_instance(instance_rng(4, 0))
        grid = pair.domain.grid(12, margin=0.01)
        curve, section = residual_local(pair, grid, closed_forms=True)
        self.assertLess(max(curve, section), 1e-8)

    def test_large_mass_is_not_applicable(self) -> None:
        pair = polynomial_pair(np.zeros((1, 1)), [[5.0]], PlanarDomain.disc(0j, 1.0))
        report = mvi1_check(pair, 0.5, resolution=16)
        self.assertFalse(report.applicable)
        self.assertFalse(report.passed)

    def test_radius_must_be_positive(self) -> None:
        with self.assertRaises(InvalidInputError):
            mvi1_check(affine_pair(), 0.0)

    def test_sweep(self) -> None:
        summary = mvi_sweep(3, 0)
        self.assertEqual(summary.total, 6)
        self.assertEqual(summary.failures, 0)


class TestHeinzEstimate(unittest.TestCase):
    def test_subharmonic_weight(self) -> None:
        report = heinz_check(lambda z: np.abs(z) ** 2, 0.5, 0.0, 1.0)
        self.assertTrue(report.applicable)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.rhs, 8 / (math.pi * 0.25) * math.pi / 32, delta=1e-6)

    def test_constant_weight(self) -> None:
        report = heinz_check(lambda z: np.ones(np.shape(z)), 0.5, 0.0, 0.2)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.rhs, 8.0, delta=1e-6)

    def test_superharmonic_weight_is_not_applicable(self) -> None:
        report = heinz_check(lambda z: 1 - np.abs(z) ** 2, 0.5, 0.0, 1.0)
        self.assertFalse(report.applicable)
        self.assertFalse(report.passed)

    def test_parameters(self) -> None:
        with self.assertRaises(InvalidInputError):
            heinz_check(lambda z: np.abs(z) ** 2, 0.5, 0.0, 0.0)
        with self.assertRaises(InvalidInputError):
            heinz_check(lambda z: np.abs(z) ** 2, 0.5, -1.0, 1.0)


class TestIsoperimetricInequality(unittest.TestCase):
    def test_affine_maps_are_extremal(self) -> None:
        report = isoperimetric_check(affine_pair(), 0.5)
        self.assertTrue(report.passed)
        self.assertLess(abs(report.lhs - report.rhs), 1e-6 * report.rhs)
        self.assertAlmostEqual(report.lhs, math.pi * 0.25 * 5, delta=1e-6)

    def test_quadratic_map_is_strict(self) -> None:
        pair = polynomial_pair(np.zeros((1, 1)), [[0, 0, 1]], PlanarDomain.disc(0j, 1.0))
        report = isoperimetric_check(pair, 0.5)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.lhs, 2 * math.pi * 0.5**4, delta=1e-8)
        self.assertAlmostEqual(report.rhs, 4 * math.pi * 0.5**4, delta=1e-8)

    def test_zero_constant_fails(self) -> None:
        self.assertFalse(isoperimetric_check(affine_pair(), 0.5, constant=0.0).passed)

    def test_invalid_arguments(self) -> None:
        with self.assertRaises(InvalidInputError):
            isoperimetric_check(affine_pair(), 0.5, constant=-1.0)
        with self.assertRaises(InvalidInputError):
            isoperimetric_check(affine_pair(), 2.0)
        with self.assertRaises(InvalidInputError):
            isoperimetric_check(affine_pair(), 0.5, metric=np.eye(3))

    def test_averaged_metric(self) -> None:
        report = isoperimetric_check(affine_pair(), 0.5, metric=np.diag([2.0, 2.0]))
        self.assertLess(abs(report.lhs - report.rhs), 1e-6 * report.rhs)

    def test_sweep(self) -> None:
        summary = isoperimetric_sweep(5, 3)
        self.assertEqual(summary.total, 5)
        self.assertEqual(summary.failures, 0)
        self.assertEqual(isoperimetric_sweep(5, 3, constant=0.0).failures, 5)
        self.assertEqual(ISOPERIMETRIC_CONSTANT, 1 / (4 * math.pi))


class TestDecayFit(unittest.TestCase):
    def test_power_decay(self) -> None:
        pair = polynomial_pair(np.zeros((1, 1)), [[0, 0, 0, 1]], PlanarDomain.disc(0j, 1.0))
        fit = decay_fit(pair, [0.05, 0.1, 0.2, 0.4])
        self.assertAlmostEqual(fit.slope, 4.0, delta=1e-8)
        self.assertAlmostEqual(fit.nu, 3.0, delta=1e-8)
        self.assertAlmostEqual(fit.constant, 18.0, delta=1e-6)

    def test_ladder_validation(self) -> None:
        pair = random_holomorphic_pair(np.random.default_rng(1))
        with self.assertRaises(InvalidInputError):
            decay_fit(pair, [0.1, 0.2, 0.3])
        with self.assertRaises(InvalidInputError):
            decay_fit(pair, [0.0, 0.1, 0.2, 0.3])

    def test_vanishing_derivative(self) -> None:
        pair = polynomial_pair(np.zeros((1, 1)), [[1.0]], PlanarDomain.disc(0j, 1.0))
        with self.assertRaises(InvalidInputError):
            decay_fit(pair, [0.1, 0.2, 0.3, 0.4])


if __name__ == "__main__":
    unittest.main()
