# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest

from supercurves.exceptions import InvalidInputError
from supercurves.suites import SuiteName, run_suite


class TestSuites(unittest.TestCase):
    def test_quantization(self) -> None:
        result = run_suite("quantization", 4, 1)
        self.assertTrue(result.passed)
        self.assertEqual(result.total, 6)
        self.assertEqual(result.rows[-1][0], "hbar")
        self.assertAlmostEqual(result.rows[2][1], 3 * math.pi, delta=1e-6)

    def test_conformality(self) -> None:
        result = run_suite("conformality", 20, 5)
        self.assertTrue(result.passed)
        self.assertEqual(result.total, 20)
        self.assertEqual({row[1] for row in result.rows}, {-2, -1, 1, 2})

    def test_invariance(self) -> None:
        result = run_suite("invariance", 3, 0, threads=2)
        self.assertTrue(result.passed, result.rows)
        self.assertEqual([row[0] for row in result.rows], [0, 1, 2])

    def test_seeds_repeat(self) -> None:
        first = run_suite("conformality", 5, 9)
        second = run_suite("conformality", 5, 9, threads=3)
        self.assertEqual(first.rows, second.rows)

    def test_isoperimetric(self) -> None:
        result = run_suite("isoperimetric", 5, 2)
        self.assertTrue(result.passed)
        self.assertEqual(result.total, 8)
        self.assertEqual(sum(1 for row in result.rows if row[1] == "saturation"), 3)

    def test_isoperimetric_without_constant_fails(self) -> None:
        result = run_suite("isoperimetric", 5, 2, constant=0.0)
        self.assertFalse(result.passed)
        self.assertEqual(result.failures, 8)

    def test_mvi(self) -> None:
        result = run_suite("mvi", 2, 0)
        self.assertTrue(result.passed)
        self.assertEqual(result.total, 4)

    def test_residuals(self) -> None:
        result = run_suite(SuiteName.RESIDUALS.value, 1, 0)
        self.assertTrue(result.passed, result.rows)
        self.assertEqual(result.total, 8)
        for row in result.rows:
            self.assertLessEqual(row[1], 1e-6)

    def test_arguments(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "unknown suite"):
            run_suite("everything", 3, 0)
        with self.assertRaisesRegex(InvalidInputError, "count must be positive"):
            run_suite("quantization", 0, 0)


if __name__ == "__main__":
    unittest.main()
