# pylint: disable="missing-class-docstring", "missing-function-docstring"
import unittest
from pathlib import Path

from supercurves.exceptions import InvalidInputError
from supercurves.families import nu_ladder
from supercurves.moduli.convergence import (
    Axiom,
    bubbling_case,
    gromov_convergence_check,
    planted_defect,
)
from supercurves.moduli.stable import validate_stable
from supercurves.records import load_sequence, load_stable

FILES = Path(__file__).parents[1] / "files"
LADDER = nu_ladder(1250, 4)


def check(case, samples=1000):
    return gromov_convergence_check(
        case.sequence, case.limit, case.epsilon, case.witnesses, nus=case.nus, samples=samples
    )


class TestBubblingCase(unittest.TestCase):
    def test_limit_is_stable(self) -> None:
        case = bubbling_case(LADDER)
        self.assertEqual(validate_stable(case.limit), [])
        self.assertEqual(len(case.sequence), 4)

    def test_converges(self) -> None:
        report = check(bubbling_case(LADDER))
        self.assertTrue(report.passed, report.residuals)
        self.assertEqual(report.failed, [])
        self.assertEqual(len(report.rows()), 4)
        self.assertEqual(report.rows()[0][0], 1250.0)

    def test_residuals_decrease(self) -> None:
        report = check(bubbling_case(LADDER))
        for axiom in (Axiom.MAP, Axiom.ENERGY):
            ladder = report.residuals[axiom]
            self.assertLessEqual(ladder[-1], ladder[0] + 1e-12, axiom)


class TestPlantedDefects(unittest.TestCase):
    def test_each_defect_fails_its_axiom(self) -> None:
        for axiom in Axiom:
            with self.subTest(axiom=axiom.value):
                report = check(planted_defect(axiom, LADDER))
                self.assertEqual(report.failed, [axiom])


class TestFromFiles(unittest.TestCase):
    def test_sequence_directory(self) -> None:
        sequence, nus, witnesses = load_sequence(FILES / "sequence")
        self.assertEqual(nus, [2500.0, 5000.0, 10000.0])
        self.assertEqual(len(witnesses), 3)
        limit = load_stable(FILES / "bubble_limit.json")
        report = gromov_convergence_check(sequence, limit, 0.5, witnesses, nus=nus, samples=1000)
        self.assertTrue(report.passed, report.residuals)


class TestArguments(unittest.TestCase):
    def test_empty_sequence(self) -> None:
        case = bubbling_case(LADDER)
        with self.assertRaises(InvalidInputError):
            gromov_convergence_check([], case.limit, 0.5)

    def test_ladder_length(self) -> None:
        case = bubbling_case(LADDER)
        with self.assertRaises(InvalidInputError):
            gromov_convergence_check(case.sequence, case.limit, 0.5, case.witnesses, nus=[1.0])
        with self.assertRaises(InvalidInputError):
            gromov_convergence_check(case.sequence, case.limit, 0.5, case.witnesses[:2])


if __name__ == "__main__":
    unittest.main()
