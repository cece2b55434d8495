# pylint: disable="missing-class-docstring", "missing-function-docstring"
import csv
import io
import json
import tempfile
import unittest
from pathlib import Path

from supercurves.exceptions import InvalidInputError
from supercurves.geometry import MoebiusTransform, SpherePoint
from supercurves.quadrature import Annulus, Disc, Sphere
from supercurves.records import (
    curve_from_record,
    curve_to_record,
    dump_json,
    format_value,
    load_curve,
    load_sequence,
    load_stable,
    moebius_from_record,
    parse_region,
    point_from_record,
    stable_from_record,
    stable_to_record,
    write_csv,
)

FILES = Path(__file__).parents[1] / "files"


class TestCurveRecords(unittest.TestCase):
    def test_identity(self) -> None:
        curve, section = load_curve(FILES / "identity.json")
        self.assertEqual(curve.degree, 1)
        self.assertEqual(section.bundle.degree, -1)
        self.assertTrue(section.is_zero())

    def test_section_with_derivative_part(self) -> None:
        curve, section = load_curve(FILES / "cubic_with_section.json")
        self.assertEqual(curve.degree, 3)
        self.assertEqual(section.bundle.degree, -2)
        self.assertEqual(section.derivative_coefficient, 0.25)
        self.assertFalse(section.is_zero())

    def test_errors_carry_the_path(self) -> None:
        for name, expected in (
            ("wrong_shape.json", "wrong_shape.json.components: expected 2 rows of 3 coefficients"),
            ("degree_zero_bundle.json", "degree_zero_bundle.json.section.bundle_degree: d = 0 is refused"),
            ("truncated.json", "invalid JSON"),
        ):
            with self.subTest(name=name):
                with self.assertRaises(InvalidInputError) as context:
                    load_curve(FILES / name)
                self.assertIn(expected, str(context.exception))

    def test_field_errors(self) -> None:
        record = curve_to_record(*load_curve(FILES / "identity.json"))
        record["dim"] = "one"
        with self.assertRaisesRegex(InvalidInputError, r"^curve\.dim: expected an integer"):
            curve_from_record(record, "curve")
        record["dim"] = 1
        record["target"] = "RP"
        with self.assertRaises(InvalidInputError):
            curve_from_record(record, "curve")

    def test_round_trip(self) -> None:
        curve, section = load_curve(FILES / "cubic_with_section.json")
        again, section_again = curve_from_record(curve_to_record(curve, section))
        self.assertTrue(again.same_as(curve))
        self.assertEqual(section_again.derivative_coefficient, section.derivative_coefficient)
        self.assertEqual(section_again.coefficients.tolist(), section.coefficients.tolist())


class TestStableRecords(unittest.TestCase):
    def test_round_trip(self) -> None:
        x = load_stable(FILES / "bubble_limit.json")
        stream = io.StringIO()
        dump_json(stable_to_record(x), stream)
        again = stable_from_record(json.loads(stream.getvalue()))
        self.assertEqual(again.tree, x.tree)
        self.assertEqual(again.nodal, x.nodal)
        self.assertEqual(again.marked, x.marked)
        for alpha in x.tree.vertices:
            self.assertTrue(again.curve(alpha).same_as(x.curve(alpha)))

    def test_tree_errors_carry_the_path(self) -> None:
        record = json.loads((FILES / "bubble_limit.json").read_text(encoding="utf-8"))
        record["tree"]["parents"] = [2]
        with self.assertRaisesRegex(InvalidInputError, r"^x\.tree\.parents\[0\]"):
            stable_from_record(record, "x")

    def test_nodal_key_format(self) -> None:
        record = json.loads((FILES / "bubble_limit.json").read_text(encoding="utf-8"))
        record["nodal"]["1to2"] = record["nodal"].pop("1-2")
        with self.assertRaisesRegex(InvalidInputError, "alpha-beta"):
            stable_from_record(record)

    def test_points_and_transforms(self) -> None:
        self.assertTrue(point_from_record("inf", "p").is_infinity)
        self.assertEqual(point_from_record({"chart": 1, "z": [0.5, 0]}, "p"), SpherePoint(1, 0.5))
        with self.assertRaises(InvalidInputError):
            point_from_record({"chart": 2, "z": [0, 0]}, "p")
        self.assertTrue(
            moebius_from_record([1, 0, 0, 0, 0, 0, 1, 0], "m").acts_like(MoebiusTransform.identity())
        )
        with self.assertRaisesRegex(InvalidInputError, "8 reals"):
            moebius_from_record([1, 0], "m")


class TestSequences(unittest.TestCase):
    def test_load_sequence(self) -> None:
        members, nus, witnesses = load_sequence(FILES / "sequence")
        self.assertEqual(nus, [2500.0, 5000.0, 10000.0])
        self.assertEqual(len(members), 3)
        self.assertEqual(witnesses[0][0], (1, 1))
        self.assertTrue(witnesses[2][1][2].acts_like(MoebiusTransform.scaling(1e-4)))

    def test_empty_directory(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaisesRegex(InvalidInputError, "no \\*.json"):
                load_sequence(Path(directory))


class TestRegions(unittest.TestCase):
    def test_forms(self) -> None:
        self.assertIsInstance(parse_region("sphere"), Sphere)
        self.assertEqual(parse_region("disc:0:0.5:0:0.2"), Disc(SpherePoint(0, 0.5), 0.2))
        self.assertTrue(parse_region("exterior:1:0:0:0.5").exterior)
        self.assertEqual(parse_region("annulus:0:0:0:1:2"), Annulus(SpherePoint.origin(), 1.0, 2.0))

    def test_errors(self) -> None:
        for text in ("ring", "disc:0:a:0:1", "disc:0:0:1", "sphere:1"):
            with self.subTest(text=text):
                with self.assertRaisesRegex(InvalidInputError, "^region: "):
                    parse_region(text)


class TestCsv(unittest.TestCase):
    def test_full_precision(self) -> None:
        self.assertEqual(format_value(0.1), "0.10000000000000001")
        self.assertEqual(format_value(1 - 2j), "1-2j")
        self.assertEqual(format_value(3), "3")
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "nested" / "rows.csv"
            write_csv(path, ["nu", "value"], [(1250.0, 1 / 3)])
            with open(path, encoding="utf-8", newline="") as file:
                rows = list(csv.reader(file))
        self.assertEqual(rows, [["nu", "value"], ["1250", "0.33333333333333331"]])


if __name__ == "__main__":
    unittest.main()
