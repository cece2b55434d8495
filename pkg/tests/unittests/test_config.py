# pylint: disable="missing-class-docstring", "missing-function-docstring"
import tempfile
import unittest
from pathlib import Path

from supercurves.config import RunConfig, environment_overrides, load_config, read_config_file
from supercurves.exceptions import InvalidInputError

FILES = Path(__file__).parents[1] / "files"


class TestRunConfig(unittest.TestCase):
    def test_defaults(self) -> None:
        config = RunConfig()
        self.assertEqual(config.eps0, 0.4)
        self.assertEqual(config.nu0, 1250.0)
        self.assertEqual(config.ladder_count, 4)
        self.assertEqual(config.search_tol, 1e-4)

    def test_validation(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "at least 3 entries"):
            RunConfig(ladder_count=2)
        with self.assertRaisesRegex(InvalidInputError, "rel_tol"):
            RunConfig(rel_tol=0.0)
        with self.assertRaises(InvalidInputError):
            RunConfig(threads=0)

    def test_updated_converts_values(self) -> None:
        config = RunConfig().updated({"seed": "3", "rel_tol": "1e-6", "output_dir": "out", "eps0": None})
        self.assertEqual(config.seed, 3)
        self.assertEqual(config.rel_tol, 1e-6)
        self.assertEqual(config.output_dir, Path("out"))
        self.assertEqual(config.eps0, 0.4)

    def test_updated_refuses_bad_values(self) -> None:
        with self.assertRaisesRegex(InvalidInputError, "unknown setting"):
            RunConfig().updated({"colour": "red"})
        with self.assertRaisesRegex(InvalidInputError, "expected an integer"):
            RunConfig().updated({"seed": 1.5})
        with self.assertRaisesRegex(InvalidInputError, "cannot read"):
            RunConfig().updated({"threads": "many"})


class TestSources(unittest.TestCase):
    def test_tool_table(self) -> None:
        self.assertEqual(
            read_config_file(FILES / "supercurves.toml"), {"seed": 7, "rel_tol": 1e-6, "ladder_count": 5}
        )

    def test_precedence(self) -> None:
        config = load_config(
            FILES / "supercurves.toml",
            flags={"ladder_count": 6},
            environ={"SUPERCURVE_SEED": "11", "HOME": "/root"},
        )
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.ladder_count, 6)
        self.assertEqual(config.rel_tol, 1e-6)

    def test_unknown_environment_variable(self) -> None:
        with self.assertLogs("supercurves.config", level="WARNING") as captured:
            overrides = environment_overrides({"SUPERCURVE_COLOUR": "red", "SUPERCURVE_THREADS": "2"})
        self.assertEqual(overrides, {"threads": "2"})
        self.assertIn("SUPERCURVE_COLOUR", captured.output[0])

    def test_plain_file_and_decode_errors(self) -> None:
        with tempfile.TemporaryDirectory() as directory:
            plain = Path(directory) / "plain.toml"
            plain.write_text("threads = 3\n", encoding="utf-8")
            self.assertEqual(load_config(plain, environ={}).threads, 3)
            broken = Path(directory) / "broken.toml"
            broken.write_text("threads = \n", encoding="utf-8")
            with self.assertRaises(InvalidInputError) as context:
                read_config_file(broken)
            self.assertTrue(str(context.exception).startswith(str(broken)))


if __name__ == "__main__":
    unittest.main()
