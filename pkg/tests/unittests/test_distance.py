# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest
from pathlib import Path

import numpy as np

from supercurves.exceptions import InvalidInputError, TreeError
from supercurves.geometry import MoebiusTransform
from supercurves.moduli.distance import (
    apply_equivalence,
    equivalent,
    parallel_transport,
    rho_distance,
    rho_eval,
    rho_search,
)
from supercurves.records import load_stable

FILES = Path(__file__).parents[1] / "files"


class TestRhoEval(unittest.TestCase):
    def test_distance_to_itself_vanishes(self) -> None:
        for name, tree_map in (("single_identity.json", (1,)), ("bubble_limit.json", (1, 2))):
            x = load_stable(FILES / name)
            moebius = {alpha: MoebiusTransform.identity() for alpha in x.tree.vertices}
            with self.subTest(name=name):
                breakdown = rho_eval(x, x, tree_map, moebius, 0.5)
                for term in breakdown.terms:
                    self.assertLessEqual(term, 1e-9)
                self.assertEqual(breakdown.tree_map, tree_map)

    def test_rotated_map_is_measured(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        breakdown = rho_eval(x, x, (1,), {1: MoebiusTransform.rotation(0.3)}, 0.5)
        self.assertGreater(breakdown.map_phi, 0.1)
        self.assertGreater(breakdown.marked, 0.1)

    def test_arguments_are_checked(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        with self.assertRaises(TreeError):
            rho_eval(x, x, (2,), {1: MoebiusTransform.identity()}, 0.5)
        with self.assertRaises(InvalidInputError):
            rho_eval(x, x, (1,), {}, 0.5)
        with self.assertRaises(InvalidInputError):
            rho_eval(x, x, (1,), {1: MoebiusTransform.identity()}, 0.0)


class TestRhoSearch(unittest.TestCase):
    def test_equivalent_pair(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        moved = apply_equivalence(x, {1: MoebiusTransform.random(np.random.default_rng(2), 0.3)})
        breakdown = rho_search(x, moved, 0.5, samples=1000)
        self.assertIsNotNone(breakdown)
        self.assertLessEqual(breakdown.total, 1e-4)

    def test_no_tree_homomorphism(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        other = load_stable(FILES / "bubble_limit.json")
        self.assertIsNone(rho_search(x, other, 0.5))
        self.assertEqual(rho_distance(x, other, 0.5), math.inf)


class TestEquivalence(unittest.TestCase):
    def test_witness_recovers_the_transform(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        moebius = MoebiusTransform.random(np.random.default_rng(6), 0.3)
        witness = equivalent(x, apply_equivalence(x, {1: moebius}))
        self.assertIsNotNone(witness)
        self.assertEqual(witness.tree_map, (1,))
        self.assertTrue(witness.moebius[1].acts_like(moebius, 1e-6))

    def test_bubble_limit_is_equivalent_to_itself(self) -> None:
        x = load_stable(FILES / "bubble_limit.json")
        witness = equivalent(x, apply_equivalence(x, {1: MoebiusTransform.identity(), 2: MoebiusTransform.scaling(2.0)}))
        self.assertIsNotNone(witness)
        self.assertEqual(witness.tree_map, (1, 2))

    def test_different_trees(self) -> None:
        x = load_stable(FILES / "single_identity.json")
        self.assertIsNone(equivalent(x, load_stable(FILES / "bubble_limit.json")))


class TestParallelTransport(unittest.TestCase):
    def test_horizontal_and_isometric(self) -> None:
        start = np.array([1.0 + 0j, 0j])
        end = np.array([1.0 + 0j, 1.0j]) / math.sqrt(2)
        moved = parallel_transport(start, np.array([0j, 1.0 + 0j]), end)
        self.assertAlmostEqual(abs(np.vdot(end, moved)), 0.0)
        self.assertAlmostEqual(float(np.linalg.norm(moved)), 1.0)

    def test_staying_put(self) -> None:
        start = np.array([0.6 + 0j, 0.8j])
        vector = np.array([0.8 + 0j, 0.6j]) * 0.5
        np.testing.assert_allclose(parallel_transport(start, vector, start), vector)


if __name__ == "__main__":
    unittest.main()
