# pylint: disable="missing-class-docstring", "missing-function-docstring"
import math
import unittest

import numpy as np

from supercurves.exceptions import InvalidInputError
from supercurves.geometry import MoebiusTransform, SpherePoint, sphere_density
from supercurves.quadrature import (
    Annulus,
    Complement,
    Disc,
    Sphere,
    gauss_legendre,
    integrate,
    integrate_loop,
    integrate_planar,
    integrate_with_error,
)


def round_density(z, chart):
    return sphere_density(z)


class TestGaussLegendre(unittest.TestCase):
    def test_weights_and_exactness(self) -> None:
        nodes, weights = gauss_legendre(5)
        self.assertAlmostEqual(float(np.sum(weights)), 1.0)
        self.assertAlmostEqual(float(np.sum(weights * nodes**9)), 0.1)
        self.assertTrue(np.all((nodes > 0) & (nodes < 1)))


class TestSphereRegions(unittest.TestCase):
    def test_sphere_area(self) -> None:
        result = integrate_with_error(round_density, Sphere())
        self.assertAlmostEqual(result.value, math.pi, delta=1e-10)
        self.assertLessEqual(result.error, 1e-8 * math.pi)

    def test_disc_and_exterior_add_up(self) -> None:
        disc = Disc(SpherePoint(0, 0.2 - 0.1j), 0.5)
        inside = integrate(round_density, disc)
        outside = integrate(round_density, Disc(disc.center, disc.radius, exterior=True))
        self.assertAlmostEqual(inside + outside, math.pi, delta=1e-9)

    def test_centered_disc(self) -> None:
        # pi r^2 / (1 + r^2) for the disc of radius r about the origin
        self.assertAlmostEqual(integrate(round_density, Disc(SpherePoint.origin(), 2.0)), 0.8 * math.pi, delta=1e-9)

    def test_complement(self) -> None:
        discs = (Disc(SpherePoint.origin(), 1.0),)
        self.assertAlmostEqual(integrate(round_density, Complement(discs)), 0.5 * math.pi, delta=1e-9)
        with self.assertRaises(InvalidInputError):
            Complement((Disc(SpherePoint.origin(), 1.0, exterior=True),))

    def test_annulus(self) -> None:
        annulus = Annulus(SpherePoint.origin(), 1.0, 2.0)
        self.assertAlmostEqual(integrate(round_density, annulus), 0.3 * math.pi, delta=1e-9)
        self.assertTrue(annulus.contains(SpherePoint(0, 1.5)))
        self.assertFalse(annulus.contains(SpherePoint.infinity()))
        with self.assertRaises(InvalidInputError):
            Annulus(SpherePoint.origin(), 2.0, 1.0)

    def test_concentrated_density(self) -> None:
        eps = 1e-3

        def bump(z, chart):
            return eps**2 / (eps**2 + np.abs(z) ** 2) ** 2

        expected = math.pi / (1.0 + eps**2)
        self.assertAlmostEqual(integrate(bump, Disc(SpherePoint.origin(), 1.0)), expected, delta=1e-7)

    def test_invalid_inputs(self) -> None:
        with self.assertRaises(InvalidInputError):
            Disc(SpherePoint.origin(), 0.0)
        with self.assertRaises(InvalidInputError):
            integrate(round_density, Sphere(), rel_tol=0.0)
        with self.assertRaisesRegex(InvalidInputError, "not finite"):
            integrate(lambda z, chart: np.full(np.shape(z), np.nan), Sphere())


class TestDiscTransform(unittest.TestCase):
    def test_rotation_image(self) -> None:
        disc = Disc(SpherePoint(0, 0.5), 0.2)
        image = disc.transformed(MoebiusTransform.rotation(math.pi / 2))
        self.assertEqual(image.chart, 0)
        self.assertFalse(image.exterior)
        self.assertAlmostEqual(abs(image.center.z - 0.5j), 0.0)
        self.assertAlmostEqual(image.radius, 0.2)

    def test_exterior_contains_infinity(self) -> None:
        disc = Disc(SpherePoint.origin(), 1.0, exterior=True)
        self.assertTrue(disc.contains(SpherePoint.infinity()))
        self.assertFalse(disc.contains(SpherePoint(0, 0.5)))


class TestPlanar(unittest.TestCase):
    def test_disc_and_annulus_area(self) -> None:
        def ones(z):
            return np.ones(np.shape(z))

        self.assertAlmostEqual(integrate_planar(ones, 0.3 + 0.1j, 2.0), 4 * math.pi, delta=1e-9)
        self.assertAlmostEqual(integrate_planar(ones, 0j, 2.0, inner=1.0), 3 * math.pi, delta=1e-9)

    def test_periodic_loop(self) -> None:
        self.assertAlmostEqual(integrate_loop(lambda angles: np.cos(angles) ** 2), math.pi, delta=1e-12)


if __name__ == "__main__":
    unittest.main()
