#!/usr/bin/env python

"""Tests for `localmix.cover`."""

import math
import unittest

import numpy as np

from localmix.cover import (
    CoverSpec,
    HGram,
    constant_c,
    invariants,
    kernel_member,
    limit_density,
    p_norm,
    polytope_integral,
    radial_integral,
    surface_area,
)
from localmix.errors import ConfigError, GramMissing, InvalidGram, NotSurjective
from localmix.fuchsian import Word, preset


class TestCoverSpec(unittest.TestCase):
    """Validation of the cover homomorphism."""

    def test_surjectivity(self):
        CoverSpec(((1, 1),), 2)
        CoverSpec(((1, 0), (1, 1)), 2)
        with self.assertRaises(NotSurjective):
            CoverSpec(((2, 0),), 2)
        with self.assertRaises(NotSurjective):
            CoverSpec(((1, 1), (1, -1)), 2)
        with self.assertRaises(ConfigError):
            CoverSpec(((1, 0, 0),), 2)

    def test_images(self):
        spec = CoverSpec(((1, 1),), 2)
        self.assertEqual(spec.image((2, -1)), (1,))
        np.testing.assert_array_equal(
            spec.images(np.array([[1, 0], [3, 4]])), [[1], [7]]
        )
        self.assertTrue(kernel_member(spec, Word.parse("aB")))
        self.assertFalse(kernel_member(spec, Word.parse("ab")))
        self.assertEqual(CoverSpec.from_dict(spec.to_dict(), 2), spec)
        with self.assertRaises(ConfigError):
            CoverSpec.from_dict({"d": 2, "phi": [[1, 1]]}, 2)

    def test_surface_area(self):
        self.assertAlmostEqual(surface_area(0, 3), 2 * math.pi)
        self.assertAlmostEqual(surface_area(2, 0), 4 * math.pi)
        with self.assertRaises(ConfigError):
            surface_area(0, 2)


class TestInvariants(unittest.TestCase):
    """Residues, the p/h split and the limit constant."""

    def setUp(self):
        self.gamma2 = preset("gamma2")
        self.torus = preset("punctured_torus")

    def test_homology_cover_of_gamma2(self):
        inv = invariants(self.gamma2, CoverSpec.identity(2))
        self.assertEqual((inv.p, inv.h, inv.d), (2, 0, 2))
        np.testing.assert_array_equal(inv.residues, [[1, 0], [0, -1], [-1, 1]])
        self.assertAlmostEqual(inv.m0, 2 * math.pi)
        self.assertAlmostEqual(inv.c_p_factor / (6 * math.pi**2), 1.0, places=8)
        polytope = invariants(self.gamma2, CoverSpec.identity(2), method="polytope")
        self.assertAlmostEqual(polytope.c_p_factor / (6 * math.pi**2), 1.0, places=8)
        result = constant_c(inv)
        self.assertTrue(result.exact)
        self.assertAlmostEqual(result.c, 3 / (4 * math.pi), places=8)
        self.assertAlmostEqual(limit_density(inv, [0.0, 0.0]), 1.5, places=8)
        self.assertEqual(inv.predicted_exponent("mixing"), 2.0)
        self.assertEqual(inv.predicted_exponent("geodesics"), 3.0)
        self.assertAlmostEqual(p_norm(inv, [1.0, 0.0], ambient=True), 1 / math.pi)

    def test_rank_one_cover(self):
        inv = invariants(self.gamma2, CoverSpec(((1, 0),), 2))
        self.assertEqual((inv.p, inv.h), (1, 0))
        self.assertAlmostEqual(inv.c_p_factor, 2 * math.pi, places=10)
        self.assertAlmostEqual(constant_c(inv).c, 1 / (2 * math.pi), places=10)

    def test_density_is_even_and_peaked(self):
        inv = invariants(self.gamma2, CoverSpec.identity(2))
        peak = limit_density(inv, [0.0, 0.0])
        for xi in ([0.5, 0.0], [0.3, -0.7], [1.0, 1.0]):
            value = limit_density(inv, xi)
            self.assertLess(abs(value), peak)
            mirrored = limit_density(inv, [-v for v in xi])
            self.assertAlmostEqual(value, mirrored, places=8)

    def test_h_factor(self):
        inv = invariants(self.torus, CoverSpec.identity(2))
        self.assertEqual((inv.p, inv.h), (0, 2))
        self.assertEqual(inv.predicted_exponent("mixing"), 1.0)
        partial = constant_c(inv)
        self.assertFalse(partial.exact)
        self.assertIsNone(partial.h_factor)
        with self.assertRaises(GramMissing):
            constant_c(inv, exact=True)
        with self.assertRaises(GramMissing):
            limit_density(inv, [0.0, 0.0])
        gram = HGram(np.eye(2))
        result = constant_c(inv, gram)
        self.assertTrue(result.exact)
        self.assertAlmostEqual(result.h_factor, math.pi)
        self.assertAlmostEqual(result.c, 1 / (8 * math.pi**2))
        self.assertAlmostEqual(limit_density(inv, [0.0, 0.0], gram), 1 / (4 * math.pi))
        self.assertAlmostEqual(
            limit_density(inv, [2.0, 0.0], gram),
            math.exp(-1.0) / (4 * math.pi),
        )

    def test_bad_gram(self):
        with self.assertRaises(InvalidGram):
            HGram(np.array([[1.0, 0.5], [0.0, 1.0]]))
        with self.assertRaises(InvalidGram):
            HGram(np.array([[1.0, 0.0], [0.0, -1.0]]))
        inv = invariants(self.torus, CoverSpec.identity(2))
        with self.assertRaises(InvalidGram):
            constant_c(inv, HGram(np.eye(3)))


class TestIntegrals(unittest.TestCase):
    """Radial quadrature against closed forms."""

    def test_one_dimensional(self):
        value, _ = radial_integral(np.array([[1.0], [-2.0]]))
        self.assertAlmostEqual(value, 2 / 3)
        value, _ = radial_integral(np.array([[1.0]]), np.array([2.0]))
        self.assertAlmostEqual(value, 2 / 5)

    def test_square_norm(self):
        rows = np.eye(2)
        value, _ = radial_integral(rows)
        self.assertAlmostEqual(value, 4.0, places=8)
        self.assertAlmostEqual(polytope_integral(rows), 4.0, places=10)
        value, _ = radial_integral(rows, np.array([1.0, 0.5]))
        self.assertAlmostEqual(value, (2 / 2) * (2 / 1.25), places=8)

    def test_three_dimensional(self):
        rows = np.eye(3)
        value, _ = radial_integral(rows)
        self.assertAlmostEqual(value, 8.0, places=4)
        self.assertAlmostEqual(polytope_integral(rows), 8.0, places=8)


if __name__ == "__main__":
    unittest.main()
