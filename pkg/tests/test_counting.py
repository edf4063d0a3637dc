#!/usr/bin/env python

"""Tests for `localmix.counting`."""

import math
import unittest

import numpy as np

from localmix.counting import (
    CountSeries,
    fit_exponent,
    fit_models,
    geodesic_count,
    geodesic_histogram,
    orbit_count,
    primitive_classes,
)
from localmix.cover import CoverSpec
from localmix.errors import ConfigError, InsufficientData
from localmix.fuchsian import Word, evaluate, preset
from localmix.hyperbolic import dist_from_origin


class TestOrbitCount(unittest.TestCase):
    """Kernel orbit counts in balls."""

    def setUp(self):
        self.group = preset("gamma2")

    def test_base_surface_matches_words(self):
        letters = [(g, s) for g in range(2) for s in (1, -1)]
        distances = [0.0]
        frontier = [()]
        for _ in range(8):
            grown = [
                prefix + (letter,)
                for prefix in frontier
                for letter in letters
                if not prefix or prefix[-1] != (letter[0], -letter[1])
            ]
            distances += [
                dist_from_origin(evaluate(self.group, Word(w))) for w in grown
            ]
            frontier = grown
        grid = [1.0, 2.0, 3.0, 4.0]
        series = orbit_count(self.group, CoverSpec.trivial(2), grid)
        expected = [sum(d < t for d in distances) for t in grid]
        self.assertEqual(series.n.tolist(), expected)
        self.assertEqual(series.kind, "orbit")

    def test_homology_cover_kernel_is_sparse(self):
        series = orbit_count(self.group, CoverSpec.identity(2), [1.0, 2.0, 3.0, 4.0])
        self.assertEqual(series.n.tolist(), [1, 1, 1, 1])

    def test_first_generator_cover(self):
        spec = CoverSpec(((1, 0),), 2)
        series = orbit_count(self.group, spec, [2.0])
        self.assertEqual(series.n.tolist(), [3])

    def test_series_validation(self):
        with self.assertRaises(ConfigError):
            CountSeries([2.0, 1.0], [1, 1], "orbit")
        with self.assertRaises(ConfigError):
            CountSeries([1.0, 2.0], [1], "orbit")


class TestGeodesicCount(unittest.TestCase):
    """Closed geodesics by homology class."""

    def setUp(self):
        self.group = preset("gamma2")
        self.spec = CoverSpec.identity(2)

    def test_histogram_covers_every_class(self):
        classes = primitive_classes(self.group, 3.6)
        histogram = geodesic_histogram(self.group, self.spec, 3.6, classes)
        self.assertEqual(sum(histogram.values()), 6)
        self.assertGreaterEqual(histogram[(1, 1)], 1)
        series = geodesic_count(
            self.group, self.spec, (1, 1), [3.0, 3.6], classes=classes
        )
        self.assertEqual(series.n.tolist(), [0, histogram[(1, 1)]])

    def test_reversal_symmetry(self):
        classes = primitive_classes(self.group, 5.0)
        histogram = geodesic_histogram(self.group, self.spec, 5.0, classes)
        for xi, count in histogram.items():
            self.assertEqual(histogram.get(tuple(-v for v in xi)), count)
        grid = [3.6, 4.0, 4.5, 5.0]
        for xi in [(1, 1), (1, -1), (2, 0), (0, 1)]:
            forward = geodesic_count(self.group, self.spec, xi, grid, classes=classes)
            backward = geodesic_count(
                self.group, self.spec, [-v for v in xi], grid, classes=classes
            )
            self.assertEqual(forward.n.tolist(), backward.n.tolist())

    def test_rejects_wrong_rank(self):
        with self.assertRaises(ConfigError):
            geodesic_count(self.group, self.spec, (1,), [3.6])


class TestFit(unittest.TestCase):
    """Exponent discrimination on synthetic counts."""

    def setUp(self):
        self.t = np.arange(30.0, 61.0)

    def test_selects_alpha(self):
        counts = 2.0 * np.exp(self.t) / self.t * (1 + 5 / self.t)
        series = CountSeries(self.t, counts, "synthetic")
        report = fit_exponent(series, (30.0, 60.0), predicted=1.0)
        self.assertEqual(report.selected, 1.0)
        self.assertEqual(report.predicted, 1.0)
        self.assertFalse(report.poor_fit)
        self.assertEqual(report.best_residual, min(report.residuals))

    def test_exact_power(self):
        for alpha in (0.0, 1.5, 2.0):
            counts = 0.7 * np.exp(self.t) / self.t**alpha
            series = CountSeries(self.t, counts, "synthetic")
            report = fit_exponent(series, (30.0, 60.0))
            self.assertEqual(report.selected, alpha)
            index = report.alphas.index(alpha)
            self.assertAlmostEqual(report.constants[index], 0.7)

    def test_short_window_constant(self):
        t = np.arange(8.0, 15.0)
        series = CountSeries(t, 7.0 * np.exp(t) / t**2, "synthetic")
        report = fit_exponent(series, (8.0, 14.0))
        self.assertEqual(report.selected, 2.0)
        constant = report.constants[report.alphas.index(2.0)]
        self.assertAlmostEqual(constant, 7.0, places=9)

    def test_insufficient_data(self):
        counts = np.exp(self.t)
        with self.assertRaises(InsufficientData):
            fit_models(self.t, counts, (1.0,), (30.0, 33.0))
        counts[3] = 0.0
        with self.assertRaises(InsufficientData):
            fit_models(self.t, counts, (1.0,), (30.0, 60.0))
        with self.assertRaises(ConfigError):
            fit_models(self.t, np.exp(self.t), (1.0,), (30.0, 60.0), model="cubic")

    def test_poor_fit_flag(self):
        counts = np.exp(self.t) * np.exp(np.sin(self.t))
        report = fit_models(self.t, counts, (0.0, 1.0), (30.0, 60.0))
        self.assertTrue(report.poor_fit)
        self.assertGreater(report.best_residual, report.threshold)
        self.assertAlmostEqual(math.log(report.constants[0]), 0.0, delta=0.5)


if __name__ == "__main__":
    unittest.main()
