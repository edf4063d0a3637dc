#!/usr/bin/env python

"""Exponent-discrimination experiments across `localmix.counting` and `localmix.mixing`.

The full-size runs take minutes to tens of minutes and only run when
LOCALMIX_SLOW is set.
"""

import os
import unittest

import numpy as np

from localmix.counting import (
    fit_exponent,
    geodesic_count,
    orbit_count,
    primitive_classes,
)
from localmix.cover import CoverSpec, constant_c, invariants
from localmix.fuchsian import preset
from localmix.mixing import (
    FlowBox,
    decay_fit,
    finite_volume_limit,
    matrix_coefficient,
    mixing_series,
    renormalized_ratio,
)
from localmix.models import SamplingPlan

SLOW = bool(os.environ.get("LOCALMIX_SLOW"))
THREADS = os.cpu_count() or 1
WIDE_ALPHAS = (1.0, 1.5, 2.0, 2.5, 3.0)


class TestSmallBudgetPipeline(unittest.TestCase):
    """Counts and fits on the homology cover with a ball of radius 8."""

    def setUp(self):
        self.group = preset("gamma2")
        self.grid = np.arange(5.0, 8.01, 0.25)

    def test_homology_cover_orbit_fit(self):
        base = orbit_count(self.group, CoverSpec.trivial(2), self.grid)
        kernel = orbit_count(self.group, CoverSpec.identity(2), self.grid)
        self.assertTrue(np.all(kernel.n <= base.n))
        self.assertTrue(np.all(np.diff(kernel.n) >= 0))
        self.assertEqual(kernel.n[0], 1)
        self.assertGreater(kernel.n[-1], 1)
        report = fit_exponent(kernel, (5.0, 8.0), WIDE_ALPHAS, predicted=2.0)
        self.assertIn(report.selected, WIDE_ALPHAS)
        self.assertEqual(len(report.residuals), len(WIDE_ALPHAS))
        self.assertEqual(report.predicted, 2.0)

    def test_homology_cover_geodesic_fit(self):
        spec = CoverSpec.identity(2)
        classes = primitive_classes(self.group, 8.0)
        series = geodesic_count(self.group, spec, (0, 0), self.grid, classes=classes)
        total = geodesic_count(
            self.group, CoverSpec.trivial(2), (), self.grid, classes=classes
        )
        self.assertTrue(np.all(series.n <= total.n))
        self.assertEqual(total.n[-1], len(classes))
        if np.all(series.n > 0):
            report = fit_exponent(series, (5.0, 8.0), WIDE_ALPHAS)
            self.assertIn(report.selected, WIDE_ALPHAS)


@unittest.skipUnless(SLOW, "set LOCALMIX_SLOW=1 to run the long experiments")
class TestExponentDiscrimination(unittest.TestCase):
    """The selected exponents on gamma2 covers at desk-scale T and t."""

    def setUp(self):
        self.group = preset("gamma2")
        self.first = CoverSpec(((1, 0),), 2)

    def test_orbit_exponents(self):
        grid = np.arange(9.0, 14.01, 0.25)
        series = orbit_count(self.group, self.first, grid, threads=THREADS)
        self.assertEqual(fit_exponent(series, (9.0, 14.0)).selected, 1.0)
        series = orbit_count(
            self.group, CoverSpec.identity(2), grid, threads=THREADS
        )
        report = fit_exponent(series, (9.0, 14.0), WIDE_ALPHAS)
        self.assertEqual(report.selected, 2.0)

    def test_null_class_geodesic_exponent(self):
        grid = np.arange(10.0, 16.01, 0.25)
        classes = primitive_classes(self.group, 16.0, threads=THREADS)
        series = geodesic_count(self.group, self.first, (0,), grid, classes=classes)
        report = fit_exponent(series, (10.0, 16.0), WIDE_ALPHAS)
        self.assertEqual(report.selected, 2.0)

    def test_local_mixing_rate(self):
        box = FlowBox((-0.4, 0.4), (1.0, 2.0), sheet=(0,))
        plan = SamplingPlan(samples=1_000_000, seed=0, threads=THREADS)
        t_grid = [float(t) for t in range(4, 13)]
        series = mixing_series(self.group, self.first, box, box, t_grid, plan)
        report = decay_fit(series, alphas=(0.5, 1.0, 1.5))
        self.assertEqual(report.selected, 1.0)
        c = constant_c(invariants(self.group, self.first)).c
        ratio = renormalized_ratio(series, c, 1.0, box, box)
        at_ten = ratio[t_grid.index(10.0)]
        self.assertGreaterEqual(at_ten, 0.5)
        self.assertLessEqual(at_ten, 2.0)

    def test_finite_volume_anchor(self):
        box = FlowBox((-0.4, 0.4), (1.0, 2.0))
        plan = SamplingPlan(samples=1_000_000, seed=0, threads=THREADS)
        result = matrix_coefficient(
            self.group, CoverSpec.trivial(2), box, box, 20.0, plan
        )
        expected = finite_volume_limit(box, box, self.group.area)
        self.assertLessEqual(abs(result.estimate - expected), 3 * result.stderr)


if __name__ == "__main__":
    unittest.main()
