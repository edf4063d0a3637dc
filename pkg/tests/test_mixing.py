#!/usr/bin/env python

"""Tests for `localmix.mixing`."""

import math
import unittest

import numpy as np

from localmix.cover import CoverSpec
from localmix.errors import BoxOutsideDomain, ConfigError, ZeroMass
from localmix.fuchsian import evaluate, preset, reduce_point
from localmix.fuchsian.words import Word
from localmix.hyperbolic import Moebius, PointH2, UnitTangent, apply, geodesic_flow
from localmix.mixing import (
    FlowBox,
    MixingEstimate,
    MixingSeries,
    decay_fit,
    finite_volume_limit,
    flow_and_reduce,
    flow_and_reduce_batch,
    haar_mass,
    matrix_coefficient,
    renormalized_ratio,
    sample_box,
)
from localmix.models import SamplingPlan


def frame_array(vectors):
    return np.array(
        [np.reshape(v.frame.to_float().as_tuple(), (2, 2)) for v in vectors]
    )


def base_point(frame):
    return UnitTangent(Moebius.from_real(*frame.ravel())).base_point


class TestBoxes(unittest.TestCase):
    """Haar mass and sampling of flow boxes."""

    def test_haar_mass(self):
        self.assertAlmostEqual(haar_mass(FlowBox((0.0, 1.0), (1.0, 2.0))), 0.5)
        half = FlowBox((0.0, 1.0), (1.0, 2.0), arc=(0.0, math.pi))
        self.assertAlmostEqual(haar_mass(half), 0.25)
        with self.assertRaises(ZeroMass):
            FlowBox((0.0, 1.0), (1.0, 1.0))

    def test_finite_volume_limit(self):
        box = FlowBox((0.0, 1.0), (1.0, 2.0))
        m0 = 2.0 * math.pi
        self.assertAlmostEqual(finite_volume_limit(box, box, m0), 0.25 / m0)

    def test_samples_follow_hyperbolic_area(self):
        box = FlowBox((0.0, 1.0), (1.0, 2.0))
        count = 100_000
        x, y, theta = sample_box(box, np.random.default_rng(3), count)
        self.assertTrue(np.all((x >= 0.0) & (x <= 1.0)))
        self.assertTrue(np.all((y >= 1.0) & (y <= 2.0)))
        self.assertTrue(np.all(np.abs(theta) <= math.pi))
        stderr = math.sqrt((7.0 / 12.0 - 0.75**2) / count)
        self.assertLess(abs(np.mean(1.0 / y) - 0.75), 4 * stderr)


class TestFlow(unittest.TestCase):
    """Flowing and pulling back into the polygon of gamma2."""

    def setUp(self):
        self.group = preset("gamma2")
        self.spec = CoverSpec.identity(2)
        self.rng = np.random.default_rng(5)

    def random_vectors(self, count):
        box = FlowBox((-0.4, 0.4), (1.0, 2.0))
        x, y, theta = sample_box(box, self.rng, count)
        return [
            UnitTangent.from_point_angle(PointH2(float(a), float(b)), float(c))
            for a, b, c in zip(x, y, theta)
        ]

    def test_time_zero_inside_polygon(self):
        v = UnitTangent.from_point_angle(PointH2(0.2, 1.5), 0.3)
        w, sheet = flow_and_reduce(self.group, self.spec, v, (0, 0), 0.0)
        self.assertEqual(sheet, (0, 0))
        self.assertAlmostEqual(w.base_point.x, 0.2, places=12)
        self.assertAlmostEqual(w.base_point.y, 1.5, places=12)

    def test_single_crossing_moves_sheet(self):
        v = UnitTangent.from_point_angle(PointH2(0.5, 2.0), 0.0)
        flowed = geodesic_flow(v, 0.5).base_point
        self.assertGreater(flowed.x, 1.0)
        expected = apply(evaluate(self.group, Word.parse("A")), flowed)
        w, sheet = flow_and_reduce(self.group, self.spec, v, (0, 0), 0.5)
        self.assertEqual(sheet, (-1, 0))
        self.assertAlmostEqual(w.base_point.x, expected.x, places=9)
        self.assertAlmostEqual(w.base_point.y, expected.y, places=9)
        frames, sheets, escaped = flow_and_reduce_batch(
            self.group, self.spec, frame_array([v]), [[0, 0]], 0.5
        )
        self.assertFalse(escaped[0])
        self.assertEqual(sheets[0].tolist(), [-1, 0])
        self.assertAlmostEqual(base_point(frames[0]).x, expected.x, places=9)

    def test_sheet_is_equivariant(self):
        for v in self.random_vectors(10):
            _, sheet = flow_and_reduce(self.group, self.spec, v, (0, 0), 2.5)
            _, moved = flow_and_reduce(self.group, self.spec, v, (3, -2), 2.5)
            self.assertEqual(moved, (sheet[0] + 3, sheet[1] - 2))

    def test_legs_compose(self):
        for v in self.random_vectors(10):
            once, sheet = flow_and_reduce(self.group, self.spec, v, (0, 0), 1.5)
            half, mid = flow_and_reduce(self.group, self.spec, v, (0, 0), 0.7)
            twice, end = flow_and_reduce(self.group, self.spec, half, mid, 0.8)
            self.assertEqual(sheet, end)
            self.assertAlmostEqual(once.base_point.x, twice.base_point.x, places=8)
            self.assertAlmostEqual(once.base_point.y, twice.base_point.y, places=8)

    def test_matches_reduction_of_lifted_flow(self):
        for v in self.random_vectors(20):
            w, sheet = flow_and_reduce(self.group, self.spec, v, (0, 0), 3.0)
            z, word = reduce_point(self.group, geodesic_flow(v, 3.0).base_point)
            shift = self.spec.image(word.abelianize(2))
            self.assertEqual(sheet, tuple(-s for s in shift))
            self.assertAlmostEqual(w.base_point.x, z.x, places=7)
            self.assertAlmostEqual(w.base_point.y, z.y, places=7)

    def test_batch_matches_scalar(self):
        vectors = self.random_vectors(50)
        frames, sheets, escaped = flow_and_reduce_batch(
            self.group, self.spec, frame_array(vectors), np.zeros((50, 2)), 3.0
        )
        self.assertFalse(escaped.any())
        for v, frame, sheet in zip(vectors, frames, sheets):
            w, expected = flow_and_reduce(self.group, self.spec, v, (0, 0), 3.0)
            self.assertEqual(tuple(sheet.tolist()), expected)
            z = base_point(frame)
            self.assertAlmostEqual(z.x, w.base_point.x, places=7)
            self.assertAlmostEqual(z.y, w.base_point.y, places=7)


class TestMatrixCoefficient(unittest.TestCase):
    """Monte Carlo estimates of the matrix coefficient."""

    def setUp(self):
        self.group = preset("gamma2")
        self.spec = CoverSpec.identity(2)
        self.box = FlowBox((-0.4, 0.4), (1.0, 2.0), sheet=(0, 0))
        self.plan = SamplingPlan(samples=2000, seed=1, batch=1000)

    def test_time_zero_same_box(self):
        result = matrix_coefficient(
            self.group, self.spec, self.box, self.box, 0.0, self.plan
        )
        self.assertAlmostEqual(result.estimate, haar_mass(self.box))
        self.assertEqual(result.stderr, 0.0)
        self.assertEqual(result.samples, 2000)
        self.assertEqual(result.discarded, 0)

    def test_time_zero_disjoint_boxes(self):
        other = FlowBox((0.5, 0.9), (1.0, 2.0), sheet=(0, 0))
        result = matrix_coefficient(
            self.group, self.spec, other, self.box, 0.0, self.plan
        )
        self.assertEqual(result.estimate, 0.0)

    def test_rejects_bad_input(self):
        with self.assertRaises(ConfigError):
            matrix_coefficient(
                self.group, self.spec, self.box, self.box, 1.0, SamplingPlan(samples=10)
            )
        outside = FlowBox((0.5, 1.5), (1.0, 2.0), sheet=(0, 0))
        with self.assertRaises(BoxOutsideDomain):
            matrix_coefficient(self.group, self.spec, outside, self.box, 1.0, self.plan)
        wrong_sheet = FlowBox((-0.4, 0.4), (1.0, 2.0), sheet=(1,))
        with self.assertRaises(ConfigError):
            matrix_coefficient(
                self.group, self.spec, wrong_sheet, self.box, 1.0, self.plan
            )

    def test_deterministic_for_seed_and_threads(self):
        args = (self.group, self.spec, self.box, self.box, 2.0)
        first = matrix_coefficient(*args, plan=self.plan)
        again = matrix_coefficient(*args, plan=self.plan)
        parallel = matrix_coefficient(
            *args, plan=SamplingPlan(samples=2000, seed=1, batch=1000, threads=2)
        )
        self.assertEqual(first.estimate, again.estimate)
        self.assertEqual(first.estimate, parallel.estimate)
        self.assertEqual(first.stderr, parallel.stderr)


class TestDecayFit(unittest.TestCase):
    """Exponent selection on synthetic series."""

    def series(self, values):
        t = np.arange(4.0, 13.0)
        points = [
            MixingEstimate(float(s), float(v), 0.001 * float(v), 10_000, 0)
            for s, v in zip(t, values(t))
        ]
        return MixingSeries(points)

    def test_selects_power(self):
        wobble = 1 + 0.001 * (-1) ** np.arange(9)
        series = self.series(lambda t: 0.1 / t * wobble)
        report = decay_fit(series)
        self.assertEqual(report.selected, 1.0)
        constant = report.constants[report.alphas.index(1.0)]
        self.assertAlmostEqual(constant, 0.1, places=3)
        self.assertFalse(report.poor_fit)
        series = self.series(lambda t: 2.0 / t**2)
        self.assertEqual(decay_fit(series).selected, 2.0)

    def test_weights_follow_relative_error(self):
        # Early points decay like 1/t and are precise to 0.1%; late points decay
        # like 1/t^2 and carry 10% relative error but small absolute error.
        early = [(t, 1.0 / t, 0.001 / t) for t in (1.0, 2.0, 3.0)]
        late = [(t, 0.1 / t**2, 0.01 / t**2) for t in range(10, 15)]
        series = MixingSeries(
            [MixingEstimate(float(t), v, s, 10_000, 0) for t, v, s in early + late]
        )
        report = decay_fit(series, alphas=(1.0, 2.0))
        self.assertEqual(report.selected, 1.0)
        self.assertAlmostEqual(report.constants[0], 1.0, places=2)

    def test_flat_series_is_poor_fit(self):
        series = self.series(lambda t: 0.05 * np.ones_like(t))
        report = decay_fit(series, alphas=(1.0, 2.0))
        self.assertTrue(report.poor_fit)

    def test_renormalized_ratio(self):
        box_a = FlowBox((0.0, 1.0), (1.0, 2.0))
        box_b = FlowBox((0.0, 1.0), (1.0, 2.0), arc=(0.0, math.pi))
        c = 0.3
        scale = c * haar_mass(box_a) * haar_mass(box_b)
        series = self.series(lambda t: scale / t**1.5)
        ratio = renormalized_ratio(series, c, 1.5, box_a, box_b)
        np.testing.assert_allclose(ratio, np.ones(9), rtol=1e-12)


if __name__ == "__main__":
    unittest.main()
