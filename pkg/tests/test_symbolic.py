#!/usr/bin/env python

"""Tests for `localmix.symbolic`."""

import itertools
import math
import unittest

import numpy as np

from localmix.errors import (
    InvalidShift,
    NonPositiveRoof,
    NotMixing,
    PeriodicCocycle,
    UnboundedWindow,
)
from localmix.symbolic import (
    MarkovShift,
    ShiftSystem,
    Window,
    check_aperiodic,
    covariance,
    full_shift,
    i_t_direct,
    i_t_unfolded,
    lazy_walk,
    leading_triple,
    llt_series,
    predicted_llt_limit,
    q_sum,
    shift_pairing,
    transfer_apply,
    transfer_pairing,
    truncate,
    twisted_spectral_radius,
)
from localmix.symbolic.shift import golden_mean

PRIMITIVE = np.array([[1, 1, 0], [0, 1, 1], [1, 1, 1]])


def random_system(rng, size=3, d=1, low=0.1, high=0.4):
    transition = PRIMITIVE if size == 3 else np.ones((size, size), dtype=int)
    roof = rng.uniform(low, high, (size, size))
    displacement = rng.integers(-1, 2, (size, d))
    return ShiftSystem(MarkovShift(transition), roof, displacement)


def exhaustive_q(gibbs, x, xi, t, window, max_n):
    """Sum over every backward path of length <= max_n."""
    system = gibbs.normalized
    transition = system.shift.transition
    total = 0.0
    for n in range(max_n + 1):
        for path in itertools.product(range(system.size), repeat=n):
            states = list(path) + [x]
            edges = list(zip(states, states[1:]))
            if any(transition[a, b] == 0 for a, b in edges):
                continue
            f = np.zeros(system.d, dtype=int)
            for s in path:
                f = f + system.displacement[s]
            if f.tolist() != list(xi):
                continue
            r = sum(system.roof[a, b] for a, b in edges)
            total += math.exp(-r) * gibbs.psi[states[0]] * window.value(r - t)
    return total



class TestShift(unittest.TestCase):
    """Shift validation and roof bounds."""

    def test_rejects_malformed_transition(self):
        with self.assertRaises(InvalidShift):
            MarkovShift(np.array([[1, 1], [0, 0]]))
        with self.assertRaises(InvalidShift):
            MarkovShift(np.array([[1, 2], [1, 1]]))
        with self.assertRaises(InvalidShift):
            MarkovShift(np.ones((2, 3), dtype=int))

    def test_mixing_detection(self):
        self.assertTrue(MarkovShift(PRIMITIVE).is_mixing)
        self.assertFalse(MarkovShift(np.array([[0, 1], [1, 0]])).is_mixing)
        with self.assertRaises(NotMixing):
            flip = MarkovShift(np.array([[0, 1], [1, 0]]))
            leading_triple(ShiftSystem(flip, 1.0, []))

    def test_roof_bound_with_negative_edge(self):
        roof = np.array([[-0.5, 1.0], [1.0, 2.0]])
        system = ShiftSystem(MarkovShift(np.ones((2, 2), dtype=int)), roof, [])
        with self.assertRaises(NonPositiveRoof):
            system.roof_bound()
        roof = np.array([[0.5, -0.2], [1.0, 2.0]])
        full = MarkovShift(np.ones((2, 2), dtype=int))
        bound = ShiftSystem(full, roof, []).roof_bound()
        self.assertEqual(bound.k, 2)
        self.assertAlmostEqual(bound.c, 0.3)
        self.assertAlmostEqual(bound.m_neg, -0.2)

    def test_truncate_revalidates_rows(self):
        data = {
            "transition": [[1, 1, 0], [0, 0, 1], [1, 1, 1]],
            "r": [[1.0] * 3] * 3,
            "f": [[0], [1], [-1]],
        }
        system = truncate(data, 1)
        self.assertEqual(system.size, 1)
        with self.assertRaises(InvalidShift):
            truncate(data, 2)

    def test_round_trip(self):
        system = lazy_walk()
        again = ShiftSystem.from_dict(system.to_dict())
        np.testing.assert_array_equal(again.roof, system.roof)
        np.testing.assert_array_equal(again.displacement, system.displacement)


class TestOperators(unittest.TestCase):
    """Transfer operator, Perron data and twisted spectra."""

    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_transfer_apply_matches_preimage_sum(self):
        system = random_system(self.rng)
        values = self.rng.normal(size=3)
        expected = np.zeros(3)
        for x in range(3):
            for y in range(3):
                if system.shift.transition[y, x]:
                    expected[x] += math.exp(-system.roof[y, x]) * values[y]
        np.testing.assert_allclose(transfer_apply(system, values), expected, rtol=1e-14)

    def test_closed_form_eigenvalues(self):
        self.assertAlmostEqual(leading_triple(full_shift(2, 0.0)).lam, 2.0, places=12)
        self.assertAlmostEqual(
            leading_triple(golden_mean()).lam, (1 + math.sqrt(5)) / 2, places=12
        )
        gibbs = leading_triple(full_shift(2, math.log(2.0)))
        self.assertAlmostEqual(gibbs.lam, 1.0, places=12)
        np.testing.assert_allclose(gibbs.psi, [1.0, 1.0], atol=1e-12)

    def test_perron_data(self):
        for _ in range(5):
            system = random_system(self.rng)
            gibbs = leading_triple(system)
            np.testing.assert_allclose(
                transfer_apply(system, gibbs.psi), gibbs.lam * gibbs.psi, atol=1e-10
            )
            values = self.rng.normal(size=3)
            self.assertAlmostEqual(
                gibbs.rho @ transfer_apply(system, values),
                gibbs.lam * (gibbs.rho @ values),
                places=10,
            )
            self.assertAlmostEqual(gibbs.psi @ gibbs.rho, 1.0, places=12)
            self.assertAlmostEqual(gibbs.nu.sum(), 1.0, places=12)
            pairs = gibbs.edge_measure
            np.testing.assert_allclose(pairs.sum(axis=0), gibbs.nu, atol=1e-10)
            np.testing.assert_allclose(pairs.sum(axis=1), gibbs.nu, atol=1e-10)

    def test_duality(self):
        for _ in range(5):
            gibbs = leading_triple(random_system(self.rng))
            f, g = self.rng.normal(size=3), self.rng.normal(size=3)
            self.assertAlmostEqual(
                shift_pairing(gibbs, f, g), transfer_pairing(gibbs, f, g), places=12
            )

    def test_twisted_radius_of_lazy_walk(self):
        system = lazy_walk()
        for theta in (0.0, 0.5, 2.0, math.pi):
            self.assertAlmostEqual(
                twisted_spectral_radius(system, [theta]),
                abs(1 + 2 * math.cos(theta)) / 3,
                places=12,
            )

    def test_periodic_cocycle_is_detected(self):
        check_aperiodic(lazy_walk())
        walk = full_shift(2, math.log(2.0), [[-1], [1]])
        with self.assertRaises(PeriodicCocycle):
            check_aperiodic(walk)

    def test_covariance_and_drift(self):
        mean, cov = covariance(lazy_walk())
        self.assertAlmostEqual(mean[0], 0.0, places=8)
        self.assertAlmostEqual(cov[0, 0], 2.0 / 3.0, places=6)
        gibbs = leading_triple(random_system(self.rng))
        mean, _ = covariance(gibbs.normalized)
        np.testing.assert_allclose(mean, gibbs.mean_displacement, atol=1e-6)


class TestSums(unittest.TestCase):
    """Windowed path sums, correlations and the local limit."""

    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.window = Window.indicator()

    def test_window(self):
        with self.assertRaises(UnboundedWindow):
            Window(((0.0, math.inf, 1.0),))
        u = Window(((0.0, 1.0, 1.0), (0.5, 2.0, 2.0)))
        self.assertEqual(u.support, (0.0, 2.0))
        self.assertAlmostEqual(u.integral, 4.0)
        self.assertEqual(u.value(0.75), 3.0)
        unit = Window.indicator(0.0, 1.0)
        self.assertAlmostEqual(unit.overlap(unit, 0.25), 0.75)

    def test_two_shift_example(self):
        gibbs = leading_triple(full_shift(2, math.log(2.0), [[0], [1]]))
        t = 3 * math.log(2.0)
        for x in (0, 1):
            value = q_sum(gibbs, x, [1], t, self.window)
            self.assertAlmostEqual(value, 3 / 8, places=12)
        self.assertEqual(q_sum(gibbs, 0, [50], t, self.window), 0.0)

    def test_q_sum_matches_exhaustive_paths(self):
        t = 2.0
        for _ in range(4):
            gibbs = leading_triple(random_system(self.rng))
            system = gibbs.normalized
            shortest = system.roof[system.shift.transition == 1].min()
            max_n = int((t + 0.5) / shortest) + 1
            for x in range(3):
                for xi in ([0], [1], [-2]):
                    expected = exhaustive_q(gibbs, x, xi, t, self.window, max_n)
                    value = q_sum(gibbs, x, xi, t, self.window)
                    tolerance = 1e-12 * (1 + expected)
                    self.assertAlmostEqual(value, expected, delta=tolerance)


    def test_lazy_walk_trinomial(self):
        gibbs = leading_triple(lazy_walk())
        n = 500
        coefficients = [1]
        for _ in range(n):
            padded = [0, 0] + coefficients + [0, 0]
            coefficients = [sum(padded[k:k + 3]) for k in range(len(padded) - 2)]
        exact = math.exp(math.log(coefficients[n]) - n * math.log(3.0))
        value = q_sum(gibbs, 1, [0], float(n), self.window, clock="steps")
        self.assertAlmostEqual(value / exact, 1.0, places=9)
        self.assertAlmostEqual(math.sqrt(n) * value, 0.4886, delta=0.005)

    def test_llt_prediction(self):
        gibbs = leading_triple(lazy_walk())
        limit = 1 / math.sqrt(2 * math.pi * 2 / 3)
        self.assertAlmostEqual(
            predicted_llt_limit(gibbs, 0, self.window, clock="steps"), limit, places=5
        )
        series = llt_series(gibbs, 0, [0], [200, 300, 400], clock="steps")
        scaled = series.scaled
        self.assertLess((scaled.max() - scaled.min()) / scaled.mean(), 0.05)
        self.assertAlmostEqual(scaled[-1], limit, delta=0.01)

    def test_llt_rejects_parity_walk(self):
        gibbs = leading_triple(full_shift(2, math.log(2.0), [[-1], [1]]))
        self.assertEqual(q_sum(gibbs, 0, [0], 7.0, self.window, clock="steps"), 0.0)
        self.assertGreater(q_sum(gibbs, 0, [0], 8.0, self.window, clock="steps"), 0.0)
        with self.assertRaises(PeriodicCocycle):
            llt_series(gibbs, 0, [0], [8, 10], clock="steps")

    def test_renewal_without_displacement(self):
        roof = np.array([[1.0, math.sqrt(2)], [math.pi / 3, 0.7]])
        system = ShiftSystem(MarkovShift(np.ones((2, 2), dtype=int)), roof, [])
        gibbs = leading_triple(system)
        values = [q_sum(gibbs, 0, [], t, self.window) for t in (15.0, 17.5, 20.0)]
        self.assertLess((max(values) - min(values)) / np.mean(values), 0.05)
        limit = predicted_llt_limit(gibbs, 0, self.window)
        self.assertAlmostEqual(values[-1] / limit, 1.0, delta=0.05)

    def test_correlation_single_state_at_zero(self):
        gibbs = leading_triple(lazy_walk())
        phi = [1.0, 0.0, 0.0]
        u = Window.indicator(0.0, 1.0)
        expected = (1 / 3) / math.log(3.0)
        args = (0.0, 1.0, phi, [0], u, phi, [0], u)
        self.assertAlmostEqual(i_t_direct(gibbs, *args), expected, places=12)
        self.assertAlmostEqual(i_t_unfolded(gibbs, *args), expected, places=12)

    def test_correlation_vanishes_before_time_zero(self):
        gibbs = leading_triple(lazy_walk())
        ones = np.ones(3)
        u = Window.indicator(0.0, 1.0)
        args = (-50.0, 1.0, ones, [0], u, ones, [0], u)
        self.assertEqual(i_t_direct(gibbs, *args), 0.0)
        self.assertEqual(i_t_unfolded(gibbs, *args), 0.0)

    def test_correlation_direct_equals_unfolded(self):
        u1 = Window(((0.0, 1.0, 1.0), (1.0, 1.5, 0.5)))
        u2 = Window.indicator(-0.5, 0.5)
        systems = [full_shift(2, math.log(2.0), [[0], [1]])]
        systems += [random_system(self.rng) for _ in range(5)]
        for system in systems:
            gibbs = leading_triple(system)
            phi1 = self.rng.uniform(0.0, 1.0, system.size)
            phi2 = self.rng.uniform(0.0, 1.0, system.size)
            for t in (1.5, 4.0):
                args = (t, 2.0, phi1, [1], u1, phi2, [0], u2)
                direct = i_t_direct(gibbs, *args)
                unfolded = i_t_unfolded(gibbs, *args)
                self.assertAlmostEqual(direct, unfolded, delta=1e-8 * (1 + abs(direct)))


if __name__ == "__main__":
    unittest.main()
