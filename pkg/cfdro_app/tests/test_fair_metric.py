import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from ..cfdro_core.data import generate_example1, lin_scm
from ..cfdro_core.errors import DatasetError, DimensionError, LossSpecError
from ..cfdro_core.fair_metric import CfdfMetric, NormSpec, cfdf_distance, cost_z, dual_norm, naive_distance

NORMS = (NormSpec('l1'), NormSpec('l2'), NormSpec('linf'), NormSpec('wl2', (4.0, 1.0)))


class NormSpecTest(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(NormSpec.parse('L2'), NormSpec('l2'))
        self.assertEqual(NormSpec.parse('wl2:1,2.5'), NormSpec('wl2', (1.0, 2.5)))
        self.assertEqual(str(NormSpec.parse('wl2:1,2.5')), 'wl2:1.0,2.5')

    def test_invalid_specs(self):
        for spec in ('l3', 'l1:2', 'wl2:a,b', 'wl2:1,-1'):
            with self.assertRaises(LossSpecError, msg=spec):
                NormSpec.parse(spec)

    def test_dual_norm(self):
        self.assertEqual(dual_norm(NormSpec('l1'), [1.0, 0.0]), 1.0)
        self.assertEqual(dual_norm(NormSpec('l2'), [3.0, 4.0]), 5.0)
        self.assertEqual(dual_norm(NormSpec('linf'), [1.0, -2.0]), 3.0)
        self.assertAlmostEqual(dual_norm(NormSpec('wl2', (4.0, 1.0)), [2.0, 1.0]), math.sqrt(2.0))
        for norm in NORMS:
            self.assertEqual(dual_norm(norm, [0.0, 0.0]), 0.0)

    def test_dual_spec(self):
        x = np.random.default_rng(7).normal(size=(20, 2))
        for norm in NORMS:
            assert_allclose(norm.dual_spec().norm(x), norm.dual(x), rtol=1e-12)
            assert_allclose(norm.dual_spec().dual(x), norm.norm(x), rtol=1e-12)

    def test_holder_maximizer_attains_dual_norm(self):
        rng = np.random.default_rng(0)
        for norm in NORMS:
            x = rng.normal(size=(50, 2))
            z = norm.holder_maximizer(x)
            self.assertTrue(np.all(norm.norm(z) <= 1.0 + 1e-12), msg=str(norm))
            assert_allclose(np.sum(z * x, axis=1), norm.dual(x), rtol=1e-12)

    def test_holder_maximizer_of_zero(self):
        for norm in NORMS:
            assert_allclose(norm.holder_maximizer(np.zeros(2)), np.zeros(2))

    def test_unit_axes(self):
        for norm in NORMS:
            assert_allclose(norm.norm(norm.unit_axes(2)), [1.0, 1.0])


class DistanceTest(SimpleTestCase):
    def setUp(self):
        self.m2 = generate_example1('M2')
        self.metric = CfdfMetric(self.m2, NormSpec('l1'))
        self.v = np.array([1.0, 1.0, 1.0])

    def test_twin_at_zero_distance(self):
        self.assertAlmostEqual(cfdf_distance(self.metric, self.v, [0.0, 0.0, -2.0]), 0.0)
        self.assertEqual(cfdf_distance(self.metric, self.v, self.v), 0.0)

    def test_shift_distance(self):
        self.assertAlmostEqual(cfdf_distance(self.metric, self.v, [1.0, 1.05, 1.1]), 0.05)

    def test_naive_distance(self):
        self.assertAlmostEqual(naive_distance(NormSpec('l1'), self.v, [1.0, 1.05, 1.1], (0,)), 0.15)
        self.assertEqual(naive_distance(NormSpec('l1'), self.v, self.v, (0,)), 0.0)
        self.assertEqual(naive_distance(NormSpec('l1'), self.v, [0.0, 0.0, -2.0], (0,)), 4.0)

    def test_naive_distance_length_mismatch(self):
        with self.assertRaises(DimensionError):
            naive_distance(NormSpec('l1'), self.v, [1.0, 1.0])

    def test_shift_distance_is_shift_norm(self):
        lin = lin_scm()
        rng = np.random.default_rng(1)
        for norm in NORMS:
            metric = CfdfMetric(lin, norm)
            for _ in range(20):
                v = lin.reduced_form(rng.normal(size=3))
                delta = rng.normal(size=2)
                self.assertAlmostEqual(float(metric.distance(v, lin.counterfactual_shift(v, delta))),
                                       float(norm.norm(delta)), places=10)

    def test_pseudo_metric_axioms(self):
        lin = lin_scm()
        rng = np.random.default_rng(5)
        for norm in NORMS:
            metric = CfdfMetric(lin, norm)
            for _ in range(50):
                U = rng.normal(size=(3, 3))
                U[:, 0] = rng.integers(0, 2, size=3)
                u, v, w = lin.reduced_form(U)
                if rng.random() < 0.3:
                    # twin of u, at distance zero
                    v = lin.twin_array(u[None, :], [[1.0 - u[0]]])[0, 0]
                d_uv, d_vu = float(metric.distance(u, v)), float(metric.distance(v, u))
                d_vw, d_uw = float(metric.distance(v, w)), float(metric.distance(u, w))
                self.assertAlmostEqual(d_uv, d_vu, delta=1e-10, msg=str(norm))
                self.assertGreaterEqual(d_uv, 0.0)
                self.assertLessEqual(d_uw, d_uv + d_vw + 1e-10, msg=str(norm))
                self.assertAlmostEqual(float(metric.distance(u, u)), 0.0, delta=1e-10)

    def test_rows(self):
        V = self.m2.reduced_form(np.random.default_rng(2).normal(size=(5, 3)))
        distances = self.metric.distance(V, V[::-1])
        self.assertEqual(distances.shape, (5,))
        cache = self.metric.bind(V)
        self.assertAlmostEqual(float(cache.distance(0, V[4])), float(distances[0]))

    def test_weights_must_cover_nonsensitive_coordinates(self):
        with self.assertRaises(DimensionError):
            CfdfMetric(self.m2, NormSpec('wl2', (1.0, 1.0, 1.0)))


class CostTest(SimpleTestCase):
    def setUp(self):
        self.metric = CfdfMetric(generate_example1('M2'), NormSpec('l1'))
        self.v = np.array([1.0, 1.0, 1.0])

    def test_label_transport_forbidden(self):
        self.assertEqual(cost_z(self.metric, (self.v, 1), (self.v, -1)), math.inf)

    def test_same_point(self):
        self.assertEqual(cost_z(self.metric, (self.v, 1), (self.v, 1)), 0.0)

    def test_twin_pair(self):
        self.assertAlmostEqual(cost_z(self.metric, (self.v, -1), ([0.0, 0.0, -2.0], -1)), 0.0)

    def test_invalid_label(self):
        with self.assertRaises(DatasetError):
            cost_z(self.metric, (self.v, 0), (self.v, 1))
