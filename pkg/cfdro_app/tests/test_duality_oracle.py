import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from ..cfdro_core.data import generate_lin, lin_scm
from ..cfdro_core.duality_oracle import (CandidateSet, GridSpec, adversarial_sandwich, box_transport_cost,
                                         dual_value_grid, empirical_wasserstein, finite_sample_bound, ot_cost_discrete,
                                         primal_value_brute, random_linear_instance, sample_support)
from ..cfdro_core.errors import NonlinearScmError, OracleInputError
from ..cfdro_core.fair_metric import CfdfMetric, NormSpec
from ..cfdro_core.losses import LossSpec
from ..cfdro_core.training import (ModelParams, TrainerConfig, cdro_closed_objective, cdro_first_order_objective,
                                   cf_sup_risk, erm_objective)
from .test_scm import tanh_scm

ONE_POINT = (np.array([[1.0, 3.0, 0.0]]), np.array([1.0]))
HINGE = LossSpec('hinge')
L1 = NormSpec('l1')


class GridSpecTest(SimpleTestCase):
    def test_invalid(self):
        for kwargs in ({'lambda_grid': (1.0, 0.5)}, {'lambda_grid': ()}, {'lambda_grid': (0.0, 1.0)},
                       {'axis_points': 0}, {'radius': 0.0}, {'penalty': 'lambda_d'}):
            with self.assertRaises(OracleInputError, msg=str(kwargs)):
                GridSpec(**kwargs)

    def test_shift_grid_starts_at_zero(self):
        grid = GridSpec(axis_points=3)
        shifts = grid.shift_grid(2, 1.0)
        self.assertEqual(shifts.shape, (49, 2))
        assert_array_equal(shifts[0], [0.0, 0.0])
        self.assertEqual(np.abs(shifts).max(), 1.0)

    def test_max_radius(self):
        self.assertEqual(GridSpec(radius=2.0, expansion_factor=4.0, max_expansions=2).max_radius, 32.0)


class DualValueTest(SimpleTestCase):
    def setUp(self):
        self.scm = lin_scm()

    def test_one_point_example(self):
        result = dual_value_grid(ONE_POINT, self.scm, ModelParams([0.0, 1.0, 0.0]), HINGE, 0.1, 1.0, norm=L1)
        self.assertAlmostEqual(result.value, 0.1, delta=0.002)
        self.assertFalse(result.unbounded_suspected)
        self.assertAlmostEqual(result.lam, 1.0, delta=0.02)

    def test_zero_model(self):
        result = dual_value_grid(ONE_POINT, self.scm, ModelParams.zeros(3), HINGE, 0.1, 1.0, norm=L1)
        self.assertAlmostEqual(result.value, 1.0, delta=0.02)

    def test_matches_closed_form(self):
        theta = ModelParams([0.0, 0.4, 0.0])
        cfg = TrainerConfig(kind='cdro_closed', delta=0.1, norm=L1, loss=HINGE)
        closed = cdro_closed_objective(ONE_POINT, self.scm, theta, cfg)
        self.assertAlmostEqual(closed, 0.64)
        dual = dual_value_grid(ONE_POINT, self.scm, theta, HINGE, 0.1, 1.0, norm=L1).value
        self.assertAlmostEqual(dual, closed, delta=0.02 * closed)

    def test_zero_radius_is_cf_sup(self):
        scm, data = generate_lin(20, 1)
        theta = ModelParams([0.5, -0.3, 0.2], 0.1)
        result = dual_value_grid(data, scm, theta, HINGE, 0.0, 2.0)
        self.assertAlmostEqual(result.value, cf_sup_risk(data, scm, theta, HINGE, 2.0))
        self.assertEqual(result.lam, math.inf)

    def test_random_instances_match_closed_form(self):
        for seed in range(3):
            instance = random_linear_instance(seed)
            closed = cdro_closed_objective(instance.data, instance.scm, instance.params, instance.trainer_config())
            dual = dual_value_grid(instance.data, instance.scm, instance.params, instance.loss, instance.delta,
                                   instance.power, norm=instance.norm).value
            self.assertAlmostEqual(dual, closed, delta=0.02 * max(abs(closed), 1e-12), msg=f'seed {seed}')


class PrimalValueTest(SimpleTestCase):
    def setUp(self):
        self.scm, self.data = generate_lin(10, 2)
        self.theta = ModelParams([0.5, -0.3, 0.2], 0.1)

    def test_sample_support_gives_erm(self):
        primal = primal_value_brute(self.data, self.scm, self.theta, HINGE, 0.5, 1.0,
                                    support=sample_support(self.data))
        self.assertAlmostEqual(primal, erm_objective(self.data, self.theta, HINGE))

    def test_twins_at_zero_radius_give_cf_sup(self):
        twins = self.scm.twin_array(self.data.features, [[0.0], [1.0]])
        support = [CandidateSet(twins[i], np.zeros(2)) for i in range(len(self.data))]
        primal = primal_value_brute(self.data, self.scm, self.theta, HINGE, 0.0, 2.0, support=support)
        self.assertAlmostEqual(primal, cf_sup_risk(self.data, self.scm, self.theta, HINGE, 2.0))

    def test_candidate_support_reaches_closed_form(self):
        primal = primal_value_brute(ONE_POINT, self.scm, ModelParams([0.0, 0.4, 0.0]), HINGE, 0.1, 1.0, norm=L1)
        self.assertAlmostEqual(primal, 0.64, places=6)

    def test_support_must_cover_every_sample(self):
        with self.assertRaises(OracleInputError):
            primal_value_brute(self.data, self.scm, self.theta, HINGE, 0.1, 1.0, support=sample_support(ONE_POINT))


class TransportTest(SimpleTestCase):
    def test_line_example(self):
        weights = [0.5, 0.5]
        cost = np.abs(np.array([0.0, 10.0])[:, None] - np.array([0.4, 10.0])[None, :])
        self.assertAlmostEqual(ot_cost_discrete(weights, weights, cost, 1.0), 0.2)
        self.assertAlmostEqual(ot_cost_discrete(weights, weights, cost, 2.0), math.sqrt(0.08))

    def test_infeasible(self):
        cost = np.full((2, 2), math.inf)
        self.assertEqual(ot_cost_discrete([0.5, 0.5], [0.5, 0.5], cost), math.inf)

    def test_invalid_inputs(self):
        with self.assertRaises(OracleInputError):
            ot_cost_discrete([0.5, 0.4], [0.5, 0.5], np.zeros((2, 2)))
        with self.assertRaises(OracleInputError):
            ot_cost_discrete([0.5, 0.5], [1.0], np.zeros((2, 2)))

    def test_empirical_wasserstein(self):
        scm = lin_scm()
        metric = CfdfMetric(scm, L1)
        v = np.array([1.0, 3.0, 0.0])
        moved = scm.counterfactual_shift(v, [0.05, 0.0])
        self.assertAlmostEqual(empirical_wasserstein((v[None, :], [1.0]), (moved[None, :], [1.0]), metric), 0.05)
        self.assertEqual(empirical_wasserstein((v[None, :], [1.0]), (v[None, :], [-1.0]), metric), math.inf)

    def test_twins_are_free(self):
        scm = lin_scm()
        metric = CfdfMetric(scm, NormSpec('l2'))
        V = np.array([[1.0, 3.0, 0.0], [0.0, -0.5, 1.0]])
        twins = scm.twin_array(V, [[0.0], [1.0]])
        flipped = np.array([twins[0, 0], twins[1, 1]])
        self.assertAlmostEqual(empirical_wasserstein((V, [1.0, -1.0]), (flipped, [1.0, -1.0]), metric), 0.0)


class SandwichTest(SimpleTestCase):
    def setUp(self):
        self.scm = lin_scm()

    def test_gap_halves_with_copies(self):
        gaps = [adversarial_sandwich(ONE_POINT, self.scm, ModelParams([0.0, 0.4, 0.0]), HINGE, 0.1, 1.0, K,
                                     norm=L1).gap for K in (1, 2, 4, 8)]
        self.assertAlmostEqual(gaps[1], gaps[0] / 2.0)
        self.assertAlmostEqual(gaps[2], gaps[0] / 4.0)
        self.assertAlmostEqual(gaps[3], gaps[0] / 8.0)

    def test_one_point_example(self):
        result = adversarial_sandwich(ONE_POINT, self.scm, ModelParams([0.0, 1.0, 0.0]), HINGE, 0.1, 1.0, 1,
                                      norm=L1)
        self.assertAlmostEqual(result.lower, 0.1)
        self.assertEqual(result.L, 1.0)
        self.assertEqual(result.M, 0.0)
        self.assertLessEqual(result.lower, 0.1 + 1e-12)
        self.assertGreaterEqual(result.upper, 0.1)

    def test_zero_model(self):
        result = adversarial_sandwich(ONE_POINT, self.scm, ModelParams.zeros(3), HINGE, 0.1, 1.0, 2, norm=L1)
        self.assertAlmostEqual(result.lower, 1.0)

    def test_brackets_the_dual(self):
        instance = random_linear_instance(4)
        dual = dual_value_grid(instance.data, instance.scm, instance.params, instance.loss, instance.delta,
                               instance.power, norm=instance.norm).value
        for K in (1, 2, 4, 8):
            result = adversarial_sandwich(instance.data, instance.scm, instance.params, instance.loss,
                                          instance.delta, instance.power, K, norm=instance.norm)
            self.assertLessEqual(result.lower, dual * 1.02 + 1e-12, msg=f'K={K}')
            self.assertGreaterEqual(result.upper, dual * 0.98, msg=f'K={K}')

    def test_box_constant_comes_from_the_dual_box(self):
        grid = GridSpec()
        dual = dual_value_grid(ONE_POINT, self.scm, ModelParams([0.0, 0.4, 0.0]), HINGE, 0.1, 1.0, grid=grid,
                               norm=L1)
        results = [adversarial_sandwich(ONE_POINT, self.scm, ModelParams([0.0, 0.4, 0.0]), HINGE, 0.1, 1.0, K,
                                        norm=L1, grid=grid) for K in (1, 8)]
        for result in results:
            self.assertEqual(result.radius, dual.radius)
            self.assertAlmostEqual(result.D, box_transport_cost(L1, 2, dual.radius, 1.0))
        self.assertLess(results[0].radius, grid.max_radius)
        self.assertLess(results[0].D, 1e3)
        self.assertEqual(results[0].D, results[1].D)
        self.assertLess(results[0].gap, 1e3)
        self.assertAlmostEqual(results[1].gap, results[0].gap / 8.0)

    def test_box_constant_can_be_given(self):
        result = adversarial_sandwich(ONE_POINT, self.scm, ModelParams([0.0, 0.4, 0.0]), HINGE, 0.1, 1.0, 2,
                                      norm=L1, D=3.0)
        self.assertEqual(result.D, 3.0)
        self.assertTrue(math.isnan(result.radius))

    def test_box_transport_cost(self):
        self.assertEqual(box_transport_cost(L1, 2, 2.0, 1.0), 4.0)
        self.assertAlmostEqual(box_transport_cost(NormSpec('l2'), 2, 1.0, 2.0), 2.0)
        self.assertEqual(box_transport_cost(L1, 2, 0.0, 1.0), 0.0)
        self.assertEqual(box_transport_cost(L1, 2, math.inf, 1.0), math.inf)

    def test_invalid(self):
        with self.assertRaises(OracleInputError):
            adversarial_sandwich(ONE_POINT, self.scm, ModelParams.zeros(3), HINGE, 0.1, 1.0, 0)
        with self.assertRaises(NonlinearScmError):
            adversarial_sandwich(ONE_POINT, tanh_scm(), ModelParams.zeros(3), HINGE, 0.1, 1.0, 1)


class BoundTest(SimpleTestCase):
    def test_hand_value(self):
        value = finite_sample_bound(C_L=1.0, L=1.0, M=1.0, M_d=0.1, diam=1.0, p=1.0, delta=0.1, eta=0.5,
                                    epsilon=0.05, N=100)
        expected = (96.0 + 96.0 + 0.2 + 2.0 * math.sqrt(2.0) * math.sqrt(math.log(40.0))) / 10.0
        self.assertAlmostEqual(value, expected)
        self.assertAlmostEqual(value, 19.76324, places=4)

    def test_rate(self):
        kwargs = {'C_L': 1.0, 'L': 2.0, 'M': 1.0, 'M_d': 0.3, 'diam': 2.0, 'p': 2.0, 'delta': 0.5, 'eta': 0.5,
                  'epsilon': 0.1}
        assert_allclose(finite_sample_bound(N=400, **kwargs), finite_sample_bound(N=100, **kwargs) / 2.0)

    def test_invalid(self):
        base = {'C_L': 1.0, 'L': 1.0, 'M': 1.0, 'M_d': 0.1, 'diam': 1.0, 'p': 1.0, 'delta': 0.1, 'eta': 0.5,
                'epsilon': 0.05, 'N': 100}
        for change in ({'epsilon': 2.0}, {'epsilon': 0.0}, {'p': 0.5}, {'N': 0}, {'L': -1.0}, {'C_L': 0.0},
                       {'L': 0.0}, {'M': 0.0}, {'M_d': 0.0}, {'M': -1.0}):
            with self.assertRaises(OracleInputError, msg=str(change)):
                finite_sample_bound(**{**base, **change})


class RandomInstanceTest(SimpleTestCase):
    def test_seeded(self):
        first, second = random_linear_instance(9), random_linear_instance(9)
        assert_array_equal(first.features, second.features)
        assert_array_equal(first.params.as_vector(), second.params.as_vector())
        self.assertEqual(first.loss, second.loss)
        self.assertIn(first.features.shape[0], range(2, 6))


class FirstOrderResidualTest(SimpleTestCase):
    def test_residual_is_quadratic_in_radius(self):
        scm = tanh_scm()
        data = (np.array([[1.0, 0.2, 0.3]]), np.array([1.0]))
        theta = ModelParams([0.3, 1.0, 1.0], -0.8)
        loss = LossSpec('log_exponential')
        norm = NormSpec('l2')
        deltas = np.array([0.1, 0.05, 0.025, 0.0125])
        residuals = []
        for delta in deltas:
            cfg = TrainerConfig(kind='cdro_first_order', delta=float(delta), power=2.0, norm=norm, loss=loss)
            approx = cdro_first_order_objective(data, scm, theta, cfg, levels=[[1.0]])
            dual = dual_value_grid(data, scm, theta, loss, float(delta), 2.0, norm=norm, loss_power=1.0,
                                   levels=[[1.0]]).value
            residuals.append(abs(dual - approx))
        slope = np.polyfit(np.log(deltas), np.log(residuals), 1)[0]
        self.assertGreaterEqual(slope, 1.8)
