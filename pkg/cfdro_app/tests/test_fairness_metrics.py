import numpy as np
from django.test import SimpleTestCase

from ..cfdro_core.data import generate_lin, lin_scm
from ..cfdro_core.errors import NonlinearScmError, OracleBudgetError
from ..cfdro_core.fair_metric import CfdfMetric, NormSpec
from ..cfdro_core.fairness_metrics import (MetricsReport, accuracy, counterfactual_unfairness, evaluate,
                                           nonrobust_area, unfair_area, unfair_area_sampled)
from ..cfdro_core.training import ModelParams
from .test_scm import tanh_scm

ONE_POINT = (np.array([[1.0, 3.0, 0.0]]), np.array([1.0]))


class OnePointTest(SimpleTestCase):
    def setUp(self):
        self.scm = lin_scm()
        self.metric = CfdfMetric(self.scm, NormSpec('l1'))
        self.model = ModelParams([0.0, 1.0, 0.0])

    def test_counterfactual_unfairness(self):
        self.assertEqual(counterfactual_unfairness(ModelParams([0.0, 1.0, 0.0], -2.0), self.scm, ONE_POINT), 1.0)
        self.assertEqual(counterfactual_unfairness(self.model, self.scm, ONE_POINT), 0.0)

    def test_unfair_area_threshold(self):
        for delta, expected in ((0.05, 0.0), (0.99, 0.0), (1.0, 1.0), (2.0, 1.0)):
            self.assertEqual(unfair_area(self.model, self.scm, self.metric, ONE_POINT, delta), expected,
                             msg=f'delta={delta}')

    def test_nonrobust_area_threshold(self):
        for delta, expected in ((1.0, 0.0), (2.99, 0.0), (3.0, 1.0)):
            self.assertEqual(nonrobust_area(self.model, self.scm, self.metric, ONE_POINT, delta), expected,
                             msg=f'delta={delta}')

    def test_evaluate(self):
        report = evaluate(self.model, self.scm, self.metric, ONE_POINT, (0.05, 1.0), seed=3, trainer='erm',
                          dataset='lin')
        self.assertEqual(report.accuracy, 1.0)
        self.assertEqual(report.cf, 0.0)
        self.assertEqual(report.u_delta, {0.05: 0.0, 1.0: 1.0})
        self.assertEqual(report.r_delta, {0.05: 0.0, 1.0: 0.0})
        self.assertEqual(report.trainer, 'erm')


class LinDataTest(SimpleTestCase):
    def setUp(self):
        self.scm, self.data = generate_lin(300, 0)
        self.metric = CfdfMetric(self.scm, NormSpec('l2'))
        self.models = [ModelParams(theta, b) for theta, b in
                       zip(np.random.default_rng(1).normal(size=(5, 3)), np.random.default_rng(2).normal(size=5))]

    def test_true_model_accuracy(self):
        scm, data = generate_lin(2000, 5)
        self.assertGreater(accuracy(ModelParams([0.0, 1.0, 1.0]), data), 0.6)

    def test_nullspace_model_is_fair(self):
        self.assertEqual(counterfactual_unfairness(ModelParams([1.0, 0.0, 1.0], 0.2), self.scm, self.data), 0.0)

    def test_nonrobust_area_within_unfair_area(self):
        for model in self.models:
            for delta in (0.05, 0.5):
                self.assertLessEqual(nonrobust_area(model, self.scm, self.metric, self.data, delta),
                                     unfair_area(model, self.scm, self.metric, self.data, delta))

    def test_monotone_in_radius(self):
        for model in self.models:
            values = [unfair_area(model, self.scm, self.metric, self.data, delta) for delta in (0.0, 0.1, 0.5, 1.0)]
            self.assertEqual(values, sorted(values))
            self.assertGreaterEqual(values[0], counterfactual_unfairness(model, self.scm, self.data))

    def test_sampled_search_finds_closed_form(self):
        data = self.data.subset(slice(0, 60))
        for model in self.models:
            closed = unfair_area(model, self.scm, self.metric, data, 0.3)
            sampled = unfair_area_sampled(model, self.scm, self.metric, data, 0.3, 5)
            self.assertEqual(sampled, closed)
            own = unfair_area_sampled(model, self.scm, self.metric, data, 0.3, 5, own_only=True)
            self.assertEqual(own, nonrobust_area(model, self.scm, self.metric, data, 0.3))

    def test_single_zero_shift_is_counterfactual_unfairness(self):
        for model in self.models:
            self.assertEqual(unfair_area_sampled(model, self.scm, self.metric, self.data, 0.0, 1),
                             counterfactual_unfairness(model, self.scm, self.data))


class NonlinearTest(SimpleTestCase):
    def setUp(self):
        self.scm = tanh_scm()
        frame = self.scm.sample(40, 3)
        self.data = (frame[list(self.scm.nodes)].to_numpy(), np.ones(40))
        self.metric = CfdfMetric(self.scm, NormSpec('l2'))
        self.model = ModelParams([0.8, -0.4, 1.0], 0.1)

    def test_needs_sampling_budget(self):
        with self.assertRaises(NonlinearScmError):
            unfair_area(self.model, self.scm, self.metric, self.data, 0.1)
        with self.assertRaises(NonlinearScmError):
            nonrobust_area(self.model, self.scm, self.metric, self.data, 0.1)

    def test_sampled_value_bounds(self):
        cf = counterfactual_unfairness(self.model, self.scm, self.data)
        value = unfair_area(self.model, self.scm, self.metric, self.data, 0.5, sampling_budget=20, seed=1)
        self.assertGreaterEqual(value, cf)
        self.assertLessEqual(value, 1.0)

    def test_budget_must_be_positive(self):
        with self.assertRaises(OracleBudgetError):
            unfair_area_sampled(self.model, self.scm, self.metric, self.data, 0.1, 0)


class MetricsReportTest(SimpleTestCase):
    def test_fractions_checked(self):
        with self.assertRaises(ValueError):
            MetricsReport(accuracy=1.5, u_delta={}, r_delta={}, cf=0.0)
        with self.assertRaises(ValueError):
            MetricsReport(accuracy=0.5, u_delta={0.05: -0.1}, r_delta={}, cf=0.0)

    def test_dict_layout(self):
        report = MetricsReport(accuracy=0.8, u_delta={0.05: 0.25}, r_delta={0.05: 0.1}, cf=0.2, seed=4,
                               trainer='cdro', dataset='lin', extra={'objective': 0.4})
        payload = report.to_dict()
        self.assertEqual(payload['version'], 'report/1')
        self.assertEqual(payload['u_delta'], {'0.05': 0.25})
        self.assertEqual(payload['objective'], 0.4)
        self.assertEqual(MetricsReport.from_dict(payload), report)
