import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from ..cfdro_core.data import generate_lin, lin_scm
from ..cfdro_core.errors import (DivergenceError, LossSpecError, NonlinearScmError, NotDifferentiableError,
                                 RankDeficiencyError, TrainerConfigError)
from ..cfdro_core.fair_metric import NormSpec
from ..cfdro_core.fairness_metrics import accuracy, counterfactual_unfairness
from ..cfdro_core.losses import LossSpec, eval_loss
from ..cfdro_core.training import (AdamOptimizer, ModelParams, TrainerConfig, adversarial_objective,
                                   cdro_closed_objective, cdro_first_order_objective, cf_gradient, cf_sup_risk,
                                   erm_objective, nullspace_projector, objective_function, project_nullspace,
                                   ross_objective, train)
from .test_scm import tanh_scm

ONE_POINT = (np.array([[1.0, 3.0, 0.0]]), np.array([1.0]))
HINGE = LossSpec('hinge')


def central_differences(f, x, step=1e-6):
    grad = np.zeros_like(x)
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = step
        grad[k] = (f(x + e)[0] - f(x - e)[0]) / (2.0 * step)
    return grad


class ModelParamsTest(SimpleTestCase):
    def test_vector_layout(self):
        params = ModelParams.from_vector([1.0, 2.0, -0.5])
        assert_array_equal(params.theta, [1.0, 2.0])
        self.assertEqual(params.intercept, -0.5)
        assert_array_equal(params.as_vector(), [1.0, 2.0, -0.5])

    def test_predict_on_boundary(self):
        params = ModelParams([1.0, -1.0])
        assert_array_equal(params.predict([[1.0, 1.0], [0.0, 1.0], [2.0, 1.0]]), [1, -1, 1])

    def test_non_finite_parameters(self):
        with self.assertRaises(DivergenceError):
            ModelParams([np.nan, 1.0])
        with self.assertRaises(DivergenceError):
            ModelParams([1.0], np.inf)


class TrainerConfigTest(SimpleTestCase):
    def test_unknown_trainer(self):
        with self.assertRaises(TrainerConfigError):
            TrainerConfig(kind='sgd')

    def test_first_order_needs_power_two(self):
        with self.assertRaises(TrainerConfigError):
            TrainerConfig(kind='cdro_first_order', power=1.5, loss=LossSpec('log_exponential'))

    def test_first_order_needs_smooth_loss(self):
        with self.assertRaises(NotDifferentiableError):
            TrainerConfig(kind='cdro_first_order', power=2.0, loss=HINGE)

    def test_lipschitz_loss_closed_form_only_at_power_one(self):
        with self.assertRaises(LossSpecError):
            TrainerConfig(kind='cdro_closed', power=2.0, loss=LossSpec('log_exponential'))
        TrainerConfig(kind='cdro_closed', power=2.0, loss=HINGE)

    def test_infinite_power_only_for_first_order(self):
        with self.assertRaises(TrainerConfigError):
            TrainerConfig(kind='cdro_closed', power=np.inf, loss=HINGE)
        cfg = TrainerConfig(kind='cdro_first_order', power=np.inf, loss=LossSpec('log_exponential'))
        self.assertEqual(cfg.conjugate, 1.0)

    def test_bad_numbers(self):
        for kwargs in ({'delta': -0.1}, {'power': 0.5}, {'learning_rate': 0.0}, {'batch_size': 0}, {'epochs': 0},
                       {'constraint_mode': 'soft'}):
            with self.assertRaises(TrainerConfigError, msg=str(kwargs)):
                TrainerConfig(**kwargs)

    def test_label_and_seed(self):
        cfg = TrainerConfig(kind='al', name='adv')
        self.assertEqual(cfg.label, 'adv')
        self.assertEqual(TrainerConfig(kind='al').label, 'al')
        self.assertEqual(cfg.with_seed(7).seed, 7)
        self.assertEqual(cfg.with_seed(7).kind, 'al')


class ObjectiveExamplesTest(SimpleTestCase):
    def test_cf_sup_risk(self):
        scm = lin_scm()
        self.assertEqual(cf_sup_risk(ONE_POINT, scm, ModelParams.zeros(3), HINGE), 1.0)
        self.assertEqual(cf_sup_risk(ONE_POINT, scm, ModelParams([0.0, 1.0, 0.0]), HINGE), 0.0)
        self.assertAlmostEqual(cf_sup_risk(ONE_POINT, scm, ModelParams([0.0, 0.4, 0.0]), HINGE), 0.6)

    def test_cdro_closed(self):
        scm = lin_scm()
        cfg = TrainerConfig(kind='cdro_closed', delta=0.1, norm=NormSpec('l1'), loss=HINGE)
        self.assertAlmostEqual(cdro_closed_objective(ONE_POINT, scm, ModelParams([0.0, 1.0, 0.0]), cfg), 0.1)
        squared = TrainerConfig(kind='cdro_closed', delta=0.1, power=2.0, norm=NormSpec('l1'), loss=HINGE)
        self.assertAlmostEqual(cdro_closed_objective(ONE_POINT, scm, ModelParams.zeros(3), squared), 1.0)

    def test_cdro_closed_at_zero_radius_is_cf_sup(self):
        scm, data = generate_lin(50, 2)
        theta = ModelParams([0.3, -0.2, 0.5], 0.1)
        cfg = TrainerConfig(kind='cdro_closed', loss=HINGE)
        self.assertAlmostEqual(cdro_closed_objective(data, scm, theta, cfg), cf_sup_risk(data, scm, theta, HINGE))

    def test_cdro_closed_needs_linear_scm(self):
        with self.assertRaises(NonlinearScmError):
            cdro_closed_objective(ONE_POINT, tanh_scm(), ModelParams.zeros(3), TrainerConfig(kind='cdro_closed'))

    def test_adversarial(self):
        cfg = TrainerConfig(kind='al', delta=1.0, norm=NormSpec('l1'), loss=HINGE)
        self.assertEqual(adversarial_objective((np.array([[3.0]]), np.array([1.0])), ModelParams([1.0]), cfg), 0.0)
        cfg = TrainerConfig(kind='al', delta=0.5, norm=NormSpec('l1'), loss=HINGE)
        self.assertAlmostEqual(adversarial_objective((np.array([[1.2]]), np.array([1.0])), ModelParams([1.0]), cfg),
                               0.3)

    def test_ross(self):
        cfg = TrainerConfig(kind='ross', delta=1.0, norm=NormSpec('l1'), loss=HINGE)
        self.assertEqual(ross_objective(ONE_POINT, ModelParams.zeros(3), cfg), 2.0)
        self.assertAlmostEqual(ross_objective((np.array([[0.5]]), np.array([1.0])), ModelParams([1.0]), cfg), 0.5)

    def test_erm(self):
        self.assertEqual(erm_objective(ONE_POINT, ModelParams.zeros(3), HINGE), 1.0)


class WorstCaseOrderingTest(SimpleTestCase):
    RADII = (0.0, 0.01, 0.05, 0.1, 0.5, 1.0)
    CASES = ((HINGE, 1.0), (HINGE, 2.0), (LossSpec('log_exponential'), 1.0))

    def setUp(self):
        self.scm, self.data = generate_lin(60, 4)
        rng = np.random.default_rng(12)
        self.thetas = [ModelParams(rng.normal(size=3), float(rng.normal())) for _ in range(5)]

    def closed(self, theta, loss, p, delta):
        cfg = TrainerConfig(kind='cdro_closed', delta=delta, power=p, norm=NormSpec('l2'), loss=loss)
        return cdro_closed_objective(self.data, self.scm, theta, cfg)

    def test_closed_form_grows_with_radius(self):
        for loss, p in self.CASES:
            for theta in self.thetas:
                values = [self.closed(theta, loss, p, delta) for delta in self.RADII]
                self.assertTrue(np.all(np.diff(values) >= -1e-12), msg=f'{loss.family}, p={p}: {values}')

    def test_closed_form_dominates_cf_sup_and_erm(self):
        for loss, p in self.CASES:
            for theta in self.thetas:
                cf = cf_sup_risk(self.data, self.scm, theta, loss, p)
                erm = float(np.mean(eval_loss(loss, (self.data.features, self.data.labels), theta, p)))
                self.assertGreaterEqual(cf, erm - 1e-12, msg=f'{loss.family}, p={p}')
                for delta in (0.0, 0.1):
                    self.assertGreaterEqual(self.closed(theta, loss, p, delta), cf - 1e-12,
                                            msg=f'{loss.family}, p={p}, delta={delta}')
                if p == 1.0:
                    self.assertGreaterEqual(cf, erm_objective(self.data, theta, loss) - 1e-12)

    def test_log_exponential_squared_cf_sup_dominates_erm(self):
        loss = LossSpec('log_exponential')
        with self.assertRaises(LossSpecError):
            TrainerConfig(kind='cdro_closed', delta=0.1, power=2.0, loss=loss)
        for theta in self.thetas:
            erm = float(np.mean(eval_loss(loss, (self.data.features, self.data.labels), theta, 2.0)))
            self.assertGreaterEqual(cf_sup_risk(self.data, self.scm, theta, loss, 2.0), erm - 1e-12)


class NullspaceTest(SimpleTestCase):
    def test_projection(self):
        M = lin_scm().linear_matrix()
        assert_allclose(project_nullspace(np.array([1.0, 0.0, 0.0]), M, (0,)), [5.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0])
        assert_allclose(project_nullspace(np.array([1.0, 0.0, 1.0]), M, (0,)), [1.0, 0.0, 1.0], atol=1e-12)
        projected = project_nullspace(ModelParams([1.0, 0.0, 0.0], 0.3), M, (0,))
        self.assertEqual(projected.intercept, 0.3)

    def test_projector_is_idempotent(self):
        P = nullspace_projector(lin_scm().linear_matrix(), (0,))
        assert_allclose(P @ P, P, atol=1e-12)

    def test_rank_deficiency(self):
        with self.assertRaises(RankDeficiencyError):
            nullspace_projector(np.zeros((3, 3)), (0,))


class GradientCheckTest(SimpleTestCase):
    def setUp(self):
        self.scm, self.data = generate_lin(40, 3)
        self.x = np.random.default_rng(4).normal(size=4)

    def _check(self, scm, data, cfg):
        f = objective_function(data, scm, cfg)
        assert_allclose(f(self.x)[1], central_differences(f, self.x), rtol=1e-4, atol=1e-6, err_msg=cfg.kind)

    def test_all_objectives(self):
        loss = LossSpec('log_exponential')
        for kind, power in (('erm', 1.0), ('al', 1.0), ('ross', 1.0), ('cdro_closed', 1.0),
                            ('cdro_first_order', 2.0)):
            cfg = TrainerConfig(kind=kind, delta=0.2, power=power, norm=NormSpec('l2'), loss=loss)
            self._check(self.scm, self.data, cfg)

    def test_closed_form_power_regularizer(self):
        cfg = TrainerConfig(kind='cdro_closed', delta=0.2, power=2.0, norm=NormSpec('l2'), loss=LossSpec('hinge'))
        self._check(self.scm, self.data, cfg)

    def test_first_order_on_nonlinear_scm(self):
        scm = tanh_scm()
        frame = scm.sample(40, 5)
        data = (frame[list(scm.nodes)].to_numpy(), np.where(frame['X2'].to_numpy() > 0.0, 1.0, -1.0))
        cfg = TrainerConfig(kind='cdro_first_order', delta=0.2, power=2.0, norm=NormSpec('l2'),
                            loss=LossSpec('log_exponential'))
        self._check(scm, data, cfg)


class FirstOrderApproximationTest(SimpleTestCase):
    def test_error_is_second_order_in_radius(self):
        scm = tanh_scm()
        v, y = np.array([1.0, 0.4, -0.2]), 1.0
        theta = ModelParams([0.3, -0.5, 0.8], 0.1)
        loss = LossSpec('log_exponential')
        norm = NormSpec('l2')
        direction = norm.holder_maximizer(cf_gradient(scm, v, y, theta, loss))
        for delta in (1e-1, 1e-2, 1e-3):
            cfg = TrainerConfig(kind='cdro_first_order', delta=delta, power=2.0, norm=norm, loss=loss)
            approx = cdro_first_order_objective((v[None, :], np.array([y])), scm, theta, cfg, levels=[[1.0]])
            worst = eval_loss(loss, (scm.counterfactual_shift(v, delta * direction), y), theta)
            self.assertLessEqual(abs(approx - worst), 5.0 * delta ** 2, msg=f'delta={delta}')

    def test_cf_gradient_matches_latent_differences(self):
        scm = tanh_scm()
        v, y = np.array([0.0, -0.7, 0.9]), -1.0
        theta = ModelParams([0.2, 1.1, -0.4], -0.3)
        loss = LossSpec('log_exponential')
        step = 1e-6
        fd = [(eval_loss(loss, (scm.counterfactual_shift(v, step * e), y), theta)
               - eval_loss(loss, (scm.counterfactual_shift(v, -step * e), y), theta)) / (2.0 * step)
              for e in np.eye(2)]
        assert_allclose(cf_gradient(scm, v, y, theta, loss), fd, rtol=1e-5, atol=1e-8)

    def test_cf_gradient_needs_differentiable_loss(self):
        with self.assertRaises(NotDifferentiableError):
            cf_gradient(lin_scm(), [1.0, 3.0, 0.0], 1.0, ModelParams.zeros(3), HINGE)


class AdamTest(SimpleTestCase):
    def test_first_step_moves_by_learning_rate(self):
        optimizer = AdamOptimizer(learning_rate=0.01)
        x = optimizer.step(np.zeros(2), np.array([2.0, -3.0]))
        assert_allclose(x, [-0.01, 0.01], rtol=1e-6)
        self.assertEqual(optimizer.t, 1)


class TrainTest(SimpleTestCase):
    def test_separable_erm_reaches_full_accuracy(self):
        rng = np.random.default_rng(0)
        x1 = rng.uniform(1.0, 3.0, size=100) * rng.choice([-1.0, 1.0], size=100)
        V = np.column_stack([x1, rng.normal(size=100)])
        y = np.sign(x1)
        cfg = TrainerConfig(kind='erm', loss=LossSpec('log_exponential'), learning_rate=0.1, batch_size=50,
                            epochs=100)
        result = train((V, y), None, cfg)
        self.assertEqual(accuracy(result.params, (V, y)), 1.0)
        self.assertEqual(len(result.trace), 100)
        self.assertEqual(result.steps, 200)
        self.assertLess(result.trace[-1], result.trace[0])

    def test_same_seed_same_model(self):
        scm, data = generate_lin(120, 6)
        cfg = TrainerConfig(kind='cdro_closed', delta=0.05, loss=HINGE, learning_rate=0.05, batch_size=32,
                            epochs=3, seed=11)
        first, second = train(data, scm, cfg), train(data, scm, cfg)
        assert_array_equal(first.params.as_vector(), second.params.as_vector())
        self.assertEqual(first.trace, second.trace)

    def test_zero_radius_single_level_matches_erm(self):
        scm, data = generate_lin(200, 0)
        data = data.subset(data.column('A') == 1.0)
        common = {'loss': HINGE, 'learning_rate': 0.05, 'batch_size': 20, 'epochs': 5, 'seed': 3}
        erm = train(data, None, TrainerConfig(kind='erm', **common))
        closed = train(data, scm, TrainerConfig(kind='cdro_closed', **common), levels=[[1.0]])
        assert_array_equal(erm.params.as_vector(), closed.params.as_vector())

    def test_nullspace_training_is_counterfactually_fair(self):
        scm, data = generate_lin(200, 1)
        cfg = TrainerConfig(kind='cdro_closed', delta=0.1, norm=NormSpec('l1'), loss=HINGE,
                            constraint_mode='infinite_A_nullspace', learning_rate=0.05, batch_size=50, epochs=5)
        result = train(data, scm, cfg)
        C = scm.linear_matrix()[:, 0]
        self.assertAlmostEqual(float(C @ result.params.theta), 0.0, places=10)
        self.assertEqual(counterfactual_unfairness(result.params, scm, data), 0.0)

    def test_divergence(self):
        # one Adam step of size 1e308 puts the next scores out of float range
        V = np.array([[3.0, 2.0], [2.0, 3.0]])
        cfg = TrainerConfig(kind='erm', loss=LossSpec('absolute'), learning_rate=1e308, epochs=2, batch_size=2)
        with self.assertRaises(DivergenceError):
            train((V, np.array([1.0, -1.0])), None, cfg)

    def test_scm_required(self):
        with self.assertRaises(TrainerConfigError):
            train(ONE_POINT, None, TrainerConfig(kind='cdro_closed'))
