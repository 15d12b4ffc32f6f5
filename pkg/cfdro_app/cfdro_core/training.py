"""
Training objectives and the minibatch trainer.

Every objective comes as a value / (sub)gradient pair over the stacked
parameter vector (theta, b), so the same code serves the public objective
functions, the trainer and the gradient checks.
"""
import dataclasses
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import (DatasetError, DimensionError, DivergenceError, LossSpecError, NonlinearScmError,
                     NotDifferentiableError, RankDeficiencyError, TrainerConfigError)
from .fair_metric import NormSpec
from .losses import LIPSCHITZ_REGULARIZER, LossSpec
from .scm import Scm, resolve_levels

VALID_TRAINERS = ('erm', 'al', 'ross', 'cdro_closed', 'cdro_first_order')
VALID_CONSTRAINT_MODES = ('finite_A', 'infinite_A_nullspace')
TRAINERS_NEEDING_SCM = ('cdro_closed', 'cdro_first_order')

PGD_STEPS = 20
PGD_STEP_FRACTION = 0.1

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass(frozen=True)
class ModelParams:
    theta: np.ndarray
    intercept: float = 0.0

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float).reshape(-1)
        if not np.all(np.isfinite(theta)) or not np.isfinite(self.intercept):
            raise DivergenceError(f'Model parameters are not finite: theta={theta}, b={self.intercept}')
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'intercept', float(self.intercept))

    @classmethod
    def zeros(cls, n: int) -> 'ModelParams':
        return cls(np.zeros(n), 0.0)

    @classmethod
    def from_vector(cls, x) -> 'ModelParams':
        x = np.asarray(x, dtype=float)
        return cls(x[:-1], x[-1])

    def as_vector(self) -> np.ndarray:
        return np.append(self.theta, self.intercept)

    def scores(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.theta.shape[0]:
            raise DimensionError(f'Features of length {v.shape[-1]} for {self.theta.shape[0]} weights')
        return v @ self.theta + self.intercept

    def predict(self, v):
        """
        +1 iff the score is >= 0
        """
        return np.where(self.scores(v) >= 0.0, 1, -1)


@dataclass(frozen=True)
class TrainerConfig:
    kind: str = 'erm'
    delta: float = 0.0
    power: float = 1.0
    norm: NormSpec = field(default_factory=NormSpec)
    loss: LossSpec = field(default_factory=LossSpec)
    learning_rate: float = 1e-3
    batch_size: int = 100
    epochs: int = 10
    seed: int = 0
    constraint_mode: str = 'finite_A'
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind not in VALID_TRAINERS:
            raise TrainerConfigError(f'{self.kind} is not a valid trainer!')
        if self.constraint_mode not in VALID_CONSTRAINT_MODES:
            raise TrainerConfigError(f'{self.constraint_mode} is not a valid constraint mode!')
        if not self.delta >= 0.0:
            raise TrainerConfigError(f'Radius must be >= 0, got {self.delta}')
        if not self.power >= 1.0:
            raise TrainerConfigError(f'Power must be >= 1, got {self.power}')
        if self.kind == 'cdro_first_order':
            if self.power < 2.0:
                raise TrainerConfigError(f'First-order trainer needs p in [2, inf], got {self.power}')
            if not self.loss.twice_differentiable:
                raise NotDifferentiableError(f'First-order trainer needs a twice differentiable loss, '
                                             f'`{self.loss.family}` is not')
        elif np.isinf(self.power):
            raise TrainerConfigError('Only the first-order trainer accepts p = inf')
        if self.kind == 'cdro_closed' and self.loss.definition.regularizer == LIPSCHITZ_REGULARIZER \
                and self.power != 1.0:
            raise LossSpecError(f'Loss `{self.loss.family}` has a closed form only for p = 1')
        if self.learning_rate <= 0.0 or self.batch_size < 1 or self.epochs < 1:
            raise TrainerConfigError('learning_rate, batch_size and epochs must be positive')

    @property
    def label(self) -> str:
        return self.name or self.kind

    @property
    def conjugate(self) -> float:
        """
        q with 1/p + 1/q = 1 (q = 1 for p = inf)
        """
        if np.isinf(self.power):
            return 1.0
        return self.power / (self.power - 1.0)

    def with_seed(self, seed: int) -> 'TrainerConfig':
        return dataclasses.replace(self, seed=seed)


def _rows(data) -> Tuple[np.ndarray, np.ndarray]:
    if hasattr(data, 'features'):
        V, y = data.features, data.labels
    else:
        V, y = data
    V = np.atleast_2d(np.asarray(V, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if V.shape[0] == 0:
        raise DatasetError('Dataset is empty!')
    if y.shape[0] != V.shape[0]:
        raise DimensionError(f'{V.shape[0]} feature rows for {y.shape[0]} labels')
    return V, y


@dataclass
class TwinTable:
    """
    dataset rows with their twins precomputed, shape (N, L, n)
    """
    features: np.ndarray
    labels: np.ndarray
    twins: Optional[np.ndarray] = None
    levels: Optional[np.ndarray] = None
    own_level: Optional[np.ndarray] = None
    jacobians: Optional[np.ndarray] = None

    def __len__(self):
        return self.features.shape[0]

    def take(self, idx) -> 'TwinTable':
        def pick(a):
            return None if a is None else a[idx]
        return TwinTable(self.features[idx], self.labels[idx], pick(self.twins), self.levels,
                         pick(self.own_level), pick(self.jacobians))

    def with_jacobians(self, scm: Scm) -> 'TwinTable':
        """
        attach d g^-1 / d u_x at every twin, shape (N, L, n, n_x)
        """
        if self.jacobians is None:
            N, L, n = self.twins.shape
            flat = self.twins.reshape(-1, n)
            J = scm.inverse_jacobian(scm.semi_latent_rows(flat))[:, :, list(scm.nonsensitive_idx)]
            self.jacobians = J.reshape(N, L, n, -1)
        return self


def build_twins(scm: Optional[Scm], data, levels=None) -> TwinTable:
    V, y = _rows(data)
    if scm is None:
        return TwinTable(V, y)
    lv = resolve_levels(scm, V, levels)
    return TwinTable(V, y, scm.twin_array(V, lv), lv, scm.level_index(V, lv))


def _with_ones(V: np.ndarray) -> np.ndarray:
    return np.concatenate([V, np.ones(V.shape[:-1] + (1,))], axis=-1)


def _params(theta) -> ModelParams:
    return theta if isinstance(theta, ModelParams) else ModelParams.from_vector(theta)


def _risk(loss: LossSpec, V: np.ndarray, y: np.ndarray, params: ModelParams, power: float):
    """
    mean h(t)^power over rows and its gradient over (theta, b)
    """
    t = loss.argument(V @ params.theta + params.intercept, y)
    h = loss.h(t)
    outer = loss.dh(t) * loss.argument_slope(y)
    if power != 1.0:
        outer = outer * power * h ** (power - 1.0)
        h = h ** power
    return float(np.mean(h)), np.mean(outer[:, None] * _with_ones(V), axis=0)


def _worst_twin(loss: LossSpec, table: TwinTable, params: ModelParams, power: float) -> np.ndarray:
    """
    rows of the worst twin per sample, ties to the lowest level index
    """
    scores = table.twins @ params.theta + params.intercept
    h = loss.h(loss.argument(scores, table.labels[:, None])) ** power
    a = np.argmax(h, axis=1)
    return table.twins[np.arange(len(table)), a]


def _cf_sup(loss: LossSpec, table: TwinTable, params: ModelParams, power: float):
    return _risk(loss, _worst_twin(loss, table, params, power), table.labels, params, power)


def nullspace_projector(M: np.ndarray, sensitive_idx) -> np.ndarray:
    """
    I - C^T (C C^T)^-1 C with C = (M[:, sensitive])^T
    """
    C = np.asarray(M, dtype=float)[:, list(sensitive_idx)].T
    if np.linalg.matrix_rank(C) < C.shape[0]:
        raise RankDeficiencyError(f'Sensitive rows of M^T are rank deficient: {C}')
    return np.eye(C.shape[1]) - C.T @ np.linalg.solve(C @ C.T, C)


def project_nullspace(theta, M: np.ndarray, sensitive_idx):
    """
    Euclidean projection of theta onto {theta : P_A(M^T theta) = 0}
    """
    P = nullspace_projector(M, sensitive_idx)
    if isinstance(theta, ModelParams):
        return ModelParams(P @ theta.theta, theta.intercept)
    return P @ np.asarray(theta, dtype=float)


class ObjectiveContext:
    """
    per-(scm, config) constants shared by every evaluation of an objective
    """

    def __init__(self, scm: Optional[Scm], cfg: TrainerConfig):
        self.scm = scm
        self.cfg = cfg
        if cfg.kind in TRAINERS_NEEDING_SCM and scm is None:
            raise TrainerConfigError(f'Trainer {cfg.kind} needs an SCM')
        if cfg.kind == 'cdro_closed' and not scm.is_linear:
            raise NonlinearScmError('The closed-form objective needs a linear SCM')

    @cached_property
    def shift_matrix(self) -> np.ndarray:
        """
        M[:, X]: the change of v per unit non-sensitive semi-latent shift
        """
        return self.scm.linear_matrix()[:, list(self.scm.nonsensitive_idx)]

    @cached_property
    def projector(self) -> np.ndarray:
        return nullspace_projector(self.scm.linear_matrix(), self.scm.sensitive_idx)

    def regularizer(self, params: ModelParams):
        """
        k = ||P_X(M^T theta)||_* and its subgradient over theta
        """
        w = self.shift_matrix.T @ params.theta
        return float(self.cfg.norm.dual(w)), self.shift_matrix @ self.cfg.norm.holder_maximizer(w)


def _erm_step(table: TwinTable, params: ModelParams, ctx: ObjectiveContext):
    return _risk(ctx.cfg.loss, table.features, table.labels, params, 1.0)


def _cdro_closed_step(table: TwinTable, params: ModelParams, ctx: ObjectiveContext):
    cfg = ctx.cfg
    loss, p, delta = cfg.loss, cfg.power, cfg.delta
    nullspace = cfg.constraint_mode == 'infinite_A_nullspace'
    if nullspace:
        params = ModelParams(ctx.projector @ params.theta, params.intercept)
        R, grad = _risk(loss, table.features, table.labels, params, p)
    else:
        R, grad = _cf_sup(loss, table, params, p)
    if delta != 0.0:
        k, dk = ctx.regularizer(params)
        dk = np.append(dk, 0.0)
        if loss.definition.regularizer == LIPSCHITZ_REGULARIZER or p == 1.0:
            scale = delta * loss.lipschitz
            R, grad = R + scale * k, grad + scale * dk
        else:
            root = R ** (1.0 / p)
            base = root + delta * k
            d_root = (root / (p * R)) * grad if R > 0.0 else np.zeros_like(grad)
            R, grad = base ** p, p * base ** (p - 1.0) * (d_root + delta * dk)
    if nullspace:
        grad = np.append(ctx.projector @ grad[:-1], grad[-1])
    return R, grad


def _cdro_first_order_step(table: TwinTable, params: ModelParams, ctx: ObjectiveContext):
    cfg = ctx.cfg
    loss, norm, delta, q = cfg.loss, cfg.norm, cfg.delta, cfg.conjugate
    R, grad = _cf_sup(loss, table, params, 1.0)
    if delta == 0.0:
        return R, grad
    table.with_jacobians(ctx.scm)
    N = len(table)
    y = table.labels[:, None]
    t = loss.argument(table.twins @ params.theta + params.intercept, y)
    slope = loss.argument_slope(y)
    hp, hpp = loss.dh(t), loss.d2h(t)
    c = np.einsum('ilnk,n->ilk', table.jacobians, params.theta)
    cn = norm.dual(c)
    g = np.abs(hp) * cn
    a = np.argmax(g, axis=1)
    rows = np.arange(N)
    gi = g[rows, a]
    if q == 1.0:
        T = float(np.mean(gi))
        weight = np.full(N, 1.0 / N)
    else:
        S = float(np.mean(gi ** q))
        T = S ** (1.0 / q)
        weight = (gi ** (q - 1.0) * S ** (1.0 / q - 1.0) / N) if S > 0.0 else np.zeros(N)
    # d g_ia = sign(h') h'' dt/ds ||c||_* [v, 1] + |h'| [J z(c), 0]
    curv = (np.sign(hp) * hpp * slope)[rows, a] * cn[rows, a]
    z = norm.holder_maximizer(c[rows, a])
    Jz = np.einsum('ink,ik->in', table.jacobians[rows, a], z)
    dg = curv[:, None] * _with_ones(table.twins[rows, a])
    dg[:, :-1] += np.abs(hp[rows, a])[:, None] * Jz
    return R + delta * T, grad + delta * (weight @ dg)


def _best_rho(loss: LossSpec, scores, y, radius, ascend: bool):
    """
    rho in [-1, 1] so that s + rho * radius is the worst (ascend) or best
    score reachable; projected sign-gradient steps for non quasi-convex losses
    """
    sign = 1.0 if ascend else -1.0
    rho = np.zeros_like(scores)
    best = rho.copy()
    best_val = loss.h(loss.argument(scores, y))
    slope = loss.argument_slope(y)
    for _ in range(PGD_STEPS):
        t = loss.argument(scores + rho * radius, y)
        rho = np.clip(rho + PGD_STEP_FRACTION * sign * np.sign(loss.dh(t) * slope), -1.0, 1.0)
        val = loss.h(loss.argument(scores + rho * radius, y))
        better = sign * (val - best_val) > 0.0
        best = np.where(better, rho, best)
        best_val = np.where(better, val, best_val)
    return best


def _feature_ball(params: ModelParams, cfg: TrainerConfig):
    k = float(cfg.norm.dual(params.theta))
    return cfg.delta * k, cfg.delta * cfg.norm.holder_maximizer(params.theta)


def _al_step(table: TwinTable, params: ModelParams, ctx: ObjectiveContext):
    loss = ctx.cfg.loss
    V, y = table.features, table.labels
    radius, dz = _feature_ball(params, ctx.cfg)
    s = V @ params.theta + params.intercept
    if loss.definition.quasi_convex:
        down = loss.h(loss.argument(s - radius, y))
        up = loss.h(loss.argument(s + radius, y))
        rho = np.where(up > down, 1.0, -1.0)
    else:
        rho = _best_rho(loss, s, y, radius, ascend=True)
    return _shifted_risk(loss, V, y, params, rho, radius, dz)


def _shifted_risk(loss: LossSpec, V, y, params: ModelParams, rho, radius, dz):
    """
    mean h at scores s + rho * radius; radius = delta * ||theta||_* moves with theta through dz
    """
    t = loss.argument(V @ params.theta + params.intercept + rho * radius, y)
    outer = loss.dh(t) * loss.argument_slope(y)
    dfeatures = _with_ones(V)
    dfeatures[:, :-1] += rho[:, None] * dz[None, :]
    return float(np.mean(loss.h(t))), np.mean(outer[:, None] * dfeatures, axis=0)


def _ross_step(table: TwinTable, params: ModelParams, ctx: ObjectiveContext):
    loss = ctx.cfg.loss
    V, y = table.features, table.labels
    erm, germ = _risk(loss, V, y, params, 1.0)
    radius, dz = _feature_ball(params, ctx.cfg)
    ones = np.ones_like(y)
    s = V @ params.theta + params.intercept
    if loss.definition.quasi_convex:
        candidates = [-np.ones_like(s), np.ones_like(s)]
        if radius > 0.0:
            t1 = loss.argument(s, ones)
            sigma = loss.argument_slope(ones)
            candidates.append(np.clip((loss.argmin - t1) / (sigma * radius), -1.0, 1.0))
        values = np.stack([loss.h(loss.argument(s + r * radius, ones)) for r in candidates])
        rho = np.stack(candidates)[np.argmin(values, axis=0), np.arange(s.shape[0])]
    else:
        rho = _best_rho(loss, s, ones, radius, ascend=False)
    best, gbest = _shifted_risk(loss, V, ones, params, rho, radius, dz)
    return erm + best, germ + gbest


OBJECTIVE_STEPS = {
    'erm': _erm_step,
    'al': _al_step,
    'ross': _ross_step,
    'cdro_closed': _cdro_closed_step,
    'cdro_first_order': _cdro_first_order_step,
}


def objective_function(data, scm: Optional[Scm], cfg: TrainerConfig, levels=None) \
        -> Callable[[np.ndarray], Tuple[float, np.ndarray]]:
    """
    full-data objective of cfg.kind as x -> (value, gradient), x = (theta, b)
    """
    ctx = ObjectiveContext(scm, cfg)
    table = build_twins(scm if cfg.kind in TRAINERS_NEEDING_SCM else None, data, levels)
    step = OBJECTIVE_STEPS[cfg.kind]
    return lambda x: step(table, _params(x), ctx)


# # # public objectives

def erm_objective(data, theta, loss: LossSpec) -> float:
    V, y = _rows(data)
    return _risk(loss, V, y, _params(theta), 1.0)[0]


def cf_sup_risk(data, scm: Scm, theta, loss: LossSpec, p: float = 1.0, levels=None) -> float:
    """
    (1/N) sum_i max_a loss(twin_a(v_i), y_i)^p
    """
    return _cf_sup(loss, build_twins(scm, data, levels), _params(theta), p)[0]


def cdro_closed_objective(data, scm: Scm, theta, cfg: TrainerConfig, levels=None) -> float:
    cfg = dataclasses.replace(cfg, kind='cdro_closed')
    return objective_function(data, scm, cfg, levels)(_params(theta))[0]


def cdro_first_order_objective(data, scm: Scm, theta, cfg: TrainerConfig, levels=None) -> float:
    cfg = dataclasses.replace(cfg, kind='cdro_first_order')
    return objective_function(data, scm, cfg, levels)(_params(theta))[0]


def adversarial_objective(data, theta, cfg: TrainerConfig) -> float:
    cfg = dataclasses.replace(cfg, kind='al')
    return objective_function(data, None, cfg)(_params(theta))[0]


def ross_objective(data, theta, cfg: TrainerConfig) -> float:
    cfg = dataclasses.replace(cfg, kind='ross')
    return objective_function(data, None, cfg)(_params(theta))[0]


def cf_gradient(scm: Scm, v, y, theta, loss: LossSpec) -> np.ndarray:
    """
    gradient of u_x -> loss(g^-1(a, u_x), y) at g(v): h'(t) dt/ds J_X^T theta
    """
    if not loss.differentiable:
        raise NotDifferentiableError(f'Loss `{loss.family}` is not differentiable')
    params = _params(theta)
    V, single = scm._as_rows(v, 'feature vector')
    y = np.atleast_1d(np.asarray(y, dtype=float))
    t = loss.argument(V @ params.theta + params.intercept, y)
    J = scm.inverse_jacobian(scm.semi_latent_rows(V))[:, :, list(scm.nonsensitive_idx)]
    grad = (loss.dh(t) * loss.argument_slope(y))[:, None] * np.einsum('ink,n->ik', J, params.theta)
    return grad[0] if single else grad


# # # optimisation

class AdamOptimizer:
    def __init__(self, learning_rate: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = None
        self.v = None
        self.t = 0

    def step(self, x: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(x)
            self.v = np.zeros_like(x)
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad ** 2
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return x - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


@dataclass
class TrainingResult:
    params: ModelParams
    trace: List[float]
    steps: int


def train(data, scm: Optional[Scm], cfg: TrainerConfig, levels=None) -> TrainingResult:
    """
    minibatch Adam on the objective of cfg.kind from zero parameters
    :return: final parameters and the full-data objective after every epoch
    """
    ctx = ObjectiveContext(scm, cfg)
    table = build_twins(scm if cfg.kind in TRAINERS_NEEDING_SCM else None, data, levels)
    if cfg.kind == 'cdro_first_order':
        table.with_jacobians(scm)
    step = OBJECTIVE_STEPS[cfg.kind]
    nullspace = cfg.kind == 'cdro_closed' and cfg.constraint_mode == 'infinite_A_nullspace'
    rng = np.random.default_rng(cfg.seed)
    optimizer = AdamOptimizer(cfg.learning_rate)
    x = np.zeros(table.features.shape[1] + 1)
    trace, steps = [], 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(table))
        for start in range(0, len(table), cfg.batch_size):
            batch = table.take(order[start:start + cfg.batch_size])
            value, grad = step(batch, ModelParams.from_vector(x), ctx)
            if not np.isfinite(value) or not np.all(np.isfinite(grad)):
                raise DivergenceError(f'{cfg.label}: objective {value} at epoch {epoch}, step {steps} '
                                      f'(|x| = {np.linalg.norm(x):.3g})')
            x = optimizer.step(x, grad)
            if nullspace:
                x[:-1] = ctx.projector @ x[:-1]
            steps += 1
        value = step(table, ModelParams.from_vector(x), ctx)[0]
        if not np.isfinite(value):
            raise DivergenceError(f'{cfg.label}: objective {value} after epoch {epoch}')
        trace.append(value)
        logger.debug(f'{cfg.label} seed {cfg.seed} epoch {epoch}: objective {value:.6g}')
    return TrainingResult(ModelParams.from_vector(x), trace, steps)
