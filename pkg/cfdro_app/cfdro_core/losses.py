"""
Margin / residual loss families.

A loss is h(t) where t = y * s (classification) or t = y - s (regression) and
s = theta . v + b is the model score. Each family records h, h', h'' when
twice differentiable, its Lipschitz constant, a minimiser and whether the
closed-form DRO regulariser is the higher-order (piecewise linear families)
or the Lipschitz one.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional

import numpy as np
from scipy.special import expit

from .errors import DimensionError, LossSpecError

CLASSIFICATION = 'classification'
REGRESSION = 'regression'
VALID_MODES = (CLASSIFICATION, REGRESSION)

# closed-form regulariser of the DRO objective
POWER_REGULARIZER = 'power'
LIPSCHITZ_REGULARIZER = 'lipschitz'

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass(frozen=True)
class LossFamily:
    name: str
    value: Callable
    slope: Callable
    lipschitz: Callable[[Mapping], float]
    argmin: Callable[[Mapping], float]
    default_mode: str
    regularizer: str
    curvature: Optional[Callable] = None
    defaults: Mapping[str, float] = field(default_factory=dict)
    check: Optional[Callable[[Mapping], None]] = None
    differentiable: bool = False
    convex: bool = True
    quasi_convex: bool = True
    # sign of t along which |h'| approaches the Lipschitz constant
    tightness_direction: int = -1


LOSS_FAMILIES: Dict[str, LossFamily] = {}
FAMILY_ALIASES = {'log_exp': 'log_exponential', 'logistic': 'log_exponential',
                  'pinball': 'quantile'}


def register_loss_family(family: LossFamily) -> LossFamily:
    if family.default_mode not in VALID_MODES:
        raise LossSpecError(f'{family.default_mode} is not a valid loss mode!')
    if family.regularizer not in (POWER_REGULARIZER, LIPSCHITZ_REGULARIZER):
        raise LossSpecError(f'{family.regularizer} is not a known regulariser!')
    LOSS_FAMILIES[family.name] = family
    return family


def _one(params):
    return 1.0


def _check_tau(params):
    if params['tau'] < 0.0:
        raise LossSpecError(f'tau must be >= 0, got {params["tau"]}')


def _check_gamma(params):
    if not 0.0 < params['gamma'] < 1.0:
        raise LossSpecError(f'gamma must lie in (0, 1), got {params["gamma"]}')


def _check_pinball(params):
    if not 0.0 <= params['tau1'] <= 1.0:
        raise LossSpecError(f'tau1 must lie in [0, 1], got {params["tau1"]}')
    if params['tau2'] < 0.0:
        raise LossSpecError(f'tau2 must be >= 0, got {params["tau2"]}')


def _smooth_hinge(t, params):
    return np.where(t >= 1.0, 0.0, np.where(t > 0.0, 0.5 * (1.0 - t) ** 2, 0.5 - t))


def _truncated_pinball(t, params):
    tau1, tau2 = params['tau1'], params['tau2']
    return np.where(t <= 1.0, 1.0 - t, np.where(t <= 1.0 + tau2, tau1 * (t - 1.0), tau1 * tau2))


def _truncated_pinball_slope(t, params):
    tau1, tau2 = params['tau1'], params['tau2']
    return np.where(t < 1.0, -1.0, np.where((t > 1.0) & (t < 1.0 + tau2), tau1, 0.0))


# subgradients take the zero side at kinks
register_loss_family(LossFamily(
    name='hinge',
    value=lambda t, p: np.maximum(0.0, 1.0 - t),
    slope=lambda t, p: np.where(t < 1.0, -1.0, 0.0),
    lipschitz=_one, argmin=lambda p: 1.0,
    default_mode=CLASSIFICATION, regularizer=POWER_REGULARIZER))
register_loss_family(LossFamily(
    name='absolute',
    value=lambda t, p: np.abs(t),
    slope=lambda t, p: np.sign(t),
    lipschitz=_one, argmin=lambda p: 0.0,
    default_mode=REGRESSION, regularizer=POWER_REGULARIZER))
register_loss_family(LossFamily(
    name='lpm',
    value=lambda t, p: np.maximum(0.0, t - p['tau']),
    slope=lambda t, p: np.where(t > p['tau'], 1.0, 0.0),
    lipschitz=_one, argmin=lambda p: p['tau'],
    default_mode=REGRESSION, regularizer=POWER_REGULARIZER,
    defaults={'tau': 0.0}, check=_check_tau, tightness_direction=1))
register_loss_family(LossFamily(
    name='tau_insensitive',
    value=lambda t, p: np.maximum(0.0, np.abs(t) - p['tau']),
    slope=lambda t, p: np.where(np.abs(t) > p['tau'], np.sign(t), 0.0),
    lipschitz=_one, argmin=lambda p: 0.0,
    default_mode=REGRESSION, regularizer=POWER_REGULARIZER,
    defaults={'tau': 0.0}, check=_check_tau))
register_loss_family(LossFamily(
    name='log_exponential',
    value=lambda t, p: np.logaddexp(0.0, -t),
    slope=lambda t, p: -expit(-t),
    curvature=lambda t, p: expit(-t) * expit(t),
    lipschitz=_one, argmin=lambda p: np.inf,
    default_mode=CLASSIFICATION, regularizer=LIPSCHITZ_REGULARIZER, differentiable=True))
register_loss_family(LossFamily(
    name='huber',
    value=lambda t, p: np.where(np.abs(t) <= 1.0, 0.5 * t ** 2, np.abs(t) - 0.5),
    slope=lambda t, p: np.clip(t, -1.0, 1.0),
    curvature=lambda t, p: np.where(np.abs(t) <= 1.0, 1.0, 0.0),
    lipschitz=_one, argmin=lambda p: 0.0,
    default_mode=REGRESSION, regularizer=LIPSCHITZ_REGULARIZER, differentiable=True))
register_loss_family(LossFamily(
    name='log_cosh',
    value=lambda t, p: np.abs(t) + np.log1p(np.exp(-2.0 * np.abs(t))) - np.log(2.0),
    slope=lambda t, p: np.tanh(t),
    curvature=lambda t, p: 1.0 - np.tanh(t) ** 2,
    lipschitz=_one, argmin=lambda p: 0.0,
    default_mode=REGRESSION, regularizer=LIPSCHITZ_REGULARIZER, differentiable=True))
register_loss_family(LossFamily(
    name='quantile',
    value=lambda t, p: np.where(t >= 0.0, p['gamma'] * t, -t),
    slope=lambda t, p: np.where(t > 0.0, p['gamma'], np.where(t < 0.0, -1.0, 0.0)),
    lipschitz=lambda p: max(p['gamma'], 1.0), argmin=lambda p: 0.0,
    default_mode=REGRESSION, regularizer=LIPSCHITZ_REGULARIZER,
    defaults={'gamma': 0.5}, check=_check_gamma))
register_loss_family(LossFamily(
    name='smooth_hinge',
    value=_smooth_hinge,
    slope=lambda t, p: np.where(t >= 1.0, 0.0, np.where(t > 0.0, t - 1.0, -1.0)),
    curvature=lambda t, p: np.where((t > 0.0) & (t < 1.0), 1.0, 0.0),
    lipschitz=_one, argmin=lambda p: 1.0,
    default_mode=CLASSIFICATION, regularizer=LIPSCHITZ_REGULARIZER, differentiable=True))
register_loss_family(LossFamily(
    name='truncated_pinball',
    value=_truncated_pinball,
    slope=_truncated_pinball_slope,
    lipschitz=lambda p: max(1.0, p['tau1']), argmin=lambda p: 1.0,
    default_mode=CLASSIFICATION, regularizer=LIPSCHITZ_REGULARIZER,
    defaults={'tau1': 0.5, 'tau2': 1.0}, check=_check_pinball, convex=False))


@dataclass(frozen=True)
class LossSpec:
    family: str = 'log_exponential'
    params: Mapping[str, float] = field(default_factory=dict)
    mode: Optional[str] = None
    power: float = 1.0

    def __post_init__(self):
        name = FAMILY_ALIASES.get(self.family, self.family)
        if name not in LOSS_FAMILIES:
            raise LossSpecError(f'Unknown loss family `{self.family}`')
        family = LOSS_FAMILIES[name]
        unknown = set(self.params) - set(family.defaults)
        if unknown:
            raise LossSpecError(f'Loss `{name}` has no parameters {sorted(unknown)}')
        params = {**family.defaults, **{k: float(v) for k, v in self.params.items()}}
        if family.check is not None:
            family.check(params)
        mode = self.mode or family.default_mode
        if mode not in VALID_MODES:
            raise LossSpecError(f'{mode} is not a valid loss mode!')
        if not self.power >= 1.0:
            raise LossSpecError(f'Loss power must be >= 1, got {self.power}')
        object.__setattr__(self, 'family', name)
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'mode', mode)

    @classmethod
    def parse(cls, spec: str) -> 'LossSpec':
        """
        e.g. "hinge", "lpm:tau=0.5,p=2", "quantile:gamma=0.3", "huber:mode=classification"
        """
        name, _, rest = spec.strip().partition(':')
        params, mode, power = {}, None, 1.0
        for item in filter(None, (s.strip() for s in rest.split(','))):
            key, sep, value = item.partition('=')
            if not sep:
                raise LossSpecError(f'Malformed loss parameter `{item}` in `{spec}`')
            key = key.strip()
            try:
                if key == 'mode':
                    mode = value.strip()
                elif key == 'p':
                    power = float(value)
                else:
                    params[key] = float(value)
            except ValueError as e:
                raise LossSpecError(f'Cannot parse `{item}` in `{spec}`') from e
        return cls(name.strip(), params, mode, power)

    def __str__(self):
        items = [f'{k}={v!r}' for k, v in sorted(self.params.items())]
        if self.mode != self.definition.default_mode:
            items.append(f'mode={self.mode}')
        if self.power != 1.0:
            items.append(f'p={self.power!r}')
        return self.family + (':' + ','.join(items) if items else '')

    @property
    def definition(self) -> LossFamily:
        return LOSS_FAMILIES[self.family]

    @property
    def differentiable(self) -> bool:
        return self.definition.differentiable

    @property
    def twice_differentiable(self) -> bool:
        return self.definition.differentiable and self.definition.curvature is not None

    @property
    def lipschitz(self) -> float:
        return float(self.definition.lipschitz(self.params))

    @property
    def argmin(self) -> float:
        return float(self.definition.argmin(self.params))

    def h(self, t):
        return self.definition.value(np.asarray(t, dtype=float), self.params)

    def dh(self, t):
        return self.definition.slope(np.asarray(t, dtype=float), self.params)

    def d2h(self, t):
        if self.definition.curvature is None:
            raise LossSpecError(f'Loss `{self.family}` has no second derivative')
        return self.definition.curvature(np.asarray(t, dtype=float), self.params)

    def argument(self, scores, y):
        """
        t from model scores s and labels y
        """
        if self.mode == CLASSIFICATION:
            return np.asarray(y, dtype=float) * scores
        return np.asarray(y, dtype=float) - scores

    def argument_slope(self, y):
        """
        dt/ds
        """
        if self.mode == CLASSIFICATION:
            return np.asarray(y, dtype=float)
        return -np.ones_like(np.asarray(y, dtype=float))


def _scores(v, theta):
    v = np.asarray(v, dtype=float)
    w = np.asarray(theta.theta, dtype=float)
    if v.shape[-1] != w.shape[0]:
        raise DimensionError(f'Features of length {v.shape[-1]} for {w.shape[0]} weights')
    return v @ w + theta.intercept


def eval_loss(loss: LossSpec, z, theta, power: float = 1.0):
    """
    h(t)^power for one (v, y) pair or for rows
    :param theta: anything carrying `theta` and `intercept`
    """
    v, y = z
    t = loss.argument(_scores(v, theta), y)
    return loss.h(t) ** power


def loss_gradient(loss: LossSpec, z, theta, power: float = 1.0):
    """
    (sub)gradient of h(t)^power over (theta, b), intercept last
    """
    v, y = z
    v = np.asarray(v, dtype=float)
    t = loss.argument(_scores(v, theta), y)
    outer = loss.dh(t) * loss.argument_slope(y)
    if power != 1.0:
        outer = outer * power * loss.h(t) ** (power - 1.0)
    features = np.concatenate([v, np.ones(v.shape[:-1] + (1,))], axis=-1)
    return np.asarray(outer)[..., None] * features


def loss_lipschitz(loss: LossSpec) -> float:
    return loss.lipschitz
