"""
Individual fairness metrics of a linear classifier: accuracy, counterfactual
unfairness (CF), unfair area (U_delta) and non-robust area (R_delta).

A point is in the unfair area when some twin, shifted by at most delta in the
causally fair metric, gets a different prediction. For linear SCMs the score
of CF_0(twin, D) moves by exactly w . D with w = P_X(M^T theta), so the reachable
scores form [s_a - delta k, s_a + delta k] with k = ||w||_*.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import NonlinearScmError, OracleBudgetError
from .fair_metric import CfdfMetric
from .scm import Scm
from .training import ModelParams, _params, _rows, build_twins

REPORT_SCHEMA_VERSION = 'report/1'

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass
class MetricsReport:
    accuracy: float
    u_delta: Dict[float, float]
    r_delta: Dict[float, float]
    cf: float
    seed: Optional[int] = None
    trainer: Optional[str] = None
    dataset: Optional[str] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        fractions = [self.accuracy, self.cf, *self.u_delta.values(), *self.r_delta.values()]
        if any(not 0.0 <= f <= 1.0 for f in fractions):
            raise ValueError(f'Metric fractions must lie in [0, 1]: {fractions}')

    def to_dict(self) -> dict:
        return {
            'version': REPORT_SCHEMA_VERSION,
            'dataset': self.dataset,
            'trainer': self.trainer,
            'seed': self.seed,
            'accuracy': self.accuracy,
            'cf': self.cf,
            'u_delta': {repr(float(r)): v for r, v in self.u_delta.items()},
            'r_delta': {repr(float(r)): v for r, v in self.r_delta.items()},
            **self.extra,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'MetricsReport':
        known = {'version', 'dataset', 'trainer', 'seed', 'accuracy', 'cf', 'u_delta', 'r_delta'}
        return cls(
            accuracy=float(payload['accuracy']),
            u_delta={float(r): float(v) for r, v in payload['u_delta'].items()},
            r_delta={float(r): float(v) for r, v in payload['r_delta'].items()},
            cf=float(payload['cf']),
            seed=payload.get('seed'),
            trainer=payload.get('trainer'),
            dataset=payload.get('dataset'),
            extra={k: v for k, v in payload.items() if k not in known},
        )


def accuracy(model, data) -> float:
    V, y = _rows(data)
    return float(np.mean(_params(model).predict(V) == y))


def _twin_scores(model: ModelParams, scm: Scm, data, levels):
    table = build_twins(scm, data, levels)
    return table, table.twins @ model.theta + model.intercept


def counterfactual_unfairness(model, scm: Scm, data, levels=None) -> float:
    """
    fraction of points whose prediction changes for some twin
    """
    model = _params(model)
    table, scores = _twin_scores(model, scm, data, levels)
    own = model.predict(table.features)
    flipped = np.where(scores >= 0.0, 1, -1) != own[:, None]
    return float(np.mean(flipped.any(axis=1)))


def _shift_reach(model: ModelParams, scm: Scm, metric: CfdfMetric) -> float:
    """
    k = ||P_X(M^T theta)||_*: largest score change per unit of metric distance
    """
    if not scm.is_linear:
        raise NonlinearScmError('Closed-form unfair area needs a linear SCM; pass a sampling budget')
    w = scm.linear_matrix()[:, list(scm.nonsensitive_idx)].T @ model.theta
    return float(metric.norm.dual(w))


def _flip_reachable(own: np.ndarray, scores: np.ndarray, reach: float) -> np.ndarray:
    """
    own prediction +1: some reachable score < 0, or the boundary score 0 itself once delta k > 0;
    own prediction -1: some reachable score >= 0
    """
    own = own[:, None]
    down = (scores < 0.0) | ((reach > 0.0) & (scores - reach <= 0.0))
    up = scores + reach >= 0.0
    return np.where(own == 1, down, up)


def unfair_area(model, scm: Scm, metric: CfdfMetric, data, delta: float, levels=None,
                sampling_budget: Optional[int] = None, seed: int = 0) -> float:
    """
    U_delta: closed form for linear SCMs, sampled search otherwise (needs sampling_budget)
    """
    model = _params(model)
    if not scm.is_linear:
        if sampling_budget is None:
            raise NonlinearScmError('Nonlinear SCM: unfair_area needs a sampling budget')
        return unfair_area_sampled(model, scm, metric, data, delta, sampling_budget, levels, seed)
    table, scores = _twin_scores(model, scm, data, levels)
    own = model.predict(table.features)
    reach = delta * _shift_reach(model, scm, metric)
    return float(np.mean(_flip_reachable(own, scores, reach).any(axis=1)))


def nonrobust_area(model, scm: Scm, metric: CfdfMetric, data, delta: float, levels=None,
                   sampling_budget: Optional[int] = None, seed: int = 0) -> float:
    """
    R_delta: as U_delta with the twin restricted to the point's own level
    """
    model = _params(model)
    V, y = _rows(data)
    if not scm.is_linear:
        if sampling_budget is None:
            raise NonlinearScmError('Nonlinear SCM: nonrobust_area needs a sampling budget')
        return unfair_area_sampled(model, scm, metric, data, delta, sampling_budget, levels, seed, own_only=True)
    scores = model.scores(V)[:, None]
    own = model.predict(V)
    reach = delta * _shift_reach(model, scm, metric)
    return float(np.mean(_flip_reachable(own, scores, reach)[:, 0]))


def _candidate_shifts(scm: Scm, metric: CfdfMetric, model: ModelParams, twin: np.ndarray, delta: float,
                      budget: int, rng: np.random.Generator) -> np.ndarray:
    """
    zero, +/- the Hoelder maximiser of the latent score gradient, axis
    vertices, then random points of the delta ball; the first `budget` rows
    """
    dims = len(scm.nonsensitive_idx)
    shifts = [np.zeros((1, dims))]
    if delta > 0.0:
        J = scm.inverse_jacobian(scm.semi_latent_rows(twin))[0][:, list(scm.nonsensitive_idx)]
        z = metric.norm.holder_maximizer(J.T @ model.theta)
        axes = metric.norm.unit_axes(dims)
        shifts += [delta * z[None, :], -delta * z[None, :], delta * axes, -delta * axes]
        missing = budget - sum(s.shape[0] for s in shifts)
        if missing > 0:
            directions = rng.normal(size=(missing, dims))
            directions /= metric.norm.norm(directions)[:, None]
            radii = delta * rng.uniform(size=missing) ** (1.0 / dims)
            shifts.append(radii[:, None] * directions)
    return np.vstack(shifts)[:budget]


def unfair_area_sampled(model, scm: Scm, metric: CfdfMetric, data, delta: float, budget: int, levels=None,
                        seed: int = 0, own_only: bool = False) -> float:
    """
    search over twins x shifts of the delta ball; `budget` shifts per twin.
    Every tried point is reachable, so the result never exceeds the closed form.
    """
    if budget < 1:
        raise OracleBudgetError(f'Sampling budget must be >= 1, got {budget}')
    model = _params(model)
    rng = np.random.default_rng(seed)
    table = build_twins(scm, data, levels)
    own = model.predict(table.features)
    unfair = np.zeros(len(table), dtype=bool)
    for i in range(len(table)):
        twins = table.twins[i]
        if own_only:
            twins = table.features[i:i + 1]
        for twin in twins:
            shifts = _candidate_shifts(scm, metric, model, twin, delta, budget, rng)
            points = scm.counterfactual_shift(np.broadcast_to(twin, (shifts.shape[0], scm.n)), shifts)
            if np.any(model.predict(points) != own[i]):
                unfair[i] = True
                break
    return float(np.mean(unfair))


def evaluate(model, scm: Scm, metric: CfdfMetric, data, radii, levels=None, sampling_budget: Optional[int] = None,
             seed: Optional[int] = None, trainer: Optional[str] = None, dataset: Optional[str] = None) -> MetricsReport:
    """
    every metric of one trained model on one evaluation set
    """
    return MetricsReport(
        accuracy=accuracy(model, data),
        u_delta={float(r): unfair_area(model, scm, metric, data, r, levels, sampling_budget)
                 for r in radii},
        r_delta={float(r): nonrobust_area(model, scm, metric, data, r, levels, sampling_budget)
                 for r in radii},
        cf=counterfactual_unfairness(model, scm, data, levels),
        seed=seed, trainer=trainer, dataset=dataset,
    )
