"""
Brute-force verifiers for the worst-case risk.

- dual_value_grid: min over lambda of lambda * delta^p + E max_a sup_D [loss^P - penalty]
  on a shift grid with box expansion, inner Nelder-Mead polishing and a
  bounded scalar refinement of lambda
- primal_value_brute: exact LP over a finite candidate support
- ot_cost_discrete / empirical_wasserstein: exact discrete transport
- adversarial_sandwich: K-copy adversarial lower bound and its slack
- finite_sample_bound: generalisation bound arithmetic
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize, minimize_scalar

from .errors import AllocationError, LossSpecError, NonlinearScmError, OracleInputError
from .fair_metric import INFINITE_COST, CfdfMetric, NormSpec, cost_z
from .losses import LossSpec
from .scm import ExogenousSpec, LinearEquation, Scm
from .training import ModelParams, TrainerConfig, _params, _rows, build_twins

VALID_PENALTIES = ('lambda_d_p', 'lambda_p_d')
WEIGHT_TOLERANCE = 1e-12
# twins sit at distance zero up to rounding of the abduction
ZERO_COST_TOLERANCE = 1e-9
INFEASIBLE_PENALTY = 1e300

# Get an instance of a logger
logger = logging.getLogger('cfdro')


def default_lambda_grid() -> Tuple[float, ...]:
    return tuple(np.geomspace(1e-3, 1e4, 64))


@dataclass(frozen=True)
class GridSpec:
    lambda_grid: Tuple[float, ...] = field(default_factory=default_lambda_grid)
    axis_points: int = 12
    radius: float = 2.0
    min_ratio: float = 1e-4
    max_expansions: int = 6
    expansion_factor: float = 4.0
    penalty: str = 'lambda_d_p'
    polish: bool = True
    bisection_steps: int = 40

    def __post_init__(self):
        grid = np.asarray(self.lambda_grid, dtype=float)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(np.diff(grid) <= 0.0):
            raise OracleInputError('lambda grid must be nonempty, positive and strictly increasing')
        if self.axis_points < 1 or self.radius <= 0.0:
            raise OracleInputError('axis_points and radius must be positive')
        if self.penalty not in VALID_PENALTIES:
            raise OracleInputError(f'{self.penalty} is not a valid penalty convention!')
        object.__setattr__(self, 'lambda_grid', tuple(grid))

    @property
    def max_radius(self) -> float:
        return self.radius * self.expansion_factor ** self.max_expansions

    def axis_values(self, radius: float) -> np.ndarray:
        steps = radius * np.geomspace(self.min_ratio, 1.0, self.axis_points)
        return np.concatenate([-steps[::-1], [0.0], steps])

    def shift_grid(self, dims: int, radius: float) -> np.ndarray:
        """
        tensor grid over the shift box, zero shift first
        """
        axis = self.axis_values(radius)
        grid = np.array(list(itertools.product(axis, repeat=dims)))
        zero = np.all(grid == 0.0, axis=1)
        return np.concatenate([grid[zero], grid[~zero]])


@dataclass
class DualResult:
    value: float
    lam: float
    coarse_value: float
    unbounded_suspected: bool
    radius: float


class _ShiftedLoss:
    """
    loss^P at CF_0(base, D) for a fixed set of base points (twins)
    """

    def __init__(self, scm: Scm, bases: np.ndarray, labels: np.ndarray, params: ModelParams,
                 loss: LossSpec, loss_power: float):
        self.scm = scm
        self.bases = bases
        self.labels = labels
        self.params = params
        self.loss = loss
        self.loss_power = loss_power
        self.dims = len(scm.nonsensitive_idx)
        self.shift_matrix = None
        if scm.is_linear:
            self.shift_matrix = scm.linear_matrix()[:, list(scm.nonsensitive_idx)]

    def points(self, j: int, shifts: np.ndarray) -> np.ndarray:
        if self.shift_matrix is not None:
            return self.bases[j] + shifts @ self.shift_matrix.T
        return self.scm.counterfactual_shift(np.broadcast_to(self.bases[j], (shifts.shape[0], self.scm.n)), shifts)

    def all_points(self, shifts: np.ndarray) -> np.ndarray:
        """
        shape (bases, shifts, n)
        """
        if self.shift_matrix is not None:
            return self.bases[:, None, :] + (shifts @ self.shift_matrix.T)[None, :, :]
        B, G = self.bases.shape[0], shifts.shape[0]
        flat = self.scm.counterfactual_shift(np.repeat(self.bases, G, axis=0), np.tile(shifts, (B, 1)))
        return flat.reshape(B, G, self.scm.n)

    def value(self, points: np.ndarray, labels) -> np.ndarray:
        t = self.loss.argument(points @ self.params.theta + self.params.intercept, labels)
        return self.loss.h(t) ** self.loss_power


def _penalty(grid: GridSpec, lam: float, norm: NormSpec, shifts: np.ndarray, p: float) -> np.ndarray:
    d = norm.norm(shifts)
    if grid.penalty == 'lambda_d_p':
        return lam * d ** p
    return lam ** p * d


class _DualEvaluator:
    def __init__(self, shifted: _ShiftedLoss, n_samples: int, n_levels: int, norm: NormSpec, delta: float,
                 p: float, grid: GridSpec):
        self.shifted = shifted
        self.n_samples = n_samples
        self.n_levels = n_levels
        self.norm = norm
        self.delta = delta
        self.p = p
        self.grid = grid
        self._grids = {}
        self._losses = {}

    def _shift_grid(self, radius: float):
        if radius not in self._grids:
            shifts = self.grid.shift_grid(self.shifted.dims, radius)
            points = self.shifted.all_points(shifts)
            self._grids[radius] = shifts
            self._losses[radius] = self.shifted.value(points, self.shifted.labels[:, None])
        return self._grids[radius], self._losses[radius]

    def _grid_sup(self, lam: float):
        """
        per-base sup on the grid, expanding the box while any argmax sits on its boundary
        :return: (values, argmax shifts, radius) or None when still on the boundary at max radius
        """
        radius = self.grid.radius
        for _ in range(self.grid.max_expansions + 1):
            shifts, losses = self._shift_grid(radius)
            objective = losses - _penalty(self.grid, lam, self.norm, shifts, self.p)[None, :]
            best = np.argmax(objective, axis=1)
            on_boundary = np.abs(shifts[best]).max(axis=1) >= radius * (1.0 - 1e-12)
            if not on_boundary.any():
                return objective[np.arange(objective.shape[0]), best], shifts[best], radius
            radius *= self.grid.expansion_factor
        return None

    def _polish(self, lam: float, j: int, start: np.ndarray, start_value: float, radius: float) -> float:
        label = self.shifted.labels[j]
        norm, p, grid = self.norm, self.p, self.grid

        def negative(x):
            x = np.clip(x, -radius, radius)
            loss = self.shifted.value(self.shifted.points(j, x[None, :]), label)[0]
            return -(loss - _penalty(grid, lam, norm, x[None, :], p)[0])

        scale = max(np.abs(start).max() * 0.5, radius * grid.min_ratio)
        simplex = np.vstack([start] + [start + scale * e for e in np.eye(start.shape[0])])
        res = minimize(negative, start, method='Nelder-Mead',
                       options={'initial_simplex': simplex, 'xatol': 1e-11, 'fatol': 1e-14, 'maxiter': 4000})
        return max(start_value, -float(res.fun))

    def psi(self, lam: float, polish: bool) -> Tuple[float, float]:
        """
        lambda * delta^p + mean_i max_a sup_D, inf when unbounded is suspected
        """
        found = self._grid_sup(lam)
        if found is None:
            return math.inf, math.inf
        values, starts, radius = found
        if polish and self.grid.polish:
            values = np.array([self._polish(lam, j, starts[j], values[j], radius) for j in range(len(values))])
        per_sample = values.reshape(self.n_samples, self.n_levels).max(axis=1)
        return lam * self.delta ** self.p + float(np.mean(per_sample)), radius


def dual_value_grid(data, scm: Scm, theta, loss: LossSpec, delta: float, p: float,
                    grid: Optional[GridSpec] = None, norm: Optional[NormSpec] = None,
                    loss_power: Optional[float] = None, levels=None) -> DualResult:
    """
    grid dual of the worst-case risk over the causally fair transport ball
    :param loss_power: power applied to the loss (defaults to p)
    """
    grid = grid or GridSpec()
    norm = norm or NormSpec()
    loss_power = p if loss_power is None else loss_power
    params = _params(theta)
    table = build_twins(scm, data, levels)
    N, L, n = table.twins.shape
    shifted = _ShiftedLoss(scm, table.twins.reshape(-1, n), np.repeat(table.labels, L), params, loss, loss_power)
    if delta == 0.0:
        # lambda -> inf keeps every twin at zero shift
        value = float(np.mean(shifted.value(table.twins, table.labels[:, None]).max(axis=1)))
        return DualResult(value, math.inf, value, False, 0.0)

    evaluator = _DualEvaluator(shifted, N, L, norm, delta, p, grid)
    lambdas = np.asarray(grid.lambda_grid)
    coarse = np.array([evaluator.psi(lam, polish=False)[0] for lam in lambdas])
    feasible = np.isfinite(coarse)
    if not feasible.any():
        logger.warning(f'Dual grid: every lambda up to {lambdas[-1]:.3g} looks unbounded')
        return DualResult(math.inf, math.inf, math.inf, True, grid.max_radius)

    # feasibility threshold in lambda
    first = int(np.argmax(feasible))
    threshold = lambdas[first]
    if first > 0:
        lo, hi = math.log(lambdas[first - 1]), math.log(lambdas[first])
        for _ in range(grid.bisection_steps):
            mid = 0.5 * (lo + hi)
            if math.isfinite(evaluator.psi(math.exp(mid), polish=False)[0]):
                hi = mid
            else:
                lo = mid
        threshold = math.exp(hi)

    best = int(np.nanargmin(np.where(feasible, coarse, np.nan)))
    lo = max(threshold, lambdas[best - 1]) if best > 0 else threshold
    hi = lambdas[min(best + 1, len(lambdas) - 1)]

    def refined(log_lam):
        value = evaluator.psi(math.exp(log_lam), polish=True)[0]
        return value if math.isfinite(value) else INFEASIBLE_PENALTY

    candidates = [(evaluator.psi(lam, polish=True)[0], lam) for lam in {threshold, lambdas[best]}]
    if hi > lo:
        res = minimize_scalar(refined, bounds=(math.log(lo), math.log(hi)), method='bounded',
                              options={'xatol': 1e-9})
        candidates.append((float(res.fun), math.exp(res.x)))
    value, lam = min(c for c in candidates if math.isfinite(c[0]))
    radius = evaluator.psi(lam, polish=False)[1]
    return DualResult(value, lam, float(coarse[best]), False, radius)


# # # primal side

@dataclass
class CandidateSet:
    """
    candidate destinations of one sample and their transport costs
    """
    points: np.ndarray
    costs: np.ndarray


def sample_support(data) -> List[CandidateSet]:
    V, _ = _rows(data)
    return [CandidateSet(V[i:i + 1].copy(), np.zeros(1)) for i in range(V.shape[0])]


def candidate_support(data, scm: Scm, theta, norm: Optional[NormSpec] = None, levels=None,
                      radii: Optional[Sequence[float]] = None) -> List[CandidateSet]:
    """
    per sample: the sample, its twins and shifted twins along the axes and
    along +/- the Hoelder maximiser of the score gradient, at geometric radii
    """
    norm = norm or NormSpec()
    params = _params(theta)
    metric = CfdfMetric(scm, norm)
    radii = np.geomspace(1e-3, 1e3, 120) if radii is None else np.asarray(radii, dtype=float)
    table = build_twins(scm, data, levels)
    N, L, n = table.twins.shape
    X = list(scm.nonsensitive_idx)
    axes = norm.unit_axes(len(X))
    support = []
    for i in range(N):
        latent = metric.latent(table.features[i])
        points = [table.features[i:i + 1], table.twins[i]]
        for a in range(L):
            twin = table.twins[i, a]
            J = scm.inverse_jacobian(scm.semi_latent_rows(twin))[0][:, X]
            z = norm.holder_maximizer(J.T @ params.theta)
            directions = np.vstack([axes, -axes] + ([z[None, :], -z[None, :]] if np.any(z) else []))
            shifts = (radii[:, None, None] * directions[None, :, :]).reshape(-1, len(X))
            points.append(scm.counterfactual_shift(np.broadcast_to(twin, (shifts.shape[0], n)), shifts))
        points = np.vstack(points)
        costs = metric.distance_from_latent(latent, points)
        costs = np.where(costs < ZERO_COST_TOLERANCE, 0.0, costs)
        support.append(CandidateSet(points, costs))
    return support


def primal_value_brute(data, scm: Optional[Scm], theta, loss: LossSpec, delta: float, p: float,
                       support: Optional[List[CandidateSet]] = None, norm: Optional[NormSpec] = None,
                       loss_power: Optional[float] = None, levels=None) -> float:
    """
    max E_Q[loss^P] over Q supported on the candidates, with marginal P_N
    on the samples and transport budget sum pi c^p <= delta^p
    """
    V, y = _rows(data)
    N = V.shape[0]
    loss_power = p if loss_power is None else loss_power
    params = _params(theta)
    if support is None:
        support = candidate_support(data, scm, params, norm, levels)
    if len(support) != N:
        raise OracleInputError(f'Support covers {len(support)} samples, data has {N}')
    gains, costs, owner = [], [], []
    for i, cand in enumerate(support):
        t = loss.argument(cand.points @ params.theta + params.intercept, y[i])
        gains.append(loss.h(t) ** loss_power)
        costs.append(np.asarray(cand.costs, dtype=float))
        owner.append(np.full(len(cand.costs), i))
    gains, costs, owner = np.concatenate(gains), np.concatenate(costs), np.concatenate(owner)
    finite = np.isfinite(costs)
    A_eq = (owner[None, :] == np.arange(N)[:, None]).astype(float)
    b_eq = np.full(N, 1.0 / N)
    A_ub = np.where(finite, costs, 0.0)[None, :] ** p
    b_ub = np.array([delta ** p])
    bounds = [(0.0, None) if f else (0.0, 0.0) for f in finite]
    res = linprog(-gains, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method='highs')
    if res.status != 0:
        raise AllocationError(f'Primal LP failed: {res.message}')
    return float(-res.fun)


def ot_cost_discrete(p_weights, q_weights, cost, p: float = 1.0) -> float:
    """
    (min_pi sum pi c^p)^(1/p) over couplings of the two weight vectors
    """
    a = np.asarray(p_weights, dtype=float)
    b = np.asarray(q_weights, dtype=float)
    C = np.asarray(cost, dtype=float)
    if abs(a.sum() - 1.0) > WEIGHT_TOLERANCE or abs(b.sum() - 1.0) > WEIGHT_TOLERANCE:
        raise OracleInputError(f'Weights must sum to 1 (got {a.sum()!r} and {b.sum()!r})')
    if C.shape != (a.size, b.size):
        raise OracleInputError(f'Cost matrix has shape {C.shape}, expected {(a.size, b.size)}')
    finite = np.isfinite(C).ravel()
    c = np.where(finite, C.ravel(), 0.0) ** p
    m, n = C.shape
    A_eq = np.vstack([np.kron(np.eye(m), np.ones((1, n))), np.kron(np.ones((1, m)), np.eye(n))])
    b_eq = np.concatenate([a, b])
    bounds = [(0.0, None) if f else (0.0, 0.0) for f in finite]
    res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method='highs')
    if res.status == 2:
        return INFINITE_COST
    if res.status != 0:
        raise AllocationError(f'Transport LP failed: {res.message}')
    return float(max(res.fun, 0.0) ** (1.0 / p))


def empirical_wasserstein(points_p, points_q, metric: CfdfMetric, p: float = 1.0,
                          p_weights=None, q_weights=None) -> float:
    """
    transport cost between two weighted sets of (v, y) pairs under cost_z
    """
    Vp, yp = _rows(points_p)
    Vq, yq = _rows(points_q)
    a = np.full(Vp.shape[0], 1.0 / Vp.shape[0]) if p_weights is None else p_weights
    b = np.full(Vq.shape[0], 1.0 / Vq.shape[0]) if q_weights is None else q_weights
    cost = np.array([[cost_z(metric, (Vp[i], yp[i]), (Vq[j], yq[j])) for j in range(Vq.shape[0])]
                     for i in range(Vp.shape[0])])
    return ot_cost_discrete(a, b, cost, p)


# # # adversarial sandwich

@dataclass
class SandwichResult:
    lower: float
    upper: float
    gap: float
    L: float
    M: float
    D: float
    radius: float
    budgets: np.ndarray


def box_transport_cost(norm: NormSpec, dims: int, radius: float, p: float) -> float:
    """
    d^p from the origin to a corner of the shift box [-radius, radius]^dims
    """
    if not np.isfinite(radius):
        return math.inf
    return float(norm.norm(np.full(dims, float(radius)))) ** p


def adversarial_sandwich(data, scm: Scm, theta, loss: LossSpec, delta: float, p: float, K: int,
                         norm: Optional[NormSpec] = None, L: Optional[float] = None, M: Optional[float] = None,
                         D: Optional[float] = None, loss_power: Optional[float] = None, levels=None,
                         grid: Optional[GridSpec] = None, budget_units: int = 400, sweeps: int = 50,
                         tolerance: float = 1e-12, dual: Optional[DualResult] = None) -> SandwichResult:
    """
    K-copy adversarial risk: max (1/NK) sum_ik loss^P(v_ik) over copies with
    (1/NK) sum_ik d(v_i, v_ik)^p <= delta^p; upper = lower + (L D + M) / (N K)

    D defaults to the transport cost of the active box of the grid dual, the
    region holding the worst-case atoms; pass `dual` to reuse a computed one.
    The same box is used for every K.
    """
    if K < 1:
        raise OracleInputError(f'K must be >= 1, got {K}')
    if not scm.is_linear:
        raise NonlinearScmError('The sandwich uses the closed-form per-copy sup of linear SCMs')
    if not loss.definition.quasi_convex:
        raise LossSpecError(f'Loss `{loss.family}` is not quasi-convex; no closed-form per-copy sup')
    norm = norm or NormSpec()
    grid = grid or GridSpec()
    P = p if loss_power is None else loss_power
    params = _params(theta)
    table = build_twins(scm, data, levels)
    N = len(table)
    y = table.labels[:, None]
    k = float(norm.dual(scm.linear_matrix()[:, list(scm.nonsensitive_idx)].T @ params.theta))
    scores = table.twins @ params.theta + params.intercept

    def per_copy(i, r):
        r = np.asarray(r, dtype=float)[..., None]
        down = loss.h(loss.argument(scores[i] - k * r, y[i]))
        up = loss.h(loss.argument(scores[i] + k * r, y[i]))
        return np.maximum(down, up).max(axis=-1) ** P

    def spread(i, budget):
        # best use of `budget` cost units over the K copies of sample i
        budget = np.asarray(budget, dtype=float)
        j = np.arange(1, K + 1)[:, None]
        radii = (budget.reshape(1, -1) / j) ** (1.0 / p)
        best = (j * per_copy(i, radii) + (K - j) * per_copy(i, 0.0)).max(axis=0)
        return best.reshape(budget.shape)

    total = N * K * delta ** p
    twin_losses = loss.h(loss.argument(scores, y)) ** P
    if L is None:
        L = 2.0 ** (P - 1.0) * (loss.lipschitz * k) ** P
    if M is None:
        M = float(np.max(twin_losses.max(axis=1) - twin_losses.min(axis=1))) if P == 1.0 \
            else 2.0 ** (P - 1.0) * float(twin_losses.max())
    radius = math.nan
    if D is None:
        if dual is None:
            dual = dual_value_grid(data, scm, params, loss, delta, p, grid=grid, norm=norm, loss_power=P,
                                   levels=levels)
        radius = grid.max_radius if dual.unbounded_suspected else dual.radius
        D = box_transport_cost(norm, len(scm.nonsensitive_idx), radius, p)
        logger.debug(f'Sandwich box radius {radius:.4g}, D = {D:.6g}')

    budgets = np.zeros(N)
    if total > 0.0:
        unit = total / budget_units
        units = np.arange(budget_units + 1)
        table_values = np.array([spread(i, units * unit) for i in range(N)])
        best = table_values[0].copy()
        choice = [np.arange(budget_units + 1)]
        for i in range(1, N):
            # best[u] over samples < i; combine with sample i taking v units
            combined = np.full((budget_units + 1, budget_units + 1), -np.inf)
            for u in units:
                combined[u, :u + 1] = best[u - np.arange(u + 1)] + table_values[i, :u + 1]
            choice.append(np.argmax(combined, axis=1))
            best = combined.max(axis=1)
        remaining = budget_units
        for i in range(N - 1, 0, -1):
            v = choice[i][remaining]
            budgets[i] = v * unit
            remaining -= v
        budgets[0] = remaining * unit

        def value_of(b):
            return sum(float(spread(i, b[i])) for i in range(N))

        current = value_of(budgets)
        converged = N == 1
        for _ in range(sweeps):
            if converged:
                break
            start = current
            for i, j in itertools.combinations(range(N), 2):
                pair = budgets[i] + budgets[j]
                if pair <= 0.0:
                    continue
                shares = np.linspace(0.0, pair, 201)
                pair_values = spread(i, shares) + spread(j, pair - shares)
                s = shares[int(np.argmax(pair_values))]
                res = minimize_scalar(lambda x: -(spread(i, x) + spread(j, pair - x)),
                                      bounds=(max(0.0, s - pair / 200), min(pair, s + pair / 200)),
                                      method='bounded', options={'xatol': 1e-12 * max(pair, 1.0)})
                s_best = res.x if -res.fun > pair_values.max() else s
                before = float(spread(i, budgets[i]) + spread(j, budgets[j]))
                after = float(spread(i, s_best) + spread(j, pair - s_best))
                if after > before:
                    budgets[i], budgets[j] = s_best, pair - s_best
            current = value_of(budgets)
            converged = current - start <= tolerance * max(1.0, abs(current))
        if not converged:
            raise AllocationError(f'Budget allocation still improving after {sweeps} sweeps')
        lower = current / (N * K)
    else:
        lower = float(np.mean(twin_losses.max(axis=1)))
    gap = (L * D + M) / (N * K)
    return SandwichResult(lower, lower + gap, gap, L, M, D, radius, budgets)


# # # bound arithmetic

def finite_sample_bound(C_L: float, L: float, M: float, M_d: float, diam: float, p: float, delta: float,
                        eta: float, epsilon: float, N: int) -> float:
    """
    N^-1/2 [c0 + c1 delta^(1-p) + c2 delta^(1-p) N^(1/2-eta) + c3 sqrt(log(2/epsilon))]
    with c0 = 96 C_L, c1 = 96 L diam^p, c2 = 2 p L diam^(p-1) M_d, c3 = 2 sqrt(2) M
    """
    if p < 1.0:
        raise OracleInputError(f'p must be >= 1, got {p}')
    if not 0.0 < epsilon < 2.0:
        raise OracleInputError(f'epsilon must lie in (0, 2), got {epsilon}')
    if min(C_L, L, M, M_d, diam, delta, eta, N) <= 0.0:
        raise OracleInputError('Bound parameters must be positive')
    c0 = 96.0 * C_L
    c1 = 96.0 * L * diam ** p
    c2 = 2.0 * p * L * diam ** (p - 1.0) * M_d
    c3 = 2.0 * math.sqrt(2.0) * M
    scale = delta ** (1.0 - p)
    return (c0 + c1 * scale + c2 * scale * N ** (0.5 - eta) + c3 * math.sqrt(math.log(2.0 / epsilon))) / math.sqrt(N)


# # # random instances for the oracle battery

@dataclass
class OracleInstance:
    seed: int
    scm: Scm
    features: np.ndarray
    labels: np.ndarray
    params: ModelParams
    loss: LossSpec
    delta: float
    power: float
    norm: NormSpec

    @property
    def data(self):
        return self.features, self.labels

    def trainer_config(self) -> TrainerConfig:
        return TrainerConfig(kind='cdro_closed', delta=self.delta, power=self.power, norm=self.norm,
                             loss=self.loss)


def random_linear_instance(seed: int, families: Sequence[str] = ('hinge', 'absolute'),
                           powers: Sequence[float] = (1.0, 2.0), deltas: Sequence[float] = (0.05, 0.2),
                           norms: Sequence[str] = ('l1', 'l2')) -> OracleInstance:
    """
    small linear instance: binary sensitive root A, one or two non-sensitive
    children, 2 to 5 samples
    """
    rng = np.random.default_rng(seed)
    n_x = int(rng.integers(1, 3))
    nodes = ['A'] + [f'X{j + 1}' for j in range(n_x)]
    equations = {'X1': LinearEquation(('A',), (float(rng.uniform(-2.0, 2.0)),))}
    if n_x == 2:
        equations['X2'] = LinearEquation(('A', 'X1'), tuple(float(c) for c in rng.uniform(-2.0, 2.0, 2)))
    exogenous = {'A': ExogenousSpec('bernoulli', p=0.5)}
    exogenous.update({node: ExogenousSpec('normal') for node in nodes[1:]})
    scm = Scm(nodes, equations, ['A'], exogenous)
    N = int(rng.integers(2, 6))
    features = scm.sample(N, seed)[nodes].to_numpy()
    labels = rng.choice([-1.0, 1.0], size=N)
    params = ModelParams(rng.normal(size=len(nodes)), float(rng.normal()))
    return OracleInstance(
        seed=seed, scm=scm, features=features, labels=labels, params=params,
        loss=LossSpec(str(rng.choice(list(families)))),
        delta=float(rng.choice(list(deltas))),
        power=float(rng.choice(list(powers))),
        norm=NormSpec.parse(str(rng.choice(list(norms)))),
    )
