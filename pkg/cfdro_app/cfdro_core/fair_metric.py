"""
Causally fair dissimilarity: the norm of the difference of non-sensitive
semi-latent coordinates, plus norm / dual-norm helpers and the label-aware
transport cost.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DatasetError, DimensionError, LossSpecError
from .scm import Scm

# label transport is forbidden; saturates under + and max
INFINITE_COST = math.inf

VALID_NORM_KINDS = ('l1', 'l2', 'linf', 'wl2')
VALID_LABELS = (-1, 1)

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass(frozen=True)
class NormSpec:
    kind: str = 'l1'
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in VALID_NORM_KINDS:
            raise LossSpecError(f'{self.kind} is not a valid norm!')
        if self.kind == 'wl2':
            if not self.weights:
                raise LossSpecError('Weighted L2 norm needs weights!')
            if any(not w > 0.0 for w in self.weights):
                raise LossSpecError(f'Norm weights must be strictly positive, got {self.weights}')
        elif self.weights is not None:
            raise LossSpecError(f'Norm {self.kind} takes no weights!')

    @classmethod
    def parse(cls, spec: str) -> 'NormSpec':
        """
        "l1" | "l2" | "linf" | "wl2:w1,w2,..."
        """
        kind, _, rest = spec.strip().lower().partition(':')
        if kind == 'wl2':
            try:
                weights = tuple(float(w) for w in rest.split(','))
            except ValueError as e:
                raise LossSpecError(f'Cannot parse norm weights in `{spec}`') from e
            return cls('wl2', weights)
        if rest:
            raise LossSpecError(f'Norm `{kind}` takes no parameters (got `{spec}`)')
        return cls(kind)

    def __str__(self):
        if self.kind == 'wl2':
            return 'wl2:' + ','.join(repr(w) for w in self.weights)
        return self.kind

    def _w(self, x: np.ndarray) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        if w.shape[0] != x.shape[-1]:
            raise DimensionError(f'Norm has {w.shape[0]} weights for vectors of length {x.shape[-1]}')
        return w

    def norm(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == 'l1':
            return np.abs(x).sum(axis=-1)
        if self.kind == 'l2':
            return np.sqrt((x ** 2).sum(axis=-1))
        if self.kind == 'linf':
            return np.abs(x).max(axis=-1, initial=0.0)
        return np.sqrt((self._w(x) * x ** 2).sum(axis=-1))

    def dual(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == 'l1':
            return np.abs(x).max(axis=-1, initial=0.0)
        if self.kind == 'l2':
            return np.sqrt((x ** 2).sum(axis=-1))
        if self.kind == 'linf':
            return np.abs(x).sum(axis=-1)
        return np.sqrt((x ** 2 / self._w(x)).sum(axis=-1))

    def dual_spec(self) -> 'NormSpec':
        if self.kind == 'l1':
            return NormSpec('linf')
        if self.kind == 'linf':
            return NormSpec('l1')
        if self.kind == 'l2':
            return self
        return NormSpec('wl2', tuple(1.0 / w for w in self.weights))

    def holder_maximizer(self, x) -> np.ndarray:
        """
        z with norm(z) <= 1 and z.x = dual(x); also a subgradient of dual at x.
        Zero rows map to zero. Works row-wise on the last axis.
        """
        x = np.asarray(x, dtype=float)
        z = np.zeros_like(x)
        if self.kind == 'l1':
            j = np.abs(x).argmax(axis=-1)
            picked = np.take_along_axis(x, j[..., None], axis=-1)
            np.put_along_axis(z, j[..., None], np.sign(picked), axis=-1)
            return z
        if self.kind == 'linf':
            return np.sign(x)
        if self.kind == 'l2':
            scaled = x
        else:
            scaled = x / self._w(x)
        d = self.dual(x)[..., None]
        np.divide(scaled, d, out=z, where=d > 0.0)
        return z

    def unit_axes(self, k: int) -> np.ndarray:
        """
        axis directions e_j scaled to unit norm, shape (k, k)
        """
        eye = np.eye(k)
        return eye / self.norm(eye)[:, None]


def dual_norm(norm: NormSpec, x) -> float:
    return float(norm.dual(x))


def naive_distance(norm: NormSpec, v, v2, sensitive_idx: Sequence[int] = ()):
    """
    norm of the raw non-sensitive feature difference, no causal correction
    """
    v = np.asarray(v, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v.shape[-1] != v2.shape[-1]:
        raise DimensionError(f'Cannot compare vectors of length {v.shape[-1]} and {v2.shape[-1]}')
    keep = [i for i in range(v.shape[-1]) if i not in set(sensitive_idx)]
    return norm.norm((v - v2)[..., keep])


@dataclass
class CfdfMetric:
    """
    d(v, v') = || P_X(g(v)) - P_X(g(v')) || for the given SCM and norm
    """
    scm: Scm
    norm: NormSpec = field(default_factory=NormSpec)

    def __post_init__(self):
        if self.norm.kind == 'wl2' and len(self.norm.weights) != len(self.scm.nonsensitive_idx):
            raise DimensionError(f'Norm weights must cover the {len(self.scm.nonsensitive_idx)} '
                                 f'non-sensitive coordinates')

    def latent(self, v) -> np.ndarray:
        """
        P_X(g(v)), rows preserved
        """
        U0 = self.scm.semi_latent_rows(v)[:, list(self.scm.nonsensitive_idx)]
        return U0[0] if np.ndim(v) == 1 else U0

    def distance(self, v, v2):
        return self.norm.norm(self.latent(v) - self.latent(v2))

    def distance_from_latent(self, latent, v2):
        return self.norm.norm(np.asarray(latent) - self.latent(v2))

    def bind(self, v) -> 'LatentCache':
        return LatentCache(self, np.atleast_2d(np.asarray(v, dtype=float)))


class LatentCache:
    """
    abductions of one dataset, computed once and reused for distances to
    many candidate points
    """

    def __init__(self, metric: CfdfMetric, rows: np.ndarray):
        self.metric = metric
        self.rows = rows
        self.latents = metric.latent(rows)

    def distance(self, i: int, v2):
        return self.metric.distance_from_latent(self.latents[i], v2)


def cfdf_distance(metric: CfdfMetric, v, v2):
    return metric.distance(v, v2)


def _check_label(y):
    if y not in VALID_LABELS:
        raise DatasetError(f'Label {y} is not in {{-1, +1}}!')


def cost_z(metric: CfdfMetric, z, z2) -> float:
    """
    c((v, y), (v2, y2)) = d(v, v2) + inf * |y - y2|
    """
    (v, y), (v2, y2) = z, z2
    _check_label(y)
    _check_label(y2)
    if y != y2:
        return INFINITE_COST
    return float(metric.distance(v, v2))
