"""
Additive-noise structural causal models.

An Scm holds an ordered list of variables, one structural equation per
variable (linear, or a weighted sum of a registered elementwise function of
the parents) plus an additive exogenous term, a set of sensitive variables and
optional exogenous distributions for sampling.

All operations accept either a single vector of length n or a matrix of
shape (rows, n) and return the same layout.
"""
import itertools
import json
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
import pandas as pd
from scipy.special import expit

from .errors import DimensionError, InterventionError, NonlinearScmError, ScmDefinitionError

SCM_SCHEMA_VERSION = 'scm/1'
FD_RELATIVE_STEP = 1e-6
VALID_EXOGENOUS_KINDS = ('bernoulli', 'normal')

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass(frozen=True)
class StructuralFunction:
    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def slope(self, x: np.ndarray) -> np.ndarray:
        if self.derivative is not None:
            return self.derivative(x)
        # central difference fallback
        step = FD_RELATIVE_STEP * (1.0 + np.abs(x))
        return (self.value(x + step) - self.value(x - step)) / (2.0 * step)


STRUCTURAL_FUNCTIONS: Dict[str, StructuralFunction] = {}


def register_structural_function(name: str, value, derivative=None) -> StructuralFunction:
    """
    register an elementwise function usable in nonlinear equations
    :param name: id used in SCM definition files
    :param value: vectorised callable
    :param derivative: vectorised derivative; finite differences are used when omitted
    """
    STRUCTURAL_FUNCTIONS[name] = StructuralFunction(name=name, value=value, derivative=derivative)
    return STRUCTURAL_FUNCTIONS[name]


register_structural_function('identity', lambda x: x, np.ones_like)
register_structural_function('tanh', np.tanh, lambda x: 1.0 - np.tanh(x) ** 2)
register_structural_function('sin', np.sin, np.cos)
register_structural_function('softplus', lambda x: np.logaddexp(0.0, x), expit)
register_structural_function('square', np.square, lambda x: 2.0 * x)
register_structural_function('sigmoid', expit, lambda x: expit(x) * (1.0 - expit(x)))


@dataclass(frozen=True)
class LinearEquation:
    parents: Tuple[str, ...] = ()
    coefficients: Tuple[float, ...] = ()
    intercept: float = 0.0

    @property
    def is_linear(self) -> bool:
        return True

    def evaluate(self, parent_values: np.ndarray) -> np.ndarray:
        return self.intercept + parent_values @ np.asarray(self.coefficients, dtype=float)

    def partials(self, parent_values: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.coefficients, dtype=float), parent_values.shape)


@dataclass(frozen=True)
class NonlinearEquation:
    """
    f(v_pa) = intercept + sum_j weights[j] * function(v_pa[j])
    """
    parents: Tuple[str, ...]
    function: str
    weights: Tuple[float, ...]
    intercept: float = 0.0

    @property
    def is_linear(self) -> bool:
        return False

    def evaluate(self, parent_values: np.ndarray) -> np.ndarray:
        phi = STRUCTURAL_FUNCTIONS[self.function]
        return self.intercept + phi.value(parent_values) @ np.asarray(self.weights, dtype=float)

    def partials(self, parent_values: np.ndarray) -> np.ndarray:
        phi = STRUCTURAL_FUNCTIONS[self.function]
        return phi.slope(parent_values) * np.asarray(self.weights, dtype=float)


Equation = Union[LinearEquation, NonlinearEquation]


@dataclass(frozen=True)
class ExogenousSpec:
    kind: str
    p: float = 0.5
    mean: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in VALID_EXOGENOUS_KINDS:
            raise ScmDefinitionError(f'{self.kind} is not a valid exogenous distribution!')
        if self.kind == 'bernoulli' and not 0.0 <= self.p <= 1.0:
            raise ScmDefinitionError(f'Bernoulli probability {self.p} outside [0, 1]!')
        if self.kind == 'normal' and self.variance < 0.0:
            raise ScmDefinitionError(f'Normal variance {self.variance} is negative!')

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == 'bernoulli':
            return rng.binomial(1, self.p, size=size).astype(float)
        return rng.normal(self.mean, np.sqrt(self.variance), size=size)

    def support(self) -> Tuple[float, ...]:
        """
        values drawn with positive probability (Bernoulli only)
        """
        if self.kind != 'bernoulli':
            raise InterventionError(f'{self.kind} exogenous noise has no finite support')
        return tuple(level for level, mass in ((0.0, 1.0 - self.p), (1.0, self.p)) if mass > 0.0)


@dataclass(frozen=True)
class SemiLatentPoint:
    """
    point of the semi-latent space: raw sensitive values and the
    exogenous values of the non-sensitive variables
    """
    sensitive: np.ndarray
    nonsensitive: np.ndarray


class Scm:
    """
    Immutable additive-noise SCM. The topological order is fixed at
    construction and cycles are rejected there.
    """

    def __init__(self, nodes: Sequence[str], equations: Optional[Mapping[str, Equation]] = None,
                 sensitive: Sequence[Union[str, int]] = (), exogenous: Optional[Mapping[str, ExogenousSpec]] = None):
        self.nodes = tuple(nodes)
        if not self.nodes:
            raise ScmDefinitionError('An SCM needs at least one node!')
        if len(set(self.nodes)) != len(self.nodes):
            raise ScmDefinitionError(f'Duplicate node ids in {self.nodes}!')
        self._index = {name: i for i, name in enumerate(self.nodes)}
        equations = dict(equations or {})
        unknown = set(equations) - set(self.nodes)
        if unknown:
            raise ScmDefinitionError(f'Equations given for unknown nodes: {sorted(unknown)}')
        self.equations = tuple(equations.get(node, LinearEquation()) for node in self.nodes)
        for node, equation in zip(self.nodes, self.equations):
            self._check_equation(node, equation)
        self.parent_idx = tuple([self._index[p] for p in eq.parents] for eq in self.equations)

        graph = nx.DiGraph()
        graph.add_nodes_from(range(len(self.nodes)))
        graph.add_edges_from((p, i) for i, parents in enumerate(self.parent_idx) for p in parents)
        if not nx.is_directed_acyclic_graph(graph):
            raise ScmDefinitionError(f'Cycle detected in parent graph: {nx.find_cycle(graph)}')
        self.graph = graph
        self.topological_order = tuple(nx.lexicographical_topological_sort(graph))

        self.sensitive_idx = self._resolve_sensitive(sensitive)
        self.nonsensitive_idx = tuple(i for i in range(len(self.nodes)) if i not in self.sensitive_idx)
        self._sensitive_set = frozenset(self.sensitive_idx)

        self.exogenous = dict(exogenous or {})
        unknown = set(self.exogenous) - set(self.nodes)
        if unknown:
            raise ScmDefinitionError(f'Exogenous specs given for unknown nodes: {sorted(unknown)}')

    def _check_equation(self, node: str, equation: Equation):
        for parent in equation.parents:
            if parent not in self._index:
                raise ScmDefinitionError(f'Equation of {node} reads undeclared node {parent}!')
            if parent == node:
                raise ScmDefinitionError(f'Equation of {node} reads itself!')
        weights = equation.coefficients if equation.is_linear else equation.weights
        if len(weights) != len(equation.parents):
            raise ScmDefinitionError(f'Equation of {node} has {len(weights)} weights '
                                     f'for {len(equation.parents)} parents!')
        if not equation.is_linear and equation.function not in STRUCTURAL_FUNCTIONS:
            raise ScmDefinitionError(f'Unknown structural function `{equation.function}` for {node}!')

    def _resolve_sensitive(self, sensitive) -> Tuple[int, ...]:
        resolved = set()
        for s in sensitive:
            if isinstance(s, str):
                if s not in self._index:
                    raise ScmDefinitionError(f'Sensitive node {s} is not a node!')
                resolved.add(self._index[s])
            else:
                if not 0 <= int(s) < len(self.nodes):
                    raise ScmDefinitionError(f'Sensitive index {s} out of bounds!')
                resolved.add(int(s))
        if not resolved:
            raise ScmDefinitionError('The sensitive set must not be empty!')
        return tuple(sorted(resolved))

    def __repr__(self):
        sensitive = [self.nodes[i] for i in self.sensitive_idx]
        return f'Scm(nodes={list(self.nodes)}, sensitive={sensitive}, linear={self.is_linear})'

    def __eq__(self, other):
        if not isinstance(other, Scm):
            return NotImplemented
        return (self.nodes == other.nodes and self.equations == other.equations
                and self.sensitive_idx == other.sensitive_idx and self.exogenous == other.exogenous)

    def __hash__(self):
        return hash((self.nodes, self.equations, self.sensitive_idx))

    # # # structure

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def is_linear(self) -> bool:
        return all(eq.is_linear for eq in self.equations)

    def index(self, name: str) -> int:
        return self._index[name]

    def parents_of(self, node: Union[str, int]) -> Tuple[str, ...]:
        i = self._index[node] if isinstance(node, str) else node
        return self.equations[i].parents

    def _as_rows(self, x, what: str) -> Tuple[np.ndarray, bool]:
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.ndim != 2 or arr.shape[1] != self.n:
            raise DimensionError(f'{what} has shape {np.shape(x)}, expected length {self.n}')
        return arr, single

    def _f(self, i: int, values: np.ndarray) -> np.ndarray:
        return self.equations[i].evaluate(values[:, self.parent_idx[i]])

    # # # reduced form and abduction

    def reduced_form(self, u):
        """
        F(u): evaluate every v_i = f_i(v_pa(i)) + u_i in topological order
        """
        U, single = self._as_rows(u, 'exogenous vector')
        V = np.zeros_like(U)
        for i in self.topological_order:
            V[:, i] = self._f(i, V) + U[:, i]
        return V[0] if single else V

    def abduct(self, v):
        """
        u = (I - f)(v)
        """
        V, single = self._as_rows(v, 'feature vector')
        U = np.empty_like(V)
        for i in range(self.n):
            U[:, i] = V[:, i] - self._f(i, V)
        return U[0] if single else U

    # # # semi-latent space

    def semi_latent_rows(self, v) -> np.ndarray:
        """
        g(v) laid out in node order: sensitive coordinates keep the raw
        value, the others hold their exogenous value
        """
        V, _ = self._as_rows(v, 'feature vector')
        U0 = np.empty_like(V)
        for i in range(self.n):
            U0[:, i] = V[:, i] if i in self._sensitive_set else V[:, i] - self._f(i, V)
        return U0

    def semi_latent_inverse_rows(self, u0) -> np.ndarray:
        U0, _ = self._as_rows(u0, 'semi-latent vector')
        V = np.zeros_like(U0)
        for i in self.topological_order:
            V[:, i] = U0[:, i] if i in self._sensitive_set else self._f(i, V) + U0[:, i]
        return V

    def semi_latent(self, v) -> SemiLatentPoint:
        single = np.ndim(v) == 1
        U0 = self.semi_latent_rows(v)
        sensitive = U0[:, list(self.sensitive_idx)]
        nonsensitive = U0[:, list(self.nonsensitive_idx)]
        if single:
            return SemiLatentPoint(sensitive=sensitive[0], nonsensitive=nonsensitive[0])
        return SemiLatentPoint(sensitive=sensitive, nonsensitive=nonsensitive)

    def assemble(self, point: SemiLatentPoint) -> np.ndarray:
        sensitive = np.atleast_2d(np.asarray(point.sensitive, dtype=float))
        nonsensitive = np.atleast_2d(np.asarray(point.nonsensitive, dtype=float))
        if sensitive.shape[1] != len(self.sensitive_idx) or nonsensitive.shape[1] != len(self.nonsensitive_idx):
            raise DimensionError(f'Semi-latent point has {sensitive.shape[1]} + {nonsensitive.shape[1]} '
                                 f'coordinates, expected {len(self.sensitive_idx)} + {len(self.nonsensitive_idx)}')
        if sensitive.shape[0] != nonsensitive.shape[0]:
            raise DimensionError('Semi-latent parts have different row counts!')
        U0 = np.empty((sensitive.shape[0], self.n))
        U0[:, list(self.sensitive_idx)] = sensitive
        U0[:, list(self.nonsensitive_idx)] = nonsensitive
        return U0

    def semi_latent_inverse(self, u0):
        """
        g^-1: accepts a SemiLatentPoint or a node-ordered array
        """
        if isinstance(u0, SemiLatentPoint):
            single = np.ndim(u0.nonsensitive) == 1
            V = self.semi_latent_inverse_rows(self.assemble(u0))
        else:
            single = np.ndim(u0) == 1
            V = self.semi_latent_inverse_rows(u0)
        return V[0] if single else V

    def inverse_jacobian(self, u0) -> np.ndarray:
        """
        Jacobian of g^-1 at u0, shape (rows, n, n), by forward accumulation
        """
        U0, single = self._as_rows(u0, 'semi-latent vector')
        V = self.semi_latent_inverse_rows(U0)
        rows = U0.shape[0]
        J = np.zeros((rows, self.n, self.n))
        for i in self.topological_order:
            J[:, i, i] = 1.0
            parents = self.parent_idx[i]
            if i in self._sensitive_set or not parents:
                continue
            partials = self.equations[i].partials(V[:, parents])
            J[:, i, :] += np.einsum('rk,rkj->rj', partials, J[:, parents, :])
        return J[0] if single else J

    # # # interventions

    def counterfactual_shift(self, v, delta):
        """
        CF_0(v, delta) = g^-1(g(v) + (0, delta)). delta is either over the
        non-sensitive coordinates or a full-length vector with zero sensitive entries.
        """
        V, single = self._as_rows(v, 'feature vector')
        d = np.asarray(delta, dtype=float)
        if d.shape[-1] == self.n:
            if np.any(d[..., list(self.sensitive_idx)] != 0.0):
                raise InterventionError('Shift interventions must leave sensitive coordinates at zero!')
            d = d[..., list(self.nonsensitive_idx)]
        elif d.shape[-1] != len(self.nonsensitive_idx):
            raise DimensionError(f'Shift has length {d.shape[-1]}, expected {len(self.nonsensitive_idx)} or {self.n}')
        shift = np.atleast_2d(d)
        U0 = self.semi_latent_rows(V)
        try:
            rows = np.broadcast_shapes((U0.shape[0],), (shift.shape[0],))[0]
        except ValueError as e:
            raise DimensionError(f'Cannot pair {U0.shape[0]} points with {shift.shape[0]} shifts') from e
        U0 = np.broadcast_to(U0, (rows, self.n)).copy()
        U0[:, list(self.nonsensitive_idx)] += shift
        out = self.semi_latent_inverse_rows(U0)
        return out[0] if single and d.ndim == 1 else out

    def _normalise_targets(self, targets) -> Dict[int, float]:
        items = targets.items() if isinstance(targets, Mapping) else targets
        resolved = {}
        for key, value in items:
            if isinstance(key, str):
                if key not in self._index:
                    raise InterventionError(f'Unknown intervention target {key}!')
                key = self._index[key]
            elif not 0 <= int(key) < self.n:
                raise InterventionError(f'Intervention index {key} out of bounds!')
            resolved[int(key)] = float(value)
        return resolved

    def counterfactual_hard(self, v, targets):
        """
        CF(v, do(V_i := value)): abduct, fix the targets, re-evaluate their
        descendants. Rows already at the target values are returned unchanged.
        """
        V, single = self._as_rows(v, 'feature vector')
        resolved = self._normalise_targets(targets)
        U = self.abduct(V)
        out = V.copy()
        affected = set()
        for idx in resolved:
            affected |= nx.descendants(self.graph, idx)
        for idx, value in resolved.items():
            out[:, idx] = value
        for i in self.topological_order:
            if i in affected and i not in resolved:
                out[:, i] = self._f(i, out) + U[:, i]
        unchanged = np.ones(V.shape[0], dtype=bool)
        for idx, value in resolved.items():
            unchanged &= V[:, idx] == value
        out[unchanged] = V[unchanged]
        return out[0] if single else out

    def _level_rows(self, levels) -> np.ndarray:
        lv = np.asarray(levels, dtype=float)
        if lv.size == 0:
            raise InterventionError('Twins need at least one sensitive level!')
        if lv.ndim == 1:
            if len(self.sensitive_idx) != 1:
                raise InterventionError(f'Levels must be tuples of {len(self.sensitive_idx)} sensitive values!')
            lv = lv[:, None]
        if lv.ndim != 2 or lv.shape[1] != len(self.sensitive_idx):
            raise InterventionError(f'Levels have shape {lv.shape}, expected (L, {len(self.sensitive_idx)})')
        return lv

    def twins(self, v, levels) -> list:
        """
        one hard counterfactual per sensitive level, in level order
        """
        return [self.counterfactual_hard(v, list(zip(self.sensitive_idx, level)))
                for level in self._level_rows(levels)]

    def twin_array(self, v, levels) -> np.ndarray:
        """
        twins of every row stacked as (rows, levels, n)
        """
        V, _ = self._as_rows(v, 'feature vector')
        return np.stack(self.twins(V, levels), axis=1)

    def level_index(self, v, levels) -> np.ndarray:
        """
        index of each row's own level in `levels` (-1 when not listed)
        """
        V, _ = self._as_rows(v, 'feature vector')
        lv = self._level_rows(levels)
        own = V[:, list(self.sensitive_idx)]
        match = np.all(np.isclose(own[:, None, :], lv[None, :, :], rtol=0.0, atol=1e-12), axis=2)
        return np.where(match.any(axis=1), match.argmax(axis=1), -1)

    def sensitive_levels(self) -> np.ndarray:
        """
        finite sensitive alphabet from the Bernoulli exogenous specs of parent-free sensitive nodes.
        A level with zero probability (p = 0 or p = 1) is left out, so such a node contributes
        a single level and its twins coincide with the factual point.
        """
        per_node = []
        for i in self.sensitive_idx:
            spec = self.exogenous.get(self.nodes[i])
            if spec is None or spec.kind != 'bernoulli' or self.parent_idx[i]:
                raise InterventionError(f'Sensitive node {self.nodes[i]} has no finite level set; '
                                        f'pass levels explicitly')
            support = spec.support()
            if len(support) < 2:
                logger.warning(f'Sensitive node {self.nodes[i]} is constant (p = {spec.p}); '
                               f'its only level is {support[0]:g}')
            per_node.append(support)
        return np.array(list(itertools.product(*per_node)), dtype=float)

    # # # derived models

    def parent_free(self) -> 'Scm':
        """
        M_0: sensitive nodes become roots, everything else unchanged
        """
        if all(self.equations[i] == LinearEquation() for i in self.sensitive_idx):
            return self
        equations = {node: (LinearEquation() if i in self._sensitive_set else self.equations[i])
                     for i, node in enumerate(self.nodes)}
        return Scm(self.nodes, equations, self.sensitive_idx, self.exogenous)

    def linear_offset(self) -> np.ndarray:
        return self.semi_latent_inverse_rows(np.zeros((1, self.n)))[0]

    def linear_matrix(self) -> np.ndarray:
        """
        M with g^-1(u0) = M u0 (+ offset when equations carry intercepts)
        """
        if not self.is_linear:
            raise NonlinearScmError('linear_matrix needs every structural equation to be linear!')
        images = self.semi_latent_inverse_rows(np.eye(self.n)) - self.linear_offset()
        return images.T

    # # # sampling

    def sample(self, n: int, seed: int) -> pd.DataFrame:
        """
        draw n exogenous rows with the given seed and push them through F
        :return: DataFrame with columns u_<node> then <node>
        """
        if n < 1:
            raise DimensionError(f'Sample size must be at least 1, got {n}')
        missing = [node for node in self.nodes if node not in self.exogenous]
        if missing:
            raise ScmDefinitionError(f'Missing exogenous spec for {missing}')
        rng = np.random.default_rng(seed)
        U = np.column_stack([self.exogenous[node].draw(rng, n) for node in self.nodes])
        V = self.reduced_form(U)
        frame = pd.DataFrame(U, columns=[f'u_{node}' for node in self.nodes])
        for i, node in enumerate(self.nodes):
            frame[node] = V[:, i]
        return frame

    # # # definition files

    def to_definition(self) -> dict:
        equations = {}
        for node, eq in zip(self.nodes, self.equations):
            if not eq.parents and eq.is_linear and eq.intercept == 0.0:
                continue
            if eq.is_linear:
                equations[node] = {'type': 'linear', 'coefficients': dict(zip(eq.parents, eq.coefficients)),
                                   'intercept': eq.intercept}
            else:
                equations[node] = {'type': 'nonlinear', 'function': eq.function,
                                   'weights': dict(zip(eq.parents, eq.weights)), 'intercept': eq.intercept}
        exogenous = {}
        for node, spec in self.exogenous.items():
            exogenous[node] = ({'dist': 'bernoulli', 'p': spec.p} if spec.kind == 'bernoulli'
                               else {'dist': 'normal', 'mean': spec.mean, 'variance': spec.variance})
        return {
            'version': SCM_SCHEMA_VERSION,
            'nodes': list(self.nodes),
            'parents': {node: list(eq.parents) for node, eq in zip(self.nodes, self.equations)},
            'equations': equations,
            'sensitive': [self.nodes[i] for i in self.sensitive_idx],
            'exogenous': exogenous,
        }

    @classmethod
    def from_definition(cls, definition: Mapping) -> 'Scm':
        """
        build from an "scm/1" mapping (already validated by ScmDefinitionSerializer
        when it came from a file)
        """
        version = definition.get('version', SCM_SCHEMA_VERSION)
        if version != SCM_SCHEMA_VERSION:
            raise ScmDefinitionError(f'Unsupported SCM definition version {version}')
        nodes = list(definition['nodes'])
        declared = {node: list(parents) for node, parents in (definition.get('parents') or {}).items()}
        equations = {}
        for node, spec in (definition.get('equations') or {}).items():
            weights = spec.get('coefficients' if spec.get('type', 'linear') == 'linear' else 'weights') or {}
            parents = declared.get(node, list(weights))
            stray = set(weights) - set(parents)
            if stray:
                raise ScmDefinitionError(f'Equation of {node} reads undeclared parents {sorted(stray)}')
            values = tuple(float(weights.get(p, 0.0)) for p in parents)
            intercept = float(spec.get('intercept', 0.0))
            if spec.get('type', 'linear') == 'linear':
                equations[node] = LinearEquation(tuple(parents), values, intercept)
            else:
                equations[node] = NonlinearEquation(tuple(parents), spec['function'], values, intercept)
        for node, parents in declared.items():
            if parents and node not in equations:
                raise ScmDefinitionError(f'Node {node} declares parents but has no equation')
        exogenous = {}
        for node, spec in (definition.get('exogenous') or {}).items():
            if spec['dist'] == 'bernoulli':
                exogenous[node] = ExogenousSpec('bernoulli', p=float(spec.get('p', 0.5)))
            else:
                exogenous[node] = ExogenousSpec(spec['dist'], mean=float(spec.get('mean', 0.0)),
                                                variance=float(spec.get('variance', 1.0)))
        return cls(nodes, equations, definition['sensitive'], exogenous)


def load_scm(path: str) -> Scm:
    with open(path, 'r') as f:
        return Scm.from_definition(json.load(f))


def levels_from_data(scm: Scm, v) -> np.ndarray:
    """
    distinct observed sensitive rows, sorted, shape (L, |sensitive|)
    """
    V, _ = scm._as_rows(v, 'feature matrix')
    return np.unique(V[:, list(scm.sensitive_idx)], axis=0)


def resolve_levels(scm: Scm, v, levels=None) -> np.ndarray:
    """
    explicit levels if given, else the SCM's Bernoulli alphabet, else the observed levels
    """
    if levels is not None:
        return scm._level_rows(levels)
    try:
        return scm.sensitive_levels()
    except InterventionError:
        logger.debug('Sensitive alphabet not declared; using observed levels')
        return levels_from_data(scm, v)


# # # module-level aliases of the Scm operations

def reduced_form(scm: Scm, u):
    return scm.reduced_form(u)


def abduct(scm: Scm, v):
    return scm.abduct(v)


def semi_latent(scm: Scm, v) -> SemiLatentPoint:
    return scm.semi_latent(v)


def semi_latent_inverse(scm: Scm, u0):
    return scm.semi_latent_inverse(u0)


def counterfactual_shift(scm: Scm, v, delta):
    return scm.counterfactual_shift(v, delta)


def counterfactual_hard(scm: Scm, v, targets):
    return scm.counterfactual_hard(v, targets)


def twins(scm: Scm, v, levels) -> list:
    return scm.twins(v, levels)


def parent_free(scm: Scm) -> Scm:
    return scm.parent_free()


def linear_matrix(scm: Scm) -> np.ndarray:
    return scm.linear_matrix()


def sample(scm: Scm, n: int, seed: int) -> pd.DataFrame:
    return scm.sample(n, seed)
