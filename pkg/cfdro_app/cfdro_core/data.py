"""
Datasets: synthetic generators (LIN, the gender / education / income toy
models), CSV ingestion for Adult and COMPAS, least-squares fitting of linear
SCMs on fixed causal graphs, standardization and stratified splits (scikit-learn).
"""
import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit
from sklearn.linear_model import LinearRegression
from sklearn.model_selection import train_test_split as split_indices
from sklearn.preprocessing import StandardScaler

from .errors import DatasetError, RankDeficiencyError
from .scm import ExogenousSpec, LinearEquation, Scm, load_scm

LABEL_COLUMN = 'label'
VALID_SCHEMAS = ('adult', 'compas', 'custom')
DEFAULT_TRAIN_FRACTION = 0.8
# positive rates outside this band get a warning
LABEL_BALANCE_BAND = (0.1, 0.9)

ADULT_COLUMNS = ('sex', 'age', 'native-country', 'marital-status', 'education-num', 'hours-per-week')
ADULT_GRAPH = {
    'education-num': ('sex', 'age', 'native-country', 'marital-status'),
    'hours-per-week': ('sex', 'age', 'native-country', 'marital-status', 'education-num'),
}
# header spellings found in common redistributions of the Adult file
ADULT_ALIASES = {'gender': 'sex', 'educational-num': 'education-num', 'native_country': 'native-country',
                 'marital_status': 'marital-status', 'education_num': 'education-num',
                 'hours_per_week': 'hours-per-week'}

COMPAS_COLUMNS = ('sex', 'age', 'race', 'priors_count')
COMPAS_GRAPH = {
    'priors_count': ('sex', 'age', 'race'),
}

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass
class Dataset:
    """
    feature matrix with named columns, labels in {-1, +1} and a meta dict
    (source, seed, standardization parameters, label balance)
    """
    columns: Tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    sensitive: Tuple[str, ...] = ()
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.sensitive = tuple(self.sensitive)
        self.features = np.atleast_2d(np.asarray(self.features, dtype=float))
        self.labels = np.asarray(self.labels, dtype=float).reshape(-1)
        if self.features.shape[1] != len(self.columns):
            raise DatasetError(f'{self.features.shape[1]} feature columns for names {self.columns}')
        if self.features.shape[0] != self.labels.shape[0]:
            raise DatasetError(f'{self.features.shape[0]} rows for {self.labels.shape[0]} labels')
        unknown = [s for s in self.sensitive if s not in self.columns]
        if unknown:
            raise DatasetError(f'Sensitive columns {unknown} are not dataset columns', column=unknown[0])
        if not np.all(np.isfinite(self.features)):
            row = int(np.argwhere(~np.isfinite(self.features))[0][0])
            raise DatasetError('Dataset holds missing or non-finite values!', row=row)
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise DatasetError('Labels must be in {-1, +1}!', column=LABEL_COLUMN)

    def __len__(self):
        return self.features.shape[0]

    @property
    def sensitive_idx(self) -> Tuple[int, ...]:
        return tuple(self.columns.index(s) for s in self.sensitive)

    @property
    def nonsensitive_columns(self) -> Tuple[str, ...]:
        return tuple(c for c in self.columns if c not in self.sensitive)

    @property
    def nonsensitive_idx(self) -> Tuple[int, ...]:
        return tuple(j for j, c in enumerate(self.columns) if c not in self.sensitive)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.features[:, self.columns.index(name)]
        except ValueError as e:
            raise DatasetError(f'No column named {name}', column=name) from e

    def subset(self, rows) -> 'Dataset':
        return Dataset(self.columns, self.features[rows].copy(), self.labels[rows].copy(), self.sensitive,
                       copy.deepcopy(self.meta))

    def check_scm(self, scm: Scm):
        """
        raise unless the dataset columns are the SCM's variables with the same sensitive set
        """
        if tuple(scm.nodes) != self.columns:
            raise DatasetError(f'Dataset columns {self.columns} do not match SCM nodes {scm.nodes}')
        if tuple(sorted(scm.sensitive_idx)) != tuple(sorted(self.sensitive_idx)):
            raise DatasetError(f'Dataset sensitive columns {self.sensitive} do not match the SCM')

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.features, columns=list(self.columns))
        frame[LABEL_COLUMN] = self.labels.astype(int)
        return frame

    def save_csv(self, path: str):
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        logger.info(f'Wrote {len(self)} rows to {path}')


def _record_balance(data: Dataset) -> Dataset:
    rate = float(np.mean(data.labels == 1.0))
    data.meta['positive_rate'] = rate
    low, high = LABEL_BALANCE_BAND
    if not low <= rate <= high:
        logger.warning(f'Label imbalance in {data.meta.get("source", "dataset")}: positive rate {rate:.3f}')
    return data


def to_pm1(values, column: str = LABEL_COLUMN) -> np.ndarray:
    """
    map {0, 1} or {-1, +1} labels to {-1, +1}
    """
    y = np.asarray(values, dtype=float).reshape(-1)
    observed = set(np.unique(y).tolist())
    if observed <= {0.0, 1.0}:
        return np.where(y == 1.0, 1.0, -1.0)
    if observed <= {-1.0, 1.0}:
        return y
    raise DatasetError(f'Labels must be 0/1 or -1/+1, found {sorted(observed)}', column=column)


def _bernoulli_labels(score: np.ndarray, seed: int) -> np.ndarray:
    # labels come from their own stream so features match scm.sample(n, seed)
    rng = np.random.default_rng([seed, 1])
    return np.where(rng.uniform(size=score.shape[0]) < expit(score), 1.0, -1.0)


# # # synthetic datasets

def lin_scm() -> Scm:
    """
    A := U_A ~ B(0.5); X1 := 2A + U1; X2 := A - X1 + U2 with standard normal U1, U2
    """
    return Scm(
        ('A', 'X1', 'X2'),
        {'X1': LinearEquation(('A',), (2.0,)), 'X2': LinearEquation(('A', 'X1'), (1.0, -1.0))},
        sensitive=('A',),
        exogenous={'A': ExogenousSpec('bernoulli', p=0.5), 'X1': ExogenousSpec('normal'),
                   'X2': ExogenousSpec('normal')},
    )


def generate_lin(n: int, seed: int) -> Tuple[Scm, Dataset]:
    """
    sample n rows of the LIN model with Y ~ B(sigmoid(X1 + X2))
    """
    scm = lin_scm()
    frame = scm.sample(n, seed)
    V = frame[list(scm.nodes)].to_numpy()
    y = _bernoulli_labels(V[:, 1] + V[:, 2], seed)
    data = Dataset(scm.nodes, V, y, ('A',), {'source': 'lin', 'seed': seed})
    return scm, _record_balance(data)


def generate_example1(which: str = 'M2') -> Scm:
    """
    gender G (F=0, M=1), education E and income I.
    M1: all three independent. M2: E := G + U_E; I := G + 2E + U_I.
    """
    exogenous = {'G': ExogenousSpec('bernoulli', p=0.5), 'E': ExogenousSpec('normal'), 'I': ExogenousSpec('normal')}
    which = which.upper()
    if which == 'M1':
        return Scm(('G', 'E', 'I'), {}, sensitive=('G',), exogenous=exogenous)
    if which == 'M2':
        return Scm(
            ('G', 'E', 'I'),
            {'E': LinearEquation(('G',), (1.0,)), 'I': LinearEquation(('G', 'E'), (1.0, 2.0))},
            sensitive=('G',),
            exogenous=exogenous,
        )
    raise DatasetError(f'{which} is not a valid example model (M1 or M2)')


def generate_example1_data(n: int, seed: int) -> Tuple[Scm, Dataset]:
    """
    sample the M2 model with Y ~ B(sigmoid(I - 2E))
    """
    scm = generate_example1('M2')
    V = scm.sample(n, seed)[list(scm.nodes)].to_numpy()
    y = _bernoulli_labels(V[:, 2] - 2.0 * V[:, 1], seed)
    data = Dataset(scm.nodes, V, y, ('G',), {'source': 'example1', 'seed': seed})
    return scm, _record_balance(data)


# # # CSV ingestion

def _read_frame(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, skipinitialspace=True, dtype=str, keep_default_na=False)
    except FileNotFoundError as e:
        raise DatasetError(f'No such file: {path}') from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f'{path} is empty!') from e
    if frame.empty:
        raise DatasetError(f'{path} has a header but no rows!')
    frame.columns = [c.strip() for c in frame.columns]
    return frame


def _require(frame: pd.DataFrame, columns: Sequence[str], schema: str):
    for column in columns:
        if column not in frame.columns:
            raise DatasetError(f'{schema} file is missing required column `{column}`', column=column)


def _numeric(frame: pd.DataFrame, column: str) -> pd.Series:
    raw = frame[column].str.strip()
    parsed = pd.to_numeric(raw, errors='coerce')
    bad = parsed.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise DatasetError(f'Cannot parse `{raw.iloc[row]}` in column `{column}` (row {row})', column=column, row=row)
    return parsed.astype(float)


def _binary(frame: pd.DataFrame, column: str, positive, negative=None) -> pd.Series:
    """
    1.0 where the cell matches `positive`, 0.0 where it matches `negative`
    (anything else non-empty when negative is None). `positive` may be a
    callable predicate. Numeric 0/1 cells are taken as codes.
    """
    raw = frame[column].str.strip()
    matches = raw.map(positive) if callable(positive) else raw == positive
    codes = pd.Series(np.where(matches, 1.0, 0.0), index=raw.index)
    coded = raw.isin(('0', '1'))
    codes[coded] = raw[coded].astype(float)
    if negative is None:
        valid = coded | ~raw.isin(('', '?'))
    else:
        valid = coded | matches | (raw == negative)
    if not valid.all():
        row = int(np.flatnonzero(~valid.to_numpy())[0])
        raise DatasetError(f'Cannot parse `{raw.iloc[row]}` in column `{column}` (row {row})', column=column, row=row)
    return codes


def _drop_missing(frame: pd.DataFrame, columns: Sequence[str], path: str) -> pd.DataFrame:
    missing = frame[list(columns)].apply(lambda c: c.str.strip().isin(('', '?', 'NA', 'nan'))).any(axis=1)
    if missing.any():
        logger.warning(f'Dropping {int(missing.sum())} of {len(frame)} rows with missing cells from {path}')
        frame = frame.loc[~missing].reset_index(drop=True)
    if frame.empty:
        raise DatasetError(f'No complete rows left in {path}!')
    return frame


def _adult_label(frame: pd.DataFrame) -> np.ndarray:
    raw = frame['income'].str.strip().str.rstrip('.')
    valid = raw.isin(('>50K', '<=50K', '0', '1'))
    if not valid.all():
        row = int(np.flatnonzero(~valid.to_numpy())[0])
        raise DatasetError(f'Cannot parse income `{raw.iloc[row]}` (row {row})', column='income', row=row)
    return np.where(raw.isin(('>50K', '1')), 1.0, -1.0)


def _load_adult(frame: pd.DataFrame, path: str, drop_missing: bool) -> Dataset:
    frame = frame.rename(columns=ADULT_ALIASES)
    _require(frame, ADULT_COLUMNS + ('income',), 'adult')
    if drop_missing:
        frame = _drop_missing(frame, ADULT_COLUMNS + ('income',), path)
    encoded = pd.DataFrame({
        'sex': _binary(frame, 'sex', 'Male', 'Female'),
        'age': _numeric(frame, 'age'),
        'native-country': _binary(frame, 'native-country', 'United-States'),
        'marital-status': _binary(frame, 'marital-status', lambda s: s.startswith('Married')),
        'education-num': _numeric(frame, 'education-num'),
        'hours-per-week': _numeric(frame, 'hours-per-week'),
    })
    return Dataset(ADULT_COLUMNS, encoded.to_numpy(), _adult_label(frame), ('sex',), {'source': f'adult:{path}'})


def _load_compas(frame: pd.DataFrame, path: str, drop_missing: bool) -> Dataset:
    _require(frame, COMPAS_COLUMNS + ('two_year_recid',), 'compas')
    if drop_missing:
        frame = _drop_missing(frame, COMPAS_COLUMNS + ('two_year_recid',), path)
    encoded = pd.DataFrame({
        'sex': _binary(frame, 'sex', 'Male', 'Female'),
        'age': _numeric(frame, 'age'),
        'race': _binary(frame, 'race', 'African-American'),
        'priors_count': _numeric(frame, 'priors_count'),
    })
    y = to_pm1(_numeric(frame, 'two_year_recid'), column='two_year_recid')
    return Dataset(COMPAS_COLUMNS, encoded.to_numpy(), y, ('sex',), {'source': f'compas:{path}'})


def _load_custom(frame: pd.DataFrame, path: str, scm: Scm, drop_missing: bool) -> Dataset:
    columns = tuple(scm.nodes)
    _require(frame, columns + (LABEL_COLUMN,), 'custom')
    if drop_missing:
        frame = _drop_missing(frame, columns + (LABEL_COLUMN,), path)
    V = np.column_stack([_numeric(frame, c).to_numpy() for c in columns])
    y = to_pm1(_numeric(frame, LABEL_COLUMN))
    sensitive = tuple(scm.nodes[i] for i in scm.sensitive_idx)
    return Dataset(columns, V, y, sensitive, {'source': f'custom:{path}'})


def load_csv(path: str, schema: str = 'adult', scm_path: Optional[str] = None, drop_missing: bool = False) -> Dataset:
    """
    read a comma separated file with a header row and encode it per schema
    :param schema: adult | compas | custom | custom:<scm.json>
    :param scm_path: SCM definition naming the columns of a custom file
    :param drop_missing: drop rows with empty or `?` cells (logged) instead of failing on them
    """
    name, _, rest = schema.partition(':')
    if name not in VALID_SCHEMAS:
        raise DatasetError(f'{schema} is not a valid CSV schema!')
    frame = _read_frame(path)
    if name == 'adult':
        data = _load_adult(frame, path, drop_missing)
    elif name == 'compas':
        data = _load_compas(frame, path, drop_missing)
    else:
        scm_path = rest or scm_path
        if not scm_path:
            raise DatasetError('A custom schema needs an SCM definition file')
        data = _load_custom(frame, path, load_scm(scm_path), drop_missing)
    logger.info(f'Loaded {len(data)} rows from {path} ({name})')
    return _record_balance(data)


# # # fitting and preprocessing

def _check_rank(design: np.ndarray, node: str, parents: Sequence[str]):
    # the intercept column is part of the design
    full = np.column_stack([np.ones(design.shape[0]), design])
    rank = int(np.linalg.matrix_rank(full))
    if rank < full.shape[1]:
        raise RankDeficiencyError(f'Design of equation {node} <- {tuple(parents)} is rank deficient '
                                  f'(rank {rank} < {full.shape[1]})')


def fit_linear_scm(data: Dataset, graph: Mapping[str, Sequence[str]]) -> Scm:
    """
    ordinary least squares of every child on its listed parents (with an
    intercept). Nodes absent from the graph are roots with identity
    equations. Sensitive roots get empirical Bernoulli exogenous specs, the
    others normal specs fitted to their residuals.
    """
    for child, parents in graph.items():
        for node in (child, *parents):
            if node not in data.columns:
                raise DatasetError(f'Graph node `{node}` is not a dataset column', column=node)
    equations = {}
    exogenous = {}
    for node in data.columns:
        target = data.column(node)
        parents = tuple(graph.get(node, ()))
        if not parents:
            if node in data.sensitive and np.all(np.isin(target, (0.0, 1.0))):
                exogenous[node] = ExogenousSpec('bernoulli', p=float(target.mean()))
            else:
                exogenous[node] = ExogenousSpec('normal', mean=float(target.mean()), variance=float(target.var()))
            continue
        design = np.column_stack([data.column(p) for p in parents])
        _check_rank(design, node, parents)
        model = LinearRegression().fit(design, target)
        residual = target - model.predict(design)
        equations[node] = LinearEquation(parents, tuple(float(b) for b in model.coef_), float(model.intercept_))
        exogenous[node] = ExogenousSpec('normal', mean=0.0, variance=float(residual.var()))
        logger.debug(f'Fitted {node} <- {dict(zip(parents, model.coef_))} + {model.intercept_:.4g}')
    return Scm(data.columns, equations, sensitive=data.sensitive, exogenous=exogenous)


def fit_scaler(data: Dataset) -> StandardScaler:
    """
    StandardScaler over the non-sensitive columns, in column order
    """
    scaler = StandardScaler().fit(data.features[:, list(data.nonsensitive_idx)])
    constant = [c for c, var in zip(data.nonsensitive_columns, scaler.var_) if not var > 0.0]
    if constant:
        raise DatasetError(f'Column `{constant[0]}` has zero variance', column=constant[0])
    return scaler


def standardize(data: Dataset, scaler: Optional[StandardScaler] = None) -> Dataset:
    """
    (x - mean) / std on every non-sensitive column; sensitive columns are kept as is.
    :param scaler: fitted scaler to apply, e.g. from fit_scaler on a training split
    :return: new dataset with column -> (mean, scale) in meta['standardization']
    """
    if scaler is None:
        scaler = fit_scaler(data)
    columns = list(data.nonsensitive_idx)
    out = data.subset(slice(None))
    out.features[:, columns] = scaler.transform(data.features[:, columns])
    out.meta['standardization'] = {c: (float(mean), float(scale)) for c, mean, scale
                                   in zip(data.nonsensitive_columns, scaler.mean_, scaler.scale_)}
    return out


def destandardize(data: Dataset) -> Dataset:
    params = data.meta.get('standardization')
    if not params:
        raise DatasetError('Dataset carries no standardization parameters!')
    out = data.subset(slice(None))
    for column, (mean, scale) in params.items():
        j = data.columns.index(column)
        out.features[:, j] = out.features[:, j] * scale + mean
    del out.meta['standardization']
    return out


def train_test_split(data: Dataset, train_fraction: float = DEFAULT_TRAIN_FRACTION,
                     seed: int = 0) -> Tuple[Dataset, Dataset]:
    """
    split stratified by label; rows keep their original order within each part
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f'Train fraction must lie in (0, 1), got {train_fraction}')
    try:
        train, _ = split_indices(np.arange(len(data)), train_size=train_fraction, stratify=data.labels,
                                 random_state=seed % 2 ** 32)
    except ValueError as e:
        raise DatasetError(f'Split of {len(data)} rows at {train_fraction} failed: {e}')
    mask = np.zeros(len(data), dtype=bool)
    mask[train] = True
    if mask.all() or not mask.any():
        raise DatasetError(f'Split of {len(data)} rows at {train_fraction} leaves a part empty')
    train_part, test_part = data.subset(mask), data.subset(~mask)
    for part, name in ((train_part, 'train'), (test_part, 'test')):
        part.meta['split'] = {'part': name, 'train_fraction': train_fraction, 'seed': seed}
    return train_part, test_part
