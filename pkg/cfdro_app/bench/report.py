"""
Aggregates of per-cell reports: mean and standard deviation per
(dataset, trainer) in the column order acc, U_r..., CF, R_r...
"""
import glob
import json
import logging
import os
from typing import List, Tuple

import numpy as np
import pandas as pd

from ..cfdro_core.errors import ArtifactError
from ..serializers import MetricsReportSerializer

SUMMARY_FILES = {
    'csv': 'summary.csv',
    'json': 'summary.json',
    'markdown': 'summary.md',
    'md': 'summary.md',
}
LONG_FILE = 'metrics_long.csv'
FLOAT_FORMAT = '%.17g'

# Get an instance of a logger
logger = logging.getLogger('cfdro')


def load_reports(directory: str) -> List[dict]:
    """
    validated report/1 payloads of the successful cells in cell order
    """
    runs_dir = os.path.join(directory, 'runs')
    if not os.path.isdir(runs_dir):
        raise ArtifactError(f'{directory} is not a run artifact directory (no runs/)')
    reports = []
    for path in sorted(glob.glob(os.path.join(runs_dir, '*.json'))):
        with open(path, 'r') as f:
            payload = json.load(f)
        serializer = MetricsReportSerializer(data=payload)
        if not serializer.is_valid():
            raise ArtifactError(f'Malformed report {path}: {serializer.errors}')
        if serializer.validated_data['status'] != 'ok':
            logger.warning(f'Skipping failed cell {os.path.basename(path)}: {payload.get("error")}')
            continue
        reports.append(payload)
    if not reports:
        raise ArtifactError(f'No successful cell reports under {runs_dir}')
    return sorted(reports, key=lambda r: (r.get('position', float('inf')), r['dataset'], r['trainer'], r['seed']))


def _radii(reports: List[dict]) -> List[str]:
    keys = {k for r in reports for k in r['u_delta']}
    return sorted(keys, key=float, reverse=True)


def metric_columns(radii: List[str]) -> List[Tuple[str, str, str]]:
    """
    (column, report field, radius key) in summary order
    """
    return ([('acc', 'accuracy', '')]
            + [(f'U_{r}', 'u_delta', r) for r in radii]
            + [('CF', 'cf', '')]
            + [(f'R_{r}', 'r_delta', r) for r in radii])


def long_frame(reports: List[dict]) -> pd.DataFrame:
    radii = _radii(reports)
    rows = []
    for r in reports:
        for column, fld, radius in metric_columns(radii):
            value = r[fld][radius] if radius else r[fld]
            rows.append({'dataset': r['dataset'], 'trainer': r['trainer'], 'seed': r['seed'],
                         'metric': column, 'radius': float(radius) if radius else np.nan, 'value': float(value)})
    return pd.DataFrame(rows, columns=['dataset', 'trainer', 'seed', 'metric', 'radius', 'value'])


def aggregate(reports: List[dict]) -> pd.DataFrame:
    """
    one row per (dataset, trainer) with n and <metric>_mean / <metric>_std;
    std uses ddof=1 and is 0 for a single seed
    """
    columns = metric_columns(_radii(reports))
    groups = {}
    for r in reports:
        groups.setdefault((r['dataset'], r['trainer']), []).append(r)
    rows = []
    for (dataset, trainer), members in groups.items():
        row = {'dataset': dataset, 'trainer': trainer, 'n': len(members)}
        for column, fld, radius in columns:
            values = np.array([m[fld][radius] if radius else m[fld] for m in members], dtype=float)
            row[f'{column}_mean'] = float(np.mean(values))
            row[f'{column}_std'] = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        rows.append(row)
    return pd.DataFrame(rows)


def _markdown(summary: pd.DataFrame, radii: List[str]) -> str:
    columns = metric_columns(radii)
    header = ['dataset', 'trainer'] + [c for c, _, _ in columns]
    lines = ['| ' + ' | '.join(header) + ' |', '|' + '---|' * len(header)]
    for dataset, block in summary.groupby('dataset', sort=False):
        best = {}
        for column, _, _ in columns:
            means = block[f'{column}_mean']
            best[column] = means.max() if column == 'acc' else means.min()
        for _, row in block.iterrows():
            cells = [str(dataset), str(row['trainer'])]
            for column, _, _ in columns:
                text = f'{row[f"{column}_mean"]:.3f} ± {row[f"{column}_std"]:.3f}'
                cells.append(f'**{text}**' if row[f'{column}_mean'] == best[column] else text)
            lines.append('| ' + ' | '.join(cells) + ' |')
    return '\n'.join(lines) + '\n'


def emit_report(directory: str, fmt: str = 'csv') -> str:
    """
    write the summary in the given format (csv also writes the long-format
    CSV) and return its path
    """
    if fmt not in SUMMARY_FILES:
        raise ArtifactError(f'{fmt} is not a valid report format!')
    reports = load_reports(directory)
    summary = aggregate(reports)
    path = os.path.join(directory, SUMMARY_FILES[fmt])
    if fmt == 'csv':
        summary.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        long_frame(reports).to_csv(os.path.join(directory, LONG_FILE), index=False, float_format=FLOAT_FORMAT)
    elif fmt == 'json':
        with open(path, 'w') as f:
            json.dump({'radii': [float(r) for r in _radii(reports)], 'rows': summary.to_dict(orient='records')},
                      f, indent=2)
    else:
        with open(path, 'w') as f:
            f.write(_markdown(summary, _radii(reports)))
    logger.info(f'Wrote {path} ({len(summary)} rows from {len(reports)} reports)')
    return path
