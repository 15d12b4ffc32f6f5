"""
Experiment runner: one cell per (dataset, trainer, seed), each dispatched as
a django-q task and collected in config order.
"""
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List

import arrow
from django.conf import settings
from django_q.tasks import async_task, result

from ..cfdro_core import data as datasets
from ..cfdro_core.fair_metric import CfdfMetric, NormSpec
from ..cfdro_core.fairness_metrics import evaluate
from ..cfdro_core.scm import load_scm, resolve_levels
from ..cfdro_core.training import TrainerConfig, train
from ..models import ExperimentRun, RunCell
from . import report
from .config import DatasetSpec, ExperimentConfig

RUNS_DIR = 'runs'
CONFIG_FILE = 'config.json'
# milliseconds to wait for a stored task result; -1 waits until the cluster stores it
RESULT_WAIT = -1

# Get an instance of a logger
logger = logging.getLogger('cfdro')


def cell_seed(dataset: DatasetSpec, trainer: TrainerConfig, seed: int) -> int:
    """
    trainer RNG seed derived from the cell identity, stable across processes
    """
    digest = hashlib.sha256(f'{dataset}|{trainer.label}|{seed}'.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big') % (2 ** 63)


def report_filename(dataset: DatasetSpec, trainer: TrainerConfig, seed: int) -> str:
    return f'{dataset.label}__{trainer.label}__seed{seed}.json'


def prepare_dataset(dataset: DatasetSpec, seed: int, n: int, train_fraction: float):
    """
    :return: (scm, train split, test split). Synthetic sets keep their true
        SCM and raw units; CSV sets are standardized on the training split
        and get a linear SCM fitted to it.
    """
    if dataset.kind == 'lin':
        scm, data = datasets.generate_lin(n, seed)
    elif dataset.kind == 'example1':
        scm, data = datasets.generate_example1_data(n, seed)
    elif dataset.kind == 'custom':
        data = datasets.load_csv(dataset.path, 'custom', scm_path=dataset.scm_path)
        scm = load_scm(dataset.scm_path)
    else:
        data = datasets.load_csv(dataset.path, dataset.kind)
        scm = None
    train_part, test_part = datasets.train_test_split(data, train_fraction, seed)
    if scm is None:
        graph = datasets.ADULT_GRAPH if dataset.kind == 'adult' else datasets.COMPAS_GRAPH
        scaler = datasets.fit_scaler(train_part)
        train_part = datasets.standardize(train_part, scaler)
        test_part = datasets.standardize(test_part, scaler)
        scm = datasets.fit_linear_scm(train_part, graph)
    return scm, train_part, test_part


def run_cell(cell: dict) -> dict:
    """
    train and evaluate one cell; never raises. The report/1 payload is
    written to cell['report_path'] and returned.
    """
    start = arrow.utcnow()
    dataset = DatasetSpec.parse(cell['dataset'])
    trainer = cell['trainer']
    payload = {'version': 'report/1', 'dataset': dataset.label, 'trainer': trainer.label, 'seed': cell['seed'],
               'position': cell['position']}
    try:
        scm, train_part, test_part = prepare_dataset(dataset, cell['seed'], cell['n'], cell['train_fraction'])
        cfg = trainer.with_seed(cell['trainer_seed'])
        levels = resolve_levels(scm, train_part.features)
        fitted = train(train_part, scm, cfg, levels)
        metrics = evaluate(fitted.params, scm, CfdfMetric(scm, NormSpec.parse(cell['norm'])), test_part,
                           cell['radii'], levels,
                           sampling_budget=None if scm.is_linear else cell['sampling_budget'],
                           seed=cell['seed'], trainer=trainer.label, dataset=dataset.label)
        payload.update(metrics.to_dict())
        payload.update({
            'status': RunCell.OK,
            'trainer_seed': cfg.seed,
            'train_rows': len(train_part),
            'test_rows': len(test_part),
            'split': train_part.meta['split'],
            'final_objective': fitted.trace[-1],
            'theta': fitted.params.theta.tolist(),
            'intercept': fitted.params.intercept,
        })
    except Exception as e:
        logger.error(f'Cell {dataset.label} / {trainer.label} / seed {cell["seed"]} failed: {e}', exc_info=True)
        payload.update({'status': RunCell.ERROR, 'error': f'{type(e).__name__}: {e}'})
    payload['elapsed_seconds'] = (arrow.utcnow() - start).total_seconds()
    with open(cell['report_path'], 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
    return payload


@dataclass
class RunOutcome:
    run: ExperimentRun
    directory: str
    payloads: List[dict]
    failed_trainers: List[str] = field(default_factory=list)
    summary_path: str = ''

    @property
    def ok(self) -> bool:
        return not self.failed_trainers


def _dispatch(run: ExperimentRun, config: ExperimentConfig, runs_dir: str) -> List[RunCell]:
    cells = []
    for position, (dataset, trainer, seed) in enumerate(config.cells()):
        path = os.path.join(runs_dir, report_filename(dataset, trainer, seed))
        row = RunCell.objects.create(run=run, position=position, dataset=str(dataset), trainer=trainer.label,
                                     seed=seed, report_path=path)
        cell = {
            'position': position, 'dataset': str(dataset), 'trainer': trainer, 'seed': seed,
            'trainer_seed': cell_seed(dataset, trainer, seed),
            'n': config.n, 'train_fraction': config.train_fraction, 'norm': config.norm,
            'radii': list(config.radii), 'sampling_budget': config.sampling_budget, 'report_path': path,
        }
        row.task_id = async_task(run_cell, cell, group=f'run-{run.pk}',
                                 task_name=f'run{run.pk}-cell{position}')
        row.save()
        logger.info(f'Dispatched cell {position}: {dataset.label} / {trainer.label} / seed {seed}')
        cells.append(row)
    return cells


def run_experiment(config: ExperimentConfig) -> RunOutcome:
    """
    run every cell, write per-cell JSON under <output_dir>/runs, the config
    copy and the aggregate summaries; record the run in the registry
    """
    directory = os.path.abspath(config.output_dir)
    runs_dir = os.path.join(directory, RUNS_DIR)
    os.makedirs(runs_dir, exist_ok=True)
    with open(os.path.join(directory, CONFIG_FILE), 'w') as f:
        json.dump(config.raw, f, indent=2, sort_keys=True)

    start = arrow.utcnow()
    run = ExperimentRun.objects.create(name=config.name, config=config.raw, output_dir=directory,
                                       status=ExperimentRun.RUNNING, started=start.datetime)
    logger.info(f'Run {run.pk} started: {len(config.datasets)} datasets x {len(config.trainers)} trainers x '
                f'{len(config.seeds)} seeds (sync={settings.Q_CLUSTER.get("sync", False)})')

    cells = _dispatch(run, config, runs_dir)
    payloads = []
    ok_by_trainer: Dict[str, int] = {t.label: 0 for t in config.trainers}
    for row in cells:
        payload = result(row.task_id, wait=RESULT_WAIT)
        if not isinstance(payload, dict):
            # the task itself died (e.g. killed worker); its result is the traceback text
            payload = {'version': 'report/1', 'dataset': DatasetSpec.parse(row.dataset).label,
                       'trainer': row.trainer, 'seed': row.seed, 'position': row.position, 'status': RunCell.ERROR,
                       'error': str(payload)}
            with open(row.report_path, 'w') as f:
                json.dump(payload, f, indent=2, sort_keys=True)
        row.status = payload['status']
        row.error = payload.get('error', '')
        row.elapsed_seconds = payload.get('elapsed_seconds')
        row.save()
        if row.status == RunCell.OK:
            ok_by_trainer[row.trainer] += 1
        payloads.append(payload)

    failed = [label for label, count in ok_by_trainer.items() if count == 0]
    summary_path = ''
    if any(p['status'] == RunCell.OK for p in payloads):
        summary_path = report.emit_report(directory, 'csv')
        report.emit_report(directory, 'json')
        report.emit_report(directory, 'markdown')
    end = arrow.utcnow()
    run.status = ExperimentRun.FAILED if failed else ExperimentRun.FINISHED
    run.finished = end.datetime
    run.elapsed_seconds = (end - start).total_seconds()
    run.save()
    if failed:
        logger.error(f'Run {run.pk}: every cell failed for trainers {failed}')
    logger.info(f'Run {run.pk} {run.status} in {run.elapsed_seconds:.1f}s '
                f'({sum(p["status"] == RunCell.OK for p in payloads)}/{len(payloads)} cells ok)')
    return RunOutcome(run, directory, payloads, failed, summary_path)
