"""
Oracle battery: closed-form worst-case risks against the grid dual and the
brute-force primal on random linear instances, the K-copy sandwich, and
single-atom transport costs.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import arrow
import numpy as np
from django.conf import settings

from ..cfdro_core.duality_oracle import (DualResult, GridSpec, OracleInstance, adversarial_sandwich,
                                         dual_value_grid, ot_cost_discrete, primal_value_brute, random_linear_instance)
from ..cfdro_core.training import cdro_closed_objective

RELATIVE_TOLERANCE = 0.02
LIPSCHITZ_FAMILIES = ('log_exponential', 'huber', 'quantile', 'smooth_hinge')
SANDWICH_COPIES = (1, 2, 4, 8)
TRANSPORT_SIZES = (2, 5, 10)

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@dataclass
class CheckFailure:
    check: str
    seed: int
    detail: str

    def __str__(self):
        return f'[{self.check}] seed {self.seed}: {self.detail}'


@dataclass
class VerifyReport:
    budget: int
    checks: int = 0
    failures: List[CheckFailure] = field(default_factory=list)
    skipped: bool = False
    elapsed_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures


def _close(a: float, b: float, tol: float = RELATIVE_TOLERANCE) -> bool:
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-12)


def oracle_grid() -> GridSpec:
    """
    dual grid from the ORACLE_GRID settings
    """
    conf = settings.CFDRO['ORACLE_GRID']
    lambdas = np.geomspace(conf['lambda_min'], conf['lambda_max'], conf['lambda_points'])
    return GridSpec(lambda_grid=tuple(lambdas), axis_points=conf['axis_points'], radius=conf['radius'],
                    max_expansions=conf['max_expansions'])


def default_closed_form(instance: OracleInstance) -> float:
    return cdro_closed_objective(instance.data, instance.scm, instance.params, instance.trainer_config())


def _check_duality(instance: OracleInstance, closed_form, report: VerifyReport, name: str, grid: GridSpec):
    closed = closed_form(instance)
    dual = dual_value_grid(instance.data, instance.scm, instance.params, instance.loss, instance.delta,
                           instance.power, grid=grid, norm=instance.norm)
    report.checks += 1
    if not _close(closed, dual.value):
        report.failures.append(CheckFailure(name, instance.seed,
                                            f'closed form {closed:.6g} vs grid dual {dual.value:.6g}'))
    return dual


def _check_primal(instance: OracleInstance, closed_form, report: VerifyReport):
    closed = closed_form(instance)
    primal = primal_value_brute(instance.data, instance.scm, instance.params, instance.loss, instance.delta,
                                instance.power, norm=instance.norm)
    report.checks += 1
    if not _close(closed, primal):
        report.failures.append(CheckFailure('primal', instance.seed,
                                            f'closed form {closed:.6g} vs brute primal {primal:.6g}'))


def _check_sandwich(instance: OracleInstance, dual_result: DualResult, report: VerifyReport, grid: GridSpec):
    dual = dual_result.value
    gaps = []
    for K in SANDWICH_COPIES:
        sandwich = adversarial_sandwich(instance.data, instance.scm, instance.params, instance.loss, instance.delta,
                                        instance.power, K, norm=instance.norm, grid=grid, dual=dual_result)
        report.checks += 1
        slack = RELATIVE_TOLERANCE * max(abs(dual), 1e-12)
        if sandwich.lower > dual + slack or dual > sandwich.upper + slack:
            report.failures.append(CheckFailure(
                'sandwich', instance.seed,
                f'K={K}: {sandwich.lower:.6g} <= {dual:.6g} <= {sandwich.upper:.6g} violated'))
        gaps.append(sandwich.gap)
    for K, (wide, narrow) in zip(SANDWICH_COPIES[1:], zip(gaps, gaps[1:])):
        report.checks += 1
        if not math.isclose(narrow, wide / 2.0, rel_tol=1e-9):
            report.failures.append(CheckFailure('sandwich-gap', instance.seed,
                                                f'K={K}: gap {narrow:.6g} is not half of {wide:.6g}'))


def _check_transport(seed: int, report: VerifyReport):
    rng = np.random.default_rng(seed)
    for N in TRANSPORT_SIZES:
        for p in (1.0, 2.0):
            c = float(rng.uniform(0.1, 3.0))
            moved = int(rng.integers(N))
            # atoms 10 apart on a line; one of them moves by c < 5
            source = 10.0 * np.arange(N)
            target = source.copy()
            target[moved] += c
            cost = np.abs(source[:, None] - target[None, :])
            weights = np.full(N, 1.0 / N)
            value = ot_cost_discrete(weights, weights, cost, p)
            expected = (1.0 / N) ** (1.0 / p) * c
            report.checks += 1
            if abs(value - expected) > 1e-9:
                report.failures.append(CheckFailure('transport', seed,
                                                    f'N={N}, p={p}: {value:.12g} vs {expected:.12g}'))


def verify_suite(budget: int, closed_form: Optional[Callable[[OracleInstance], float]] = None,
                 first_seed: int = 0) -> VerifyReport:
    """
    run the battery on `budget` random instances (seeds first_seed, ...)
    :param closed_form: replacement closed-form objective, used to check that
        a wrong closed form is caught
    """
    report = VerifyReport(budget)
    if budget <= 0:
        logger.warning('Verify budget is 0: oracle battery skipped')
        report.skipped = True
        return report
    closed_form = closed_form or default_closed_form
    grid = oracle_grid()
    start = arrow.utcnow()
    for seed in range(first_seed, first_seed + budget):
        try:
            instance = random_linear_instance(seed)
            dual = _check_duality(instance, closed_form, report, 'duality', grid)
            _check_primal(instance, closed_form, report)
            _check_sandwich(instance, dual, report, grid)
            smooth = random_linear_instance(seed, families=LIPSCHITZ_FAMILIES, powers=(1.0,))
            _check_duality(smooth, closed_form, report, 'lipschitz-duality', grid)
            _check_transport(seed, report)
        except Exception as e:
            logger.error(f'Oracle battery crashed on seed {seed}: {e}', exc_info=True)
            report.failures.append(CheckFailure('crash', seed, f'{type(e).__name__}: {e}'))
        logger.debug(f'Verified seed {seed}: {report.checks} checks, {len(report.failures)} failures so far')
    report.elapsed_seconds = (arrow.utcnow() - start).total_seconds()
    logger.info(f'Oracle battery: {report.checks} checks on {budget} instances, {len(report.failures)} failures '
                f'in {report.elapsed_seconds:.1f}s')
    return report
