import json
import logging
import os

import yaml
from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from ...bench.config import DatasetSpec
from ...bench.report import emit_report
from ...bench.runner import run_experiment
from ...bench.verify import verify_suite
from ...cfdro_core.data import generate_lin
from ...cfdro_core.errors import CfdroError
from ...custom_validators import validate_report_format
from ...serializers import ExperimentConfigSerializer, ScmDefinitionSerializer

# Get an instance of a logger
logger = logging.getLogger('cfdro')


def read_config_file(path: str) -> dict:
    """
    JSON, or YAML through the safe loader
    """
    try:
        with open(path, 'r') as f:
            if path.lower().endswith('.json'):
                return json.load(f)
            return yaml.safe_load(f)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise CommandError(f'Cannot read config {path}: {e}')


class Command(BaseCommand):
    help = 'Causally fair DRO benchmark: run experiments, emit reports, verify oracles, generate LIN data'

    def add_arguments(self, parser):
        subcommands = parser.add_subparsers(dest='subcommand', required=True)

        run = subcommands.add_parser('run', help='run an experiment config')
        run.add_argument('--config', required=True, help='experiment config file (JSON or YAML)')
        run.add_argument('--output-dir', help='overrides output_dir of the config')

        report = subcommands.add_parser('report', help='summarise a run artifact directory')
        report.add_argument('--dir', required=True, dest='directory')
        report.add_argument('--format', default='csv', dest='fmt')

        verify = subcommands.add_parser('verify', help='run the oracle battery')
        verify.add_argument('--budget', type=int, default=settings.CFDRO['VERIFY_BUDGET'])
        verify.add_argument('--first-seed', type=int, default=0)

        gen_lin = subcommands.add_parser('gen-lin', help='write a LIN sample as CSV')
        gen_lin.add_argument('--n', type=int, default=settings.CFDRO['SYNTHETIC_ROWS'])
        gen_lin.add_argument('--seed', type=int, default=0)
        gen_lin.add_argument('--out', required=True)
        gen_lin.add_argument('--scm-out', help='also write the LIN SCM definition (scm/1)')

    def handle(self, *args, **options):
        handlers = {
            'run': self.handle_run,
            'report': self.handle_report,
            'verify': self.handle_verify,
            'gen-lin': self.handle_gen_lin,
        }
        try:
            return handlers[options['subcommand']](**options)
        except CfdroError as e:
            raise CommandError(f'{type(e).__name__}: {e}')
        except ValidationError as e:
            raise CommandError(f'Invalid input: {"; ".join(e.messages)}')

    def handle_run(self, config, output_dir=None, **options):
        raw = read_config_file(config)
        if not isinstance(raw, dict):
            raise CommandError(f'{config} does not hold a mapping')
        if output_dir:
            raw['output_dir'] = output_dir
        serializer = ExperimentConfigSerializer(data=raw)
        if not serializer.is_valid():
            raise CommandError(f'Invalid experiment config {config}: {serializer.errors}')
        experiment = serializer.save()
        for dataset in experiment.datasets:
            if dataset.kind == 'custom':
                self._check_scm_file(dataset)
        outcome = run_experiment(experiment)
        if not outcome.ok:
            raise CommandError(f'Every cell failed for trainers {outcome.failed_trainers}; see {outcome.directory}')
        self.stdout.write(self.style.SUCCESS(f'Run {outcome.run.pk} finished: {outcome.summary_path}'))

    @staticmethod
    def _check_scm_file(dataset: DatasetSpec):
        definition = read_config_file(dataset.scm_path)
        serializer = ScmDefinitionSerializer(data=definition)
        if not serializer.is_valid():
            raise CommandError(f'Invalid SCM definition {dataset.scm_path}: {serializer.errors}')

    def handle_report(self, directory, fmt='csv', **options):
        validate_report_format(fmt)
        if not os.path.isdir(directory):
            raise CommandError(f'No artifact directory at {directory}')
        path = emit_report(directory, fmt)
        self.stdout.write(self.style.SUCCESS(f'Wrote {path}'))

    def handle_verify(self, budget, first_seed=0, **options):
        report = verify_suite(budget, first_seed=first_seed)
        if report.skipped:
            self.stdout.write(self.style.WARNING('Oracle battery skipped (budget 0)'))
            return
        if not report.passed:
            for failure in report.failures:
                self.stderr.write(str(failure))
            raise CommandError(f'{len(report.failures)} of {report.checks} oracle checks failed')
        self.stdout.write(self.style.SUCCESS(f'{report.checks} oracle checks passed on {budget} instances'))

    def handle_gen_lin(self, n, seed, out, scm_out=None, **options):
        if n < 1:
            raise CommandError(f'--n must be at least 1, got {n}')
        scm, data = generate_lin(n, seed)
        data.save_csv(out)
        if scm_out:
            with open(scm_out, 'w') as f:
                json.dump(scm.to_definition(), f, indent=2)
        self.stdout.write(self.style.SUCCESS(f'Wrote {n} LIN rows (seed {seed}) to {out}'))
