from django.db import models
from django.db.models.signals import pre_save
from django.dispatch import receiver
from . import custom_validators
import logging

# Get an instance of a logger
logger = logging.getLogger('cfdro')


@receiver(pre_save)
def clean_on_update(sender, instance=None, created=False, **kwargs):
    """
    run full_clean on every save of a registry row (not called by default
    when save() is invoked directly)
    """
    if sender in (ExperimentRun, RunCell):
        instance.full_clean()


class ExperimentRun(models.Model):
    QUEUED = 'queued'
    RUNNING = 'running'
    FINISHED = 'finished'
    FAILED = 'failed'
    STATUS_CHOICES = [(s, s) for s in (QUEUED, RUNNING, FINISHED, FAILED)]

    record_created = models.DateTimeField(auto_now_add=True)
    record_updated = models.DateTimeField(auto_now=True)
    name = models.CharField(max_length=100, blank=True, null=False, default='')
    config = models.JSONField(default=dict)
    output_dir = models.CharField(max_length=255, blank=False, null=False,
                                  validators=[custom_validators.validate_path])
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default=QUEUED)
    started = models.DateTimeField(null=True, blank=True)
    finished = models.DateTimeField(null=True, blank=True)
    elapsed_seconds = models.FloatField(null=True, blank=True)

    class Meta:
        ordering = ('id',)

    def __str__(self):
        return f'{self.name or "run"} #{self.id} ({self.status})'

    @property
    def failed_cells(self):
        return self.cells.filter(status=RunCell.ERROR)


class RunCell(models.Model):
    QUEUED = 'queued'
    OK = 'ok'
    ERROR = 'error'
    STATUS_CHOICES = [(s, s) for s in (QUEUED, OK, ERROR)]

    record_created = models.DateTimeField(auto_now_add=True)
    record_updated = models.DateTimeField(auto_now=True)
    run = models.ForeignKey('ExperimentRun', related_name='cells', on_delete=models.CASCADE)
    position = models.PositiveIntegerField()
    dataset = models.CharField(max_length=255)
    trainer = models.CharField(max_length=100)
    seed = models.PositiveIntegerField()
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default=QUEUED)
    error = models.TextField(blank=True, null=False, default='')
    report_path = models.CharField(max_length=255, blank=True, null=False, default='',
                                   validators=[custom_validators.validate_path])
    task_id = models.CharField(max_length=64, blank=True, null=False, default='')
    elapsed_seconds = models.FloatField(null=True, blank=True)

    class Meta:
        ordering = ('run', 'position')
        constraints = [
            models.UniqueConstraint(fields=['run', 'dataset', 'trainer', 'seed'], name='unique_run_cell')
        ]
        indexes = [
            models.Index(fields=['run', 'status'], name='runcell_run_status_idx')
        ]

    def __str__(self):
        return f'{self.dataset} / {self.trainer} / seed {self.seed}: {self.status}'
