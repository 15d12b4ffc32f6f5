from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _
from django.conf import settings
import math
import os
import re
import logging

from .cfdro_core.errors import CfdroError
from .cfdro_core.fair_metric import NormSpec
from .cfdro_core.losses import LossSpec

# Get an instance of a logger
logger = logging.getLogger('cfdro')


def validate_path(value: str):
    if not re.match(r'^[A-Za-z0-9_./\\:~\- ]*$', value):
        raise ValidationError(
            _(f'{value} contains invalid path characters!')
        )


def validate_norm_spec(value: str):
    try:
        NormSpec.parse(value)
    except CfdroError as e:
        raise ValidationError(_(f'{value} is not a valid norm: {e}'))
    return value


def validate_loss_spec(value: str):
    try:
        LossSpec.parse(value)
    except CfdroError as e:
        raise ValidationError(_(f'{value} is not a valid loss: {e}'))
    return value


def validate_dataset_spec(value: str):
    """
    lin | example1 | adult:<csv> | compas:<csv> | custom:<csv>:<scm.json>
    """
    kind, _sep, rest = value.partition(':')
    if kind not in settings.CFDRO['VALID_DATASETS']:
        raise ValidationError(
            _(f'{value} is not a valid dataset!')
        )
    if kind in ('lin', 'example1'):
        if rest:
            raise ValidationError(_(f'Dataset {kind} takes no path (got {value})'))
        return value
    paths = rest.split(':') if kind == 'custom' else [rest]
    if not all(paths) or len(paths) != (2 if kind == 'custom' else 1):
        raise ValidationError(
            _(f'{value} needs ' + ('<csv>:<scm.json>' if kind == 'custom' else 'a csv path'))
        )
    for path in paths:
        validate_path(path)
        if not os.path.isfile(path):
            raise ValidationError(_(f'{path} does not exist!'))
    return value


def validate_trainer_kind(value: str):
    kind = settings.CFDRO['TRAINER_ALIASES'].get(value, value)
    if kind not in settings.CFDRO['VALID_TRAINER_KINDS']:
        raise ValidationError(
            _(f'{value} is not a valid trainer!')
        )
    return kind


def validate_radii(value: list):
    if not isinstance(value, list) or not value:
        raise ValidationError(_(f'{value} is not a nonempty list of radii!'))
    for r in value:
        if isinstance(r, bool) or not isinstance(r, (int, float)) or not math.isfinite(r) or r < 0:
            raise ValidationError(_(f'{r} is not a valid radius!'))
    return value


def validate_seeds(value: list):
    if not isinstance(value, list) or not value:
        raise ValidationError(_(f'{value} is not a nonempty list of seeds!'))
    if any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in value):
        raise ValidationError(_(f'{value} contains invalid seeds!'))
    if len(set(value)) != len(value):
        logger.warning(f'RAISING VALIDATION ERROR FOR: {value}')
        raise ValidationError(_(f'Seeds must be distinct, got {value}'))
    return value


def validate_report_format(value: str):
    if value not in settings.CFDRO['VALID_REPORT_FORMATS']:
        raise ValidationError(
            _(f'{value} was not a valid report format!')
        )
    return value
