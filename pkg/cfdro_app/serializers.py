import logging
from django.conf import settings
from rest_framework import serializers
from . import custom_validators
from .bench.config import DatasetSpec, ExperimentConfig
from .cfdro_core.errors import CfdroError
from .cfdro_core.fair_metric import NormSpec
from .cfdro_core.fairness_metrics import REPORT_SCHEMA_VERSION, MetricsReport
from .cfdro_core.losses import LossSpec
from .cfdro_core.scm import SCM_SCHEMA_VERSION, VALID_EXOGENOUS_KINDS, Scm
from .cfdro_core.training import TrainerConfig

# Get an instance of a logger
logger = logging.getLogger('cfdro')

CFDRO = settings.CFDRO


class TrainerConfigSerializer(serializers.Serializer):
    """
    one trainer entry of an experiment config, e.g.
    {"kind": "cdro", "delta": 0.05, "loss": "log_exponential"}
    """
    kind = serializers.CharField()
    name = serializers.CharField(required=False, allow_blank=True, max_length=100)
    delta = serializers.FloatField(min_value=0.0, default=0.0)
    power = serializers.FloatField(min_value=1.0, default=1.0)
    norm = serializers.CharField(default=CFDRO['DEFAULT_NORM'], validators=[custom_validators.validate_norm_spec])
    loss = serializers.CharField(default='log_exponential', validators=[custom_validators.validate_loss_spec])
    learning_rate = serializers.FloatField(min_value=0.0, default=CFDRO['LEARNING_RATE'])
    batch_size = serializers.IntegerField(min_value=1, default=CFDRO['BATCH_SIZE'])
    epochs = serializers.IntegerField(min_value=1, default=CFDRO['EPOCHS'])
    constraint_mode = serializers.ChoiceField(choices=sorted(CFDRO['VALID_CONSTRAINT_MODES']), default='finite_A')

    def validate_kind(self, value):
        # aliases resolve here, e.g. cdro -> cdro_closed
        return custom_validators.validate_trainer_kind(value)

    def validate(self, data):
        try:
            self.build(data)
        except CfdroError as e:
            raise serializers.ValidationError(f'Invalid trainer {data.get("name") or data["kind"]}: {e}')
        return data

    @staticmethod
    def build(data) -> TrainerConfig:
        return TrainerConfig(
            kind=data['kind'],
            delta=data['delta'],
            power=data['power'],
            norm=NormSpec.parse(data['norm']),
            loss=LossSpec.parse(data['loss']),
            learning_rate=data['learning_rate'],
            batch_size=data['batch_size'],
            epochs=data['epochs'],
            constraint_mode=data['constraint_mode'],
            name=data.get('name') or None,
        )

    def create(self, validated_data):
        return self.build(validated_data)


class ExperimentConfigSerializer(serializers.Serializer):
    """
    experiment config file (JSON or YAML); save() returns an ExperimentConfig
    """
    name = serializers.CharField(required=False, allow_blank=True, default='', max_length=100)
    datasets = serializers.ListField(
        child=serializers.CharField(validators=[custom_validators.validate_dataset_spec]), allow_empty=False)
    trainers = TrainerConfigSerializer(many=True, allow_empty=False)
    seeds = serializers.ListField(child=serializers.IntegerField(min_value=0),
                                  default=lambda: list(range(CFDRO['SEED_COUNT'])),
                                  validators=[custom_validators.validate_seeds])
    radii = serializers.ListField(child=serializers.FloatField(min_value=0.0),
                                  default=lambda: list(CFDRO['METRIC_RADII']),
                                  validators=[custom_validators.validate_radii])
    output_dir = serializers.CharField(default=CFDRO['ARTIFACTS_DIR'], validators=[custom_validators.validate_path])
    n = serializers.IntegerField(min_value=1, default=CFDRO['SYNTHETIC_ROWS'])
    norm = serializers.CharField(default=CFDRO['DEFAULT_NORM'], validators=[custom_validators.validate_norm_spec])
    train_fraction = serializers.FloatField(min_value=0.0, max_value=1.0, default=CFDRO['TRAIN_FRACTION'])
    sampling_budget = serializers.IntegerField(min_value=1, default=CFDRO['SAMPLING_BUDGET'])

    def validate_train_fraction(self, value):
        if not 0.0 < value < 1.0:
            raise serializers.ValidationError(f'{value} must lie strictly between 0 and 1')
        return value

    def validate(self, data):
        labels = [TrainerConfigSerializer.build(t).label for t in data['trainers']]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise serializers.ValidationError(f'Trainer names must be unique; give `name`s to {duplicates}')
        if len(set(data['datasets'])) != len(data['datasets']):
            raise serializers.ValidationError('Datasets are listed twice!')
        return data

    def create(self, validated_data):
        return ExperimentConfig(
            datasets=[DatasetSpec.parse(d) for d in validated_data['datasets']],
            trainers=[TrainerConfigSerializer.build(t) for t in validated_data['trainers']],
            seeds=list(validated_data['seeds']),
            radii=[float(r) for r in validated_data['radii']],
            output_dir=validated_data['output_dir'],
            n=validated_data['n'],
            norm=validated_data['norm'],
            train_fraction=validated_data['train_fraction'],
            sampling_budget=validated_data['sampling_budget'],
            name=validated_data['name'],
            raw=dict(self.initial_data),
        )


class EquationSerializer(serializers.Serializer):
    type = serializers.ChoiceField(choices=['linear', 'nonlinear'], default='linear')
    coefficients = serializers.DictField(child=serializers.FloatField(), required=False)
    weights = serializers.DictField(child=serializers.FloatField(), required=False)
    function = serializers.CharField(required=False)
    intercept = serializers.FloatField(default=0.0)

    def validate(self, data):
        if data['type'] == 'nonlinear' and ('function' not in data or 'weights' not in data):
            raise serializers.ValidationError('A nonlinear equation needs `function` and `weights`')
        if data['type'] == 'linear' and 'coefficients' not in data:
            raise serializers.ValidationError('A linear equation needs `coefficients`')
        return data


class ExogenousSerializer(serializers.Serializer):
    dist = serializers.ChoiceField(choices=VALID_EXOGENOUS_KINDS)
    p = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    mean = serializers.FloatField(required=False)
    variance = serializers.FloatField(min_value=0.0, required=False)


class ScmDefinitionSerializer(serializers.Serializer):
    """
    "scm/1" definition file; save() returns the Scm
    """
    version = serializers.ChoiceField(choices=[SCM_SCHEMA_VERSION])
    nodes = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    parents = serializers.DictField(child=serializers.ListField(child=serializers.CharField()), required=False)
    equations = serializers.DictField(child=EquationSerializer(), required=False)
    sensitive = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    exogenous = serializers.DictField(child=ExogenousSerializer(), required=False)

    def validate(self, data):
        try:
            Scm.from_definition(data)
        except (CfdroError, KeyError) as e:
            raise serializers.ValidationError(f'Invalid SCM definition: {e}')
        return data

    def create(self, validated_data):
        return Scm.from_definition(validated_data)


class MetricsReportSerializer(serializers.Serializer):
    """
    per-cell "report/1" JSON. Error cells carry `error` instead of metrics.
    """
    version = serializers.ChoiceField(choices=[REPORT_SCHEMA_VERSION])
    status = serializers.ChoiceField(choices=['ok', 'error'], default='ok')
    dataset = serializers.CharField(allow_null=True)
    trainer = serializers.CharField(allow_null=True)
    seed = serializers.IntegerField(allow_null=True)
    accuracy = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    cf = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    u_delta = serializers.DictField(child=serializers.FloatField(min_value=0.0, max_value=1.0), required=False)
    r_delta = serializers.DictField(child=serializers.FloatField(min_value=0.0, max_value=1.0), required=False)
    error = serializers.CharField(required=False, allow_blank=True)

    def validate(self, data):
        if data['status'] == 'ok':
            missing = [k for k in ('accuracy', 'cf', 'u_delta', 'r_delta') if k not in data]
            if missing:
                raise serializers.ValidationError(f'Report is missing {missing}')
            if set(data['u_delta']) != set(data['r_delta']):
                raise serializers.ValidationError('u_delta and r_delta must cover the same radii')
        return data

    def create(self, validated_data):
        if validated_data['status'] != 'ok':
            raise serializers.ValidationError('Error reports carry no metrics')
        return MetricsReport.from_dict(dict(self.initial_data))
