import cfdro_app.custom_validators
from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.AutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('record_created', models.DateTimeField(auto_now_add=True)),
                ('record_updated', models.DateTimeField(auto_now=True)),
                ('name', models.CharField(blank=True, default='', max_length=100)),
                ('config', models.JSONField(default=dict)),
                ('output_dir', models.CharField(max_length=255, validators=[cfdro_app.custom_validators.validate_path])),
                ('status', models.CharField(choices=[('queued', 'queued'), ('running', 'running'), ('finished', 'finished'), ('failed', 'failed')], default='queued', max_length=16)),
                ('started', models.DateTimeField(blank=True, null=True)),
                ('finished', models.DateTimeField(blank=True, null=True)),
                ('elapsed_seconds', models.FloatField(blank=True, null=True)),
            ],
            options={
                'ordering': ('id',),
            },
        ),
        migrations.CreateModel(
            name='RunCell',
            fields=[
                ('id', models.AutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('record_created', models.DateTimeField(auto_now_add=True)),
                ('record_updated', models.DateTimeField(auto_now=True)),
                ('position', models.PositiveIntegerField()),
                ('dataset', models.CharField(max_length=255)),
                ('trainer', models.CharField(max_length=100)),
                ('seed', models.PositiveIntegerField()),
                ('status', models.CharField(choices=[('queued', 'queued'), ('ok', 'ok'), ('error', 'error')], default='queued', max_length=16)),
                ('error', models.TextField(blank=True, default='')),
                ('report_path', models.CharField(blank=True, default='', max_length=255, validators=[cfdro_app.custom_validators.validate_path])),
                ('task_id', models.CharField(blank=True, default='', max_length=64)),
                ('elapsed_seconds', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='cells', to='cfdro_app.experimentrun')),
            ],
            options={
                'ordering': ('run', 'position'),
            },
        ),
        migrations.AddConstraint(
            model_name='runcell',
            constraint=models.UniqueConstraint(fields=('run', 'dataset', 'trainer', 'seed'), name='unique_run_cell'),
        ),
        migrations.AddIndex(
            model_name='runcell',
            index=models.Index(fields=['run', 'status'], name='runcell_run_status_idx'),
        ),
    ]
