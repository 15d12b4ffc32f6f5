from django.apps import AppConfig


class CfdroConfig(AppConfig):
    name = 'cfdro_app'
    verbose_name = 'Causally fair DRO benchmark'
