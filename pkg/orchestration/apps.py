from django.apps import AppConfig


class OrchestrationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'orchestration'
    verbose_name = 'Prefect flows'
