from django.apps import AppConfig


class CcrAlgebraConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'ccr_algebra'
