from django.apps import AppConfig


class DeformationConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'deformation'
