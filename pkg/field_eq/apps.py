from django.apps import AppConfig


class FieldEqConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'field_eq'
