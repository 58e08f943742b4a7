from django.apps import AppConfig


class PumpingConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "apps.pumping"
    verbose_name = "Squeezed-reservoir pumping statistics"
