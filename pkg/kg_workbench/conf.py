"""
Access to the WORKBENCH settings dict with per-call overrides.
"""
from django.conf import settings


def workbench_setting(name, override=None):
    """Return ``override`` when given, else the WORKBENCH default for ``name``."""
    if override is not None:
        return override
    return getattr(settings, "WORKBENCH", {})[name]
