import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "kg_workbench.settings")
django.setup()
