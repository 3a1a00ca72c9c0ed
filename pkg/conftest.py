import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "dslab.settings")
django.setup()
