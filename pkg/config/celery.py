"""
Celery application for distributing trial batches across worker processes.

Start a worker with ``celery -A config worker`` and run sweeps with
``--backend celery`` (or ``SIMULATION_BACKEND=celery``).
"""

import os
from celery import Celery

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings")

app = Celery("bdris")
app.config_from_object("django.conf:settings", namespace="CELERY")
# Work items are long and uneven; one at a time per worker process.
app.conf.worker_prefetch_multiplier = 1
app.autodiscover_tasks()
