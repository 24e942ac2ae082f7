import os
from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')

app = Celery('residue_pruner')

# CELERY_* keys in Django settings configure the app.
app.config_from_object('django.conf:settings', namespace='CELERY')

# Picks up analytics.tasks (corpus shards).
app.autodiscover_tasks()

app.conf.update(
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',
    timezone='UTC',
    enable_utc=True,
    task_track_started=True,
    # One corpus shard per worker process at a time
    worker_prefetch_multiplier=1,
    task_acks_late=True,
    task_time_limit=6 * 60 * 60,
    task_soft_time_limit=5 * 60 * 60,
)
