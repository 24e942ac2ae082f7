import os
from pathlib import Path
import environ

# Initialize environment
env = environ.Env(
    DEBUG=(bool, False),
    ANALYZE_WORKERS=(int, 1),
    BPE_CACHE_SIZE=(int, 100_000),
    CELERY_TASK_ALWAYS_EAGER=(bool, True),
)

BASE_DIR = Path(__file__).resolve().parent.parent

# Read .env file
environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = env('SECRET_KEY', default='django-insecure-residue-pruner-dev-key')

DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=[])

INSTALLED_APPS = [
    # Third-party apps
    'rest_framework',

    # Local apps
    'bpe',
    'analytics',
    'pruning',
]

# Management commands only; nothing is persisted
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# Celery Configuration
CELERY_BROKER_URL = env('REDIS_URL', default='memory://')
CELERY_RESULT_BACKEND = env('REDIS_URL', default='cache+memory://')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
CELERY_TASK_ALWAYS_EAGER = env('CELERY_TASK_ALWAYS_EAGER')
CELERY_TASK_EAGER_PROPAGATES = True

# Tokenizer analysis
ANALYZE_WORKERS = env('ANALYZE_WORKERS')
BPE_CACHE_SIZE = env('BPE_CACHE_SIZE')

# (ratio, entropy) pairs per flavor. Entropy values are in nats.
RESIDUE_THRESHOLD_PRESETS = {
    'caption': {
        'standard': (0.25, 4.0),
        'rank_greedy': (0.05, 3.5),
    },
    'prose': {
        'standard': (0.15, 4.0),
        'rank_greedy': (0.05, 3.5),
    },
    'ablation': {
        'standard': (0.25, 4.0),
        'rank_greedy': (0.15, 3.5),
    },
}
DEFAULT_RESIDUE_PRESET = 'caption'

# Logging
LOG_LEVEL = env('LOG_LEVEL', default='INFO')
LOG_FILE = env('LOG_FILE', default=None)

APP_LOG_LEVEL = 'DEBUG' if DEBUG else LOG_LEVEL
LOG_HANDLERS = ['console', 'file'] if LOG_FILE else ['console']

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': LOG_HANDLERS,
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': LOG_HANDLERS,
            'level': 'INFO',
            'propagate': False,
        },
        'bpe': {
            'handlers': LOG_HANDLERS,
            'level': APP_LOG_LEVEL,
            'propagate': False,
        },
        'analytics': {
            'handlers': LOG_HANDLERS,
            'level': APP_LOG_LEVEL,
            'propagate': False,
        },
        'pruning': {
            'handlers': LOG_HANDLERS,
            'level': APP_LOG_LEVEL,
            'propagate': False,
        },
        'config': {
            'handlers': LOG_HANDLERS,
            'level': APP_LOG_LEVEL,
            'propagate': False,
        },
    },
}

if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'class': 'logging.FileHandler',
        'filename': LOG_FILE,
        'formatter': 'verbose',
    }
