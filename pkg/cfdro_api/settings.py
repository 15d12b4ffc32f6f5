"""
Django settings for the causally fair DRO benchmark project.
"""
import os
import string
import random

# # # initial setup

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def env_flag(name: str, default: bool) -> bool:
    value = os.environ.get(name)
    return default if value is None else value.strip().lower() in ('1', 'true', 'yes', 'on')


# # # GENERATE A NEW UNIQUE SECRET KEY (secret_key.txt) IF DOES NOT ALREADY EXIST.
KEY_PATH = os.path.join(BASE_DIR, 'secret_key', 'secret_key.txt')
try:
    with open(KEY_PATH, 'r') as f:
        SECRET_KEY = f.read().strip()
except IOError:
    SECRET_KEY = ''.join([random.SystemRandom().choice(string.ascii_letters + string.digits + string.punctuation)
                          for _ in range(50)])
    os.makedirs(os.path.dirname(KEY_PATH), exist_ok=True)
    with open(KEY_PATH, 'w') as f:
        f.write(SECRET_KEY)

# # # MAIN CONFIGURATION # # #

TESTING_MODE = env_flag('CFDRO_TESTING_MODE', True)  # sqlite when true, PostgreSQL otherwise
DEBUG = TESTING_MODE
ALLOWED_HOSTS = ['localhost']

# # # application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'cfdro_app.apps.CfdroConfig',
    'rest_framework',
    'django_q'
]

# # # django_q

Q_CLUSTER = {
    'name': 'CausallyFairDRO',
    'workers': int(os.environ.get('CFDRO_THREADS', 2)),
    'recycle': 500,
    'timeout': 86400,
    'retry': 86500,
    'queue_limit': 8,
    'bulk': 1,
    'orm': 'default',
    'sync': env_flag('CFDRO_SYNC', True),  # cells run inline; set CFDRO_SYNC=0 and start `manage.py qcluster`
    'catch_up': False,
    'save_limit': 0,
}

# # # application settings

CFDRO = {
    'ARTIFACTS_DIR': os.path.join(BASE_DIR, 'artifacts'),
    'DEFAULT_NORM': 'l1',
    'METRIC_RADII': [0.05, 0.01],
    'SEED_COUNT': 10,
    'SYNTHETIC_ROWS': 2000,
    'TRAIN_FRACTION': 0.8,
    'LEARNING_RATE': 1e-3,
    'BATCH_SIZE': 100,
    'EPOCHS': 10,
    'ORACLE_GRID': {
        'lambda_min': 1e-3,
        'lambda_max': 1e4,
        'lambda_points': 64,
        'axis_points': 12,
        'radius': 2.0,
        'max_expansions': 6,
    },
    'SAMPLING_BUDGET': 64,
    'VERIFY_BUDGET': 25,
    'VALID_TRAINER_KINDS': {'erm', 'al', 'ross', 'cdro_closed', 'cdro_first_order'},
    'TRAINER_ALIASES': {'cdro': 'cdro_closed'},
    'VALID_CONSTRAINT_MODES': {'finite_A', 'infinite_A_nullspace'},
    'VALID_REPORT_FORMATS': {'csv', 'json', 'markdown', 'md'},
    'VALID_DATASETS': {'lin', 'example1', 'adult', 'compas', 'custom'},
}

# # # database

DEFAULT_AUTO_FIELD = 'django.db.models.AutoField'
if not TESTING_MODE:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.postgresql',
            'NAME': os.environ.get('CFDRO_DB_NAME', 'cfdro'),
            'USER': os.environ.get('CFDRO_DB_USER', ''),
            'PASSWORD': os.environ.get('CFDRO_DB_PASSWORD', ''),
            'HOST': os.environ.get('CFDRO_DB_HOST', ''),
            'PORT': os.environ.get('CFDRO_DB_PORT', ''),
        }
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': os.path.join(BASE_DIR, 'db.sqlite3'),
        }
    }

# # # internationalization

LANGUAGE_CODE = 'en-gb'
USE_I18N = True
USE_TZ = True

# # # logging

LOG_DIR = os.path.join(BASE_DIR, 'logs')
os.makedirs(LOG_DIR, exist_ok=True)
LOG_FILE = os.path.join(LOG_DIR, 'cfdro.log')
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '%(levelname)s %(asctime)s %(module)s %(process)d %(thread)d %(message)s'
        },
        'simple': {
            'format': '%(asctime)s %(levelname)s %(message)s'
        }
    },
    'handlers': {
        'console': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'formatter': 'simple'
        },
        'file': {
            'level': 'DEBUG',
            'class': 'logging.FileHandler',
            'filename': LOG_FILE,
            'formatter': 'verbose'
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': False,
        },
        'django_q': {
            'handlers': ['file'],
            'level': 'INFO',
            'propagate': True,
        },
        'cfdro': {
            'handlers': ['console', 'file'],
            'level': os.environ.get('CFDRO_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}
