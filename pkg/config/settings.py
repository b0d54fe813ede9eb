import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY", "change-me-in-production")
DEBUG = os.environ.get("DJANGO_DEBUG", "False").lower() in ("true", "1", "yes")
ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    "simulation",
]

# No models; management commands and Celery only.
DATABASES = {}

USE_TZ = True
TIME_ZONE = "UTC"

# --- Simulation ---
SIMULATION_WORKERS = int(os.environ.get("SIMULATION_WORKERS", os.cpu_count() or 1))
SIMULATION_BATCH_SIZE = int(os.environ.get("SIMULATION_BATCH_SIZE", "25"))
SIMULATION_BACKEND = os.environ.get("SIMULATION_BACKEND", "local")
SIMULATION_LOG_LEVEL = os.environ.get("SIMULATION_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(asctime)s %(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        "simulation": {"level": SIMULATION_LOG_LEVEL},
    },
}

# --- Celery (SQLite broker and results via SQLAlchemy) ---
_state_dir = Path(os.environ.get("SIMULATION_STATE_DIR", BASE_DIR / "var"))
CELERY_BROKER_URL = os.environ.get("CELERY_BROKER_URL", f"sqla+sqlite:///{_state_dir / 'broker.sqlite3'}")
CELERY_RESULT_BACKEND = os.environ.get("CELERY_RESULT_BACKEND", f"db+sqlite:///{_state_dir / 'results.sqlite3'}")
CELERY_ACCEPT_CONTENT = ["json"]
CELERY_TASK_SERIALIZER = "json"
CELERY_RESULT_SERIALIZER = "json"
CELERY_TIMEZONE = "UTC"
CELERY_TASK_TRACK_STARTED = True
CELERY_TASK_TIME_LIMIT = 1800  # 30 minutes per work item
CELERY_BROKER_CONNECTION_RETRY_ON_STARTUP = True
