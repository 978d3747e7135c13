import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

# Проект не подписывает данные: ключ нужен только самому Django.
SECRET_KEY = os.getenv("SECRET_KEY", "zeno-lab-offline")

DEBUG = os.getenv("DEBUG", "1") == "1"

INSTALLED_APPS = [
    "core",
]

# Лаборатория работает только с файлами, БД не используется.
DATABASES = {}


def _env_float(name: str, default: str) -> float:
    raw = os.getenv(name, default)
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name} должен быть числом, получено {raw!r}")
    if not value > 0:
        raise ValueError(f"{name} должен быть положительным, получено {raw!r}")
    return value


_seed = os.getenv("ZENO_SEED", "0")
try:
    ZENO_SEED = int(_seed)
except ValueError:
    raise ValueError(f"ZENO_SEED должен быть целым числом, получено {_seed!r}")
if ZENO_SEED < 0:
    raise ValueError("ZENO_SEED не может быть отрицательным")

ZENO_OUTPUT_DIR = Path(os.getenv("ZENO_OUTPUT_DIR", BASE_DIR / "runs"))
ZENO_HBAR = _env_float("ZENO_HBAR", "1.0")
ZENO_RK4_STEP = _env_float("ZENO_RK4_STEP", "1e-4")
ZENO_MC_SIGMAS = _env_float("ZENO_MC_SIGMAS", "4.0")
ZENO_LOG_LEVEL = os.getenv("ZENO_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{asctime} {levelname} {name}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": ZENO_LOG_LEVEL,
            "propagate": False,
        },
    },
}

LANGUAGE_CODE = "en-us"
TIME_ZONE = "UTC"
USE_I18N = False
USE_TZ = True
