"""
Runtime settings read from the environment (and a local .env file).
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from .errors import ConfigError

# Load environment variables
load_dotenv()


@dataclass(frozen=True)
class Settings:
    seed: int = 0
    trials: int = 1000
    steps: int = 8
    workers: int = 1
    log_level: str = "WARNING"


def _int_setting(name: str, default: int) -> int:
    raw = os.getenv(name, str(default))
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def load_settings() -> Settings:
    """Collect the SVF_* environment variables into a Settings value."""
    return Settings(
        seed=_int_setting("SVF_SEED", 0),
        trials=_int_setting("SVF_TRIALS", 1000),
        steps=_int_setting("SVF_STEPS", 8),
        workers=_int_setting("SVF_WORKERS", 1),
        log_level=os.getenv("SVF_LOG_LEVEL", "WARNING").upper(),
    )
