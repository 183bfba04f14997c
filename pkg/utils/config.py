# Runtime defaults, read from the environment (and an optional .env file).
import os
from dataclasses import dataclass, replace

from dotenv import load_dotenv

from backend.errors import ConfigError

load_dotenv()

UNITS = ("bits", "nats")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@dataclass(frozen=True)
class Settings:
    tol: float = 1e-10
    units: str = "bits"
    threads: int = 1
    seed: int = 0
    log_level: str = "WARNING"

    def override(self, **kwargs):
        """Returns a copy with every non-None keyword applied."""
        changes = {k: v for k, v in kwargs.items() if v is not None}
        return _checked(replace(self, **changes))

    def describe(self) -> str:
        return (f"tol={self.tol!r} units={self.units} threads={self.threads} "
                f"seed={self.seed} log_level={self.log_level}")


def _read(env, name, cast, default):
    raw = env.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except ValueError as e:
        raise ConfigError(f"{name}={raw!r} is not a valid {cast.__name__}: {e}")


def _checked(settings: Settings) -> Settings:
    if settings.units not in UNITS:
        raise ConfigError(f"units must be one of {UNITS}, got {settings.units!r}")
    if not settings.tol > 0:
        raise ConfigError(f"tol must be positive, got {settings.tol!r}")
    if settings.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {settings.threads!r}")
    if settings.log_level.upper() not in LOG_LEVELS:
        raise ConfigError(f"log level must be one of {LOG_LEVELS}, got {settings.log_level!r}")
    return settings


def load_settings(env=None) -> Settings:
    """
    Builds Settings from FLICKER_* environment variables.
    Pass a dict as `env` to read from something other than os.environ.
    """
    env = os.environ if env is None else env
    settings = Settings(
        tol=_read(env, "FLICKER_TOL", float, Settings.tol),
        units=_read(env, "FLICKER_UNITS", str, Settings.units).lower(),
        threads=_read(env, "FLICKER_THREADS", int, Settings.threads),
        seed=_read(env, "FLICKER_SEED", int, Settings.seed),
        log_level=_read(env, "FLICKER_LOG_LEVEL", str, Settings.log_level).upper(),
    )
    return _checked(settings)
