"""Settings and logging setup."""

from .logging import configure_logging
from .settings import CONFIG_FILE_ENV, Settings, get_settings

__all__ = ["CONFIG_FILE_ENV", "Settings", "configure_logging", "get_settings"]
