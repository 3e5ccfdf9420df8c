"""Test configuration and fixtures."""

import os

import pytest
from click.testing import CliRunner

from cousin_sieve.config.logging import configure_logging
from cousin_sieve.config.settings import CONFIG_FILE_ENV, get_settings
from cousin_sieve.core.primes import deletion_residues, survivor_counts
from cousin_sieve.storage.prime_cache import reset_prime_cache

# Variables the CLI group writes into the environment.
CLI_ENV = (CONFIG_FILE_ENV, "CACHE_PATH", "DEBUG")


def _reset():
    for name in CLI_ENV:
        os.environ.pop(name, None)
    get_settings.cache_clear()
    reset_prime_cache()


@pytest.fixture(scope="session", autouse=True)
def quiet_logging():
    """Route structlog through stdlib at WARNING before any logger is cached."""
    os.environ["LOG_LEVEL"] = "WARNING"
    get_settings.cache_clear()
    configure_logging()
    yield


@pytest.fixture(autouse=True)
def clean_settings():
    """Fresh settings and no prime cache for every test."""
    _reset()
    yield
    _reset()
    survivor_counts.cache_clear()


@pytest.fixture
def runner():
    """Click test runner."""
    return CliRunner()


@pytest.fixture
def residues_235():
    """Deletion stages for 2, 3 and 5."""
    return deletion_residues([2, 3, 5])


@pytest.fixture
def cache_file(tmp_path):
    """Path for a prime-cache file inside the test's temp dir."""
    return tmp_path / "primes.bin"


@pytest.fixture
def use_cache(cache_file):
    """Point the settings at ``cache_file``."""
    os.environ["CACHE_PATH"] = str(cache_file)
    get_settings.cache_clear()
    reset_prime_cache()
    return cache_file
