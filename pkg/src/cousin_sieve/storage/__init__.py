"""Storage package."""

from .prime_cache import PrimeCache, get_prime_cache, reset_prime_cache

__all__ = ["PrimeCache", "get_prime_cache", "reset_prime_cache"]
