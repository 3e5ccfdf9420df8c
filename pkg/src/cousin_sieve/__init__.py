"""Cousin-prime sieve: counting, cross-validation and lemma sweeps."""

__version__ = "0.1.0"
__author__ = "kstv364"
__email__ = "kstv364@example.com"

from .core.operators import d_total
from .core.primes import PrimeTable, count_cousin_pairs, sieve_primes
from .models.schemas import CousinCountReport, CousinPair

__all__ = [
    "PrimeTable",
    "count_cousin_pairs",
    "d_total",
    "sieve_primes",
    "CousinCountReport",
    "CousinPair",
]
