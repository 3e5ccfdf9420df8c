"""Core package initialization."""

from .bounds import d_prime_bound, figure_series, tl2_check, w_sequence
from .lemmas import bracket_op, run_suite, run_sweep
from .operators import d0, d_total, eval_term, expand_product, legendre_pi
from .primes import (
    PrimeTable,
    count_cousin_pairs,
    list_cousin_pairs,
    prime_count_oracle,
    sieve_primes,
    simulate_deletion,
)

__all__ = [
    "PrimeTable",
    "bracket_op",
    "count_cousin_pairs",
    "d0",
    "d_prime_bound",
    "d_total",
    "eval_term",
    "expand_product",
    "figure_series",
    "legendre_pi",
    "list_cousin_pairs",
    "prime_count_oracle",
    "run_suite",
    "run_sweep",
    "sieve_primes",
    "simulate_deletion",
    "tl2_check",
    "w_sequence",
]
