"""Exact Mertens-function computation, explicit-formula evaluation over
Riemann zeta zeros, and extreme-value / counterexample scanning."""

from .engine import (
    EngineConfig,
    MertensResult,
    RegionConfig,
    Region,
    choose_u,
    classify_region,
    mertens_exact,
    mertens_exact_big,
    mertens_exact_multi,
    mertens_naive,
    verify_paired,
)
from .fastdiv import DivisorConstants, DivisorTable, build_table, fast_div, precompute_divisor
from .sieve import (
    LogPrimeTable,
    MoebiusBlock,
    PrimeList,
    WheelTable,
    accumulate_mertens,
    build_log_table,
    build_wheel,
    generate_primes,
    log_prime,
    sieve_block_logprime,
    sieve_block_naive,
)

__version__ = "0.1.0"

__all__ = [
    "EngineConfig",
    "MertensResult",
    "RegionConfig",
    "Region",
    "choose_u",
    "classify_region",
    "mertens_exact",
    "mertens_exact_big",
    "mertens_exact_multi",
    "mertens_naive",
    "verify_paired",
    "DivisorConstants",
    "DivisorTable",
    "build_table",
    "fast_div",
    "precompute_divisor",
    "LogPrimeTable",
    "MoebiusBlock",
    "PrimeList",
    "WheelTable",
    "accumulate_mertens",
    "build_log_table",
    "build_wheel",
    "generate_primes",
    "log_prime",
    "sieve_block_logprime",
    "sieve_block_naive",
    "__version__",
]
