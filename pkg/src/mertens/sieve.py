"""Segmented Moebius sieving over arbitrary ranges [y1, y2].

Two interchangeable strategies produce identical mu arrays:

* naive: signed 64-bit running products (multiply multiples of p by -p,
  zero multiples of p^2), classified by comparing |product| with y.
* log-prime: 8-bit accumulators of odd-forced floor(log2 p) values, with
  the most significant bit marking square divisibility.  Uses 1/8 the
  memory and replaces multiplies with adds; the production path.

A precomputed wheel of period 13860 = 2*2*3*3*5*7*11 seeds each block
with the state of sieving by {2,3,5,7} and the square primes {4,9}.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import isqrt

import numpy as np

from . import _kernels
from .errors import ContractViolationError, ResourceLimitError, ValidityBoundError

WHEEL_PERIOD = 13860
LOGPRIME_VALIDITY_BOUND = 10**27
NAIVE_Y2_BOUND = 2**63
# compiled kernels index blocks with 64-bit offsets; beyond this the
# required prime tables would not fit desk memory anyway
KERNEL_Y2_BOUND = 2**63

_WHEEL_PRIMES = (2, 3, 5, 7)
_WHEEL_SQUARES = (4, 9)


def ceil_sqrt(x: int) -> int:
    s = isqrt(x)
    return s + (s * s < x)


@dataclass(frozen=True)
class PrimeList:
    """All primes <= limit, ascending, as a uint64 array."""

    primes: np.ndarray
    limit: int

    def __len__(self):
        return len(self.primes)


@dataclass(frozen=True)
class LogPrimeTable:
    """Primes paired with their odd-forced floor(log2 p) values."""

    primes: np.ndarray  # uint64
    logs: np.ndarray  # uint8
    limit: int

    def __len__(self):
        return len(self.primes)

    def entries(self):
        return list(zip(self.primes.tolist(), self.logs.tolist()))


@dataclass(frozen=True)
class WheelTable:
    """Per-residue 8-bit sieve states with period 13860."""

    period: int
    residues: np.ndarray  # uint8, length == period


@dataclass
class MoebiusBlock:
    """mu values over the inclusive range [y1, y2] plus running M bounds."""

    y1: int
    y2: int
    mu: np.ndarray  # int8
    m_start: int | None = None  # M(y1 - 1)
    m_end: int | None = None  # M(y2)

    def __len__(self):
        return self.y2 - self.y1 + 1

    def mertens_at(self, y: int) -> int:
        """M(y) for y inside the block; requires accumulate_mertens first."""
        if self.m_start is None:
            raise ContractViolationError("block has no Mertens prefix; call accumulate_mertens")
        if not self.y1 <= y <= self.y2:
            raise IndexError(f"y={y} outside block [{self.y1}, {self.y2}]")
        return self.m_start + int(self.mu[: y - self.y1 + 1].sum(dtype=np.int64))


def generate_primes(limit: int, mem_budget: int | None = None) -> PrimeList:
    """All primes <= limit via a flat Eratosthenes sieve."""
    if limit < 2:
        raise ValueError("limit must be >= 2")
    if mem_budget is not None and limit + 1 > mem_budget:
        raise ResourceLimitError(f"prime sieve to {limit} needs {limit + 1} bytes, budget {mem_budget}")
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    primes = np.flatnonzero(flags).astype(np.uint64)
    return PrimeList(primes, limit)


def log_prime(p: int) -> int:
    """ceil(log2 p) with the low bit forced: always odd.

    Rounding upward keeps every fully-sieved accumulator at or above
    floor(log2 y), so the parity classification never under-counts; the
    per-prime surplus stays below 2, which is what keeps 8-bit cells from
    overflowing until y nears 10^27.
    """
    if p < 2:
        raise ValueError("p must be a prime >= 2")
    return (p - 1).bit_length() | 1


def build_log_table(primes: PrimeList) -> LogPrimeTable:
    shifted = primes.primes - np.uint64(1)  # bit_length(p - 1) == ceil(log2 p)
    lengths = np.zeros(len(primes), dtype=np.uint8)
    while shifted.any():
        lengths[shifted > 0] += np.uint8(1)
        shifted >>= np.uint64(1)
    logs = lengths | np.uint8(1)
    return LogPrimeTable(primes.primes, logs, primes.limit)


def build_wheel() -> WheelTable:
    """Period-13860 pre-sieve for primes {2,3,5,7} and squares {4,9}.

    Every wheel prime and square divides the period, so divisibility of y
    depends only on y mod 13860; copying the table equals sieving.
    """
    states = np.zeros(WHEEL_PERIOD, dtype=np.uint8)
    for p in _WHEEL_PRIMES:
        states[::p] += np.uint8(log_prime(p))
    for s in _WHEEL_SQUARES:
        states[::s] |= np.uint8(0x80)
    return WheelTable(WHEEL_PERIOD, states)


def _check_primes_cover(primes_limit: int, y2: int):
    need = ceil_sqrt(y2)
    if primes_limit < need:
        raise ContractViolationError(f"prime list covers {primes_limit} but ceil(sqrt(y2)) = {need}")


def _split_ranges(y1: int, y2: int, workers: int):
    length = y2 - y1 + 1
    workers = max(1, min(workers, length))
    step, rem = divmod(length, workers)
    out = []
    start = y1
    for i in range(workers):
        span = step + (1 if i < rem else 0)
        if span:
            out.append((start, start + span - 1))
            start += span
    return out


def _run_split(fn, y1, y2, workers):
    ranges = _split_ranges(y1, y2, workers)
    if len(ranges) == 1:
        return fn(*ranges[0])
    with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
        parts = list(pool.map(lambda r: fn(*r), ranges))
    return np.concatenate(parts)


def sieve_block_naive(y1: int, y2: int, primes: PrimeList, *, backend=None, workers: int = 1) -> MoebiusBlock:
    """mu over [y1, y2] via the 64-bit product sieve; y2 < 2^63."""
    if y1 < 1 or y2 < y1:
        raise ValueError(f"bad block bounds [{y1}, {y2}]")
    if y2 >= NAIVE_Y2_BOUND:
        raise ResourceLimitError("naive sieve accumulator requires y2 < 2^63")
    _check_primes_cover(primes.limit, y2)
    kern = _kernels.get_backend(backend)
    mu = _run_split(lambda a, b: kern.sieve_naive(a, b, primes.primes), y1, y2, workers)
    return MoebiusBlock(y1, y2, mu)


def sieve_block_logprime(
    y1: int,
    y2: int,
    table: LogPrimeTable,
    wheel: WheelTable,
    *,
    backend=None,
    workers: int = 1,
) -> MoebiusBlock:
    """mu over [y1, y2] via the log-prime sieve; y1 >= 2 (mu(1) is the caller's special case)."""
    if y1 < 2 or y2 < y1:
        raise ValueError(f"bad block bounds [{y1}, {y2}]")
    if y2 >= LOGPRIME_VALIDITY_BOUND:
        raise ValidityBoundError("log-prime sieve is only known correct for y2 < 10^27")
    if y2 >= KERNEL_Y2_BOUND:
        raise ResourceLimitError("block offsets beyond 2^63 exceed the kernel range")
    _check_primes_cover(table.limit, y2)
    kern = _kernels.get_backend(backend)
    mu = _run_split(
        lambda a, b: kern.sieve_logprime(a, b, table.primes, table.logs, wheel.residues),
        y1,
        y2,
        workers,
    )
    return MoebiusBlock(y1, y2, mu)


def accumulate_mertens(block: MoebiusBlock, m_start: int) -> MoebiusBlock:
    """Attach running Mertens bounds: m_start = M(y1 - 1)."""
    block.m_start = m_start
    block.m_end = m_start + int(block.mu.sum(dtype=np.int64))
    return block


def dump_block(block: MoebiusBlock, stream) -> None:
    """Debug dump: one line `y mu M` per element."""
    if block.m_start is None:
        raise ContractViolationError("call accumulate_mertens before dumping")
    prefix = block.m_start + np.cumsum(block.mu, dtype=np.int64)
    for i in range(len(block)):
        stream.write(f"{block.y1 + i} {int(block.mu[i])} {int(prefix[i])}\n")
