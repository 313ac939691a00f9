"""Exact unsigned 64-bit division via precomputed multiply-add-shift constants.

For a fixed divisor d the quotient floor(n/d) is computed from a magic
multiplier and a shift, replacing the slow hardware divide in hot loops.
Three variants cover every divisor:

* ``SHIFT``          d is a power of two; quotient is a plain right shift.
* ``ROUND_UP``       single-word multiplier m = floor(2^(64+s)/d) + 1 when the
                     rounding error is small enough (Granlund-Montgomery).
* ``ADD_INDICATOR``  65-bit multiplier 2^64 + m; evaluated with the
                     overflow-safe add sequence.

Exactness for all n < 2^64 follows from the classical multiplier bounds;
the test suite re-verifies it exhaustively at word boundaries and on
random samples.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError

SCHEME_ROUND_UP = 0
SCHEME_ADD_INDICATOR = 1
SCHEME_SHIFT = 2

_WORD = 64
_MASK64 = (1 << 64) - 1
_MASK32 = 0xFFFFFFFF

# bytes per table entry: u64 magic + u8 shift + u8 scheme
ENTRY_BYTES = 10


@dataclass(frozen=True)
class DivisorConstants:
    """Multiply-add-shift constants for one divisor."""

    d: int
    m: int
    s: int
    scheme: int


def precompute_divisor(d: int) -> DivisorConstants:
    """Derive exact division constants for divisor d >= 1.

    Pure function of d; scheme selection avoids multiplier overflow.
    """
    if d < 1 or d > _MASK64:
        raise ValueError(f"divisor out of range: {d}")
    if d & (d - 1) == 0:
        return DivisorConstants(d, 0, d.bit_length() - 1, SCHEME_SHIFT)
    s = d.bit_length() - 1  # floor(log2 d)
    m0, rem = divmod(1 << (_WORD + s), d)
    if d - rem < (1 << s):
        return DivisorConstants(d, m0 + 1, s, SCHEME_ROUND_UP)
    big = ((1 << (_WORD + s + 1)) + d - 1) // d  # 65-bit multiplier, round up
    return DivisorConstants(d, big - (1 << _WORD), s, SCHEME_ADD_INDICATOR)


def fast_div(n: int, c: DivisorConstants) -> int:
    """floor(n / c.d) for 0 <= n < 2^64, without dividing."""
    if c.scheme == SCHEME_SHIFT:
        return n >> c.s
    t = (n * c.m) >> _WORD
    if c.scheme == SCHEME_ROUND_UP:
        return t >> c.s
    return (((n - t) >> 1) + t) >> c.s


def mulhi64(a, b):
    """High 64 bits of the 128-bit product of two uint64 arrays."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    m32 = np.uint64(_MASK32)
    thirty_two = np.uint64(32)
    a_hi, a_lo = a >> thirty_two, a & m32
    b_hi, b_lo = b >> thirty_two, b & m32
    lo = a_lo * b_lo
    m1 = a_hi * b_lo
    m2 = a_lo * b_hi
    carry = ((lo >> thirty_two) + (m1 & m32) + (m2 & m32)) >> thirty_two
    return a_hi * b_hi + (m1 >> thirty_two) + (m2 >> thirty_two) + carry


def fastdiv_batch(n, magic, shift, scheme):
    """Vectorized quotients from per-element constants (uint64 arrays)."""
    n = np.asarray(n, dtype=np.uint64)
    magic = np.asarray(magic, dtype=np.uint64)
    shift = np.asarray(shift, dtype=np.uint64)
    scheme = np.asarray(scheme)
    t = mulhi64(n, magic)
    one = np.uint64(1)
    q_add = (((n - t) >> one) + t) >> shift
    q_round = t >> shift
    q_shift = n >> shift
    return np.where(
        scheme == SCHEME_ROUND_UP,
        q_round,
        np.where(scheme == SCHEME_ADD_INDICATOR, q_add, q_shift),
    )


class DivisorTable:
    """Constants for every divisor in [1, cap], laid out as flat arrays.

    Index d of each array holds the constants for divisor d (index 0 is
    unused).  Immutable after construction; safe for concurrent reads.
    """

    def __init__(self, cap: int, magic, shift, scheme):
        self.cap = int(cap)
        self.magic = magic
        self.shift = shift
        self.scheme = scheme

    def __len__(self):
        return self.cap

    def constants(self, d: int) -> DivisorConstants:
        if not 1 <= d <= self.cap:
            raise IndexError(f"divisor {d} outside table cap {self.cap}")
        return DivisorConstants(d, int(self.magic[d]), int(self.shift[d]), int(self.scheme[d]))

    def div(self, n: int, d: int) -> int:
        return fast_div(n, self.constants(d))

    def div_batch(self, n, d):
        d = np.asarray(d, dtype=np.uint64)
        return fastdiv_batch(np.asarray(n, dtype=np.uint64), self.magic[d], self.shift[d], self.scheme[d])


def build_table(cap: int, mem_budget: int | None = None) -> DivisorTable:
    """Precompute constants for all divisors up to cap.

    Uses the compiled kernel when present; the generator semantics are
    identical either way.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if mem_budget is not None and cap * ENTRY_BYTES > mem_budget:
        raise ResourceLimitError(
            f"divisor table of {cap} entries needs {cap * ENTRY_BYTES} bytes, budget is {mem_budget}"
        )
    from . import _kernels

    backend = _kernels.get_backend()
    magic, shift, scheme = backend.build_divisor_arrays(cap)
    return DivisorTable(cap, magic, shift, scheme)
