"""NumPy fallback kernels.

Semantically identical to the compiled extension; selected at import when
the extension is unavailable (or forced via MERTENS_BACKEND=pure).
"""

import numpy as np

from ..fastdiv import SCHEME_SHIFT, precompute_divisor

NAME = "pure"

WHEEL_PERIOD = 13860
_MSB = np.uint8(0x80)
_SENTINEL = np.uint64(2**64 - 1)


def build_divisor_arrays(cap: int):
    """Constants for all divisors 1..cap as (magic, shift, scheme) arrays."""
    magic = np.zeros(cap + 1, dtype=np.uint64)
    shift = np.zeros(cap + 1, dtype=np.uint8)
    scheme = np.full(cap + 1, SCHEME_SHIFT, dtype=np.uint8)
    for d in range(1, cap + 1):
        c = precompute_divisor(d)
        magic[d] = c.m
        shift[d] = c.s
        scheme[d] = c.scheme
    return magic, shift, scheme


def _wheel_init(y1: int, length: int, wheel: np.ndarray) -> np.ndarray:
    start = y1 % WHEEL_PERIOD
    reps = (start + length) // WHEEL_PERIOD + 1
    return np.tile(wheel, reps)[start : start + length].copy()


def _logprime_accumulate(y1: int, y2: int, primes: np.ndarray, logs: np.ndarray, wheel: np.ndarray) -> np.ndarray:
    length = y2 - y1 + 1
    states = _wheel_init(y1, length, wheel)
    for i in range(len(primes)):
        p = int(primes[i])
        if p * p > y2:
            break
        if p >= 11:
            start = ((y1 + p - 1) // p) * p
            if start <= y2:
                states[start - y1 :: p] += logs[i]
        if p >= 5:
            p2 = p * p
            start = ((y1 + p2 - 1) // p2) * p2
            if start <= y2:
                states[start - y1 :: p2] |= _MSB
    return states


def _floor_log2_range(y1: int, y2: int) -> np.ndarray:
    """floor(log2 y) for y in [y1, y2], exact for y < 2^63."""
    length = y2 - y1 + 1
    out = np.empty(length, dtype=np.int16)
    j = y1.bit_length() - 1
    while True:
        lo = max(y1, 1 << j)
        hi = min(y2, (1 << (j + 1)) - 1)
        if lo > hi:
            break
        out[lo - y1 : hi - y1 + 1] = j
        j += 1
    return out


def logprime_states(y1: int, y2: int, primes, logs, wheel) -> np.ndarray:
    """Pre-classification 8-bit accumulator states (for instrumented tests)."""
    return _logprime_accumulate(y1, y2, primes, logs, wheel)


def sieve_logprime(y1: int, y2: int, primes, logs, wheel) -> np.ndarray:
    """Moebius values over [y1, y2] via the 8-bit log-prime sieve; y1 >= 2."""
    states = _logprime_accumulate(y1, y2, primes, logs, wheel)
    thr = _floor_log2_range(y1, y2) - np.int16(1)
    acc = states.astype(np.int16)
    parity = (acc & 1).astype(np.int8)
    fully = acc > thr
    mu = np.where(fully, 1 - 2 * parity, -1 + 2 * parity).astype(np.int8)
    mu[(states & _MSB) != 0] = 0
    return mu


def sieve_naive(y1: int, y2: int, primes) -> np.ndarray:
    """Moebius values over [y1, y2] via the signed 64-bit product sieve."""
    length = y2 - y1 + 1
    acc = np.ones(length, dtype=np.int64)
    for i in range(len(primes)):
        p = int(primes[i])
        if p * p > y2:
            break
        start = ((y1 + p - 1) // p) * p
        if start <= y2:
            acc[start - y1 :: p] *= -p
        p2 = p * p
        start = ((y1 + p2 - 1) // p2) * p2
        if start <= y2:
            acc[start - y1 :: p2] = 0
    y = np.arange(y1, y2 + 1, dtype=np.int64)
    sign = np.sign(acc)
    mu = np.where(np.abs(acc) == y, sign, -sign).astype(np.int8)
    mu[acc == 0] = 0
    return mu


def apply_block(acc, v, lo, xcut, mcut, dnext, ynext, y1: int, y2: int, mprefix, divtable=None):
    """Fold one sieved block's M values into every harmonic-array element.

    mprefix[i] must hold M(y1 + i).  Walk state (dnext, ynext) is advanced
    in place.  Returns (counted_items, dense_items) for instrumentation.
    """
    counted_items = 0
    dense_items = 0
    y1u = np.uint64(y1)

    for k in np.nonzero(mcut >= y1u)[0]:
        vk = int(v[k])
        hi = min(int(mcut[k]), y2)
        m = np.arange(y1, hi + 1, dtype=np.uint64)
        q = np.uint64(vk) // m
        qn = np.empty_like(q)
        qn[:-1] = q[1:]
        qn[-1] = vk // (hi + 1)
        counts = (q - qn).astype(np.int64)
        if hi == int(mcut[k]):
            counts[-1] = int(q[-1]) - max(int(qn[-1]), int(xcut[k]))
        acc[k] += np.dot(counts, mprefix[: hi - y1 + 1])
        counted_items += len(m)

    y2u = np.uint64(y2)
    for k in np.nonzero(ynext <= y2u)[0]:
        vk = int(v[k])
        d_hi = int(dnext[k])
        lok = int(lo[k])
        d_lo = max(lok, vk // (y2 + 1) + 1)
        d = np.arange(d_lo, d_hi + 1, dtype=np.uint64)
        q = np.uint64(vk) // d
        acc[k] += mprefix[(q - y1u).astype(np.int64)].sum()
        dense_items += len(d)
        nxt = d_lo - 1
        dnext[k] = nxt
        ynext[k] = vk // nxt if nxt >= lok else _SENTINEL

    return counted_items, dense_items


def finalize_recursion(tails, D):
    """Resolve inter-element recursion in descending-target order.

    final[k-1] = 1 - tails[k-1] - sum_{d=2..D_k} final[k*d - 1].
    """
    K = len(tails)
    final = np.zeros(K, dtype=np.int64)
    for idx in range(K - 1, -1, -1):
        k = idx + 1
        s = 1 - int(tails[idx])
        dk = int(D[idx])
        if dk >= 2:
            kd = np.arange(2 * k, dk * k + 1, k, dtype=np.int64)
            s -= int(final[kd - 1].sum())
        final[idx] = s
    return final
