# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: block sieves, harmonic-array updates, divisor tables.

Mirrors `pure.py` exactly; both backends must stay bit-identical.
"""

import numpy as np

from libc.stdint cimport uint64_t, int64_t, uint8_t, int8_t, int16_t
from libc.string cimport memcpy

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"
    ctypedef long long i128 "__int128"

NAME = "native"

WHEEL_PERIOD = 13860

cdef uint64_t _SENTINEL = <uint64_t> 0xFFFFFFFFFFFFFFFFUL
cdef uint64_t _WHEEL = 13860


cdef inline int _bit_length(uint64_t x) nogil:
    cdef int n = 0
    while x:
        x >>= 1
        n += 1
    return n


def build_divisor_arrays(cap):
    """Constants for all divisors 1..cap as (magic, shift, scheme) arrays."""
    cdef uint64_t c = cap
    magic_np = np.zeros(c + 1, dtype=np.uint64)
    shift_np = np.zeros(c + 1, dtype=np.uint8)
    scheme_np = np.zeros(c + 1, dtype=np.uint8)
    cdef uint64_t[::1] magic = magic_np
    cdef uint8_t[::1] shift = shift_np
    cdef uint8_t[::1] scheme = scheme_np
    cdef uint64_t d, m0, rem
    cdef u128 num, big
    cdef int s
    with nogil:
        for d in range(1, c + 1):
            if d & (d - 1) == 0:
                magic[d] = 0
                shift[d] = _bit_length(d) - 1
                scheme[d] = 2
                continue
            s = _bit_length(d) - 1
            num = (<u128> 1) << (64 + s)
            m0 = <uint64_t> (num // d)
            rem = <uint64_t> (num - (<u128> m0) * d)
            if d - rem < ((<uint64_t> 1) << s):
                magic[d] = m0 + 1
                shift[d] = s
                scheme[d] = 0
            else:
                if s == 63:
                    # ceil(2^128/d) == floor((2^128-1)/d) + 1 since d never divides 2^128
                    big = (~(<u128> 0)) // d + 1
                else:
                    big = (((<u128> 1) << (64 + s + 1)) + d - 1) // d
                magic[d] = <uint64_t> big  # low word: multiplier minus 2^64
                shift[d] = s
                scheme[d] = 1
    return magic_np, shift_np, scheme_np


cdef void _wheel_copy(uint8_t[::1] states, uint64_t y1, const uint8_t[::1] wheel) nogil:
    cdef uint64_t length = states.shape[0]
    cdef uint64_t start = y1 % _WHEEL
    cdef uint64_t pos = 0, chunk
    chunk = _WHEEL - start
    if chunk > length:
        chunk = length
    memcpy(&states[0], &wheel[start], chunk)
    pos = chunk
    while pos + _WHEEL <= length:
        memcpy(&states[pos], &wheel[0], _WHEEL)
        pos += _WHEEL
    if pos < length:
        memcpy(&states[pos], &wheel[0], length - pos)


cdef void _logprime_marks(uint8_t[::1] states, uint64_t y1, uint64_t y2,
                          const uint64_t[::1] primes, const uint8_t[::1] logs) nogil:
    cdef Py_ssize_t i
    cdef uint64_t p, p2, start, j, length = y2 - y1 + 1
    cdef uint8_t lg
    for i in range(primes.shape[0]):
        p = primes[i]
        if p * p > y2:
            break
        if p >= 11:
            lg = logs[i]
            start = ((y1 + p - 1) // p) * p
            j = start - y1
            while j < length:
                states[j] += lg
                j += p
        if p >= 5:
            p2 = p * p
            start = ((y1 + p2 - 1) // p2) * p2
            if start <= y2:
                j = start - y1
                while j < length:
                    states[j] |= 0x80
                    j += p2


def logprime_states(y1, y2, primes, logs, wheel):
    """Pre-classification 8-bit accumulator states (for instrumented tests)."""
    cdef uint64_t a = y1, b = y2
    states_np = np.empty(b - a + 1, dtype=np.uint8)
    cdef uint8_t[::1] states = states_np
    cdef const uint64_t[::1] pv = primes
    cdef const uint8_t[::1] lv = logs
    cdef const uint8_t[::1] wv = wheel
    with nogil:
        _wheel_copy(states, a, wv)
        _logprime_marks(states, a, b, pv, lv)
    return states_np


def sieve_logprime(y1, y2, primes, logs, wheel):
    """Moebius values over [y1, y2] via the 8-bit log-prime sieve; y1 >= 2."""
    cdef uint64_t a = y1, b = y2
    cdef uint64_t length = b - a + 1
    states_np = np.empty(length, dtype=np.uint8)
    mu_np = np.empty(length, dtype=np.int8)
    cdef uint8_t[::1] states = states_np
    cdef int8_t[::1] mu = mu_np
    cdef const uint64_t[::1] pv = primes
    cdef const uint8_t[::1] lv = logs
    cdef const uint8_t[::1] wv = wheel
    cdef uint64_t j, y, next_pow
    cdef int16_t flog, s, par
    with nogil:
        _wheel_copy(states, a, wv)
        _logprime_marks(states, a, b, pv, lv)
        flog = _bit_length(a) - 1
        next_pow = (<uint64_t> 1) << (flog + 1)
        y = a
        for j in range(length):
            if y == next_pow:
                flog += 1
                next_pow <<= 1
            s = states[j]
            if s & 0x80:
                mu[j] = 0
            else:
                par = s & 1
                if s > flog - 1:
                    mu[j] = <int8_t> (1 - 2 * par)
                else:
                    mu[j] = <int8_t> (-1 + 2 * par)
            y += 1
    return mu_np


def sieve_naive(y1, y2, primes):
    """Moebius values over [y1, y2] via the signed 64-bit product sieve."""
    cdef uint64_t a = y1, b = y2
    cdef uint64_t length = b - a + 1
    acc_np = np.ones(length, dtype=np.int64)
    mu_np = np.empty(length, dtype=np.int8)
    cdef int64_t[::1] acc = acc_np
    cdef int8_t[::1] mu = mu_np
    cdef const uint64_t[::1] pv = primes
    cdef Py_ssize_t i
    cdef uint64_t p, p2, start, j, y
    cdef int64_t val
    with nogil:
        for i in range(pv.shape[0]):
            p = pv[i]
            if p * p > b:
                break
            start = ((a + p - 1) // p) * p
            j = start - a
            while j < length:
                acc[j] *= -(<int64_t> p)
                j += p
            p2 = p * p
            start = ((a + p2 - 1) // p2) * p2
            if start <= b:
                j = start - a
                while j < length:
                    acc[j] = 0
                    j += p2
        y = a
        for j in range(length):
            val = acc[j]
            if val == 0:
                mu[j] = 0
            elif val == <int64_t> y:
                mu[j] = 1
            elif val == -(<int64_t> y):
                mu[j] = -1
            elif val > 0:
                mu[j] = -1
            else:
                mu[j] = 1
            y += 1
    return mu_np


cdef inline uint64_t _fdiv(uint64_t n, uint64_t d, uint64_t cap,
                           const uint64_t[::1] magic, const uint8_t[::1] shift,
                           const uint8_t[::1] scheme) nogil:
    cdef uint64_t t
    cdef uint8_t s, sc
    if d > cap:
        return n // d
    s = shift[d]
    sc = scheme[d]
    if sc == 0:
        t = <uint64_t> (((<u128> n) * magic[d]) >> 64)
        return t >> s
    if sc == 1:
        t = <uint64_t> (((<u128> n) * magic[d]) >> 64)
        return (((n - t) >> 1) + t) >> s
    return n >> s


def apply_block(acc, v, lo, xcut, mcut, dnext, ynext, y1, y2, mprefix, divtable=None):
    """Fold one sieved block's M values into every harmonic-array element.

    mprefix[i] must hold M(y1 + i).  Walk state (dnext, ynext) is advanced
    in place.  Returns (counted_items, dense_items) for instrumentation.
    """
    cdef int64_t[::1] accv = acc
    cdef const uint64_t[::1] vv = v
    cdef const uint64_t[::1] lov = lo
    cdef const uint64_t[::1] xcutv = xcut
    cdef const uint64_t[::1] mcutv = mcut
    cdef uint64_t[::1] dnextv = dnext
    cdef uint64_t[::1] ynextv = ynext
    cdef const int64_t[::1] mp = mprefix
    cdef const uint64_t[::1] magic
    cdef const uint8_t[::1] shiftv
    cdef const uint8_t[::1] schemev
    cdef uint64_t cap
    if divtable is None:
        magic = np.zeros(1, dtype=np.uint64)
        shiftv = np.zeros(1, dtype=np.uint8)
        schemev = np.zeros(1, dtype=np.uint8)
        cap = 0
    else:
        magic, shiftv, schemev = divtable
        cap = magic.shape[0] - 1

    cdef uint64_t a = y1, b = y2
    cdef Py_ssize_t K = accv.shape[0], k
    cdef uint64_t vk, hi, m, q, qn, d, lok, d_lo, mc
    cdef i128 delta
    cdef int64_t cnt
    cdef uint64_t counted_items = 0, dense_items = 0
    cdef int overflow = 0

    with nogil:
        for k in range(K):
            mc = mcutv[k]
            if mc >= a:
                vk = vv[k]
                hi = mc if mc < b else b
                qn = _fdiv(vk, hi + 1, cap, magic, shiftv, schemev)
                if hi == mc and qn < xcutv[k]:
                    qn = xcutv[k]
                delta = 0
                m = hi
                while m >= a:
                    q = _fdiv(vk, m, cap, magic, shiftv, schemev)
                    cnt = <int64_t> (q - qn)
                    delta += (<i128> cnt) * mp[m - a]
                    qn = q
                    m -= 1
                counted_items += hi - a + 1
                delta += accv[k]
                if delta > ((<i128> 1) << 62) or delta < -((<i128> 1) << 62):
                    overflow = 1
                    break
                accv[k] = <int64_t> delta
            if ynextv[k] <= b:
                vk = vv[k]
                d = dnextv[k]
                lok = lov[k]
                d_lo = vk // (b + 1) + 1
                if d_lo < lok:
                    d_lo = lok
                q = ynextv[k]
                delta = 0
                while True:
                    delta += mp[q - a]
                    dense_items += 1
                    if d == d_lo:
                        break
                    d -= 1
                    q = _fdiv(vk, d, cap, magic, shiftv, schemev)
                accv[k] += <int64_t> delta
                if d_lo - 1 >= lok:
                    dnextv[k] = d_lo - 1
                    ynextv[k] = _fdiv(vk, d_lo - 1, cap, magic, shiftv, schemev)
                else:
                    dnextv[k] = d_lo - 1
                    ynextv[k] = _SENTINEL
    if overflow:
        raise OverflowError("harmonic accumulator exceeded the signed-64 guard range")
    return counted_items, dense_items


def finalize_recursion(tails, D):
    """Resolve inter-element recursion in descending-target order.

    final[k-1] = 1 - tails[k-1] - sum_{d=2..D_k} final[k*d - 1].
    """
    cdef const int64_t[::1] tv = tails
    cdef const uint64_t[::1] dv = D
    cdef Py_ssize_t K = tv.shape[0]
    final_np = np.zeros(K, dtype=np.int64)
    cdef int64_t[::1] final = final_np
    cdef Py_ssize_t idx
    cdef uint64_t k, d, dk
    cdef int64_t s
    with nogil:
        for idx in range(K - 1, -1, -1):
            k = idx + 1
            s = 1 - tv[idx]
            dk = dv[idx]
            for d in range(2, dk + 1):
                s -= final[k * d - 1]
            final[idx] = s
    return final_np
