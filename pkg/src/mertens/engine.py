"""Exact Mertens-function computation via the divisor-identity recursion.

Pick u > sqrt(n) and index an array by k = 1 .. floor(n/u) whose element k
targets v_k = floor(n/k).  Starting from

    M(v) = 1 - sum_{d=2}^{v} M(floor(v/d))

the divisors of each target split three ways:

* d <= D_k = floor(v_k/(u+1)): the quotient exceeds u and is itself an
  array target (index k*d), resolved after sieving by `finalize`.
* remaining d enumerated individually while quotients change fast
  ("dense walk", one division per divisor), for d up to a per-element
  split near sqrt(v_k),
* the rest grouped by quotient value m with multiplicity
  floor(v_k/m) - floor(v_k/(m+1)) ("counted walk").

The sieved values M(y), y = 1..u, stream through in ascending blocks; each
block feeds both walks for every element.  Total update work is
O(n/sqrt(u)); with u ~ n^(2/3) the whole computation is O(n^(2/3+eps)) and
one run yields M(floor(n/c)) for every integer c simultaneously.
"""

import os
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import IntEnum
from math import isqrt, sqrt

import numpy as np

from . import _kernels, sieve
from .errors import (
    CeilingExceededError,
    ContractViolationError,
    ResourceLimitError,
)
from .fastdiv import ENTRY_BYTES
from .sieve import ceil_sqrt

_SENTINEL = np.uint64(2**64 - 1)

# above this the counted-walk coefficients can push the signed-64
# accumulators past their guard range (worst partial sums ~ 1.6 * n)
U64_PATH_BOUND = 4 * 10**18

_DIRECT_CUTOFF = 1024  # below this a single naive pass beats the recursion


class Region(IntEnum):
    R1 = 1
    R2 = 2
    R3 = 3
    R4 = 4


@dataclass(frozen=True)
class RegionConfig:
    """Loop-strategy boundaries in (x, y) space.

    c1 bounds the dense per-value walk, c2 the mid region (no CPU effect;
    kept for classification), c3 the sparse tail where the divisor table
    is dropped and sieve blocks grow.
    """

    c1: float = 2.0
    c2: float = 20.0
    c3: float = 2.0

    def __post_init__(self):
        if not (1.0 < self.c1 < self.c2):
            raise ValueError("need 1 < c1 < c2")
        if self.c3 < 1.0:
            raise ValueError("need c3 >= 1")


@dataclass(frozen=True)
class EngineConfig:
    mem_budget: int = 2 << 30
    workers: int = 0  # 0 = auto
    u_alpha: float = 1.0
    block_len: int = 0  # 0 = auto: max(ceil(sqrt u), 2^22)
    region: RegionConfig = field(default_factory=RegionConfig)
    fastdiv_cap: int = 1 << 26
    r4_block_factor: int = 4
    naive_ceiling: int = 10**10
    naive_block_len: int = 1 << 22
    quotient_budget: int = 4_000_000
    backend: str | None = None
    checkpoint_path: str | None = None

    def effective_workers(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)


def classify_region(x: int, y: int, n: int, cfg: RegionConfig) -> Region:
    """Strategy region for array index x and sieve value y.

    R1 while y < c1*sqrt(n/x); R2 up to c2*sqrt(n/x); R4 strictly above
    c3*sqrt(n); R3 otherwise.  Boundaries resolve in that order.
    """
    if x < 1 or y < 1:
        raise ValueError("x and y must be >= 1")
    scale = sqrt(n / x)
    if y < cfg.c1 * scale:
        return Region.R1
    if y < cfg.c2 * scale:
        return Region.R2
    if y > cfg.c3 * sqrt(n):
        return Region.R4
    return Region.R3


def choose_u(n: int, num_targets: int = 1, mem_budget: int = 2 << 30, alpha: float = 1.0) -> int:
    """Sieving bound u: near alpha * (n * num_targets)^(2/3), above sqrt(n),
    clamped so the floor(n/u)-element array fits the memory budget."""
    if n < 4:
        raise ValueError("choose_u requires n >= 4")
    base = int(alpha * (n * max(1, num_targets)) ** (2.0 / 3.0))
    u = max(base, ceil_sqrt(n) + 1)
    u = min(u, n)
    # eight u64/i64 arrays index the harmonic state
    per_element = 64
    max_elements = max(1, mem_budget // per_element)
    if n // u > max_elements:
        u = n // max_elements + 1
    if not ceil_sqrt(n) < u <= n:
        raise ResourceLimitError(f"no feasible u for n={n} within budget {mem_budget}")
    return u


class HarmonicArray:
    """Partial accumulators for targets v_k = floor(n/k), k = 1..floor(n/u)."""

    def __init__(self, n: int, u: int):
        if u <= ceil_sqrt(n):
            raise ValueError("u must exceed ceil(sqrt(n))")
        self.n = n
        self.u = u
        self.size = n // u
        self.finalized = False
        k = np.arange(1, self.size + 1, dtype=np.uint64)
        nn = np.uint64(n)
        self.v = nn // k
        self.D = self.v // np.uint64(u + 1)
        cs = _ceil_sqrt_vec(self.v)
        t = _pow2_at_least(np.uint64(2) * cs)
        self.t = t
        xcut = np.maximum(self.D, self.v // t)
        self.xcut = np.maximum(xcut, np.uint64(1))
        self.mcut = self.v // (self.xcut + np.uint64(1))
        self.lo = np.maximum(np.uint64(2), self.D + np.uint64(1))
        self.dnext = self.xcut.copy()
        active = self.xcut >= self.lo
        self.ynext = np.where(active, self.v // np.maximum(self.xcut, np.uint64(1)), _SENTINEL)
        self.acc = np.zeros(self.size, dtype=np.int64)
        self.final = None

    def max_mcut(self) -> int:
        return int(self.mcut.max()) if self.size else 0


def _ceil_sqrt_vec(v: np.ndarray) -> np.ndarray:
    s = np.sqrt(v.astype(np.float64)).astype(np.uint64)
    s = np.maximum(s, np.uint64(1))
    # float sqrt can be off by one either way
    for _ in range(2):
        too_big = s * s > v
        s[too_big] -= np.uint64(1)
    grow = (s + np.uint64(1)) * (s + np.uint64(1)) <= v
    s[grow] += np.uint64(1)
    return s + np.uint64(1) * (s * s < v)


def _pow2_at_least(x: np.ndarray) -> np.ndarray:
    e = np.ceil(np.log2(np.maximum(x, np.uint64(1)).astype(np.float64)))
    t = (np.uint64(1) << e.astype(np.uint64))
    for _ in range(2):
        low = t < x
        t[low] <<= np.uint64(1)
        high = (t >> np.uint64(1)) >= x
        t[high] >>= np.uint64(1)
    return np.maximum(t, np.uint64(1))


@dataclass
class RunStats:
    blocks: int = 0
    counted_items: int = 0
    dense_items: int = 0
    divtable_cap: int = 0
    divtable_released_at: int | None = None
    r4_block_len: int | None = None
    sieve_seconds: float = 0.0
    apply_seconds: float = 0.0


class MertensResult:
    """M(n) plus the simultaneous map c -> M(floor(n/c))."""

    def __init__(self, n, value, u, array_final, cp_q=None, cp_m=None, stats=None, elapsed=0.0, backend=""):
        self.n = n
        self.value = value
        self.u = u
        self._final = array_final
        self._cp_q = cp_q if cp_q is not None else np.empty(0, dtype=np.uint64)
        self._cp_m = cp_m if cp_m is not None else np.empty(0, dtype=np.int64)
        self.stats = stats
        self.elapsed = elapsed
        self.backend = backend

    @property
    def ratio(self) -> float:
        return self.value / sqrt(self.n)

    def quotient(self, c: int) -> int:
        """M(floor(n/c)) for any captured c >= 1."""
        if c < 1:
            raise ValueError("c must be >= 1")
        if self._final is not None and c <= len(self._final):
            return int(self._final[c - 1])
        q = self.n // c
        idx = np.searchsorted(self._cp_q, np.uint64(q))
        if idx < len(self._cp_q) and int(self._cp_q[idx]) == q:
            return int(self._cp_m[idx])
        raise KeyError(f"M(n//{c}) was not captured in this run (quotient budget)")

    def quotients(self):
        """Yield (c, floor(n/c), M) over distinct quotient values, ascending c."""
        c = 1
        while c <= self.n:
            q = self.n // c
            try:
                yield c, q, self.quotient(c)
            except KeyError:
                return
            c = self.n // q + 1


def _quotient_targets(n: int, K: int, u: int, budget: int) -> np.ndarray:
    """Distinct values floor(n/c) <= u to capture during sieving."""
    s = isqrt(n)
    if s + K <= budget:
        lo = np.arange(1, s + 1, dtype=np.uint64)
        hi = np.uint64(n) // np.arange(1, s + 1, dtype=np.uint64)
        qs = np.unique(np.concatenate([lo, hi]))
    else:
        c = np.arange(K + 1, K + 1 + budget, dtype=np.uint64)
        qs = np.unique(np.uint64(n) // c)
    return qs[(qs >= 1) & (qs <= np.uint64(u))]


class _ExactJob:
    """One blockwise run: sieve 1..u, apply every block, finalize."""

    def __init__(self, ns, config: EngineConfig, capture_quotients=True):
        self.ns = sorted(set(int(x) for x in ns), reverse=True)
        if any(n < 4 for n in self.ns):
            raise ValueError("exact job requires n >= 4")
        n_max = self.ns[0]
        if n_max > U64_PATH_BOUND:
            raise ResourceLimitError(
                f"n={n_max} exceeds the compiled 64-bit accumulator range ({U64_PATH_BOUND}); "
                "use mertens_exact_big"
            )
        self.config = config
        self.backend = _kernels.get_backend(config.backend)
        self.u = choose_u(n_max, len(self.ns), config.mem_budget, config.u_alpha)
        self.arrays = [HarmonicArray(n, self.u) for n in self.ns]
        self.block_len = config.block_len or max(ceil_sqrt(self.u), 1 << 22)
        self.next_y1 = 1
        self.m_running = 0
        self.r4_engaged = False
        self.stats = RunStats()
        self.capture = capture_quotients
        if capture_quotients:
            self.cp_q = _quotient_targets(n_max, self.arrays[0].size, self.u, config.quotient_budget)
        else:
            self.cp_q = np.empty(0, dtype=np.uint64)
        self.cp_m = np.zeros(len(self.cp_q), dtype=np.int64)

        primes_limit = ceil_sqrt(self.u) + 1
        plist = sieve.generate_primes(max(primes_limit, 2), config.mem_budget)
        self.log_table = sieve.build_log_table(plist)
        self.wheel = sieve.build_wheel()

        cap = min(config.fastdiv_cap, self._needed_divisor_cap())
        cap = min(cap, max(1, config.mem_budget // (4 * ENTRY_BYTES)))
        self.divtable = None
        # the pure backend divides with numpy natively; a table would be dead weight
        if cap >= 2 and self.backend.NAME == "native":
            magic, shift, scheme = self.backend.build_divisor_arrays(cap)
            self.divtable = (magic, shift, scheme)
            self.stats.divtable_cap = cap
        self._r4_threshold = max(
            int(config.region.c3 * sqrt(n_max)),
            max(a.max_mcut() for a in self.arrays),
        )

    def _needed_divisor_cap(self) -> int:
        need = 1
        for arr in self.arrays:
            need = max(need, int(arr.xcut.max()) if arr.size else 1, int(arr.mcut.max()) + 1 if arr.size else 1)
        return need

    def _sieve_block(self, y1: int, y2: int) -> np.ndarray:
        workers = self.config.effective_workers()
        if y1 == 1:
            if y2 == 1:
                return np.ones(1, dtype=np.int8)
            rest = sieve.sieve_block_logprime(
                2, y2, self.log_table, self.wheel, backend=self.config.backend, workers=workers
            )
            return np.concatenate([np.ones(1, dtype=np.int8), rest.mu])
        return sieve.sieve_block_logprime(
            y1, y2, self.log_table, self.wheel, backend=self.config.backend, workers=workers
        ).mu

    def _maybe_engage_r4(self, y1: int):
        if not self.r4_engaged and y1 > self._r4_threshold:
            self.r4_engaged = True
            self.divtable = None
            bumped = self.config.r4_block_factor * ceil_sqrt(self.u)
            if bumped > self.block_len:
                self.block_len = bumped
                self.stats.r4_block_len = bumped
            self.stats.divtable_released_at = y1

    def _block_bounds(self, y1: int):
        return y1, min(y1 + self.block_len - 1, self.u)

    def run(self, stop_after_blocks: int | None = None):
        pool = ThreadPoolExecutor(max_workers=1)
        try:
            pending = None
            pending_bounds = None
            while self.next_y1 <= self.u:
                self._maybe_engage_r4(self.next_y1)
                if pending_bounds != self._block_bounds(self.next_y1):
                    if pending is not None:
                        pending.result()
                    y1, y2 = self._block_bounds(self.next_y1)
                    pending = pool.submit(self._sieve_block, y1, y2)
                    pending_bounds = (y1, y2)
                y1, y2 = pending_bounds
                t0 = time.perf_counter()
                mu = pending.result()
                self.stats.sieve_seconds += time.perf_counter() - t0
                pending = None
                # prefetch the next block while this one is applied
                if y2 < self.u:
                    ny1 = y2 + 1
                    self._maybe_engage_r4(ny1)
                    nb = self._block_bounds(ny1)
                    pending = pool.submit(self._sieve_block, *nb)
                    pending_bounds = nb
                else:
                    pending_bounds = None
                self._apply(y1, y2, mu)
                if stop_after_blocks is not None and self.stats.blocks >= stop_after_blocks:
                    if pending is not None:
                        pending.result()
                    return False
            return True
        finally:
            pool.shutdown(wait=False)

    def _apply(self, y1: int, y2: int, mu: np.ndarray):
        t0 = time.perf_counter()
        mprefix = np.cumsum(mu, dtype=np.int64)
        mprefix += np.int64(self.m_running)
        if len(self.cp_q):
            l = np.searchsorted(self.cp_q, np.uint64(y1), side="left")
            r = np.searchsorted(self.cp_q, np.uint64(y2), side="right")
            if r > l:
                idx = (self.cp_q[l:r] - np.uint64(y1)).astype(np.int64)
                self.cp_m[l:r] = mprefix[idx]
        for arr in self.arrays:
            counted, dense = self.backend.apply_block(
                arr.acc, arr.v, arr.lo, arr.xcut, arr.mcut, arr.dnext, arr.ynext,
                y1, y2, mprefix, self.divtable,
            )
            self.stats.counted_items += int(counted)
            self.stats.dense_items += int(dense)
        self.m_running = int(mprefix[-1])
        self.next_y1 = y2 + 1
        self.stats.blocks += 1
        self.stats.apply_seconds += time.perf_counter() - t0
        if self.config.checkpoint_path:
            save_checkpoint(self.config.checkpoint_path, self)

    def finalize(self):
        if self.next_y1 <= self.u:
            raise ContractViolationError("finalize called before all blocks were applied")
        results = []
        for n, arr in zip(self.ns, self.arrays):
            arr.final = self.backend.finalize_recursion(arr.acc, arr.D)
            arr.finalized = True
            results.append(arr)
        return results


def mertens_exact(n: int, config: EngineConfig | None = None) -> MertensResult:
    """M(n) and the simultaneous quotient map, by the recursion engine."""
    if n < 1:
        raise ValueError("n must be >= 1")
    config = config or EngineConfig()
    t0 = time.perf_counter()
    if n < _DIRECT_CUTOFF:
        return _mertens_direct(n, config, t0)
    if n > U64_PATH_BOUND:
        return mertens_exact_big(n, config)
    job = _ExactJob([n], config)
    job.run()
    arr = job.finalize()[0]
    return MertensResult(
        n, int(arr.final[0]), job.u, arr.final, job.cp_q, job.cp_m,
        job.stats, time.perf_counter() - t0, job.backend.NAME,
    )


def mertens_exact_multi(ns, config: EngineConfig | None = None) -> dict[int, MertensResult]:
    """One shared sieve pass for several close targets; maps n -> result.

    Quotient capture is skipped; each result still resolves c up to its
    own array size.
    """
    config = config or EngineConfig()
    ns = sorted(set(int(x) for x in ns))
    small = [n for n in ns if n < _DIRECT_CUTOFF]
    big = [n for n in ns if n >= _DIRECT_CUTOFF]
    out = {}
    for n in small:
        out[n] = mertens_exact(n, config)
    if big:
        t0 = time.perf_counter()
        job = _ExactJob(big, config, capture_quotients=False)
        job.run()
        arrays = job.finalize()
        dt = time.perf_counter() - t0
        for n, arr in zip(job.ns, arrays):
            out[n] = MertensResult(n, int(arr.final[0]), job.u, arr.final,
                                   stats=job.stats, elapsed=dt, backend=job.backend.NAME)
    return out


def _mertens_direct(n: int, config: EngineConfig, t0: float) -> MertensResult:
    plist = sieve.generate_primes(max(2, ceil_sqrt(n)), config.mem_budget)
    block = sieve.sieve_block_naive(1, n, plist, backend=config.backend)
    prefix = np.cumsum(block.mu, dtype=np.int64)
    qs = np.unique(np.uint64(n) // np.arange(1, n + 1, dtype=np.uint64))
    cp_m = prefix[(qs - np.uint64(1)).astype(np.int64)]
    return MertensResult(
        n, int(prefix[-1]), n, None, qs, cp_m, RunStats(blocks=1),
        time.perf_counter() - t0, _kernels.get_backend(config.backend).NAME,
    )


def mertens_exact_big(n: int, config: EngineConfig | None = None, u: int | None = None) -> MertensResult:
    """Recursion engine on arbitrary-width Python integers.

    Exact for any n the sieve bound allows (u < 2^63, so n well past the
    compiled path's range); the walks run in interpreted loops, so this is
    for correctness headroom, not throughput.
    """
    if n < 4:
        return mertens_exact(n, config)
    config = config or EngineConfig()
    t0 = time.perf_counter()
    u = u or choose_u(n, 1, config.mem_budget, config.u_alpha)
    K = n // u
    v = [n // k for k in range(1, K + 1)]
    D = [vk // (u + 1) for vk in v]
    tails = [0] * K
    xcut = []
    mcut = []
    lo = []
    for idx, vk in enumerate(v):
        t = 1 << ((2 * ceil_sqrt(vk) - 1).bit_length())
        xc = max(D[idx], vk // t, 1)
        xcut.append(xc)
        mcut.append(vk // (xc + 1))
        lo.append(max(2, D[idx] + 1))
    dnext = list(xcut)
    ynext = [v[i] // xcut[i] if xcut[i] >= lo[i] else None for i in range(K)]

    plist = sieve.generate_primes(max(2, ceil_sqrt(u) + 1), config.mem_budget)
    log_table = sieve.build_log_table(plist)
    wheel = sieve.build_wheel()
    block_len = config.block_len or max(ceil_sqrt(u), 1 << 22)
    m_running = 0
    y1 = 1
    while y1 <= u:
        y2 = min(y1 + block_len - 1, u)
        if y1 == 1:
            if y2 == 1:
                mu = np.ones(1, dtype=np.int8)
            else:
                rest = sieve.sieve_block_logprime(2, y2, log_table, wheel, backend=config.backend)
                mu = np.concatenate([np.ones(1, dtype=np.int8), rest.mu])
        else:
            mu = sieve.sieve_block_logprime(y1, y2, log_table, wheel, backend=config.backend).mu
        prefix = (np.cumsum(mu, dtype=np.int64) + np.int64(m_running)).tolist()
        for k in range(K):
            vk = v[k]
            if mcut[k] >= y1:
                hi = min(mcut[k], y2)
                qn = vk // (hi + 1)
                if hi == mcut[k]:
                    qn = max(qn, xcut[k])
                total = 0
                for m in range(hi, y1 - 1, -1):
                    q = vk // m
                    total += (q - qn) * prefix[m - y1]
                    qn = q
                tails[k] += total
            if ynext[k] is not None and ynext[k] <= y2:
                d = dnext[k]
                d_lo = max(lo[k], vk // (y2 + 1) + 1)
                total = 0
                q = ynext[k]
                while True:
                    total += prefix[q - y1]
                    if d == d_lo:
                        break
                    d -= 1
                    q = vk // d
                tails[k] += total
                if d_lo - 1 >= lo[k]:
                    dnext[k] = d_lo - 1
                    ynext[k] = vk // (d_lo - 1)
                else:
                    ynext[k] = None
        m_running = prefix[-1]
        y1 = y2 + 1

    final = [0] * K
    for idx in range(K - 1, -1, -1):
        k = idx + 1
        s = 1 - tails[idx]
        for d in range(2, D[idx] + 1):
            s -= final[k * d - 1]
        final[idx] = s
    final_arr = np.array(final, dtype=np.int64)
    return MertensResult(
        n, int(final_arr[0]), u, final_arr, stats=RunStats(),
        elapsed=time.perf_counter() - t0, backend="bigint",
    )


def mertens_naive(n: int, config: EngineConfig | None = None, checkpoints=None):
    """M(n) by streaming O(n) sieve; the independent verification oracle.

    With `checkpoints` (sorted uint64 array) also returns M at each
    checkpoint <= n as a second value.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    config = config or EngineConfig()
    if n > config.naive_ceiling:
        raise CeilingExceededError(f"naive path capped at {config.naive_ceiling}; requested {n}")
    cp = None
    if checkpoints is not None:
        cp = np.asarray(checkpoints, dtype=np.uint64)
        cp_m = np.zeros(len(cp), dtype=np.int64)
    if n < 4:
        vals = {1: 1, 2: 0, 3: -1}
        m_final = vals[n]
        if cp is not None:
            prefix = np.array([vals.get(i, 0) for i in range(1, n + 1)], dtype=np.int64)
            for i, q in enumerate(cp.tolist()):
                if 1 <= q <= n:
                    cp_m[i] = prefix[q - 1]
            return m_final, cp_m
        return m_final

    plist = sieve.generate_primes(max(2, ceil_sqrt(n)), config.mem_budget)
    log_table = sieve.build_log_table(plist)
    wheel = sieve.build_wheel()
    workers = config.effective_workers()
    m_running = 0
    y1 = 1
    while y1 <= n:
        y2 = min(y1 + config.naive_block_len - 1, n)
        if y1 == 1:
            rest = sieve.sieve_block_logprime(2, y2, log_table, wheel, backend=config.backend, workers=workers)
            mu = np.concatenate([np.ones(1, dtype=np.int8), rest.mu])
        else:
            mu = sieve.sieve_block_logprime(y1, y2, log_table, wheel, backend=config.backend, workers=workers).mu
        prefix = np.cumsum(mu, dtype=np.int64)
        prefix += np.int64(m_running)
        if cp is not None:
            l = np.searchsorted(cp, np.uint64(y1), side="left")
            r = np.searchsorted(cp, np.uint64(y2), side="right")
            if r > l:
                cp_m[l:r] = prefix[(cp[l:r] - np.uint64(y1)).astype(np.int64)]
        m_running = int(prefix[-1])
        y1 = y2 + 1
    if cp is not None:
        return m_running, cp_m
    return m_running


def mertens_identity_residual(result: MertensResult) -> int:
    """sum_{x=1..n} M(floor(n/x)) - 1, regrouped over distinct quotients.

    Zero for a correct full map; a numeric check of the base identity.
    """
    n = result.n
    total = 0
    for c, q, m in result.quotients():
        count = n // q - (n // (q + 1) if q < n else 0)
        total += count * m
    return total - 1


def verify_paired(n_max: int, samples: int, seed: int, config: EngineConfig | None = None,
                  fault_inject: int | None = None):
    """Compare mertens_exact against mertens_naive on deterministic samples.

    samples == 0 means exhaustive over [1, n_max].  Returns a report dict;
    `mismatches` holds (n, exact, naive) witnesses.  `fault_inject`
    perturbs the naive value at that sample index (test hook).
    """
    config = config or EngineConfig()
    if samples == 0:
        ns = list(range(1, n_max + 1))
    else:
        rng = np.random.default_rng(seed)
        ns = sorted(set(int(x) for x in rng.integers(1, n_max + 1, size=samples)))
    cp = np.array(ns, dtype=np.uint64)
    _, naive_vals = mertens_naive(n_max, config, checkpoints=cp)
    mismatches = []
    for i, n in enumerate(ns):
        exact = mertens_exact(n, config).value
        naive = int(naive_vals[i])
        if fault_inject is not None and i == fault_inject:
            naive += 1
        if exact != naive:
            mismatches.append({"n": n, "exact": exact, "naive": naive})
    return {"n_max": n_max, "checked": len(ns), "seed": seed, "mismatches": mismatches}


# --- checkpoint format -----------------------------------------------------
# All integers little-endian.  Layout:
#   magic     8s   b"MERTCKP1"
#   version   u32  (=1)  + u32 flags (bit0: r4 engaged)
#   n         u64 lo, u64 hi          (128-bit n)
#   u         u64
#   next_y1   u64
#   K         u64
#   m_running i64
#   block_len u64
#   acc       K * i64 raw
#   cp_count  u64, then cp_q (u64 each) and cp_m (i64 each) raw

_CKPT_MAGIC = b"MERTCKP1"
_CKPT_HEAD = struct.Struct("<8sII QQ Q Q Q q Q")


def save_checkpoint(path: str, job: _ExactJob) -> None:
    if len(job.ns) != 1:
        raise ContractViolationError("checkpoints cover single-target jobs only")
    n = job.ns[0]
    arr = job.arrays[0]
    flags = 1 if job.r4_engaged else 0
    head = _CKPT_HEAD.pack(
        _CKPT_MAGIC, 1, flags, n & (2**64 - 1), n >> 64, job.u,
        job.next_y1, arr.size, job.m_running, job.block_len,
    )
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(head)
        f.write(arr.acc.astype("<i8", copy=False).tobytes())
        f.write(struct.pack("<Q", len(job.cp_q)))
        f.write(job.cp_q.astype("<u8", copy=False).tobytes())
        f.write(job.cp_m.astype("<i8", copy=False).tobytes())
    os.replace(tmp, path)


def load_checkpoint(path: str, config: EngineConfig) -> _ExactJob:
    with open(path, "rb") as f:
        head = f.read(_CKPT_HEAD.size)
        magic, version, flags, n_lo, n_hi, u, next_y1, K, m_running, block_len = _CKPT_HEAD.unpack(head)
        if magic != _CKPT_MAGIC or version != 1:
            raise ContractViolationError("not a checkpoint file")
        n = (n_hi << 64) | n_lo
        acc = np.frombuffer(f.read(K * 8), dtype="<i8").astype(np.int64)
        (cp_count,) = struct.unpack("<Q", f.read(8))
        cp_q = np.frombuffer(f.read(cp_count * 8), dtype="<u8").astype(np.uint64)
        cp_m = np.frombuffer(f.read(cp_count * 8), dtype="<i8").astype(np.int64)
    config = replace(config, checkpoint_path=config.checkpoint_path, block_len=config.block_len)
    job = _ExactJob.__new__(_ExactJob)
    job.__init__([n], config)
    if job.u != u:
        raise ContractViolationError(f"checkpoint built with u={u}, config derives u={job.u}")
    arr = job.arrays[0]
    arr.acc[:] = acc
    job.cp_q = cp_q
    job.cp_m = cp_m
    job.m_running = m_running
    job.block_len = block_len
    job.r4_engaged = bool(flags & 1)
    if job.r4_engaged:
        job.divtable = None
        job.stats.divtable_released_at = -1
    # fast-forward the dense-walk state to next_y1 without touching acc
    _replay_walk_state(arr, next_y1)
    job.next_y1 = next_y1
    return job


def _replay_walk_state(arr: HarmonicArray, next_y1: int):
    """Recompute dnext/ynext as they stood when sieving reached next_y1."""
    if next_y1 <= 1:
        return
    b = np.uint64(next_y1 - 1)
    for k in range(arr.size):
        if arr.ynext[k] > b:
            continue
        vk = int(arr.v[k])
        lok = int(arr.lo[k])
        d_lo = max(lok, vk // next_y1 + 1)
        nxt = d_lo - 1
        arr.dnext[k] = nxt
        arr.ynext[k] = vk // nxt if nxt >= lok else _SENTINEL


def resume_exact(path: str, config: EngineConfig | None = None) -> MertensResult:
    """Continue a checkpointed run to completion."""
    config = config or EngineConfig()
    t0 = time.perf_counter()
    job = load_checkpoint(path, config)
    job.run()
    arr = job.finalize()[0]
    return MertensResult(
        job.ns[0], int(arr.final[0]), job.u, arr.final, job.cp_q, job.cp_m,
        job.stats, time.perf_counter() - t0, job.backend.NAME,
    )
