"""Batch Newton-point kernels over enumerated Weyl elements.

Each enumerated element ``w`` gives a signed permutation ``A`` of the
``n * m`` torus coordinates (``w`` on each factor, shift, twist on wrap).
``nu(w)`` is minus the cycle average of ``mu`` under ``A``: on a cycle with
trivial sign product, ``nu_{i_0} = -(1/L) * sum_t c_t mu_{i_t}`` and
``nu_{i_t} = c_t nu_{i_0}``; on a cycle with sign product ``-1`` it is zero.

Rationals are packed exactly into int64 words (``code = (num + off) * (D + 1)
+ den`` per coordinate after dominantization), and duplicates are merged in
an open-addressing table.  Two interchangeable backends:

* numba ``@njit`` (default),
* pure numpy, vectorized over chunks; selected with ``NEWTON_STRATA_NO_NUMBA=1``
  or when numba is unavailable.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def default_backend() -> str:
    if os.environ.get("NEWTON_STRATA_NO_NUMBA", "").strip() not in ("", "0") or not HAVE_NUMBA:
        return "numpy"
    return "numba"


SORT_DESC, SORT_ABS, SORT_D = 0, 1, 2


@dataclass
class KernelProblem:
    """Flattened description of an enumeration, shared by both backends."""

    n: int
    m: int
    sort_mode: int
    sign_mode: int
    radix: np.ndarray        # (n,) int64
    full: np.ndarray         # (n,) bool
    table_perm: np.ndarray   # (n, T, m) int64
    table_sign: np.ndarray   # (n, T, m) int64
    twist_perm: np.ndarray   # (m,) int64
    twist_sign: np.ndarray   # (m,) int64
    mu: np.ndarray           # (n*m,) int64, scaled
    den_max: int
    offset: int
    bits: int
    per_word: int
    words: int

    @property
    def total(self) -> int:
        return int(math.prod(int(x) for x in self.radix))


def make_codec(n: int, m: int, mu: np.ndarray) -> Tuple[int, int, int, int, int]:
    N = n * m
    den_max = N
    bound = int(np.max(np.abs(mu))) if mu.size else 0
    offset = bound * den_max
    code_max = (2 * offset) * (den_max + 1) + den_max
    bits = max(1, int(code_max).bit_length())
    if bits > 62:
        raise OverflowError("cocharacter weights too large for exact packing")
    per_word = 62 // bits
    words = -(-N // per_word)
    return den_max, offset, bits, per_word, words


# ----------------------------------------------------------------------------
# numba backend


@njit(cache=True, nogil=True)
def _decode_full(idx, m, sign_mode, fact, perm_out, sign_out, pool):
    if sign_mode == 0:
        S = 1
    elif sign_mode == 1:
        S = 1 << m
    else:
        S = 1 << (m - 1)
    p = idx // S
    s = idx % S
    for i in range(m):
        pool[i] = i
    left = m
    for k in range(m, 0, -1):
        f = fact[k - 1]
        d = p // f
        p = p % f
        perm_out[m - k] = pool[d]
        for j in range(d, left - 1):
            pool[j] = pool[j + 1]
        left -= 1
    if sign_mode == 0:
        for i in range(m):
            sign_out[i] = 1
    elif sign_mode == 1:
        for i in range(m):
            sign_out[i] = -1 if (s >> i) & 1 else 1
    else:
        neg = 0
        for i in range(m - 1):
            if (s >> i) & 1:
                sign_out[i] = -1
                neg += 1
            else:
                sign_out[i] = 1
        sign_out[m - 1] = -1 if neg % 2 == 1 else 1


@njit(cache=True, nogil=True)
def _less(n1, d1, n2, d2):
    return n1 * d2 < n2 * d1


@njit(cache=True, nogil=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True, nogil=True)
def _mix(keys_row, words):
    h = np.uint64(1469598103934665603)
    for w in range(words):
        h ^= np.uint64(keys_row[w] & 0x7FFFFFFFFFFFFFFF)
        h *= np.uint64(1099511628211)
        h ^= h >> np.uint64(29)
    return h


@njit(cache=True, nogil=True)
def _run_numba(start, stop, n, m, sort_mode, sign_mode, radix, full, table_perm, table_sign,
               twist_perm, twist_sign, mu, den_max, offset, per_word, words, bits,
               keys, used, counts, first, state):
    """Process elements ``[start, stop)``.  Returns the next unprocessed index
    (``< stop`` when the table needs to grow)."""
    N = n * m
    cap = keys.shape[0]
    fact = np.ones(m + 1, dtype=np.int64)
    for i in range(1, m + 1):
        fact[i] = fact[i - 1] * i
    perm = np.empty(m, dtype=np.int64)
    sign = np.empty(m, dtype=np.int64)
    pool = np.empty(m, dtype=np.int64)
    T = np.empty(N, dtype=np.int64)
    S = np.empty(N, dtype=np.int64)
    num = np.empty(N, dtype=np.int64)
    den = np.empty(N, dtype=np.int64)
    member = np.empty(N, dtype=np.int64)
    csign = np.empty(N, dtype=np.int64)
    seen = np.empty(N, dtype=np.bool_)
    key = np.empty(words, dtype=np.int64)
    fn = np.empty(m, dtype=np.int64)
    fd = np.empty(m, dtype=np.int64)

    for k in range(start, stop):
        if state[0] * 2 >= cap:
            return k
        rem = k
        for s in range(n):
            d = rem % radix[s]
            rem = rem // radix[s]
            if full[s]:
                _decode_full(d, m, sign_mode, fact, perm, sign, pool)
            else:
                for i in range(m):
                    perm[i] = table_perm[s, d, i]
                    sign[i] = table_sign[s, d, i]
            tgt = (s + 1) % n
            for i in range(m):
                j = perm[i]
                sg = sign[i]
                if s == n - 1:
                    sg *= twist_sign[j]
                    j = twist_perm[j]
                T[s * m + i] = tgt * m + j
                S[s * m + i] = sg
        for i in range(N):
            seen[i] = False
        for i0 in range(N):
            if seen[i0]:
                continue
            L = 0
            c = 1
            i = i0
            total = 0
            while True:
                seen[i] = True
                member[L] = i
                csign[L] = c
                total += c * mu[i]
                L += 1
                c *= S[i]
                i = T[i]
                if i == i0:
                    break
            if c < 0:
                for t in range(L):
                    num[member[t]] = 0
                    den[member[t]] = 1
            else:
                for t in range(L):
                    num[member[t]] = -csign[t] * total
                    den[member[t]] = L
        # dominantize each factor, reduce, pack
        for w in range(words):
            key[w] = 0
        for s in range(n):
            neg = 0
            for i in range(m):
                a = num[s * m + i]
                b = den[s * m + i]
                if sort_mode != SORT_DESC and a < 0:
                    neg += 1
                    a = -a
                fn[i] = a
                fd[i] = b
            for i in range(1, m):
                a = fn[i]
                b = fd[i]
                j = i - 1
                while j >= 0 and _less(fn[j], fd[j], a, b):
                    fn[j + 1] = fn[j]
                    fd[j + 1] = fd[j]
                    j -= 1
                fn[j + 1] = a
                fd[j + 1] = b
            if sort_mode == SORT_D and neg % 2 == 1 and fn[m - 1] != 0:
                fn[m - 1] = -fn[m - 1]
            for i in range(m):
                g = _gcd(fn[i], fd[i])
                a = fn[i] // g
                b = fd[i] // g
                code = (a + offset) * (den_max + 1) + b
                pos = s * m + i
                key[pos // per_word] |= code << ((pos % per_word) * bits)
        h = _mix(key, words)
        slot = np.int64(h & np.uint64(cap - 1))
        while True:
            if not used[slot]:
                used[slot] = True
                for w in range(words):
                    keys[slot, w] = key[w]
                counts[slot] = 1
                first[slot] = k
                state[0] += 1
                break
            same = True
            for w in range(words):
                if keys[slot, w] != key[w]:
                    same = False
                    break
            if same:
                counts[slot] += 1
                if k < first[slot]:
                    first[slot] = k
                break
            slot = (slot + 1) & (cap - 1)
    return stop


class HashTable:
    def __init__(self, words: int, cap: int = 1024):
        self.words = words
        self._alloc(cap)

    def _alloc(self, cap):
        self.keys = np.zeros((cap, self.words), dtype=np.int64)
        self.used = np.zeros(cap, dtype=np.bool_)
        self.counts = np.zeros(cap, dtype=np.int64)
        self.first = np.zeros(cap, dtype=np.int64)
        self.state = np.zeros(1, dtype=np.int64)

    def items(self) -> Dict[Tuple[int, ...], Tuple[int, int]]:
        idx = np.nonzero(self.used)[0]
        return {tuple(int(x) for x in self.keys[i]): (int(self.counts[i]), int(self.first[i])) for i in idx}

    def grow(self):
        old = self.items()
        self._alloc(self.keys.shape[0] * 4)
        cap = self.keys.shape[0]
        for key, (cnt, fst) in old.items():
            h = int(_mix_py(key))
            slot = h & (cap - 1)
            while self.used[slot]:
                slot = (slot + 1) & (cap - 1)
            self.used[slot] = True
            self.keys[slot] = key
            self.counts[slot] = cnt
            self.first[slot] = fst
        self.state[0] = len(old)


def _mix_py(key) -> int:
    M = (1 << 64) - 1
    h = 1469598103934665603
    for w in key:
        h ^= (int(w) & 0x7FFFFFFFFFFFFFFF)
        h = (h * 1099511628211) & M
        h ^= h >> 29
    return h


def run_numba(prob: KernelProblem, start: int, stop: int) -> Dict[Tuple[int, ...], Tuple[int, int]]:
    table = HashTable(prob.words)
    k = start
    while k < stop:
        k = _run_numba(k, stop, prob.n, prob.m, prob.sort_mode, prob.sign_mode, prob.radix, prob.full,
                       prob.table_perm, prob.table_sign, prob.twist_perm, prob.twist_sign, prob.mu,
                       prob.den_max, prob.offset, prob.per_word, prob.words, prob.bits,
                       table.keys, table.used, table.counts, table.first, table.state)
        if k < stop:
            table.grow()
    return table.items()


# ----------------------------------------------------------------------------
# numpy backend


def _decode_full_np(idx: np.ndarray, m: int, sign_mode: int):
    B = idx.shape[0]
    S = (1, 1 << m, 1 << max(m - 1, 0))[sign_mode]
    p = idx // S
    s = idx % S
    avail = np.ones((B, m), dtype=bool)
    perm = np.empty((B, m), dtype=np.int64)
    for k in range(m, 0, -1):
        f = math.factorial(k - 1)
        d = p // f
        p = p % f
        rank = np.cumsum(avail, axis=1) - 1
        hit = avail & (rank == d[:, None])
        choice = np.argmax(hit, axis=1)
        perm[:, m - k] = choice
        avail[np.arange(B), choice] = False
    bits = (s[:, None] >> np.arange(m)[None, :]) & 1
    if sign_mode == 0:
        sign = np.ones((B, m), dtype=np.int64)
    elif sign_mode == 1:
        sign = np.where(bits == 1, -1, 1).astype(np.int64)
    else:
        bits = bits.copy()
        bits[:, m - 1] = bits[:, : m - 1].sum(axis=1) % 2
        sign = np.where(bits == 1, -1, 1).astype(np.int64)
    return perm, sign


def run_numpy_chunk(prob: KernelProblem, start: int, stop: int) -> Dict[Tuple[int, ...], Tuple[int, int]]:
    n, m = prob.n, prob.m
    N = n * m
    ks = np.arange(start, stop, dtype=np.int64)
    B = ks.shape[0]
    rem = ks.copy()
    T = np.empty((B, N), dtype=np.int64)
    S = np.empty((B, N), dtype=np.int64)
    for s in range(n):
        d = rem % prob.radix[s]
        rem //= prob.radix[s]
        if prob.full[s]:
            perm, sign = _decode_full_np(d, m, prob.sign_mode)
        else:
            perm = prob.table_perm[s][d]
            sign = prob.table_sign[s][d]
        if s == n - 1:
            sign = sign * prob.twist_sign[perm]
            perm = prob.twist_perm[perm]
        T[:, s * m:(s + 1) * m] = ((s + 1) % n) * m + perm
        S[:, s * m:(s + 1) * m] = sign
    start_pos = np.broadcast_to(np.arange(N), (B, N))
    pos = start_pos.copy()
    c = np.ones((B, N), dtype=np.int64)
    total = prob.mu[pos].copy()
    done = np.zeros((B, N), dtype=bool)
    L = np.zeros((B, N), dtype=np.int64)
    tot_sign = np.ones((B, N), dtype=np.int64)
    for t in range(1, N + 1):
        c = c * np.take_along_axis(S, pos, axis=1)
        pos = np.take_along_axis(T, pos, axis=1)
        back = (~done) & (pos == start_pos)
        L[back] = t
        tot_sign[back] = c[back]
        done |= back
        total += np.where(done, 0, c * prob.mu[pos])
    num = np.where(tot_sign > 0, -total, 0)
    den = np.where(tot_sign > 0, L, 1)
    keys = np.zeros((B, prob.words), dtype=np.int64)
    for s in range(n):
        a = num[:, s * m:(s + 1) * m]
        b = den[:, s * m:(s + 1) * m]
        if prob.sort_mode != SORT_DESC:
            neg = (a < 0).sum(axis=1)
            a = np.abs(a)
        order = np.argsort(-(a / b), axis=1, kind="stable")
        a = np.take_along_axis(a, order, axis=1)
        b = np.take_along_axis(b, order, axis=1)
        if prob.sort_mode == SORT_D:
            flip = (neg % 2 == 1) & (a[:, m - 1] != 0)
            a[flip, m - 1] = -a[flip, m - 1]
        g = np.gcd(a, b)
        a, b = a // g, b // g
        code = (a + prob.offset) * (prob.den_max + 1) + b
        for i in range(m):
            p = s * m + i
            keys[:, p // prob.per_word] |= code[:, i] << ((p % prob.per_word) * prob.bits)
    uniq, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    return {tuple(int(x) for x in row): (int(cnt), int(ks[f])) for row, f, cnt in zip(uniq, first, counts)}


def run_numpy(prob: KernelProblem, start: int, stop: int, chunk: int = 1 << 15):
    merged: Dict[Tuple[int, ...], Tuple[int, int]] = {}
    for lo in range(start, stop, chunk):
        part = run_numpy_chunk(prob, lo, min(stop, lo + chunk))
        merge_into(merged, part)
    return merged


def merge_into(acc: Dict, part: Dict) -> None:
    for key, (cnt, fst) in part.items():
        if key in acc:
            c0, f0 = acc[key]
            acc[key] = (c0 + cnt, min(f0, fst))
        else:
            acc[key] = (cnt, fst)


def run(prob: KernelProblem, backend: str = None, threads: int = 1) -> Dict[Tuple[int, ...], Tuple[int, int]]:
    """Distinct packed Newton points -> (element count, first element index)."""
    backend = backend or default_backend()
    total = prob.total
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    fn = run_numba if backend == "numba" else run_numpy
    threads = max(1, int(threads))
    if threads == 1 or total < 4096:
        return fn(prob, 0, total)
    from concurrent.futures import ThreadPoolExecutor

    bounds = [total * i // threads for i in range(threads + 1)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(lambda i: fn(prob, bounds[i], bounds[i + 1]), range(threads)))
    merged: Dict = {}
    for part in parts:
        merge_into(merged, part)
    return merged


def unpack(prob: KernelProblem, key: Tuple[int, ...]) -> List[Tuple[int, int]]:
    """Packed key -> list of reduced (num, den) per coordinate (scaled units)."""
    mask = (1 << prob.bits) - 1
    out = []
    for p in range(prob.n * prob.m):
        code = (key[p // prob.per_word] >> ((p % prob.per_word) * prob.bits)) & mask
        a, b = divmod(code, prob.den_max + 1)
        out.append((a - prob.offset, b))
    return out
