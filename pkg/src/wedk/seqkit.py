"""Sequence indexes and the periodicity-reduction engine.

* ``LceIndex``: suffix array + Kasai LCP + sparse-table minima, exact O(1)
  longest-common-extension queries after an O(n log n) build.
* ``PeriodIndex``: shortest period of a fragment, answered with LCE probes.
* ``periodicity_reduction``: left-to-right scan capping every power ``Q^(e+1)``
  with ``Q`` accepted by a membership oracle down to ``Q^e``.

Balanced-mode oracles use the forest token convention: even ids open, odd
ids close.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from ._jit import njit
from .core import as_seq

# ---------------------------------------------------------------------------
# suffix array / LCP / range minimum


def suffix_array(text: np.ndarray) -> np.ndarray:
    """Prefix doubling; ``text`` holds non-negative ints."""
    n = len(text)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    rank = np.unique(text, return_inverse=True)[1].astype(np.int64)
    sa = np.argsort(rank, kind="stable")
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        if k < n:
            second[: n - k] = rank[k:]
        sa = np.lexsort((second, rank))
        r1, r2 = rank[sa], second[sa]
        change = np.empty(n, dtype=np.int64)
        change[0] = 0
        change[1:] = (r1[1:] != r1[:-1]) | (r2[1:] != r2[:-1])
        new = np.empty(n, dtype=np.int64)
        new[sa] = np.cumsum(change)
        rank = new
        if rank[sa[-1]] == n - 1 or k >= n:
            return sa.astype(np.int64)
        k *= 2


@njit(cache=True)
def _kasai(text, sa):
    n = len(text)
    rank = np.empty(n, dtype=np.int64)
    for i in range(n):
        rank[sa[i]] = i
    lcp = np.zeros(n, dtype=np.int64)  # lcp[r] = lcp(sa[r-1], sa[r])
    h = 0
    for i in range(n):
        r = rank[i]
        if r > 0:
            j = sa[r - 1]
            while i + h < n and j + h < n and text[i + h] == text[j + h]:
                h += 1
            lcp[r] = h
            if h > 0:
                h -= 1
        else:
            h = 0
    return rank, lcp


class RangeMin:
    """Sparse table for inclusive range-minimum queries."""

    __slots__ = ("levels", "n")

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=np.int64)
        self.n = len(v)
        levels = [v]
        span = 1
        while 2 * span <= self.n:
            prev = levels[-1]
            levels.append(np.minimum(prev[:-span], prev[span:]))
            span *= 2
        self.levels = levels

    def min(self, i: int, j: int) -> int:
        """min(values[i..j]) inclusive; requires i <= j."""
        if not 0 <= i <= j < self.n:
            raise IndexError(f"range [{i}, {j}] outside [0, {self.n})")
        lvl = (j - i + 1).bit_length() - 1
        row = self.levels[lvl]
        a, b = row[i], row[j - (1 << lvl) + 1]
        return int(a if a < b else b)


class LceIndex:
    """Longest common extension over one sequence or a pair.

    With one sequence, ``lce(x, y)`` compares ``X[x..]`` with ``X[y..]``.
    With two, it compares ``X[x..]`` with ``Y[y..]``.  The pair is indexed
    jointly as ``X+1 . 0 . Y+1`` so the separator occurs nowhere else.
    """

    __slots__ = ("nx", "ny", "joint", "text", "rank", "_rmq")

    def __init__(self, X, Y=None):
        X = as_seq(X)
        self.nx = len(X)
        self.joint = Y is not None
        if self.joint:
            Y = as_seq(Y)
            self.ny = len(Y)
            text = np.concatenate([X + 1, np.zeros(1, dtype=np.int64), Y + 1])
        else:
            self.ny = self.nx
            text = X + 1
        if len(text) and text.min() < 0:
            raise ValueError("symbol ids must be non-negative")
        self.text = text
        sa = suffix_array(text)
        self.rank, lcp = _kasai(text, sa)
        self._rmq = RangeMin(lcp) if len(lcp) else None

    def _raw(self, p: int, q: int) -> int:
        n = len(self.text)
        if p == q:
            return n - p
        if p >= n or q >= n:
            return 0
        a, b = self.rank[p], self.rank[q]
        if a > b:
            a, b = b, a
        return self._rmq.min(int(a) + 1, int(b))

    def lce(self, x: int, y: int) -> int:
        if not (0 <= x <= self.nx and 0 <= y <= self.ny):
            raise IndexError(f"query ({x}, {y}) out of range")
        if self.joint:
            if x == self.nx or y == self.ny:
                return 0
            return self._raw(x, self.nx + 1 + y)
        if x == y:
            return self.nx - x
        if x == self.nx or y == self.nx:
            return 0
        return self._raw(x, y)


def build_lce_index(X, Y=None) -> LceIndex:
    return LceIndex(X, Y)


class PeriodIndex:
    """Shortest-period queries for fragments of one sequence."""

    __slots__ = ("lce_index", "n")

    def __init__(self, X, lce_index: LceIndex | None = None):
        X = as_seq(X)
        self.n = len(X)
        self.lce_index = lce_index if lce_index is not None else LceIndex(X)

    def shortest_period(self, i: int, j: int) -> int | None:
        """per(X[i..j)) if the fragment has exponent >= 2, else None."""
        if not 0 <= i <= j <= self.n:
            raise IndexError(f"fragment [{i}, {j}) out of range")
        length = j - i
        lce = self.lce_index.lce
        for p in range(1, length // 2 + 1):
            if lce(i, i + p) >= length - p:
                return p
        return None


def shortest_period(idx: PeriodIndex, i: int, j: int) -> int | None:
    return idx.shortest_period(i, j)


def is_primitive(idx: PeriodIndex, i: int, j: int) -> bool:
    if not 0 <= i < j <= idx.n:
        raise ValueError("primitivity is defined for non-empty fragments")
    p = idx.shortest_period(i, j)
    return not (p is not None and (j - i) % p == 0)


# ---------------------------------------------------------------------------
# membership oracles


class MembershipOracle:
    """Predicate on a primitive fragment ``seq[i..j)`` of the processed sequence."""

    def __call__(self, seq: np.ndarray, i: int, j: int) -> bool:  # pragma: no cover
        raise NotImplementedError


class LengthOracle(MembershipOracle):
    """Every primitive fragment of length at most ``max_len``."""

    def __init__(self, max_len: int):
        self.max_len = int(max_len)

    def __call__(self, seq, i, j):
        return j - i <= self.max_len


class BalancedOracle(MembershipOracle):
    """Primitive balanced fragments (even = open, odd = close) up to ``max_len``."""

    def __init__(self, max_len: int):
        self.max_len = int(max_len)

    def __call__(self, seq, i, j):
        if j - i > self.max_len:
            return False
        h = 0
        for t in range(i, j):
            h += 1 if seq[t] % 2 == 0 else -1
            if h < 0:
                return False
        return h == 0


class FunctionOracle(MembershipOracle):
    def __init__(self, fn: Callable[[int, int], bool]):
        self.fn = fn

    def __call__(self, seq, i, j):
        return bool(self.fn(i, j))


# ---------------------------------------------------------------------------
# periodicity reduction


@njit(cache=True)
def _window_period(P, r, length, fail):
    # shortest period of P[r..r+length) by the failure function
    fail[0] = 0
    k = 0
    for t in range(1, length):
        c = P[r + t]
        while k > 0 and c != P[r + k]:
            k = fail[k - 1]
        if c == P[r + k]:
            k += 1
        fail[t] = k
    return length - fail[length - 1]


@njit(cache=True)
def _perred_kernel(P, e, max_len, balanced):
    n = len(P)
    out = np.empty(n, dtype=np.int64)
    fail = np.empty(max(2 * e, 1), dtype=np.int64)
    olen = 0
    r = 0
    while r < n:
        q = 1
        if r + 2 * e <= n:
            p = _window_period(P, r, 2 * e, fail)
            if 2 * p <= 2 * e:
                q = p
        ok = False
        need = e * q
        if q <= max_len and r + q + need <= n:
            good = True
            if balanced:
                h = 0
                for t in range(r, r + q):
                    if P[t] % 2 == 0:
                        h += 1
                    else:
                        h -= 1
                    if h < 0:
                        good = False
                        break
                if h != 0:
                    good = False
            if good:
                t = 0
                while t < need and P[r + t] == P[r + q + t]:
                    t += 1
                ok = t == need
        if ok:
            r += q
        else:
            out[olen] = P[r]
            olen += 1
            r += 1
    return out[:olen].copy()


def _perred_generic(P: np.ndarray, e: int, Q: MembershipOracle) -> np.ndarray:
    n = len(P)
    pidx = PeriodIndex(P)
    lce = pidx.lce_index.lce
    out = []
    r = 0
    while r < n:
        q = 1
        if r + 2 * e <= n:
            p = pidx.shortest_period(r, r + 2 * e)
            if p is not None:
                q = p
        m = lce(r, r + q) if r + q <= n else 0
        if m >= e * q and Q(P, r, r + q):
            r += q
        else:
            out.append(P[r])
            r += 1
    return np.array(out, dtype=np.int64)


def periodicity_reduction(P, e: int, Q: MembershipOracle, *, generic: bool = False) -> np.ndarray:
    """Cap every power of an accepted primitive ``Q`` at exponent ``e``.

    Length/balanced oracles run in the compiled scan; any other oracle (or
    ``generic=True``) takes the index-backed route.
    """
    P = as_seq(P)
    if e < 1:
        raise ValueError("e must be positive")
    if not generic and type(Q) is LengthOracle:
        return _perred_kernel(P, e, Q.max_len, False)
    if not generic and type(Q) is BalancedOracle:
        return _perred_kernel(P, e, Q.max_len, True)
    return _perred_generic(P, e, Q)
