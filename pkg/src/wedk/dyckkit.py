"""Weighted Dyck edit distance: preprocessing, matching DPs and the kernel.

A string over opening symbols ``T`` and closing symbols ``T-bar`` is
repaired into a well-nested word.  Costs come from a skewmetric table whose
``complement`` array maps every symbol to its partner.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._jit import njit
from .core import INF, SCALE, Alphabet, FormatError, WeightTable, as_seq
from .seqkit import LengthOracle, RangeMin, periodicity_reduction


class DyckAlphabet:
    """Alphabet split into opening and closing symbols paired by an involution."""

    __slots__ = ("alphabet", "comp", "is_open", "opens")

    def __init__(self, alphabet: Alphabet, pairs: Iterable[tuple[str, str]]):
        self.alphabet = alphabet
        comp = np.zeros(len(alphabet) + 1, dtype=np.int64)
        is_open = np.zeros(len(alphabet) + 1, dtype=np.bool_)
        for o, c in pairs:
            a, b = alphabet.id(o), alphabet.id(c)
            if a == b or comp[a] or comp[b]:
                raise FormatError(f"pair ({o}, {c}) reuses a symbol")
            comp[a], comp[b] = b, a
            is_open[a] = True
        if not comp[1:].all():
            missing = [alphabet.name(s) for s in range(1, len(alphabet) + 1) if not comp[s]]
            raise FormatError(f"symbols without a partner: {missing}")
        comp.setflags(write=False)
        is_open.setflags(write=False)
        self.comp = comp
        self.is_open = is_open
        self.opens = np.flatnonzero(is_open).astype(np.int64)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "DyckAlphabet":
        pairs = list(pairs)
        names = [o for o, _ in pairs] + [c for _, c in pairs]
        return cls(Alphabet(names), pairs)

    def heights(self, X) -> np.ndarray:
        X = as_seq(X)
        return np.concatenate([[0], np.cumsum(np.where(self.is_open[X], 1, -1))]).astype(np.int64)

    def revcomp(self, X) -> np.ndarray:
        return self.comp[as_seq(X)[::-1]].copy()

    def unit_weights(self) -> WeightTable:
        return WeightTable.unit(self.alphabet, self.comp)


def parse_pairs(text: str) -> list[tuple[str, str]]:
    out = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 2:
            raise FormatError(f"line {ln}: expected OPEN<TAB>CLOSE")
        out.append((parts[0].strip(), parts[1].strip()))
    if not out:
        raise FormatError("no bracket pairs defined")
    return out


# ---------------------------------------------------------------------------
# closed-form costs of one and two symbols


def single_cost(x: int, w: WeightTable) -> int:
    return int(w.matrix[x, 0])


def pair_cost_table(w: WeightTable, da: DyckAlphabet) -> np.ndarray:
    """PC[x, y] = min over z in T and epsilon of w(x, z) + w(y, comp z)."""
    W = w.matrix
    best = W[:, 0][:, None] + W[:, 0][None, :]
    for z in da.opens:
        best = np.minimum(best, W[:, z][:, None] + W[:, da.comp[z]][None, :])
    return best


def pair_cost(x: int, y: int, w: WeightTable, da: DyckAlphabet) -> int:
    W = w.matrix
    best = int(W[x, 0] + W[y, 0])
    for z in da.opens:
        best = min(best, int(W[x, z] + W[y, da.comp[z]]))
    return best


# ---------------------------------------------------------------------------
# preprocessing and height profile


def greedy_preprocess(X, da: DyckAlphabet) -> np.ndarray:
    """Cancel adjacent ``x comp(x)`` pairs (x opening) until none is left."""
    X = as_seq(X)
    stack: list[int] = []
    is_open, comp = da.is_open, da.comp
    for c in X.tolist():
        if stack and is_open[stack[-1]] and c == comp[stack[-1]]:
            stack.pop()
        else:
            stack.append(c)
    return np.array(stack, dtype=np.int64)


@dataclass
class HeightProfile:
    H: np.ndarray
    peaks: np.ndarray
    valleys: np.ndarray

    @classmethod
    def of(cls, X, da: DyckAlphabet) -> "HeightProfile":
        H = da.heights(X)
        mid = H[1:-1]
        left, right = H[:-2], H[2:]
        valleys = np.flatnonzero((left > mid) & (mid < right)) + 1
        peaks = np.flatnonzero((left < mid) & (mid > right)) + 1
        return cls(H, peaks, valleys)


def valley_count(X, da: DyckAlphabet) -> int:
    return len(HeightProfile.of(X, da).valleys)


def peak_lower_bound(X, da: DyckAlphabet) -> int:
    """Units of cost forced by peaks of a preprocessed string.

    Every peak ``x y`` (x opening, y closing, not partners) contains an edited
    position, peaks are disjoint, and one unit of cost edits at most two
    positions.
    """
    return (len(HeightProfile.of(X, da).peaks) + 1) // 2


def is_noncrossing(M: Iterable[tuple[int, int]]) -> bool:
    M = sorted(M)
    used: set[int] = set()
    for i, j in M:
        if i >= j or i in used or j in used:
            return False
        used.update((i, j))
    for a, b in M:
        for c, d in M:
            if a < c < b < d:
                return False
    return True


# ---------------------------------------------------------------------------
# interval DPs


@njit(cache=True)
def _dense_dp(X, S, PC, INFV):
    n = len(X)
    D = np.zeros((n + 1, n + 1), dtype=np.int64)
    choice = np.full((n + 1, n + 1), -1, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n + 1):
            best = S[X[i]] + D[i + 1, j]
            ch = -1
            for m in range(i + 1, j):
                v = PC[X[i], X[m]] + D[i + 1, m] + D[m + 1, j]
                if v < best:
                    best = v
                    ch = m
            D[i, j] = best if best < INFV else INFV
            choice[i, j] = ch
    return D, choice


@njit(cache=True)
def _find(J, ptr, x, y):
    lo, hi = ptr[x], ptr[x + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        if J[mid] < y:
            lo = mid + 1
        else:
            hi = mid
    if lo < ptr[x + 1] and J[lo] == y:
        return lo
    return -1


@njit(cache=True)
def _valid_ends(H, k):
    # J(i): right ends j whose interval [i..j) has height lower bound <= k
    n = len(H) - 1
    shift = n + 1
    order = np.argsort(H, kind="mergesort")
    hptr = np.zeros(2 * n + 4, dtype=np.int64)
    for p in range(n + 1):
        hptr[H[p] + shift + 1] += 1
    for h in range(1, len(hptr)):
        hptr[h] += hptr[h - 1]
    ptr = np.zeros(n + 2, dtype=np.int64)
    cap = 16 * (n + 1)
    J = np.empty(cap, dtype=np.int64)
    cnt = 0
    for i in range(n + 1):
        ptr[i] = cnt
        runmin = H[i]
        j = i
        while True:
            a = H[i] - runmin
            if a > 2 * k:
                break
            b = H[j] - runmin
            if (a + 1) // 2 + (b + 1) // 2 <= k:
                if cnt == cap:
                    cap *= 2
                    J2 = np.empty(cap, dtype=np.int64)
                    J2[:cnt] = J[:cnt]
                    J = J2
                J[cnt] = j
                cnt += 1
            if b > 2 * k:
                # heights stay above runmin + 2k until the next return to that level
                target = runmin + 2 * k + shift
                lo, hi = hptr[target], hptr[target + 1]
                while lo < hi:
                    mid = (lo + hi) // 2
                    if order[mid] <= j:
                        lo = mid + 1
                    else:
                        hi = mid
                if lo == hptr[target + 1]:
                    break
                j = order[lo]
            else:
                j += 1
                if j > n:
                    break
                if H[j] < runmin:
                    runmin = H[j]
    ptr[n + 1] = cnt
    return J[:cnt].copy(), ptr


@njit(cache=True)
def _banded_dp(X, S, PC, J, ptr, INFV):
    n = len(X)
    val = np.full(len(J), INFV, dtype=np.int64)
    choice = np.full(len(J), -1, dtype=np.int64)
    for i in range(n, -1, -1):
        for e in range(ptr[i], ptr[i + 1]):
            j = J[e]
            if j == i:
                val[e] = 0
                continue
            best = INFV
            ch = -1
            s = _find(J, ptr, i + 1, j)
            if s >= 0:
                best = S[X[i]] + val[s]
            for f in range(ptr[i + 1], ptr[i + 2]):
                m = J[f]
                if m >= j:
                    break
                if val[f] >= INFV:
                    continue
                r = _find(J, ptr, m + 1, j)
                if r < 0 or val[r] >= INFV:
                    continue
                v = PC[X[i], X[m]] + val[f] + val[r]
                if v < best:
                    best = v
                    ch = m
            val[e] = best if best < INFV else INFV
            choice[e] = ch
    return val, choice


def _trace_dense(choice, n) -> list[tuple[int, int]]:
    out, stack = [], [(0, n)]
    while stack:
        i, j = stack.pop()
        if i >= j:
            continue
        m = choice[i, j]
        if m < 0:
            stack.append((i + 1, j))
        else:
            out.append((i, int(m)))
            stack.append((i + 1, int(m)))
            stack.append((int(m) + 1, j))
    return sorted(out)


def _trace_banded(J, ptr, choice, n) -> list[tuple[int, int]]:
    out, stack = [], [(0, n)]
    while stack:
        i, j = stack.pop()
        if i >= j:
            continue
        e = int(_find(J, ptr, i, j))
        m = choice[e]
        if m < 0:
            stack.append((i + 1, j))
        else:
            out.append((i, int(m)))
            stack.append((i + 1, int(m)))
            stack.append((int(m) + 1, j))
    return sorted(out)


def weighted_dyck_dp(X, w: WeightTable, da: DyckAlphabet, band: int | None = None) -> tuple[int, list[tuple[int, int]]]:
    """dyck^w(X) with an optimal non-crossing matching.

    With ``band = k`` only intervals whose height-profile lower bound is at
    most k are kept (sound for normalized tables) and the value is clipped at
    k; the matching is empty when the result is INF.
    """
    X = as_seq(X)
    S = w.matrix[:, 0].copy()
    PC = pair_cost_table(w, da)
    n = len(X)
    if band is None:
        D, choice = _dense_dp(X, S, PC, INF)
        return int(D[0, n]), _trace_dense(choice, n)
    J, ptr = _valid_ends(da.heights(X), band)
    val, choice = _banded_dp(X, S, PC, J, ptr, INF)
    e = int(_find(J, ptr, 0, n))
    if e < 0 or val[e] > band * SCALE:
        return INF, []
    return int(val[e]), _trace_banded(J, ptr, choice, n)


def unweighted_dyck_bounded(X, k: int, da: DyckAlphabet) -> tuple[int, list[tuple[int, int]]] | None:
    X = as_seq(X)
    if peak_lower_bound(X, da) > k:
        return None
    cost, M = weighted_dyck_dp(X, da.unit_weights(), da, band=k)
    if cost >= INF:
        return None
    return cost // SCALE, M


# ---------------------------------------------------------------------------
# reduction and kernel


def dyck_reduction(P, k: int, da: DyckAlphabet) -> np.ndarray:
    P = as_seq(P)
    if k < 1:
        raise ValueError("k must be positive")
    if len(P) and not da.is_open[P].all():
        raise ValueError("dyck reduction needs a string of opening symbols")
    R = periodicity_reduction(P, 8 * k, LengthOracle(4 * k))
    half = 78 * k**3
    if len(R) >= 2 * half:
        # the seam can join two runs into a fresh power; one more pass removes it
        R = periodicity_reduction(np.concatenate([R[:half], R[len(R) - half:]]), 8 * k, LengthOracle(4 * k))
    return R


@njit(cache=True)
def _walk(X, partner, is_open, comp):
    # segments (kind, start, end): 0 copy X[start], 1 opening run, 2 closing run
    n = len(X)
    seg = np.empty((n, 3), dtype=np.int64)
    cnt = 0
    ps = -1
    qs = -1
    for i in range(n):
        m = partner[i]
        edited = m < 0
        if not edited:
            a, b = (i, m) if i < m else (m, i)
            edited = not (is_open[X[a]] and X[b] == comp[X[a]])
        if edited:
            seg[cnt, 0] = 0
            seg[cnt, 1] = i
            seg[cnt, 2] = i + 1
            cnt += 1
            continue
        nxt = partner[i + 1] if i + 1 < n else -1
        cont = nxt >= 0 and nxt == m - 1
        if is_open[X[i]]:
            if ps < 0:
                ps = i
            if cont and is_open[X[i + 1]] and X[m - 1] == comp[X[i + 1]]:
                continue
            seg[cnt, 0] = 1
            seg[cnt, 1] = ps
            seg[cnt, 2] = i + 1
            cnt += 1
            ps = -1
        else:
            if qs < 0:
                qs = i
            if cont and is_open[X[m - 1]] and X[i + 1] == comp[X[m - 1]]:
                continue
            seg[cnt, 0] = 2
            seg[cnt, 1] = qs
            seg[cnt, 2] = i + 1
            cnt += 1
            qs = -1
    return seg[:cnt].copy()


@dataclass
class DyckKernelResult:
    X: np.ndarray
    failed: bool = False
    reduced: bool = False
    runs: list = field(default_factory=list)


def _has_adjacent_pair(X, da: DyckAlphabet) -> bool:
    if len(X) < 2:
        return False
    a, b = X[:-1], X[1:]
    return bool((da.is_open[a] & (b == da.comp[a])).any())


def dyck_kernel(X, k: int, da: DyckAlphabet) -> DyckKernelResult:
    X = as_seq(X)
    if k < 1:
        raise ValueError("k must be positive")
    if _has_adjacent_pair(X, da):
        raise ValueError("input is not greedily preprocessed")
    if len(X) <= 630 * k**4:
        return DyckKernelResult(X)
    found = unweighted_dyck_bounded(X, k, da)
    if found is None:
        return DyckKernelResult(np.full(k + 1, int(da.opens.min()), dtype=np.int64), failed=True)
    _, M = found
    n = len(X)
    partner = np.full(n, -1, dtype=np.int64)
    for i, j in M:
        partner[i], partner[j] = j, i
    segs = _walk(X, partner, da.is_open, da.comp)
    H = da.heights(X)
    rmq = RangeMin(H)
    out, runs = [], []
    for kind, a, b in segs.tolist():
        if kind == 0:
            out.append(X[a:b])
        elif kind == 1:
            c, d = int(partner[b - 1]), int(partner[a]) + 1
            # the run and its partner run are k-synchronized
            assert d - c == b - a and b <= c, (a, b, c, d)
            assert H[b] + H[c] - 2 * rmq.min(b, c) <= 2 * k, (a, b, c, d)
            R = dyck_reduction(X[a:b], k, da)
            runs.append(((a, b), (c, d), R))
            out.append(R)
        else:
            out.append(da.revcomp(dyck_reduction(da.revcomp(X[a:b]), k, da)))
    Xp = np.concatenate(out) if out else np.zeros(0, dtype=np.int64)
    return DyckKernelResult(Xp, reduced=True, runs=runs)


def _require_skew_normalized(w: WeightTable, da: DyckAlphabet):
    m = w.matrix
    off = m[~np.eye(m.shape[0], dtype=bool)]
    if off.size and off.min() < SCALE:
        raise ValueError("weight table is not normalized")
    c = da.comp
    if not np.array_equal(m, m[np.ix_(c, c)].T):
        raise ValueError("weight table is not skew-symmetric under the complement")


def weighted_dyck_le_k(X, k: int, w: WeightTable, da: DyckAlphabet) -> int:
    _require_skew_normalized(w, da)
    K = dyck_kernel(greedy_preprocess(X, da), k, da)
    cost, _ = weighted_dyck_dp(K.X, w, da, band=k)
    return cost
