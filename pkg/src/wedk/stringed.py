"""Bounded weighted edit distance between strings.

Pipeline: Landau-Vishkin finds an unweighted alignment of cost <= k, every
maximal perfectly matched run is shrunk by ``string_reduction`` on both
sides, and the small instance is solved by a banded DP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._jit import njit
from .core import INF, SCALE, Alignment, WeightTable, as_seq
from .seqkit import LceIndex, LengthOracle, periodicity_reduction

_START, _SUB, _DEL, _INS = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Landau-Vishkin


@njit(cache=True)
def _lv_kernel(X, Y, k):
    n, m = len(X), len(Y)
    width = 2 * k + 1
    L = np.full((k + 1, width), -1, dtype=np.int64)
    S = np.full((k + 1, width), -1, dtype=np.int64)
    C = np.zeros((k + 1, width), dtype=np.int8)
    target = m - n
    if target < -k or target > k:
        return -1, L, S, C
    for e in range(k + 1):
        for d in range(-e, e + 1):
            idx = d + k
            if e == 0:
                x = 0
                ch = 0
            else:
                x = -1
                ch = 0
                # preference on ties: substitution, deletion, insertion
                if -(e - 1) <= d <= e - 1 and L[e - 1, idx] >= 0:
                    c = L[e - 1, idx] + 1
                    if c <= n and c + d <= m:
                        x = c
                        ch = 1
                if d + 1 <= e - 1 and L[e - 1, idx + 1] >= 0:
                    c = L[e - 1, idx + 1] + 1
                    if c <= n and c + d <= m and c > x:
                        x = c
                        ch = 2
                if d - 1 >= -(e - 1) and L[e - 1, idx - 1] >= 0:
                    c = L[e - 1, idx - 1]
                    if c <= n and c + d <= m and c > x:
                        x = c
                        ch = 3
                if x < 0:
                    continue
            if x + d < 0:
                continue
            S[e, idx] = x
            while x < n and x + d < m and X[x] == Y[x + d]:
                x += 1
            L[e, idx] = x
            C[e, idx] = ch
            if d == target and x == n:
                return e, L, S, C
    return -1, L, S, C


def _lv_python(X, Y, k, lce: LceIndex):
    """Same recurrence with LCE jumps instead of character slides."""
    n, m = len(X), len(Y)
    width = 2 * k + 1
    L = np.full((k + 1, width), -1, dtype=np.int64)
    S = np.full((k + 1, width), -1, dtype=np.int64)
    C = np.zeros((k + 1, width), dtype=np.int8)
    target = m - n
    if abs(target) > k:
        return -1, L, S, C
    for e in range(k + 1):
        for d in range(-e, e + 1):
            idx = d + k
            x, ch = (0, _START) if e == 0 else (-1, _START)
            if e:
                options = []
                if abs(d) <= e - 1 and L[e - 1, idx] >= 0:
                    options.append((L[e - 1, idx] + 1, _SUB))
                if d + 1 <= e - 1 and L[e - 1, idx + 1] >= 0:
                    options.append((L[e - 1, idx + 1] + 1, _DEL))
                if d - 1 >= -(e - 1) and L[e - 1, idx - 1] >= 0:
                    options.append((L[e - 1, idx - 1], _INS))
                for c, how in options:
                    if c <= n and c + d <= m and c > x:
                        x, ch = c, how
                if x < 0:
                    continue
            if x + d < 0:
                continue
            S[e, idx] = x
            x += lce.lce(x, x + d)
            L[e, idx] = x
            C[e, idx] = ch
            if d == target and x == n:
                return e, L, S, C
    return -1, L, S, C


def _traceback(cost, L, S, C, n, m, k) -> Alignment:
    runs = []
    e, d = cost, m - n
    while True:
        idx = d + k
        runs.append((1, 1, int(L[e, idx] - S[e, idx])))
        ch = C[e, idx]
        if e == 0:
            break
        if ch == _SUB:
            runs.append((1, 1, 1))
        elif ch == _DEL:
            runs.append((1, 0, 1))
            d += 1
        else:
            runs.append((0, 1, 1))
            d -= 1
        e -= 1
    runs.reverse()
    return Alignment(runs=runs)


def unweighted_ed_bounded(X, Y, k: int, lce: LceIndex | None = None) -> tuple[int, Alignment] | None:
    """Exact unweighted distance and a minimum alignment, or None if it exceeds k.

    Slides compare characters directly (compiled); passing an ``LceIndex``
    built on (X, Y) switches to constant-time jumps.
    """
    X, Y = as_seq(X), as_seq(Y)
    if k < 0:
        raise ValueError("k must be non-negative")
    if lce is None:
        cost, L, S, C = _lv_kernel(X, Y, k)
    else:
        cost, L, S, C = _lv_python(X, Y, k, lce)
    if cost < 0:
        return None
    return int(cost), _traceback(cost, L, S, C, len(X), len(Y), k)


# ---------------------------------------------------------------------------
# reduction and kernel


def string_reduction(P, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be positive")
    R = periodicity_reduction(P, 4 * k, LengthOracle(2 * k))
    half = 21 * k**3
    if len(R) >= 2 * half:
        # the seam can join two runs into a fresh power; one more pass removes it
        R = periodicity_reduction(np.concatenate([R[:half], R[len(R) - half:]]), 4 * k, LengthOracle(2 * k))
    return R


@dataclass
class StringKernelResult:
    X: np.ndarray
    Y: np.ndarray
    failed: bool = False
    reduced: bool = False
    replacements: list = field(default_factory=list)
    alignment: Alignment | None = None


def string_kernel(X, Y, k: int, sentinel: int = 1) -> StringKernelResult:
    X, Y = as_seq(X), as_seq(Y)
    bound = 85 * k**4
    if len(X) <= bound and len(Y) <= bound:
        return StringKernelResult(X, Y)
    found = unweighted_ed_bounded(X, Y, k)
    if found is None:
        return StringKernelResult(np.full(k + 1, sentinel, dtype=np.int64), np.zeros(0, dtype=np.int64), failed=True)
    _, A = found
    xs, ys, reps = [], [], []
    edits = 0
    runs_seen = 0
    x = y = 0
    px = py = plen = 0

    def flush():
        nonlocal plen, runs_seen
        if plen:
            R = string_reduction(X[px:px + plen], k)
            xs.append(R)
            ys.append(R)
            reps.append(((px, px + plen), (py, py + plen), R))
            runs_seen += 1
        plen = 0

    for dx, dy, cnt in A.runs:
        if dx and dy:
            same = X[x:x + cnt] == Y[y:y + cnt]
            # boundaries between equal / unequal segments
            cuts = np.flatnonzero(np.diff(same.astype(np.int8))) + 1
            bounds = np.concatenate([[0], cuts, [cnt]])
            for a, b in zip(bounds[:-1], bounds[1:]):
                a, b = int(a), int(b)
                if same[a]:
                    if plen == 0:
                        px, py = x + a, y + a
                    plen += b - a
                else:
                    for t in range(a, b):
                        flush()
                        xs.append(X[x + t:x + t + 1])
                        ys.append(Y[y + t:y + t + 1])
                        edits += 1
            x += cnt
            y += cnt
        elif dx:
            for t in range(cnt):
                flush()
                xs.append(X[x + t:x + t + 1])
                edits += 1
            x += cnt
        else:
            for t in range(cnt):
                flush()
                ys.append(Y[y + t:y + t + 1])
                edits += 1
            y += cnt
    flush()
    # at most k edited steps and k + 1 matched runs
    assert edits <= k and runs_seen <= k + 1, (edits, runs_seen)
    empty = np.zeros(0, dtype=np.int64)
    Xp = np.concatenate(xs) if xs else empty
    Yp = np.concatenate(ys) if ys else empty
    return StringKernelResult(Xp, Yp, reduced=True, replacements=reps, alignment=A)


# ---------------------------------------------------------------------------
# banded weighted DP


@njit(cache=True)
def _banded_kernel(X, Y, k, W, INFV):
    n, m = len(X), len(Y)
    width = 2 * k + 1
    prev = np.full(width, INFV, dtype=np.int64)
    cur = np.full(width, INFV, dtype=np.int64)
    # row 0: only insertions
    acc = 0
    for j in range(0, min(m, k) + 1):
        if j > 0:
            acc += W[0, Y[j - 1]]
        prev[j + k] = min(acc, INFV)
    for i in range(1, n + 1):
        for t in range(width):
            cur[t] = INFV
        lo = max(0, i - k)
        hi = min(m, i + k)
        for j in range(lo, hi + 1):
            idx = j - i + k
            best = INFV
            if idx + 1 < width:
                v = prev[idx + 1] + W[X[i - 1], 0]
                if v < best:
                    best = v
            if j > 0:
                v = prev[idx] + W[X[i - 1], Y[j - 1]]
                if v < best:
                    best = v
                if idx > 0:
                    v = cur[idx - 1] + W[0, Y[j - 1]]
                    if v < best:
                        best = v
            cur[idx] = best if best < INFV else INFV
        prev, cur = cur, prev
    return prev[m - n + k]


def _require_normalized(w: WeightTable):
    m = w.matrix
    off = m[~np.eye(m.shape[0], dtype=bool)]
    if off.size and off.min() < SCALE:
        raise ValueError("weight table is not normalized")


def banded_weighted_ed(X, Y, k: int, w: WeightTable) -> int:
    """ed^w(X, Y) if it is at most k, else INF; only cells with |i - j| <= k."""
    X, Y = as_seq(X), as_seq(Y)
    if abs(len(X) - len(Y)) > k:
        return INF
    v = int(_banded_kernel(X, Y, k, w.matrix, INF))
    return v if v <= k * SCALE else INF


def weighted_ed_le_k(X, Y, k: int, w: WeightTable) -> int:
    _require_normalized(w)
    K = string_kernel(X, Y, k)
    return banded_weighted_ed(K.X, K.Y, k, w)
