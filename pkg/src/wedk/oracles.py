"""Brute-force references.

Everything here is deliberately simple and shares no algorithmic code with
the pipelines: exhaustive enumerations, a vectorised full DP table, plain
memoised recursions and direct scans.  Enumeration caps raise instead of
truncating.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

from .core import EPS, WeightTable, as_seq


class CapExceeded(ValueError):
    pass


# ---------------------------------------------------------------------------
# strings


def naive_lce(X, Y, x: int, y: int) -> int:
    n = 0
    while x + n < len(X) and y + n < len(Y) and X[x + n] == Y[y + n]:
        n += 1
    return n


def naive_period(S) -> int:
    """Shortest period of the whole string by the failure function (0 for empty)."""
    S = list(S)
    n = len(S)
    if n == 0:
        return 0
    fail = [0] * n
    k = 0
    for t in range(1, n):
        while k and S[t] != S[k]:
            k = fail[k - 1]
        if S[t] == S[k]:
            k += 1
        fail[t] = k
    return n - fail[-1]


def naive_shortest_period(X, i: int, j: int) -> int | None:
    p = naive_period(X[i:j])
    return p if j - i >= 2 * p and j > i else None


def naive_is_primitive(S) -> bool:
    p = naive_period(S)
    return not (p < len(S) and len(S) % p == 0)


def _balanced_tokens(S) -> bool:
    h = 0
    for c in S:
        h += 1 if c % 2 == 0 else -1
        if h < 0:
            return False
    return h == 0


def naive_power_scan(P, e: int, maxq: int, balanced_only: bool = False, host=None) -> list[tuple[int, int]]:
    """Every (i, q) with P[i..i+(e+1)q) = Q^(e+1), Q primitive, |Q| = q <= maxq.

    With ``balanced_only`` the root Q must also be a balanced token string
    (even ids open, odd ids close); ``host`` is accepted for symmetry with
    forest callers and only its token array is used.
    """
    if host is not None and P is None:
        P = host.tokens
    P = np.asarray(P, dtype=np.int64)
    n = len(P)
    out = []
    for q in range(1, maxq + 1):
        span = (e + 1) * q
        if span > n:
            break
        eq = (P[:-q] == P[q:]).astype(np.int64)
        csum = np.concatenate([[0], np.cumsum(eq)])
        need = e * q
        starts = np.nonzero(csum[need:] - csum[:-need] == need)[0] if need <= len(eq) else []
        for i in starts:
            i = int(i)
            if i + span > n:
                continue
            root = P[i:i + q].tolist()
            if not naive_is_primitive(root):
                continue
            if balanced_only and not _balanced_tokens(root):
                continue
            out.append((i, q))
    return sorted(out)


def full_dp_weighted_ed(X, Y, w: WeightTable) -> int:
    """Quadratic table, one vectorised row at a time."""
    X, Y = as_seq(X), as_seq(Y)
    m = w.matrix
    ins = m[0, Y]
    C = np.concatenate([[0], np.cumsum(ins)])
    prev = C.copy()
    for i in range(len(X)):
        cand = prev + m[X[i], 0]
        if len(Y):
            cand[1:] = np.minimum(cand[1:], prev[:-1] + m[X[i], Y])
        # horizontal insertion chains: D[j] = min_{j'<=j} cand[j'] + C[j] - C[j']
        prev = np.minimum.accumulate(cand - C) + C
    return int(prev[-1])


def enumerate_alignments_ed(X, Y, w: WeightTable, cap: int = 12) -> int:
    X, Y = as_seq(X), as_seq(Y)
    if len(X) + len(Y) > cap:
        raise CapExceeded(f"|X|+|Y| = {len(X) + len(Y)} exceeds {cap}")
    m = w.matrix
    best = [None]

    def walk(x, y, acc):
        if x == len(X) and y == len(Y):
            if best[0] is None or acc < best[0]:
                best[0] = acc
            return
        if x < len(X):
            walk(x + 1, y, acc + int(m[X[x], EPS]))
        if y < len(Y):
            walk(x, y + 1, acc + int(m[EPS, Y[y]]))
        if x < len(X) and y < len(Y):
            walk(x + 1, y + 1, acc + int(m[X[x], Y[y]]))

    walk(0, 0, 0)
    return best[0]


# ---------------------------------------------------------------------------
# forests (token arrays: open(a) = 2a, close(a) = 2a + 1)


def _tokens(F) -> np.ndarray:
    return np.asarray(getattr(F, "tokens", F), dtype=np.int64)


def _nodes(tokens):
    """Preorder list of (open_pos, close_pos, label)."""
    stack, opens, close_of = [], [], {}
    for p, t in enumerate(tokens):
        if t % 2 == 0:
            stack.append(p)
            opens.append(p)
        else:
            o = stack.pop()
            if tokens[o] // 2 != t // 2:
                raise ValueError("mismatched labels")
            close_of[o] = p
    if stack:
        raise ValueError("unbalanced forest")
    return [(o, close_of[o], int(tokens[o] // 2)) for o in opens]


def enumerate_forest_alignments(F, G, w: WeightTable, cap: int = 8) -> int:
    """Minimum over all forest alignments of half the token-level cost.

    Candidate node matchings are enumerated exhaustively (monotone in
    preorder); a candidate is a forest alignment exactly when the token
    strings restricted to matched nodes coincide under the matching, which
    is checked by a two-pointer walk that also builds the alignment.
    """
    tf, tg = _tokens(F), _tokens(G)
    nf, ng = _nodes(tf), _nodes(tg)
    if len(nf) > cap or len(ng) > cap:
        raise CapExceeded(f"forests with {len(nf)} and {len(ng)} nodes exceed {cap}")
    m = w.matrix
    node_f = np.full(len(tf), -1)
    node_g = np.full(len(tg), -1)
    for u, (o, c, _) in enumerate(nf):
        node_f[o] = node_f[c] = u
    for v, (o, c, _) in enumerate(ng):
        node_g[o] = node_g[c] = v
    best = [None]

    def evaluate(mate):
        # mate[u] = v or -1
        matched_g = {v: u for u, v in enumerate(mate) if v >= 0}
        x = y = 0
        twice = 0
        while x < len(tf) or y < len(tg):
            if x < len(tf) and mate[node_f[x]] < 0:
                twice += int(m[tf[x] // 2, EPS])
                x += 1
            elif y < len(tg) and node_g[y] not in matched_g:
                twice += int(m[EPS, tg[y] // 2])
                y += 1
            else:
                if x >= len(tf) or y >= len(tg):
                    return None
                u, v = node_f[x], node_g[y]
                if mate[u] != v or (tf[x] % 2) != (tg[y] % 2):
                    return None
                twice += int(m[tf[x] // 2, tg[y] // 2])
                x += 1
                y += 1
        return twice // 2

    mate = [-1] * len(nf)

    def rec(u, last):
        if u == len(nf):
            c = evaluate(mate)
            if c is not None and (best[0] is None or c < best[0]):
                best[0] = c
            return
        mate[u] = -1
        rec(u + 1, last)
        for v in range(last + 1, len(ng)):
            mate[u] = v
            rec(u + 1, v)
        mate[u] = -1

    rec(0, -1)
    return best[0]


def forest_ted_recursive(F, G, w: WeightTable) -> int:
    """Classical rightmost-root recursion with memoisation on token tuples."""
    m = w.matrix

    def split_last(t):
        # returns (prefix forest, root label, children forest)
        depth = 0
        for p in range(len(t) - 1, -1, -1):
            depth += 1 if t[p] % 2 else -1
            if depth == 0:
                return t[:p], t[p] // 2, t[p + 1:-1]
        raise ValueError("unbalanced")

    @lru_cache(maxsize=None)
    def d(f, g):
        if not f and not g:
            return 0
        if not g:
            return sum(int(m[t // 2, EPS]) for t in f if t % 2 == 0)
        if not f:
            return sum(int(m[EPS, t // 2]) for t in g if t % 2 == 0)
        f1, a, fa = split_last(f)
        g1, b, gb = split_last(g)
        return min(
            d(f1 + fa, g) + int(m[a, EPS]),
            d(f, g1 + gb) + int(m[EPS, b]),
            d(f1, g1) + d(fa, gb) + int(m[a, b]),
        )

    return d(tuple(int(t) for t in _tokens(F)), tuple(int(t) for t in _tokens(G)))


# ---------------------------------------------------------------------------
# Dyck


def dyck_words(opens, max_len: int):
    """All balanced words over ``opens`` (ids) of length <= max_len; needs comp."""
    words = [()]
    frontier = {((), ())}
    for _ in range(max_len):
        nxt = set()
        for word, stack in frontier:
            for a in opens:
                nxt.add((word + (("o", a),), stack + (a,)))
            if stack:
                nxt.add((word + (("c", stack[-1]),), stack[:-1]))
        frontier = nxt
        words.extend(wd for wd, st in frontier if not st)
    return words


def brute_dyck_small(S, w: WeightTable, opens, max_len: int = 4) -> int:
    """min over Dyck words D with |D| <= max_len of ed^w(S, D)."""
    comp = w.complement
    if comp is None:
        raise ValueError("Dyck oracle needs a complement involution")
    best = None
    for word in dyck_words(list(opens), max_len):
        target = [a if kind == "o" else int(comp[a]) for kind, a in word]
        c = full_dp_weighted_ed(list(S), target, w)
        if best is None or c < best:
            best = c
    return best


def enumerate_dyck_matchings(X, w: WeightTable, opens, cap: int = 10) -> int:
    """min over all non-crossing matchings of the summed 1- and 2-symbol costs.

    The per-pair and per-symbol costs come from ``brute_dyck_small`` rather
    than closed forms.
    """
    X = [int(c) for c in as_seq(X)]
    if len(X) > cap:
        raise CapExceeded(f"|X| = {len(X)} exceeds {cap}")
    opens = tuple(int(a) for a in opens)

    @lru_cache(maxsize=None)
    def cost_of(s):
        return brute_dyck_small(s, w, opens)

    @lru_cache(maxsize=None)
    def matchings(i, j):
        # all matchings of X[i..j) as tuples of pairs
        if i >= j:
            return [()]
        res = list(matchings(i + 1, j))
        for mid in range(i + 1, j):
            for left in matchings(i + 1, mid):
                for right in matchings(mid + 1, j):
                    res.append(((i, mid),) + left + right)
        return res

    best = None
    for M in matchings(0, len(X)):
        used = set()
        total = 0
        for a, b in M:
            used.add(a)
            used.add(b)
            total += cost_of((X[a], X[b]))
        for p in range(len(X)):
            if p not in used:
                total += cost_of((X[p],))
        if best is None or total < best:
            best = total
    return best


def all_forests(n_nodes: int, labels):
    """Every forest (token tuple) with exactly ``n_nodes`` nodes over ``labels``."""

    @lru_cache(maxsize=None)
    def shapes(n):
        if n == 0:
            return [()]
        res = []
        for first in range(1, n + 1):  # size of first tree
            for inner in shapes(first - 1):
                for rest in shapes(n - first):
                    res.append((("(",) + inner + (")",)) + rest)
        return res

    for shape in shapes(n_nodes):
        for labs in product(labels, repeat=n_nodes):
            it = iter(labs)
            stack, toks = [], []
            for c in shape:
                if c == "(":
                    a = next(it)
                    stack.append(a)
                    toks.append(2 * a)
                else:
                    toks.append(2 * stack.pop() + 1)
            yield tuple(toks)
