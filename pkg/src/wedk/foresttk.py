"""Labeled forests as balanced parenthesis strings, and the tree kernel.

Token encoding: ``open(a) = 2a`` and ``close(a) = 2a + 1`` for label ids
``a >= 1``.  The kernel repeatedly decomposes the larger forest into pieces,
finds pieces that a narrow alignment matches perfectly in the other forest,
and shrinks every such pair in both forests at once.
"""

from __future__ import annotations

import re
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from math import ceil
from typing import Union

import numpy as np

from ._jit import njit
from .core import INF, SCALE, Alphabet, FormatError, WeightTable, as_seq
from .seqkit import BalancedOracle, FunctionOracle, LceIndex, RangeMin, periodicity_reduction


def open_tok(a: int) -> int:
    return 2 * a


def close_tok(a: int) -> int:
    return 2 * a + 1


# ---------------------------------------------------------------------------
# forests


@njit(cache=True)
def _scan(tokens):
    n = len(tokens)
    H = np.zeros(n + 1, dtype=np.int64)
    match = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for p in range(n):
        t = tokens[p]
        if t < 2:
            return H, match, p
        if t % 2 == 0:
            stack[top] = p
            top += 1
            H[p + 1] = H[p] + 1
        else:
            if top == 0 or tokens[stack[top - 1]] // 2 != t // 2:
                return H, match, p
            top -= 1
            o = stack[top]
            match[o] = p
            match[p] = o
            H[p + 1] = H[p] - 1
    if top:
        return H, match, n
    return H, match, -1


class Forest:
    """Balanced token sequence with heights, open/close cross pointers and RMQ."""

    __slots__ = ("tokens", "H", "match", "_rmq")

    def __init__(self, tokens):
        toks = as_seq(tokens)
        H, match, bad = _scan(toks)
        if bad >= 0:
            raise FormatError(f"unbalanced or mislabeled forest at token {bad}")
        toks = toks.copy()
        toks.setflags(write=False)
        self.tokens = toks
        self.H = H
        self.match = match
        self._rmq = None

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Forest) and np.array_equal(self.tokens, other.tokens)

    def __repr__(self) -> str:
        return f"Forest({self.tokens.tolist()!r})"

    @property
    def node_count(self) -> int:
        return len(self.tokens) // 2

    def is_balanced(self, i: int, j: int) -> bool:
        if not 0 <= i <= j <= len(self.tokens):
            raise IndexError(f"fragment [{i}, {j}) out of range")
        if i == j:
            return True
        if self.H[i] != self.H[j]:
            return False
        if self._rmq is None:
            self._rmq = RangeMin(self.H)
        return self._rmq.min(i, j) == self.H[i]

    def is_tree(self, i: int, j: int) -> bool:
        return j > i and self.tokens[i] % 2 == 0 and self.match[i] == j - 1

    def labels(self) -> np.ndarray:
        return self.tokens[self.tokens % 2 == 0] // 2


def as_forest(F) -> Forest:
    return F if isinstance(F, Forest) else Forest(F)


_LEX = re.compile(r"\(|\)|[^\s()]+")


def _lex(text: str) -> list[str]:
    return _LEX.findall(text)


def forest_labels(text: str) -> list[str]:
    """Label names in order of first appearance (no validation)."""
    out, prev = [], None
    for tok in _lex(text):
        if prev == "(" and tok not in "()":
            if tok not in out:
                out.append(tok)
        prev = tok
    return out


def parse_forest(text: str, alphabet: Alphabet) -> Forest:
    toks: list[int] = []
    stack: list[int] = []
    lexed = _lex(text)
    p = 0
    while p < len(lexed):
        tok = lexed[p]
        if tok == "(":
            if p + 1 >= len(lexed) or lexed[p + 1] in "()":
                raise FormatError("'(' must be followed by a label")
            name = lexed[p + 1]
            if not name.isalnum():
                raise FormatError(f"label {name!r} is not alphanumeric")
            if name not in alphabet:
                raise FormatError(f"unknown label {name!r}")
            a = alphabet.id(name)
            stack.append(a)
            toks.append(open_tok(a))
            p += 2
        elif tok == ")":
            if not stack:
                raise FormatError("unmatched ')'")
            toks.append(close_tok(stack.pop()))
            p += 1
        else:
            raise FormatError(f"stray token {tok!r} outside a node")
    if stack:
        raise FormatError("unclosed '('")
    return Forest(toks)


def format_forest(F, alphabet: Alphabet) -> str:
    parts: list[str] = []
    for t in as_forest(F).tokens.tolist():
        if t % 2 == 0:
            parts.append("(" + alphabet.name(t // 2))
        else:
            parts.append(")")
    # join: space before an open unless at the start
    out = []
    for s in parts:
        if s.startswith("(") and out:
            out.append(" ")
        out.append(s)
    return "".join(out)


# ---------------------------------------------------------------------------
# contexts and pieces


@dataclass(frozen=True)
class Context:
    """A tree with one hole: ``L . R`` is a single tree rooted at ``L[0]``."""

    L: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        L, R = as_seq(self.L), as_seq(self.R)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "R", R)
        joint = np.concatenate([L, R])
        if len(L) == 0 or len(R) == 0:
            raise ValueError("context sides must be non-empty")
        try:
            F = Forest(joint)
        except FormatError as exc:
            raise ValueError(f"not a context: {exc}") from exc
        if F.match[0] != len(joint) - 1:
            raise ValueError("not a context: L . R is not a single tree")

    @property
    def depth(self) -> int:
        return len(spine(self))

    def __len__(self) -> int:
        return len(self.L) + len(self.R)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Context) and np.array_equal(self.L, other.L) and np.array_equal(self.R, other.R)

    def compose(self, other: "Context") -> "Context":
        return Context(np.concatenate([self.L, other.L]), np.concatenate([other.R, self.R]))


@dataclass(frozen=True)
class Balanced:
    i: int
    j: int

    @property
    def length(self) -> int:
        return self.j - self.i


@dataclass(frozen=True)
class ContextPiece:
    i: int
    i2: int
    j2: int
    j: int

    @property
    def length(self) -> int:
        return (self.i2 - self.i) + (self.j - self.j2)


Piece = Union[Balanced, ContextPiece]


def piece_ok(F: Forest, p: Piece) -> bool:
    """Form check of a piece against its host forest."""
    if isinstance(p, Balanced):
        return p.i < p.j and F.is_balanced(p.i, p.j)
    return (
        p.i < p.i2 <= p.j2 < p.j
        and F.is_tree(p.i, p.j)
        and F.is_balanced(p.i2, p.j2)
    )


# ---------------------------------------------------------------------------
# piece decomposition


@dataclass
class _Node:
    kind: str  # "empty", "leaf", "split", "ctx"
    i: int
    j: int
    m: int = 0  # split point, or l for ctx
    r: int = 0  # r for ctx
    left: "_Node | None" = None
    right: "_Node | None" = None  # inner for ctx


@dataclass
class PieceDecomposition:
    pieces: list = field(default_factory=list)
    root: _Node | None = None

    def __len__(self) -> int:
        return len(self.pieces)

    def __iter__(self):
        return iter(self.pieces)


@contextmanager
def _deep(limit: int):
    old = sys.getrecursionlimit()
    if limit > old:
        sys.setrecursionlimit(limit)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def _join(parts: list[_Node], i: int, j: int) -> _Node:
    parts = [p for p in parts if p.kind != "empty"]
    if not parts:
        return _Node("empty", i, j)
    node = parts[-1]
    for p in reversed(parts[:-1]):
        node = _Node("split", p.i, node.j, m=p.j, left=p, right=node)
    return node


def piece_decomposition(F, t: int) -> PieceDecomposition:
    F = as_forest(F)
    if t < 2:
        raise ValueError("t must be at least 2")
    match = F.match
    pieces: list[Piece] = []

    def D(i: int, j: int) -> _Node:
        if j == i:
            return _Node("empty", i, j)
        if j <= i + t:
            pieces.append(Balanced(i, j))
            return _Node("leaf", i, j)
        ip, jp = i, j
        tree = F.is_tree(i, j)
        while True:
            m = int(match[ip]) + 1
            if (m - i) + (j - jp) <= t:
                ip = m
            elif m < jp and (ip - i) + (j - m) <= t:
                jp = m
            elif not tree:
                a, b = ip, jp
                return _join([D(i, a), D(a, m), D(m, b), D(b, j)], i, j)
            elif m == jp and (ip + 1 - i) + (j - jp + 1) <= t:
                ip += 1
                jp -= 1
            else:
                pieces.append(ContextPiece(i, ip, jp, j))
                a, b = ip, jp
                inner = _join([D(a, m), D(m, b)], a, b)
                return _Node("ctx", i, j, m=a - i, r=j - b, right=inner)

    with _deep(len(F) + 1000):
        root = D(0, len(F))
    return PieceDecomposition(pieces, root)


# ---------------------------------------------------------------------------
# pairs


class _Set:
    """Persistent disjoint union with its size."""

    __slots__ = ("size", "a", "b", "item")

    def __init__(self, size=0, a=None, b=None, item=None):
        self.size, self.a, self.b, self.item = size, a, b, item

    def union(self, other: "_Set") -> "_Set":
        if not self.size:
            return other
        if not other.size:
            return self
        return _Set(self.size + other.size, self, other)

    def items(self) -> list:
        out, stack = [], [self]
        while stack:
            s = stack.pop()
            if s.item is not None:
                out.append(s.item)
            else:
                if s.b is not None:
                    stack.append(s.b)
                if s.a is not None:
                    stack.append(s.a)
        return out


_EMPTY = _Set()


def pairs(F, D: PieceDecomposition, G, s: int) -> list[tuple[Piece, Piece]]:
    """Maximum set of (piece of F, piece of G) pairs matched perfectly by one width-<=s alignment."""
    F, G = as_forest(F), as_forest(G)
    if abs(len(F) - len(G)) > s or D.root is None:
        return []
    lce = LceIndex(F.tokens, G.tokens).lce
    nF, nG = len(F), len(G)

    def same(x: int, y: int, length: int) -> bool:
        return length == 0 or (x + length <= nF and y + length <= nG and lce(x, y) >= length)

    memo: dict = {}

    def P(node: _Node, ip: int, jp: int) -> _Set:
        if node.kind == "empty":
            return _EMPTY
        key = (id(node), ip, jp)
        hit = memo.get(key)
        if hit is not None:
            return hit
        i, j = node.i, node.j
        best = _EMPTY
        if ip < min(jp, i + s):
            c = P(node, ip + 1, jp)
            if c.size > best.size:
                best = c
        if jp > max(ip, j - s):
            c = P(node, ip, jp - 1)
            if c.size > best.size:
                best = c
        if node.kind == "leaf":
            if jp - ip == j - i and same(i, ip, j - i) and best.size < 1:
                best = _Set(1, item=(Balanced(i, j), Balanced(ip, jp)))
        elif node.kind == "split":
            m = node.m
            for mp in range(max(m - s, ip), min(m + s, jp) + 1):
                c = P(node.left, ip, mp)
                c = c.union(P(node.right, mp, jp))
                if c.size > best.size:
                    best = c
        else:
            l, r, inner = node.m, node.r, node.right
            if (
                ip + l <= jp - r
                and same(i, ip, l)
                and same(j - r, jp - r, r)
                and G.is_balanced(ip + l, jp - r)
            ):
                here = _Set(1, item=(ContextPiece(i, i + l, j - r, j), ContextPiece(ip, ip + l, jp - r, jp)))
                c = here.union(P(inner, ip + l, jp - r))
                if c.size > best.size:
                    best = c
            c = P(inner, max(i + l - s, ip), min(j - r + s, jp))
            if c.size > best.size:
                best = c
        memo[key] = best
        return best

    with _deep(4 * (len(F) + len(G)) + 1000):
        return P(D.root, 0, nG).items()


# ---------------------------------------------------------------------------
# reductions


def horizontal_reduction(P, k: int, label: int = 1) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be positive")
    R = periodicity_reduction(as_seq(P), 4 * k, BalancedOracle(4 * k))
    half = 37 * k**3
    if len(R) >= 2 * half:
        return np.concatenate([np.full(half, open_tok(label)), np.full(half, close_tok(label))]).astype(np.int64)
    return R


def spine(C: Context) -> list[tuple[int, np.ndarray, np.ndarray]]:
    """Depth-1 layers ``(a_i, F_i, G_i)`` from the root down."""
    L, R = C.L, C.R
    stack: list[int] = []
    for p, t in enumerate(L.tolist()):
        if t % 2 == 0:
            stack.append(p)
        else:
            stack.pop()
    opens = stack
    depth = 0
    closes: list[int] = []
    for p, t in enumerate(R.tolist()):
        if t % 2 == 0:
            depth += 1
        elif depth:
            depth -= 1
        else:
            closes.append(p)
    if len(opens) != len(closes):
        raise ValueError("not a context")
    e = len(opens)
    layers = []
    for idx in range(e):
        o = opens[idx]
        f_end = opens[idx + 1] if idx + 1 < e else len(L)
        t_pos = e - 1 - idx  # position of this node's close among the R closes
        c = closes[t_pos]
        g_start = closes[t_pos - 1] + 1 if t_pos > 0 else 0
        a = int(L[o]) // 2
        if int(R[c]) // 2 != a:
            raise ValueError("context labels do not match")
        layers.append((a, L[o + 1:f_end], R[g_start:c]))
    return layers


def _compose_layers(layers) -> Context:
    Ls, Rs = [], []
    for a, Fi, Gi in layers:
        Ls.append(np.array([open_tok(a)], dtype=np.int64))
        Ls.append(as_seq(Fi))
        Rs.append(np.array([close_tok(a)], dtype=np.int64))
        Rs.append(as_seq(Gi)[::-1])
    L = np.concatenate(Ls)
    R = np.concatenate(Rs)[::-1].copy()
    return Context(L, R)


def layer_ids(layers) -> np.ndarray:
    """Integer identifiers of depth-1 layers, ranked by (label, F, G) tuples."""
    keys = [(a, tuple(as_seq(f).tolist()), tuple(as_seq(g).tolist())) for a, f, g in layers]
    rank = {key: r + 1 for r, key in enumerate(sorted(set(keys)))}
    return np.array([rank[key] for key in keys], dtype=np.int64)


def canonical_context(k: int, label: int = 1) -> Context:
    o, c = open_tok(label), close_tok(label)
    top = 17 * k * k
    layers = []
    for i in range(top):
        leaf = [o, c]
        layers.append((label, np.array(leaf * i, dtype=np.int64), np.array(leaf * (top - 1 - i), dtype=np.int64)))
    return _compose_layers(layers)


def vertical_reduction(P: Context, k: int, label: int = 1) -> Context:
    if k < 1:
        raise ValueError("k must be positive")
    if not isinstance(P, Context):
        raise ValueError("vertical reduction needs a Context")
    layers = [(a, horizontal_reduction(Fi, k, label), horizontal_reduction(Gi, k, label)) for a, Fi, Gi in spine(P)]
    ids = layer_ids(layers)
    sizes = np.array([2 + len(f) + len(g) for _, f, g in layers], dtype=np.int64)
    pre = np.concatenate([[0], np.cumsum(sizes)])
    by_id = {int(x): layer for x, layer in zip(ids, layers)}
    kept = periodicity_reduction(ids, 6 * k, FunctionOracle(lambda i, j: pre[j] - pre[i] <= 8 * k))
    out = _compose_layers([by_id[int(x)] for x in kept])
    if len(out) >= 578 * k**4:
        return canonical_context(k, label)
    return out


# ---------------------------------------------------------------------------
# exact weighted tree edit distance (Zhang-Shasha)


@njit(cache=True)
def _postorder(tokens):
    # 1-based postorder labels and leftmost-leaf indices, plus a virtual root
    n = len(tokens) // 2
    lab = np.zeros(n + 2, dtype=np.int64)
    lml = np.zeros(n + 2, dtype=np.int64)
    stack = np.empty(len(tokens) + 1, dtype=np.int64)
    top = 0
    post = 0
    for p in range(len(tokens)):
        if tokens[p] % 2 == 0:
            stack[top] = p
            top += 1
        else:
            top -= 1
            o = stack[top]
            post += 1
            lab[post] = tokens[p] // 2
            lml[post] = post - (p - o + 1) // 2 + 1
    lab[n + 1] = -1
    lml[n + 1] = 1
    return lab, lml


@njit(cache=True)
def _keyroots(lml):
    n = len(lml) - 1
    seen = np.zeros(n + 2, dtype=np.bool_)
    out = np.empty(n, dtype=np.int64)
    c = 0
    for u in range(n, 0, -1):
        if not seen[lml[u]]:
            seen[lml[u]] = True
            out[c] = u
            c += 1
    return out[:c][::-1].copy()


@njit(cache=True)
def _zs(labf, lmlf, labg, lmlg, W, BIG):
    nf = len(labf) - 1
    ng = len(labg) - 1
    krf = _keyroots(lmlf)
    krg = _keyroots(lmlg)
    td = np.zeros((nf + 1, ng + 1), dtype=np.int64)
    fd = np.zeros((nf + 2, ng + 2), dtype=np.int64)
    for ii in range(len(krf)):
        i = krf[ii]
        li = lmlf[i]
        for jj in range(len(krg)):
            j = krg[jj]
            lj = lmlg[j]
            fd[li - 1, lj - 1] = 0
            for a in range(li, i + 1):
                da = BIG if labf[a] < 0 else W[labf[a], 0]
                fd[a, lj - 1] = fd[a - 1, lj - 1] + da
            for b in range(lj, j + 1):
                ib = BIG if labg[b] < 0 else W[0, labg[b]]
                fd[li - 1, b] = fd[li - 1, b - 1] + ib
            for a in range(li, i + 1):
                da = BIG if labf[a] < 0 else W[labf[a], 0]
                for b in range(lj, j + 1):
                    ib = BIG if labg[b] < 0 else W[0, labg[b]]
                    best = fd[a - 1, b] + da
                    v = fd[a, b - 1] + ib
                    if v < best:
                        best = v
                    if lmlf[a] == li and lmlg[b] == lj:
                        if labf[a] < 0 and labg[b] < 0:
                            rn = 0
                        elif labf[a] < 0 or labg[b] < 0:
                            rn = BIG
                        else:
                            rn = W[labf[a], labg[b]]
                        v = fd[a - 1, b - 1] + rn
                        if v < best:
                            best = v
                        fd[a, b] = best
                        td[a, b] = best
                    else:
                        v = fd[lmlf[a] - 1, lmlg[b] - 1] + td[a, b]
                        if v < best:
                            best = v
                        fd[a, b] = best
    return td[nf, ng]


def weighted_ted(F, G, w: WeightTable) -> int:
    """Exact weighted forest edit distance (node delete / insert / relabel)."""
    F, G = as_forest(F), as_forest(G)
    labf, lmlf = _postorder(F.tokens)
    labg, lmlg = _postorder(G.tokens)
    return int(_zs(labf, lmlf, labg, lmlg, w.matrix, np.int64(1 << 58)))


@njit(cache=True)
def _node_cost(W, x, y, BIG):
    # x, y are labels; 0 is epsilon, -1 the virtual root
    if x < 0 or y < 0:
        return 0 if x == y else BIG
    return W[x, y]


@njit(cache=True)
def _zs_band(labf, lmlf, labg, lmlg, W, k, CAP, BIG):
    # Zhang-Shasha restricted to |a - b| <= k (global postorder) with values
    # saturated at CAP; exact whenever the distance is below CAP
    nf = len(labf) - 1
    ng = len(labg) - 1
    if nf - ng > k or ng - nf > k:
        return CAP
    width = 2 * k + 1
    krf = _keyroots(lmlf)
    krg = _keyroots(lmlg)
    kr_by_l = np.full(ng + 2, -1, dtype=np.int64)
    for jj in range(len(krg)):
        kr_by_l[lmlg[krg[jj]]] = krg[jj]
    td = np.full((nf + 1, width), CAP, dtype=np.int64)
    fd = np.full((nf + 1, width), CAP, dtype=np.int64)
    for ii in range(len(krf)):
        i = krf[ii]
        li = lmlf[i]
        # partner keyroots in ascending order so subtree distances exist when read
        cand = np.empty(width, dtype=np.int64)
        nc = 0
        for lj in range(max(1, li - k), min(ng, li + k) + 1):
            if kr_by_l[lj] >= 0:
                cand[nc] = kr_by_l[lj]
                nc += 1
        cand = np.sort(cand[:nc])
        for jj in range(nc):
            j = cand[jj]
            lj = lmlg[j]
            # row li - 1: insertions only
            a = li - 1
            acc = 0
            for off in range(width):
                fd[a, off] = CAP
            for b in range(lj - 1, j + 1):
                if b > lj - 1:
                    acc += _node_cost(W, 0, labg[b], BIG)
                    if acc > CAP:
                        acc = CAP
                off = b - a + k
                if 0 <= off < width:
                    fd[a, off] = acc
            for a in range(li, i + 1):
                da = _node_cost(W, labf[a], 0, BIG)
                for off in range(width):
                    b = a + off - k
                    if b < lj - 1 or b > j:
                        fd[a, off] = CAP
                        continue
                    # deletion from (a - 1, b)
                    best = CAP
                    up = off + 1
                    if up < width:
                        v = fd[a - 1, up] + da
                        if v < best:
                            best = v
                    if b > lj - 1:
                        ib = _node_cost(W, 0, labg[b], BIG)
                        if off > 0:
                            v = fd[a, off - 1] + ib
                            if v < best:
                                best = v
                        if lmlf[a] == li and lmlg[b] == lj:
                            v = fd[a - 1, off] + _node_cost(W, labf[a], labg[b], BIG)
                            if v < best:
                                best = v
                            td[a, off] = best
                        else:
                            pa, pb = lmlf[a] - 1, lmlg[b] - 1
                            po = pb - pa + k
                            if 0 <= po < width and fd[pa, po] < CAP and td[a, off] < CAP:
                                v = fd[pa, po] + td[a, off]
                                if v < best:
                                    best = v
                    fd[a, off] = best if best < CAP else CAP
    return td[nf, ng - nf + k]


def bounded_ted(F, G, k: int, w: WeightTable) -> int:
    """ted^w(F, G) if it is at most k units, else INF (needs a normalized table)."""
    F, G = as_forest(F), as_forest(G)
    labf, lmlf = _postorder(F.tokens)
    labg, lmlg = _postorder(G.tokens)
    cap = k * SCALE + 1
    v = int(_zs_band(labf, lmlf, labg, lmlg, w.matrix, k, np.int64(cap), np.int64(1 << 58)))
    return v if v < cap else INF


# ---------------------------------------------------------------------------
# kernel


@dataclass
class ForestKernelResult:
    F: Forest
    G: Forest
    failed: bool = False
    steps: int = 0


def _sentinel(k: int, label: int) -> Forest:
    return Forest([open_tok(label), close_tok(label)] * (k + 1))


def _apply(tokens: np.ndarray, edits: list[tuple[int, int, np.ndarray]]) -> np.ndarray:
    edits = sorted(edits, key=lambda e: e[0])
    out, pos = [], 0
    for a, b, rep in edits:
        if a < pos:
            raise AssertionError("overlapping replacements")
        out.append(tokens[pos:a])
        out.append(rep)
        pos = b
    out.append(tokens[pos:])
    return np.concatenate(out).astype(np.int64)


def forest_kernel_step(F, G, k: int, label: int = 1) -> ForestKernelResult:
    F, G = as_forest(F), as_forest(G)
    n = max(len(F), len(G))
    if n < 12716 * k**5:
        raise ValueError(f"step needs max size >= {12716 * k**5}, got {n}")
    swapped = len(F) < len(G)
    if swapped:
        F, G = G, F
    D = piece_decomposition(F, ceil(n / (2 * k)))
    S = pairs(F, D, G, 2 * k)
    if len(S) < len(D) - k:
        A, B = _sentinel(k, label), Forest([])
        return ForestKernelResult(B, A, failed=True) if swapped else ForestKernelResult(A, B, failed=True)
    ef, eg = [], []
    ft, gt = F.tokens, G.tokens
    for pf, pg in S:
        if isinstance(pf, Balanced):
            rep = horizontal_reduction(ft[pf.i:pf.j], k, label)
            ef.append((pf.i, pf.j, rep))
            eg.append((pg.i, pg.j, rep))
        else:
            C = vertical_reduction(Context(ft[pf.i:pf.i2], ft[pf.j2:pf.j]), k, label)
            ef += [(pf.i, pf.i2, C.L), (pf.j2, pf.j, C.R)]
            eg += [(pg.i, pg.i2, C.L), (pg.j2, pg.j, C.R)]
    F2, G2 = Forest(_apply(ft, ef)), Forest(_apply(gt, eg))
    if swapped:
        F2, G2 = G2, F2
    return ForestKernelResult(F2, G2)


def forest_kernel(F, G, k: int, label: int = 1) -> ForestKernelResult:
    F, G = as_forest(F), as_forest(G)
    if k < 1:
        raise ValueError("k must be positive")
    bound = 12717 * k**5
    steps = 0
    while max(len(F), len(G)) > bound:
        before = max(len(F), len(G))
        res = forest_kernel_step(F, G, k, label)
        steps += 1
        if res.failed:
            res.steps = steps
            return res
        F, G = res.F, res.G
        if max(len(F), len(G)) >= before:
            raise RuntimeError("kernel step made no progress")
    return ForestKernelResult(F, G, steps=steps)


def _require_normalized(w: WeightTable):
    m = w.matrix
    off = m[~np.eye(m.shape[0], dtype=bool)]
    if off.size and off.min() < SCALE:
        raise ValueError("weight table is not normalized")


def weighted_ted_le_k(F, G, k: int, w: WeightTable) -> int:
    _require_normalized(w)
    F, G = as_forest(F), as_forest(G)
    # every unmatched node costs at least one unit
    if abs(F.node_count - G.node_count) > k:
        return INF
    K = forest_kernel(F, G, k)
    return bounded_ted(K.F, K.G, k, w)
