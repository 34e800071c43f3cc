"""Alphabets, weight tables, exact costs and alignment paths.

Costs are non-negative integers scaled by ``SCALE`` (six fraction digits).
``INF`` is a sentinel strictly above every finite cost.  Nothing in the
package uses floating point for distances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Iterable, Mapping, Sequence

import numpy as np

SCALE = 1_000_000
INF = (1 << 62)
# Largest admissible table entry: keeps every path sum far below INF.
MAX_WEIGHT = 1 << 40
EPS = 0


class FormatError(ValueError):
    """Malformed input text (weights, forests, pairs, sequences)."""


# ---------------------------------------------------------------------------
# cost arithmetic


def add_cost(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    s = a + b
    if s >= INF:
        raise OverflowError("cost sum exceeds the representable range")
    return s


def clip(value: int, k: int) -> int:
    """Threshold clipping: ``value`` if it is at most ``k`` units, else INF."""
    return value if value <= k * SCALE else INF


def parse_cost(text: str) -> int:
    try:
        d = Decimal(text.strip())
    except InvalidOperation as exc:
        raise FormatError(f"not a decimal cost: {text!r}") from exc
    if not d.is_finite() or d < 0:
        raise FormatError(f"cost must be a finite non-negative decimal: {text!r}")
    exp = d.as_tuple().exponent
    if isinstance(exp, int) and exp < -6:
        raise FormatError(f"more than 6 fraction digits: {text!r}")
    return int(d.scaleb(6))


def format_cost(value: int) -> str:
    if value >= INF:
        return "INF"
    return f"{value // SCALE}.{value % SCALE:06d}"


# ---------------------------------------------------------------------------
# alphabets


class Alphabet:
    """Bijection between token names and ids ``1..n``; id 0 is epsilon."""

    __slots__ = ("_names", "_ids")

    def __init__(self, names: Iterable[str]):
        seen: dict[str, int] = {}
        ordered: list[str] = []
        for name in names:
            if name == "-":
                raise FormatError("'-' is reserved for epsilon")
            if name not in seen:
                seen[name] = len(ordered) + 1
                ordered.append(name)
        self._names = tuple(ordered)
        self._ids = seen

    @classmethod
    def of_size(cls, n: int) -> "Alphabet":
        return cls(str(i) for i in range(1, n + 1))

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self._names == other._names

    def __hash__(self) -> int:
        return hash(self._names)

    def __repr__(self) -> str:
        return f"Alphabet({list(self._names)!r})"

    @property
    def names(self) -> tuple[str, ...]:
        return self._names

    def id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise FormatError(f"unknown symbol {name!r}") from None

    def name(self, sym: int) -> str:
        if sym == EPS:
            return "-"
        return self._names[sym - 1]

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        return np.array([self.id(t) for t in tokens], dtype=np.int64)

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.name(int(s)) for s in ids]


def as_seq(x: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.int64))
    if arr.ndim != 1:
        raise ValueError("symbol sequences are one-dimensional")
    return arr


# ---------------------------------------------------------------------------
# weight tables


def complement_from_pairs(alphabet: Alphabet, pairs: Iterable[tuple[str, str]]) -> np.ndarray:
    """Involution array ``comp`` with comp[0] = 0 from (open, close) name pairs."""
    comp = np.full(len(alphabet) + 1, -1, dtype=np.int64)
    comp[0] = 0
    for a, b in pairs:
        ia, ib = alphabet.id(a), alphabet.id(b)
        if ia == ib:
            raise FormatError(f"symbol {a!r} cannot be its own complement")
        for s in (ia, ib):
            if comp[s] != -1:
                raise FormatError(f"symbol {alphabet.name(s)!r} paired twice")
        comp[ia], comp[ib] = ib, ia
    return comp


@dataclass(frozen=True, eq=False)
class WeightTable:
    """Finite cost function over (Sigma + epsilon) x (Sigma + epsilon)."""

    alphabet: Alphabet
    matrix: np.ndarray
    complement: np.ndarray | None = field(default=None)

    def __post_init__(self):
        m = np.ascontiguousarray(np.asarray(self.matrix, dtype=np.int64))
        n = len(self.alphabet) + 1
        if m.shape != (n, n):
            raise ValueError(f"matrix must be {n}x{n}, got {m.shape}")
        if (m < 0).any():
            raise ValueError("negative weight")
        if (m > MAX_WEIGHT).any():
            raise ValueError("weight exceeds MAX_WEIGHT")
        if np.diag(m).any():
            raise ValueError("w(a, a) must be 0")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.complement is not None:
            c = np.ascontiguousarray(np.asarray(self.complement, dtype=np.int64))
            if c.shape != (n,) or c[0] != 0:
                raise ValueError("complement must map epsilon to itself")
            if (c < 0).any() or (c >= n).any() or (c[c] != np.arange(n)).any():
                raise ValueError("complement is not an involution")
            if n > 1 and (c[1:] == np.arange(1, n)).any():
                raise ValueError("complement has a fixed point")
            c.setflags(write=False)
            object.__setattr__(self, "complement", c)

    @classmethod
    def unit(cls, alphabet: Alphabet, complement: np.ndarray | None = None) -> "WeightTable":
        n = len(alphabet) + 1
        m = np.full((n, n), SCALE, dtype=np.int64)
        np.fill_diagonal(m, 0)
        return cls(alphabet, m, complement)

    @classmethod
    def from_entries(
        cls,
        alphabet: Alphabet,
        entries: Mapping[tuple[int, int], int],
        complement: np.ndarray | None = None,
        default: int = SCALE,
    ) -> "WeightTable":
        n = len(alphabet) + 1
        m = np.full((n, n), default, dtype=np.int64)
        np.fill_diagonal(m, 0)
        for (a, b), v in entries.items():
            if a == b and v != 0:
                raise FormatError(f"nonzero diagonal entry for {alphabet.name(a)!r}")
            m[a, b] = v
        return cls(alphabet, m, complement)

    def w(self, a: int, b: int) -> int:
        return int(self.matrix[a, b])

    @property
    def size(self) -> int:
        return len(self.alphabet)

    def with_complement(self, complement: np.ndarray) -> "WeightTable":
        return WeightTable(self.alphabet, self.matrix, complement)


def parse_weight_lines(text: str) -> list[tuple[str | None, str | None, int]]:
    """Parse ``A<TAB>B<TAB>COST`` lines; ``-`` is epsilon (returned as None)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected A<TAB>B<TAB>COST")
        a, b, c = (p.strip() for p in parts)
        if not a or not b:
            raise FormatError(f"line {lineno}: empty symbol")
        rows.append((None if a == "-" else a, None if b == "-" else b, parse_cost(c)))
    return rows


def weight_symbols(rows: Iterable[tuple[str | None, str | None, int]]) -> list[str]:
    out = []
    for a, b, _ in rows:
        out.extend(s for s in (a, b) if s is not None)
    return out


def table_from_rows(
    alphabet: Alphabet,
    rows: Iterable[tuple[str | None, str | None, int]],
    complement: np.ndarray | None = None,
) -> WeightTable:
    entries: dict[tuple[int, int], int] = {}
    for a, b, c in rows:
        ia = EPS if a is None else alphabet.id(a)
        ib = EPS if b is None else alphabet.id(b)
        if ia == ib and c != 0:
            raise FormatError(f"nonzero diagonal entry for {a or '-'!r}")
        if (ia, ib) in entries and entries[ia, ib] != c:
            raise FormatError(f"conflicting entries for ({a or '-'}, {b or '-'})")
        if c > MAX_WEIGHT:
            raise FormatError("weight too large")
        entries[ia, ib] = c
    return WeightTable.from_entries(alphabet, entries, complement)


def load_weights(text: str, alphabet: Alphabet, complement: np.ndarray | None = None) -> WeightTable:
    return table_from_rows(alphabet, parse_weight_lines(text), complement)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str  # "normalized" | "triangle" | "skew"
    symbols: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.kind} {' '.join(self.symbols)}"


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


MODES = ("normalized", "quasimetric", "skewmetric")


def validate_weights(table: WeightTable, mode: str) -> ValidationReport:
    """Check the constraints of ``mode``; every violated pair/triple is listed.

    Triangle violations are reported in path order ``(a, b, c)`` meaning
    ``w(a, b) + w(b, c) < w(a, c)``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "skewmetric" and table.complement is None:
        raise ValueError("skewmetric validation needs a complement involution")
    m = table.matrix
    nm = table.alphabet.name
    out: list[Violation] = []
    n = m.shape[0]
    off = ~np.eye(n, dtype=bool)
    for a, b in zip(*np.nonzero(off & (m < SCALE))):
        out.append(Violation("normalized", (nm(a), nm(b))))
    if mode in ("quasimetric", "skewmetric"):
        # via[a, b, c] = w(a, b) + w(b, c)
        via = m[:, :, None] + m[None, :, :]
        bad = via < m[:, None, :]
        for a, b, c in zip(*np.nonzero(bad)):
            out.append(Violation("triangle", (nm(a), nm(b), nm(c))))
    if mode == "skewmetric":
        c = table.complement
        # w(a, b) must equal w(comp b, comp a)
        mirrored = m[np.ix_(c, c)].T
        for a, b in zip(*np.nonzero(m != mirrored)):
            if (int(c[b]), int(c[a])) > (int(a), int(b)):
                continue  # report each unordered constraint once
            out.append(Violation("skew", (nm(a), nm(b))))
    return ValidationReport(mode, tuple(out))


# ---------------------------------------------------------------------------
# alignments

_DIAG, _DEL, _INS = (1, 1), (1, 0), (0, 1)


class Alignment:
    """Monotone lattice path from (0, 0) to (|X|, |Y|).

    Stored as run-length steps ``(dx, dy, count)``; ``path`` materialises the
    explicit point sequence on demand.
    """

    __slots__ = ("_runs", "_path")

    def __init__(self, path: Sequence[tuple[int, int]] | np.ndarray | None = None, *, runs=None):
        if (path is None) == (runs is None):
            raise ValueError("give exactly one of path or runs")
        if runs is not None:
            clean = []
            for dx, dy, cnt in runs:
                if (dx, dy) not in (_DIAG, _DEL, _INS):
                    raise ValueError(f"illegal step ({dx}, {dy})")
                if cnt < 0:
                    raise ValueError("negative run length")
                if cnt == 0:
                    continue
                if clean and clean[-1][:2] == (dx, dy):
                    clean[-1] = (dx, dy, clean[-1][2] + cnt)
                else:
                    clean.append((dx, dy, int(cnt)))
            self._runs = tuple(clean)
            self._path = None
            return
        p = np.asarray(path, dtype=np.int64).reshape(-1, 2)
        if len(p) == 0 or p[0, 0] != 0 or p[0, 1] != 0:
            raise ValueError("alignment must start at (0, 0)")
        d = np.diff(p, axis=0)
        ok = ((d == 0) | (d == 1)).all(axis=1) & (d.sum(axis=1) > 0)
        if not ok.all():
            t = int(np.argmin(ok))
            raise ValueError(f"illegal step at t={t}: {tuple(p[t])} -> {tuple(p[t + 1])}")
        runs = []
        for dx, dy in map(tuple, d.tolist()):
            if runs and tuple(runs[-1][:2]) == (dx, dy):
                runs[-1][2] += 1
            else:
                runs.append([dx, dy, 1])
        self._runs = tuple(tuple(r) for r in runs)
        p.setflags(write=False)
        self._path = p

    @property
    def runs(self) -> tuple[tuple[int, int, int], ...]:
        return self._runs

    @property
    def end(self) -> tuple[int, int]:
        x = sum(dx * c for dx, _, c in self._runs)
        y = sum(dy * c for _, dy, c in self._runs)
        return x, y

    @property
    def path(self) -> np.ndarray:
        if self._path is None:
            steps = np.zeros((1 + sum(c for *_, c in self._runs), 2), dtype=np.int64)
            if self._runs:
                d = np.array([(dx, dy) for dx, dy, _ in self._runs], dtype=np.int64)
                cnt = np.array([c for *_, c in self._runs], dtype=np.int64)
                steps[1:] = np.repeat(d, cnt, axis=0)
            p = np.cumsum(steps, axis=0)
            p.setflags(write=False)
            self._path = p
        return self._path

    def __len__(self) -> int:
        return sum(c for *_, c in self._runs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alignment) and self._runs == other._runs

    def __repr__(self) -> str:
        return f"Alignment(runs={list(self._runs)!r})"

    def edits(self, X: np.ndarray, Y: np.ndarray) -> int:
        """Number of non-matching steps."""
        p = self.path
        d = np.diff(p, axis=0)
        diag = (d[:, 0] == 1) & (d[:, 1] == 1)
        xs, ys = p[:-1, 0][diag], p[:-1, 1][diag]
        return int(len(d) - diag.sum() + (X[xs] != Y[ys]).sum())


def alignment_cost(X, Y, A: Alignment, w: WeightTable) -> int:
    X, Y = as_seq(X), as_seq(Y)
    if A.end != (len(X), len(Y)):
        raise ValueError(f"alignment ends at {A.end}, expected {(len(X), len(Y))}")
    p = A.path
    d = np.diff(p, axis=0)
    xs, ys = p[:-1, 0], p[:-1, 1]
    m = w.matrix
    dele = (d[:, 0] == 1) & (d[:, 1] == 0)
    ins = (d[:, 0] == 0) & (d[:, 1] == 1)
    diag = (d[:, 0] == 1) & (d[:, 1] == 1)
    total = int(m[X[xs[dele]], 0].sum()) + int(m[0, Y[ys[ins]]].sum())
    total += int(m[X[xs[diag]], Y[ys[diag]]].sum())
    return total
