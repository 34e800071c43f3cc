"""Acceptance criteria 1-10.

Each test records its outcome through ``acceptance_log.criterion``; the
terminal summary prints one PASS/FAIL line per criterion.  Run with ``-s`` to
also see the lines as each test finishes.
"""

from __future__ import annotations

import time

import numpy as np
import pytest
from acceptance_log import criterion
from strategies import (
    brackets,
    mutate_forest,
    mutate_string,
    near_dyck,
    normalized_table,
    periodic_string,
    quasimetric_table,
    random_context,
    random_forest,
    skewmetric_table,
)

from wedk.core import EPS, INF, SCALE, Alphabet, WeightTable, clip
from wedk.dyckkit import (
    dyck_kernel,
    dyck_reduction,
    greedy_preprocess,
    pair_cost,
    single_cost,
    weighted_dyck_dp,
    weighted_dyck_le_k,
)
from wedk.foresttk import (
    Balanced,
    Context,
    Forest,
    close_tok,
    forest_kernel,
    horizontal_reduction,
    layer_ids,
    open_tok,
    pairs,
    piece_decomposition,
    piece_ok,
    spine,
    vertical_reduction,
    weighted_ted,
    weighted_ted_le_k,
)
from wedk.oracles import (
    brute_dyck_small,
    enumerate_dyck_matchings,
    enumerate_forest_alignments,
    forest_ted_recursive,
    full_dp_weighted_ed,
    naive_power_scan,
)
from wedk.stringed import string_kernel, string_reduction, weighted_ed_le_k

pytestmark = pytest.mark.acceptance


def blocks(rng, total: int, alphabet, max_root: int, max_rep: int) -> np.ndarray:
    """Concatenated powers of short random roots: dense in periodicity."""
    out: list[int] = []
    while len(out) < total:
        root = list(rng.choice(alphabet, int(rng.integers(1, max_root + 1))))
        out += root * int(rng.integers(1, max_rep + 1))
    return np.array(out[:total], dtype=np.int64)


def context_from_layers(layers) -> Context:
    L = [t for a, f, _ in layers for t in [open_tok(a)] + list(f)]
    R = [t for a, _, g in reversed(layers) for t in list(g) + [close_tok(a)]]
    return Context(L, R)


# ---------------------------------------------------------------------------
# 1


def test_criterion_01_string_oracle_equivalence():
    rng = np.random.default_rng(101)
    n_tables, per_table = 25, 400
    with criterion(1, "weighted_ed_le_k vs clipped full DP") as rec:
        finite = 0
        for t in range(n_tables):
            sigma = int(rng.integers(2, 7))
            w = normalized_table(rng, sigma, hi=int(rng.integers(1, 4)) + 1, fractional=bool(t % 2))
            for _ in range(per_table):
                k = int(rng.integers(1, 5))
                X = rng.integers(1, sigma + 1, int(rng.integers(0, 65)))
                if rng.random() < 0.7:
                    Y = mutate_string(rng, X, int(rng.integers(0, 7)), sigma)[:64]
                else:
                    Y = rng.integers(1, sigma + 1, int(rng.integers(0, 65)))
                want = clip(full_dp_weighted_ed(X, Y, w), k)
                got = weighted_ed_le_k(X, Y, k, w)
                assert got == want, (X.tolist(), Y.tolist(), k)
                finite += want < INF
        rec["detail"] = f"{n_tables * per_table} instances, {n_tables} tables, {finite} finite"


# ---------------------------------------------------------------------------
# 2


def test_criterion_02_string_kernel_bound():
    rng = np.random.default_rng(202)
    with criterion(2, "string <= 85k^4") as rec:
        biggest = 0
        for it in range(1000):
            k = 1 if it % 4 else 2
            sigma = int(rng.integers(2, 6))
            n = int(rng.integers(85 * k**4 + 1, 85 * k**4 + 3000))
            X = periodic_string(rng, n, sigma, int(rng.integers(1, 8)))
            X[rng.integers(n, size=int(rng.integers(0, 4)))] = rng.integers(1, sigma + 1)
            if rng.random() < 0.9:
                Y = mutate_string(rng, X, int(rng.integers(0, k + 3)), sigma)
            else:
                Y = rng.integers(1, sigma + 1, n)
            K = string_kernel(X, Y, k)
            size = max(len(K.X), len(K.Y))
            assert size <= 85 * k**4, (it, size)
            biggest = max(biggest, size / (85 * k**4))
        rec["detail"] = f"1000 instances, max size/bound {biggest:.3f}"


def test_criterion_02_forest_kernel_bound():
    rng = np.random.default_rng(203)
    with criterion(2, "forest <= 12717k^5") as rec:
        steps = failed = 0
        biggest = 0
        for it in range(1000):
            nodes = int(rng.integers(6360, 8500))
            f = random_forest(rng, nodes, int(rng.integers(1, 4)), float(rng.uniform(0.3, 0.8)))
            if rng.random() < 0.85:
                g = mutate_forest(rng, f, int(rng.integers(0, 3)))
            else:
                g = random_forest(rng, int(rng.integers(nodes - 2, nodes + 3)), 2)
            if rng.random() < 0.5:
                f, g = g, f
            K = forest_kernel(f, g, 1)
            size = max(len(K.F), len(K.G))
            assert size <= 12717, (it, size)
            steps += K.steps
            failed += K.failed
            biggest = max(biggest, size / 12717)
        rec["detail"] = f"1000 instances (k=1), {steps} steps, {failed} sentinels, max size/bound {biggest:.3f}"
    with criterion(2, "forest <= 12717k^5 at k=2") as rec:
        sizes = []
        for _ in range(5):
            f = random_forest(rng, int(rng.integers(203_500, 215_000)), 3, float(rng.uniform(0.4, 0.7)))
            g = mutate_forest(rng, f, int(rng.integers(0, 5)))
            K = forest_kernel(f, g, 2)
            sizes.append(max(len(K.F), len(K.G)))
            assert sizes[-1] <= 12717 * 32
        rec["detail"] = f"5 instances over 407k tokens, kernel sizes {sizes}"


def test_criterion_02_dyck_kernel_bound():
    rng = np.random.default_rng(204)
    with criterion(2, "Dyck <= 630k^4") as rec:
        biggest = 0
        reduced = 0
        for it in range(1000):
            k = 1 if it % 10 else 2
            da = brackets(int(rng.integers(1, 4)))
            half = int(rng.integers(315 * k**4 + 1, 315 * k**4 + 1500))
            X = near_dyck(rng, da, half, int(rng.integers(0, 2 * k + 1)), periodic=rng.random() < 0.7)
            Xp = greedy_preprocess(X, da)
            K = dyck_kernel(Xp, k, da)
            assert len(K.X) <= 630 * k**4, (it, len(K.X))
            reduced += K.reduced
            biggest = max(biggest, len(K.X) / (630 * k**4))
        rec["detail"] = f"1000 instances, {reduced} through the kernel walk, max size/bound {biggest:.3f}"


# ---------------------------------------------------------------------------
# 3


def test_criterion_03_string_reduction():
    rng = np.random.default_rng(301)
    with criterion(3, "string_reduction") as rec:
        for _ in range(1000):
            k = int(rng.integers(1, 4))
            P = blocks(rng, int(rng.integers(1, 600)), np.arange(1, int(rng.integers(2, 5))), 2 * k + 1, 12 * k)
            R = string_reduction(P, k)
            assert naive_power_scan(R, 4 * k, 2 * k) == []
        rec["detail"] = "1000 inputs"


def test_criterion_03_horizontal_reduction():
    rng = np.random.default_rng(302)
    with criterion(3, "horizontal_reduction") as rec:
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            toks: list[int] = []
            for _ in range(int(rng.integers(1, 8))):
                unit = random_forest(rng, int(rng.integers(1, 2 * k + 1)), 2)
                toks += unit * int(rng.integers(1, 12 * k))
            R = horizontal_reduction(toks, k)
            Forest(R)
            assert naive_power_scan(R, 4 * k, 4 * k, balanced_only=True) == []
        rec["detail"] = "1000 inputs"


def test_criterion_03_dyck_reduction():
    rng = np.random.default_rng(303)
    with criterion(3, "dyck_reduction") as rec:
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            da = brackets(int(rng.integers(1, 4)))
            P = blocks(rng, int(rng.integers(1, 1200)), da.opens, 4 * k + 1, 20 * k)
            R = dyck_reduction(P, k, da)
            assert naive_power_scan(R, 8 * k, 4 * k) == []
        rec["detail"] = "1000 inputs"


def test_criterion_03_vertical_reduction():
    rng = np.random.default_rng(304)
    with criterion(3, "vertical_reduction") as rec:
        canonical = 0
        for _ in range(1000):
            k = int(rng.integers(1, 3))
            layers = []
            for _ in range(int(rng.integers(1, 5))):
                block = random_context(rng, int(rng.integers(1, 3)), labels=2, side=int(rng.integers(0, 3)))
                layers += block * int(rng.integers(1, 10 * k))
            out = vertical_reduction(context_from_layers(layers), k)
            got = spine(out)
            ids = layer_ids(got)
            sizes = np.array([2 + len(f) + len(g) for _, f, g in got])
            pre = np.concatenate([[0], np.cumsum(sizes)])
            bad = [(i, q) for i, q in naive_power_scan(ids, 6 * k, len(ids)) if pre[i + q] - pre[i] <= 8 * k]
            assert bad == []
            canonical += len(out) == 578 * k**4
        rec["detail"] = f"1000 inputs, {canonical} canonical outputs"


# ---------------------------------------------------------------------------
# 4


def test_criterion_04_tree_oracle_equivalence():
    rng = np.random.default_rng(401)
    tables = [quasimetric_table(rng, 3) for _ in range(10)]
    with criterion(4, "weighted_ted_le_k vs clipped weighted_ted") as rec:
        finite = 0
        for _ in range(2000):
            f = random_forest(rng, int(rng.integers(0, 15)))
            if rng.random() < 0.7:
                g = mutate_forest(rng, f, int(rng.integers(0, 4)))
                if len(g) > 28:
                    g = f
            else:
                g = random_forest(rng, int(rng.integers(0, 15)))
            w = tables[rng.integers(10)]
            full = weighted_ted(f, g, w)
            for k in (1, 2):
                want = clip(full, k)
                assert weighted_ted_le_k(f, g, k, w) == want
                finite += want < INF
        rec["detail"] = f"2000 pairs x k in {{1,2}}, 10 tables, {finite} finite"
    with criterion(4, "weighted_ted vs enumeration") as rec:
        al = Alphabet.of_size(3)
        enum_tables = [WeightTable.unit(al)] + tables
        for _ in range(400):
            f = random_forest(rng, int(rng.integers(0, 7)))
            if rng.random() < 0.6:
                g = mutate_forest(rng, f, int(rng.integers(0, 3)))
                if len(g) > 16:
                    g = f
            else:
                g = random_forest(rng, int(rng.integers(0, 7)))
            w = enum_tables[rng.integers(len(enum_tables))]
            assert weighted_ted(f, g, w) == enumerate_forest_alignments(f, g, w)
        for _ in range(20):
            f = random_forest(rng, 8)
            g = mutate_forest(rng, f, 1)
            if len(g) <= 16:
                w = enum_tables[rng.integers(len(enum_tables))]
                assert weighted_ted(f, g, w) == enumerate_forest_alignments(f, g, w)
        rec["detail"] = "420 pairs up to 8 nodes, unit and 10 tables"


# ---------------------------------------------------------------------------
# 5


def test_criterion_05_dyck_oracle_equivalence():
    rng = np.random.default_rng(501)
    da = brackets(2)
    tables = [skewmetric_table(rng, da) for _ in range(10)]
    with criterion(5, "weighted_dyck_le_k vs clipped DP") as rec:
        finite = 0
        for _ in range(2000):
            if rng.random() < 0.5:
                X = rng.integers(1, 5, int(rng.integers(0, 41)))
            else:
                X = near_dyck(rng, da, int(rng.integers(0, 19)), int(rng.integers(0, 3)))[:40]
            w = tables[rng.integers(10)]
            full = weighted_dyck_dp(X, w, da)[0]
            for k in (1, 2):
                want = clip(full, k)
                assert weighted_dyck_le_k(X, k, w, da) == want
                finite += want < INF
        rec["detail"] = f"2000 strings x k in {{1,2}}, 10 tables, {finite} finite"
    with criterion(5, "DP vs matching enumeration") as rec:
        enum_tables = [da.unit_weights()] + tables
        for _ in range(600):
            X = rng.integers(1, 5, int(rng.integers(0, 11)))
            w = enum_tables[rng.integers(len(enum_tables))]
            assert weighted_dyck_dp(X, w, da)[0] == enumerate_dyck_matchings(X, w, da.opens)
        rec["detail"] = "600 strings up to length 10"


# ---------------------------------------------------------------------------
# 6


def test_criterion_06_decomposition_bounds():
    rng = np.random.default_rng(601)
    with criterion(6, "piece_decomposition") as rec:
        pieces = 0
        for it in range(1000):
            F = Forest(random_forest(rng, int(rng.integers(0, 2001)), 3, float(rng.uniform(0.2, 0.9))))
            t = [2, 8, 64][it % 3] if it % 2 else int(rng.integers(2, 400))
            D = piece_decomposition(F, t)
            n = len(F)
            assert len(D) <= max(1, 6 * n / t - 1)
            cover = np.zeros(n, dtype=np.int64)
            for p in D:
                assert piece_ok(F, p) and p.length <= t
                if isinstance(p, Balanced):
                    cover[p.i:p.j] += 1
                else:
                    cover[p.i:p.i2] += 1
                    cover[p.j2:p.j] += 1
            assert (cover == 1).all()
            pieces += len(D)
        rec["detail"] = f"1000 forests, {pieces} pieces checked"


# ---------------------------------------------------------------------------
# 7


def test_criterion_07_pairs_guarantee():
    rng = np.random.default_rng(701)
    al = Alphabet.of_size(3)
    unit = WeightTable.unit(al)
    with criterion(7, "|pairs| >= |D| - k and identity") as rec:
        checked = 0
        while checked < 1000:
            f = random_forest(rng, int(rng.integers(1, 17)))
            g = mutate_forest(rng, f, int(rng.integers(0, 4)))
            if len(g) > 32:
                continue
            d = forest_ted_recursive(f, g, unit) // SCALE
            if d > 3:
                continue
            k = int(rng.integers(max(d, 1), 4))
            F, G = Forest(f), Forest(g)
            D = piece_decomposition(F, int(rng.integers(2, 12)))
            S = pairs(F, D, G, 2 * k)
            assert len(S) >= len(D) - k, (f, g, k)
            assert len(pairs(F, D, F, 0)) == len(D)
            checked += 1
        rec["detail"] = "1000 instances with unweighted distance <= k <= 3"


# ---------------------------------------------------------------------------
# 8


def test_criterion_08_facts():
    rng = np.random.default_rng(801)
    with criterion(8, "ed triangle") as rec:
        for _ in range(1000):
            w = quasimetric_table(rng, 3)
            X, Y, Z = (rng.integers(1, 4, int(rng.integers(0, 13))) for _ in range(3))
            assert full_dp_weighted_ed(X, Z, w) <= full_dp_weighted_ed(X, Y, w) + full_dp_weighted_ed(Y, Z, w)
        rec["detail"] = "1000 triples"
    with criterion(8, "ted triangle") as rec:
        for _ in range(1000):
            w = quasimetric_table(rng, 3)
            f, g, h = (random_forest(rng, int(rng.integers(0, 7))) for _ in range(3))
            assert weighted_ted(f, h, w) <= weighted_ted(f, g, w) + weighted_ted(g, h, w)
        rec["detail"] = "1000 triples"
    with criterion(8, "deletion identity") as rec:
        for _ in range(1000):
            w = quasimetric_table(rng, 3)
            X = rng.integers(1, 4, int(rng.integers(0, 15)))
            i = int(rng.integers(0, len(X) + 1))
            j = int(rng.integers(i, len(X) + 1))
            expect = sum(w.w(int(X[u]), EPS) for u in range(len(X)) if not i <= u < j)
            assert full_dp_weighted_ed(X, X[i:j], w) == expect
        rec["detail"] = "1000 strings"
    with criterion(8, "one- and two-symbol closed forms") as rec:
        da = brackets(2)
        syms = np.arange(1, 5)
        for _ in range(1000):
            w = skewmetric_table(rng, da)
            x, y = (int(s) for s in rng.choice(syms, 2))
            assert single_cost(x, w) == w.w(EPS, int(da.comp[x])) == brute_dyck_small([x], w, da.opens)
            assert pair_cost(x, y, w, da) == brute_dyck_small([x, y], w, da.opens)
        rec["detail"] = "1000 tables"


# ---------------------------------------------------------------------------
# 9


def test_criterion_09_linear_scaling():
    rng = np.random.default_rng(901)
    k = 2
    al = Alphabet.of_size(3)
    w = WeightTable.unit(al)

    def instance(n):
        X = periodic_string(rng, n, 3, 5)
        while len(set(X[:5].tolist())) < 2:
            X = periodic_string(rng, n, 3, 5)
        Y = X.copy()
        Y[n // 3] = Y[n // 3] % 3 + 1
        Y = np.delete(Y, 2 * n // 3)
        return X, Y

    def timed(X, Y):
        best = float("inf")
        for _ in range(3):
            t0 = time.perf_counter()
            v = weighted_ed_le_k(X, Y, k, w)
            best = min(best, time.perf_counter() - t0)
        return best, v

    with criterion(9, "string pipeline") as rec:
        weighted_ed_le_k(*instance(1 << 12), k, w)  # compile
        sizes = [1 << 20, 1 << 21, 1 << 22]
        times = []
        for n in sizes:
            X, Y = instance(n)
            t, v = timed(X, Y)
            assert v == 2 * SCALE
            times.append(t)
        ratios = [b / a for a, b in zip(times, times[1:])]
        rec["detail"] = "times " + ", ".join(f"{t:.3f}s" for t in times) + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios)
        assert all(r <= 2.6 for r in ratios), rec["detail"]
        assert times[-1] < 10.0


# ---------------------------------------------------------------------------
# 10


def test_fixture_abc_bd():
    al = Alphabet("abcd")
    with criterion(10, "abc/bd") as rec:
        v = weighted_ed_le_k(al.encode("abc"), al.encode("bd"), 2, WeightTable.unit(al))
        assert v == 2 * SCALE
        rec["detail"] = "2"


def test_fixture_ab_c_table():
    al = Alphabet("abc")
    a, b, c = 1, 2, 3
    entries = {(a, c): SCALE, (b, EPS): SCALE, (a, EPS): 5 * SCALE, (b, c): 5 * SCALE, (c, EPS): 5 * SCALE}
    entries.update({(EPS, s): 5 * SCALE for s in (a, b, c)})
    w = WeightTable.from_entries(al, entries)
    with criterion(10, "ab/c table") as rec:
        assert weighted_ed_le_k(al.encode("ab"), al.encode("c"), 3, w) == 2 * SCALE
        assert full_dp_weighted_ed(al.encode("ab"), al.encode("c"), w) == 2 * SCALE
        rec["detail"] = "2"


def test_fixture_dyck_bracket_run():
    da = brackets(2)
    X = da.alphabet.encode("(" * 1000 + "]" + ")" * 1000)
    with criterion(10, "bracket run") as rec:
        K = dyck_kernel(greedy_preprocess(X, da), 1, da)
        assert len(K.X) == 17
        assert weighted_dyck_le_k(X, 1, da.unit_weights(), da) == SCALE
        rec["detail"] = "distance 1, kernel length 17"
