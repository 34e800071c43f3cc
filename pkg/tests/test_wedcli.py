from __future__ import annotations

import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from wedk import wedcli
from wedk.core import Alphabet, load_weights
from wedk.dyckkit import DyckAlphabet, parse_pairs, weighted_dyck_dp
from wedk.foresttk import forest_labels, parse_forest, weighted_ted
from wedk.oracles import full_dp_weighted_ed


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = wedcli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path: Path):
    def write(name: str, text: str) -> Path:
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return write


# --- string ------------------------------------------------------------------------


def test_string_abc_bd(files):
    x, y, w = files("x", "a b c\n"), files("y", "b d\n"), files("w", "# unit\n")
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 2)
    assert code == 0 and out == "distance 2.000000\n"
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 2, "--oracle")
    assert code == 0 and out.splitlines() == ["distance 2.000000", "oracle 2.000000"]


def test_string_inf_is_success(files):
    x, y, w = files("x", "a b c\n"), files("y", "\n"), files("w", "")
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 1)
    assert code == 0 and out == "distance INF\n"


def test_string_char_and_byte_modes(files, tmp_path):
    x, y = files("x", "abc\n"), files("y", "bd\n")
    w = files("w", "a\t-\t0.5\n")
    # a table with a sub-unit deletion is not normalized
    code, _, err = run("string", "--x", x, "--y", y, "--weights", w, "--k", 2, "--chars")
    assert code == 2 and "violation normalized a -" in err
    w = files("w2", "a\t-\t1.5\n")
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 3, "--chars", "--oracle")
    assert code == 0 and out.startswith("distance 2.500000")
    bx, by = tmp_path / "bx", tmp_path / "by"
    bx.write_bytes(b"ab\x00")
    by.write_bytes(b"ab")
    code, out, _ = run("string", "--x", bx, "--y", by, "--weights", files("w3", ""), "--k", 1, "--bytes")
    assert code == 0 and out == "distance 1.000000\n"
    code, _, err = run("string", "--x", x, "--y", y, "--weights", w, "--k", 1, "--chars", "--bytes")
    assert code == 2


def test_string_kernel_round_trip(files, tmp_path):
    rng = np.random.default_rng(0)
    base = np.resize(rng.integers(0, 3, 5), 400)
    other = base.copy()
    other[200] = 3
    names = "pqrs"
    x = files("x", " ".join(names[c] for c in base) + "\n")
    y = files("y", " ".join(names[c] for c in other) + "\n")
    w = files("w", "p\tq\t1.25\ns\t-\t2\n-\ts\t1\n")
    prefix = tmp_path / "ker"
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 1, "--kernel-out", prefix, "--oracle")
    assert code == 0
    reported = out.splitlines()[0]
    kx = Path(str(prefix) + ".x").read_text().split()
    ky = Path(str(prefix) + ".y").read_text().split()
    assert len(kx) < 400
    al = Alphabet(sorted(set(names)))
    table = load_weights(w.read_text(), al)
    d = full_dp_weighted_ed(al.encode(kx), al.encode(ky), table)
    assert reported == f"distance {d // 10**6}.{d % 10**6:06d}"


def test_oracle_mismatch_exit_code(files, monkeypatch):
    x, y, w = files("x", "a b\n"), files("y", "a c\n"), files("w", "")
    monkeypatch.setattr(wedcli.stringed, "banded_weighted_ed", lambda *a: 0)
    code, out, _ = run("string", "--x", x, "--y", y, "--weights", w, "--k", 2, "--oracle")
    assert code == 1 and "oracle 1.000000" in out


# --- tree -----------------------------------------------------------------------------


def test_tree_command(files, tmp_path):
    f, g = files("f", "(a (b))\n"), files("g", "(a)\n")
    w = files("w", "")
    code, out, _ = run("tree", "--f", f, "--g", g, "--weights", w, "--k", 1, "--oracle")
    assert code == 0 and out.splitlines() == ["distance 1.000000", "oracle 1.000000"]
    prefix = tmp_path / "tk"
    code, out, _ = run("tree", "--f", f, "--g", g, "--weights", w, "--k", 1, "--kernel-out", prefix)
    ktext = Path(str(prefix) + ".x").read_text()
    gtext = Path(str(prefix) + ".y").read_text()
    al = Alphabet(sorted(set(forest_labels(ktext)) | set(forest_labels(gtext))))
    table = load_weights("", al)
    assert weighted_ted(parse_forest(ktext, al), parse_forest(gtext, al), table) == 10**6


def test_tree_rejects_non_triangle(files):
    f, g = files("f", "(a)\n"), files("g", "(b)\n")
    w = files("w", "a\tc\t1\nc\tb\t1\na\tb\t5\n")
    code, _, err = run("tree", "--f", f, "--g", g, "--weights", w, "--k", 1)
    assert code == 2 and "violation triangle a c b" in err


def test_tree_parse_error(files):
    f, g, w = files("f", "(a\n"), files("g", "(a)\n"), files("w", "")
    code, _, err = run("tree", "--f", f, "--g", g, "--weights", w, "--k", 1)
    assert code == 2 and err.startswith("error:")


# --- dyck -----------------------------------------------------------------------------


def test_dyck_balanced(files):
    pairs = files("p", "(\t)\n[\t]\n")
    x = files("x", "( [ ] ) ( )\n")
    w = files("w", "(\t-\t2\n-\t)\t2\n(\t)\t2\n[\t]\t2\n")
    code, out, _ = run("dyck", "--x", x, "--pairs", pairs, "--weights", w, "--k", 1, "--oracle")
    assert code == 0 and out.splitlines() == ["distance 0.000000", "oracle 0.000000"]


def test_dyck_fixture_kernel_out(files, tmp_path):
    pairs = files("p", "(\t)\n[\t]\n")
    x = files("x", "(" * 1000 + "]" + ")" * 1000 + "\n")
    w = files("w", "")
    prefix = tmp_path / "dk"
    code, out, _ = run("dyck", "--x", x, "--pairs", pairs, "--weights", w, "--k", 1, "--chars", "--kernel-out", prefix)
    assert code == 0 and out == "distance 1.000000\n"
    kernel = Path(str(prefix) + ".x").read_text().strip()
    assert kernel == "(" * 8 + "]" + ")" * 8
    da = DyckAlphabet.from_pairs(parse_pairs(pairs.read_text()))
    assert weighted_dyck_dp(da.alphabet.encode(kernel), da.unit_weights(), da)[0] == 10**6


def test_dyck_rejects_bad_symbols_and_skew(files):
    pairs = files("p", "(\t)\n")
    w = files("w", "")
    code, _, err = run("dyck", "--x", files("x", "( x )"), "--pairs", pairs, "--weights", w, "--k", 1)
    assert code == 2 and "unknown symbol" in err
    code, _, err = run("dyck", "--x", files("x2", "( )"), "--pairs", pairs, "--weights", files("w2", "a\t-\t1\n"), "--k", 1)
    assert code == 2
    code, _, err = run("dyck", "--x", files("x3", "( )"), "--pairs", pairs, "--weights", files("w3", "(\t-\t2\n-\t)\t3\n"), "--k", 1)
    assert code == 2 and "violation skew ( -" in err


# --- validate-weights ---------------------------------------------------------------


def test_validate_weights(files):
    code, out, _ = run("validate-weights", "--weights", files("w", "a\tb\t1\n"), "--mode", "quasimetric")
    assert code == 0 and out == "ok\n"
    bad = files("bad", "a\tc\t1\nc\tb\t1\na\tb\t5\n")
    code, out, _ = run("validate-weights", "--weights", bad, "--mode", "quasimetric")
    assert code == 2 and "violation triangle a c b" in out.splitlines()
    code, out, _ = run("validate-weights", "--weights", bad, "--mode", "normalized")
    assert code == 0
    pairs = files("p", "(\t)\n")
    skew = files("s", "(\t-\t2\n-\t)\t3\n")
    code, out, _ = run("validate-weights", "--weights", skew, "--mode", "skewmetric", "--pairs", pairs)
    assert code == 2 and "violation skew ( -" in out
    code, _, err = run("validate-weights", "--weights", skew, "--mode", "skewmetric")
    assert code == 2


# --- usage errors ---------------------------------------------------------------------


def test_usage_errors(files, tmp_path):
    w = files("w", "")
    assert run()[0] == 2
    assert run("string", "--x", "a")[0] == 2
    assert run("bogus")[0] == 2
    code, _, err = run("string", "--x", tmp_path / "missing", "--y", w, "--weights", w, "--k", 1)
    assert code == 2 and "cannot read" in err
    x = files("x", "a\n")
    assert run("string", "--x", x, "--y", x, "--weights", w, "--k", 0)[0] == 2
    assert run("string", "--x", x, "--y", x, "--weights", files("bw", "a b\n"), "--k", 1)[0] == 2
    assert run("--batch", tmp_path / "nolist")[0] == 2


# --- batch ---------------------------------------------------------------------------


def test_batch_order_and_exit_code(files, tmp_path):
    files("x1", "a b c\n")
    files("y1", "b d\n")
    files("x2", "a\n")
    files("w", "")
    sub = tmp_path / "sub"
    sub.mkdir()
    lst = files("list", "\n".join([
        "# comment",
        "string --x x1 --y y1 --weights w --k 2",
        "string --x x2 --y x2 --weights w --k 1",
        "string --x x1 --y x2 --weights w --k 1",
        "string --x nowhere --y x2 --weights w --k 1",
        "string --x x1",
    ]) + "\n")
    code, out, err = run("--batch", lst)
    assert code == 2
    lines = out.splitlines()
    assert lines == [
        "# string --x x1 --y y1 --weights w --k 2",
        "distance 2.000000",
        "# string --x x2 --y x2 --weights w --k 1",
        "distance 0.000000",
        "# string --x x1 --y x2 --weights w --k 1",
        "distance INF",
        "# string --x nowhere --y x2 --weights w --k 1",
        "# string --x x1",
    ]
    assert err.count("error:") == 2
    assert run("--batch", lst, "string")[0] == 2


def test_batch_many_instances_keep_order(files):
    files("w", "")
    lines = []
    for i in range(30):
        files(f"x{i}", "a " * i + "\n")
        files(f"y{i}", "\n")
        lines.append(f"string --x x{i} --y y{i} --weights w --k 40")
    lst = files("list", "\n".join(lines) + "\n")
    code, out, _ = run("--batch", lst)
    assert code == 0
    got = [ln for ln in out.splitlines() if ln.startswith("distance")]
    assert got == [f"distance {i}.000000" for i in range(30)]


def test_module_entry_point(files):
    x, y, w = files("x", "a b c\n"), files("y", "b d\n"), files("w", "")
    res = subprocess.run(
        [sys.executable, "-m", "wedk", "string", "--x", str(x), "--y", str(y), "--weights", str(w), "--k", "2"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout == "distance 2.000000\n"
