"""Command-line front end.

    wedk string --x X --y Y --weights W --k K [--kernel-out P] [--oracle] [--chars | --bytes]
    wedk tree   --f F --g G --weights W --k K [--kernel-out P] [--oracle]
    wedk dyck   --x X --pairs PAIRS --weights W --k K [--kernel-out P] [--oracle] [--chars]
    wedk validate-weights --weights W --mode MODE [--pairs PAIRS]
    wedk --batch LIST

Exit codes: 0 success (INF included), 1 oracle mismatch, 2 bad input.
"""

from __future__ import annotations

import argparse
import io
import shlex
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import TextIO

import numpy as np

from . import dyckkit, foresttk, oracles, stringed
from .core import (
    MODES,
    Alphabet,
    FormatError,
    WeightTable,
    clip,
    format_cost,
    parse_weight_lines,
    table_from_rows,
    validate_weights,
    weight_symbols,
)

_PATH_OPTS = ("x", "y", "f", "g", "weights", "pairs", "kernel_out")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wedk", description="Bounded weighted edit distances via kernels.")
    p.add_argument("--batch", metavar="LIST", help="file with one argument line per instance")
    sub = p.add_subparsers(dest="cmd")

    def common(sp):
        sp.add_argument("--weights", required=True)
        sp.add_argument("--k", type=int, required=True)
        sp.add_argument("--kernel-out", dest="kernel_out")
        sp.add_argument("--oracle", action="store_true")

    s = sub.add_parser("string", help="weighted string edit distance")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--chars", action="store_true")
    mode.add_argument("--bytes", action="store_true")
    common(s)

    t = sub.add_parser("tree", help="weighted tree edit distance")
    t.add_argument("--f", required=True)
    t.add_argument("--g", required=True)
    common(t)

    d = sub.add_parser("dyck", help="weighted Dyck edit distance")
    d.add_argument("--x", required=True)
    d.add_argument("--pairs", required=True)
    d.add_argument("--chars", action="store_true")
    common(d)

    v = sub.add_parser("validate-weights", help="check a weight table")
    v.add_argument("--weights", required=True)
    v.add_argument("--mode", required=True, choices=MODES)
    v.add_argument("--pairs")
    return p


# ---------------------------------------------------------------------------
# helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _tokens(path: str, chars: bool = False, raw: bool = False) -> list[str]:
    if raw:
        try:
            return [chr(b) for b in Path(path).read_bytes()]
        except OSError as exc:
            raise FormatError(f"cannot read {path}: {exc}") from exc
    text = _read(path)
    if chars:
        return [c for c in text if not c.isspace()]
    return text.split()


def _check(table: WeightTable, mode: str, err: TextIO) -> bool:
    report = validate_weights(table, mode)
    for v in report.violations:
        print(f"violation {v}", file=err)
    return report.ok


def _write_seq(path: str, names: list[str], chars: bool, raw: bool):
    if raw:
        Path(path).write_bytes(bytes(ord(c) for c in names))
    elif chars:
        Path(path).write_text("".join(names) + "\n", encoding="utf-8")
    else:
        Path(path).write_text(" ".join(names) + "\n", encoding="utf-8")


def _report(out: TextIO, value: int, k: int, oracle_value: int | None) -> int:
    print(f"distance {format_cost(value)}", file=out)
    if oracle_value is None:
        return 0
    print(f"oracle {format_cost(oracle_value)}", file=out)
    return 0 if oracle_value == value else 1


# ---------------------------------------------------------------------------
# subcommands


def _cmd_string(a, out, err) -> int:
    X_names = _tokens(a.x, a.chars, a.bytes)
    Y_names = _tokens(a.y, a.chars, a.bytes)
    rows = parse_weight_lines(_read(a.weights))
    alphabet = Alphabet(sorted(set(X_names) | set(Y_names) | set(weight_symbols(rows))))
    w = table_from_rows(alphabet, rows)
    if not _check(w, "normalized", err):
        return 2
    X, Y = alphabet.encode(X_names), alphabet.encode(Y_names)
    K = stringed.string_kernel(X, Y, a.k)
    value = stringed.banded_weighted_ed(K.X, K.Y, a.k, w)
    if a.kernel_out:
        _write_seq(a.kernel_out + ".x", alphabet.decode(K.X), a.chars, a.bytes)
        _write_seq(a.kernel_out + ".y", alphabet.decode(K.Y), a.chars, a.bytes)
    ref = None
    if a.oracle:
        try:
            ref = oracles.enumerate_alignments_ed(X, Y, w)
        except oracles.CapExceeded:
            ref = oracles.full_dp_weighted_ed(X, Y, w)
        ref = clip(ref, a.k)
    return _report(out, value, a.k, ref)


def _cmd_tree(a, out, err) -> int:
    ftext, gtext = _read(a.f), _read(a.g)
    rows = parse_weight_lines(_read(a.weights))
    names = set(foresttk.forest_labels(ftext)) | set(foresttk.forest_labels(gtext)) | set(weight_symbols(rows))
    alphabet = Alphabet(sorted(names))
    w = table_from_rows(alphabet, rows)
    if not _check(w, "quasimetric", err):
        return 2
    F, G = foresttk.parse_forest(ftext, alphabet), foresttk.parse_forest(gtext, alphabet)
    K = foresttk.forest_kernel(F, G, a.k)
    value = foresttk.weighted_ted_le_k(K.F, K.G, a.k, w)
    if a.kernel_out:
        Path(a.kernel_out + ".x").write_text(foresttk.format_forest(K.F, alphabet) + "\n", encoding="utf-8")
        Path(a.kernel_out + ".y").write_text(foresttk.format_forest(K.G, alphabet) + "\n", encoding="utf-8")
    ref = None
    if a.oracle:
        try:
            ref = oracles.enumerate_forest_alignments(F, G, w)
        except oracles.CapExceeded:
            ref = oracles.forest_ted_recursive(F, G, w)
        ref = clip(ref, a.k)
    return _report(out, value, a.k, ref)


def _cmd_dyck(a, out, err) -> int:
    pairs = dyckkit.parse_pairs(_read(a.pairs))
    names = sorted({s for p in pairs for s in p})
    da = dyckkit.DyckAlphabet(Alphabet(names), pairs)
    alphabet = da.alphabet
    rows = parse_weight_lines(_read(a.weights))
    for s in weight_symbols(rows):
        if s not in alphabet:
            raise FormatError(f"weight symbol {s!r} is not a bracket")
    w = table_from_rows(alphabet, rows, da.comp)
    if not _check(w, "skewmetric", err):
        return 2
    X_names = _tokens(a.x, a.chars)
    for s in X_names:
        if s not in alphabet:
            raise FormatError(f"unknown symbol {s!r}")
    X = alphabet.encode(X_names)
    K = dyckkit.dyck_kernel(dyckkit.greedy_preprocess(X, da), a.k, da)
    value, _ = dyckkit.weighted_dyck_dp(K.X, w, da, band=a.k)
    if a.kernel_out:
        _write_seq(a.kernel_out + ".x", alphabet.decode(K.X), a.chars, False)
    ref = None
    if a.oracle:
        try:
            ref = oracles.enumerate_dyck_matchings(X, w, da.opens)
        except oracles.CapExceeded:
            ref, _ = dyckkit.weighted_dyck_dp(X, w, da)
        ref = clip(ref, a.k)
    return _report(out, value, a.k, ref)


def _cmd_validate(a, out, err) -> int:
    rows = parse_weight_lines(_read(a.weights))
    comp = None
    if a.pairs:
        pairs = dyckkit.parse_pairs(_read(a.pairs))
        names = sorted({s for p in pairs for s in p} | set(weight_symbols(rows)))
        da = dyckkit.DyckAlphabet(Alphabet(names), pairs)
        alphabet, comp = da.alphabet, da.comp
    else:
        alphabet = Alphabet(sorted(set(weight_symbols(rows))))
    if a.mode == "skewmetric" and comp is None:
        raise FormatError("skewmetric validation needs --pairs")
    w = table_from_rows(alphabet, rows, comp)
    report = validate_weights(w, a.mode)
    if report.ok:
        print("ok", file=out)
        return 0
    for v in report.violations:
        print(f"violation {v}", file=out)
    return 2


_COMMANDS = {"string": _cmd_string, "tree": _cmd_tree, "dyck": _cmd_dyck, "validate-weights": _cmd_validate}


# ---------------------------------------------------------------------------
# entry points


def _rebase(ns: argparse.Namespace, base: Path):
    for opt in _PATH_OPTS:
        val = getattr(ns, opt, None)
        if val and not Path(val).is_absolute():
            setattr(ns, opt, str(base / val))


def _dispatch(ns: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if ns.cmd is None:
        print("error: a subcommand or --batch is required", file=err)
        return 2
    if getattr(ns, "k", 1) < 1:
        print("error: --k must be at least 1", file=err)
        return 2
    try:
        return _COMMANDS[ns.cmd](ns, out, err)
    except (FormatError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=err)
        return 2


def _run_batch(list_path: str, out: TextIO, err: TextIO, workers: int | None = None) -> int:
    base = Path(list_path).resolve().parent
    lines = [ln.strip() for ln in _read(list_path).splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    parser = build_parser()

    def one(line: str) -> tuple[int, str, str]:
        o, e = io.StringIO(), io.StringIO()
        try:
            ns = parser.parse_args(shlex.split(line))
        except UsageError as exc:
            return 2, "", f"error: {exc}\n"
        if ns.batch:
            return 2, "", "error: nested --batch\n"
        _rebase(ns, base)
        code = _dispatch(ns, o, e)
        return code, o.getvalue(), e.getvalue()

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, lines))
    worst = 0
    for line, (code, o, e) in zip(lines, results):
        print(f"# {line}", file=out)
        out.write(o)
        err.write(e)
        worst = max(worst, code)
    return worst


def run(argv: list[str], out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        ns = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return 2
    if ns.batch:
        if ns.cmd is not None:
            print("error: --batch takes no subcommand", file=err)
            return 2
        try:
            return _run_batch(ns.batch, out, err)
        except FormatError as exc:
            print(f"error: {exc}", file=err)
            return 2
    return _dispatch(ns, out, err)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
