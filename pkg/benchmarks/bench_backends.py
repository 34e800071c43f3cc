"""Compare the numba kernels with the pure-Python fallback.

Each backend runs in its own interpreter because the choice is made at import
time from ``WEDK_PURE_PYTHON``.  Usage::

    python benchmarks/bench_backends.py [--scale 1.0] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from pathlib import Path

WORKER = r"""
import json, sys, time
import numpy as np
from wedk import backend
from wedk.core import Alphabet, WeightTable
from wedk.dyckkit import DyckAlphabet, weighted_dyck_le_k
from wedk.foresttk import bounded_ted, weighted_ted
from wedk.seqkit import LengthOracle, build_lce_index, periodicity_reduction
from wedk.stringed import banded_weighted_ed, weighted_ed_le_k

scale, repeat = float(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(7)
al = Alphabet.of_size(3)
unit = WeightTable.unit(al)

def near(n):
    X = np.resize(rng.integers(1, 4, 5), n)
    Y = X.copy(); Y[n // 2] = Y[n // 2] % 3 + 1
    return X, Y

def forest(nodes):
    toks, stack = [], []
    while nodes or stack:
        if nodes and (not stack or rng.random() < 0.55):
            stack.append(2 * int(rng.integers(1, 4))); toks.append(stack[-1]); nodes -= 1
        else:
            toks.append(stack.pop() + 1)
    return toks

def drop_leaf(f):
    i = next(i for i in range(len(f) - 1) if f[i] % 2 == 0 and f[i + 1] == f[i] + 1)
    return f[:i] + f[i + 2:]

n_str = int(200_000 * scale)
Xs, Ys = near(n_str)
Xb, Yb = near(int(4_000 * scale))
P = np.resize(rng.integers(1, 4, 3), int(100_000 * scale))
f = forest(max(int(60 * scale), 2)); g = drop_leaf(f)
da = DyckAlphabet.from_pairs([("(", ")"), ("[", "]")])
half = int(3_000 * scale)
Xd = da.alphabet.encode("(" * half + "]" + ")" * half)

cases = {
    "string pipeline k=2": lambda: weighted_ed_le_k(Xs, Ys, 2, unit),
    "banded weighted DP k=3": lambda: banded_weighted_ed(Xb, Yb, 3, unit),
    "periodicity reduction": lambda: periodicity_reduction(P, 4, LengthOracle(2)),
    "LCE index build": lambda: build_lce_index(P),
    "tree distance": lambda: weighted_ted(f, g, unit),
    "bounded tree distance k=2": lambda: bounded_ted(f, g, 2, unit),
    "Dyck pipeline k=1": lambda: weighted_dyck_le_k(Xd, 1, da.unit_weights(), da),
}
out = {"backend": backend(), "times": {}}
for name, fn in cases.items():
    fn()  # warm-up, includes compilation on the numba route
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter(); fn(); best = min(best, time.perf_counter() - t0)
    out["times"][name] = best
print(json.dumps(out))
"""


def run_backend(pure: bool, scale: float, repeat: int) -> dict:
    env = dict(os.environ)
    env["WEDK_PURE_PYTHON"] = "1" if pure else "0"
    src = Path(__file__).resolve().parents[1] / "src"
    env["PYTHONPATH"] = str(src) + os.pathsep + env.get("PYTHONPATH", "")
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(scale), str(repeat)], capture_output=True, text=True, env=env, check=False
    )
    if res.returncode != 0:
        raise SystemExit(res.stderr)
    return json.loads(res.stdout)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every instance size")
    ap.add_argument("--repeat", type=int, default=3, help="timed runs per case (best is kept)")
    ap.add_argument("--json", action="store_true", help="print raw JSON instead of a table")
    args = ap.parse_args(argv)

    fast = run_backend(False, args.scale, args.repeat)
    slow = run_backend(True, args.scale, args.repeat)
    if args.json:
        print(json.dumps({"numba": fast, "python": slow}, indent=2))
        return 0
    width = max(map(len, fast["times"]))
    print(f"{'case':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  speedup")
    for name, t in fast["times"].items():
        p = slow["times"][name]
        print(f"{name:<{width}}  {t:>9.4f}s  {p:>9.4f}s  {p / t:>6.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
