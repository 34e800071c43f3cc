"""Numba switch.

Hot loops are written once and compiled with ``numba.njit``.  Setting
``WEDK_PURE_PYTHON=1`` before import swaps in a no-op decorator so the same
source runs as plain Python; results are identical, only speed differs.
"""

from __future__ import annotations

import os

PURE_PYTHON = os.environ.get("WEDK_PURE_PYTHON", "").strip() not in ("", "0")

if PURE_PYTHON:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap

else:
    from numba import njit  # noqa: F401


def backend() -> str:
    return "python" if PURE_PYTHON else "numba"
