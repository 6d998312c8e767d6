"""Size caps that guard the exhaustive and dense-matrix code paths.

Every cap can be overridden through the CERTIFY_CAPS environment variable,
e.g. ``CERTIFY_CAPS="brute_force_n=20,matrix_rows=8192"``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


class CapExceeded(RuntimeError):
    """An operation was asked to exceed its configured size cap."""


@dataclass(frozen=True)
class Caps:
    brute_force_n: int = 24        # leaf count for exhaustive certificate search
    completion_n: int = 12         # leaf count for the completion-enumeration oracle
    expectation_n: int = 10**6     # leaf count for the exact-expectation DP
    enumeration_n: int = 24        # leaf count for worst-case input enumeration
    promise_d: int = 5             # branching factor for the promise table (|S| = d*d^(d-1))
    matrix_rows: int = 4096        # row count for dense product matrices
    dense_eig: int = 512           # above this, spectral norms use power iteration
    optimize_cells: int = 20_000   # |S|*n budget for the dual optimizer
    restart_limit: int = 10**4     # zero-error wrapper restart cap


def current_caps() -> Caps:
    """Default caps merged with any CERTIFY_CAPS overrides."""
    raw = os.environ.get("CERTIFY_CAPS", "").strip()
    if not raw:
        return Caps()
    known = {f.name for f in fields(Caps)}
    overrides: dict[str, int] = {}
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in known:
            raise ValueError(f"unknown cap override {item!r}")
        overrides[name] = int(value)
    return Caps(**overrides)


def require(size: int, cap: int, what: str) -> None:
    if size > cap:
        raise CapExceeded(f"{what}: {size} exceeds cap {cap}")
