"""t-fold product functions and the additivity of their adversary bounds.

Solving t independent instances multiplies the adversary value by t.  The
lower-bound half composes a weight matrix by the tensor-sum recursion
G(t) = G(1) (x) I^(t-1) + I (x) G(t-1); the upper-bound half spreads a
dual witness uniformly across blocks.  verify_direct_sum measures both
sides and checks the linear scaling numerically.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from itertools import product

import numpy as np

from .adversary import (
    AdversaryMatrix,
    DualWitness,
    FunctionTable,
    dual_value,
    primal_value,
    spectral_norm,
)
from .caps import current_caps, require


def product_function(base: FunctionTable, t: int) -> FunctionTable:
    """The t-fold product: inputs concatenate t base inputs, labels are tuples.

    Row order is the t-fold lexicographic product of the base row order
    (first block slowest), matching the Kronecker conventions below.
    """
    if t < 1:
        raise ValueError(f"arity must be >= 1, got {t}")
    require(base.size**t, current_caps().matrix_rows, "product function table")
    rows = [
        ("".join(x for x, _ in combo), tuple(label for _, label in combo))
        for combo in product(base.rows, repeat=t)
    ]
    return FunctionTable(base.n * t, tuple(rows))


def compose_gamma(gamma1: AdversaryMatrix, t: int) -> AdversaryMatrix:
    """Tensor-sum weights for the t-fold product of gamma1's function.

    Built by the recursion G(t) = G(1) (x) I^(t-1) + I (x) G(t-1); the
    resulting norm is t times the base norm, while every masked norm
    matches the base masked norm of the same in-block position.
    """
    if t < 1:
        raise ValueError(f"arity must be >= 1, got {t}")
    base = gamma1.entries
    size = base.shape[0]
    require(size**t, current_caps().matrix_rows, "tensor-sum matrix")
    table_t = product_function(gamma1.table, t)
    entries = base
    for j in range(2, t + 1):
        eye = np.eye(size ** (j - 1))
        entries = np.kron(base, eye) + np.kron(np.eye(size), entries)
    return AdversaryMatrix(table_t, entries)


def compose_dual(p1: DualWitness, t: int) -> DualWitness:
    """Block witness for the t-fold product: weight 1/t per block, base row within.

    Position i in 1..tn belongs to block ceil(i/n) and uses the base
    distribution of that block's input at in-block position
    ((i-1) mod n) + 1.
    """
    if t < 1:
        raise ValueError(f"arity must be >= 1, got {t}")
    base_table = p1.table
    table_t = product_function(base_table, t)
    size, n = base_table.size, base_table.n
    rows = np.empty((size**t, n * t))
    for r in range(size**t):
        # digits of r in base |S|, first block slowest
        rem = r
        blocks = []
        for b in range(t - 1, -1, -1):
            blocks.append(rem // size**b)
            rem %= size**b
        rows[r] = np.concatenate([p1.p[br] / t for br in blocks])
    return DualWitness(table_t, rows)


@dataclass(frozen=True)
class DirectSumRow:
    """Measured primal/dual values at one arity, with their scaling ratios."""

    t: int
    primal: float
    dual: float
    primal_ratio: float
    dual_ratio: float
    primal_ok: bool
    dual_ok: bool

    def as_dict(self) -> dict:
        return asdict(self)


def verify_direct_sum(
    f: FunctionTable,
    gamma1: AdversaryMatrix,
    p1: DualWitness,
    t_max: int,
    rel_tol: float = 1e-6,
) -> list[DirectSumRow]:
    """Measure primal and dual values for t = 1..t_max and check linear scaling.

    Stops early with a partial report if a product would exceed the matrix
    cap.  The *_ok flags compare against t times the t = 1 value at
    relative tolerance rel_tol.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    cap = current_caps().matrix_rows
    report: list[DirectSumRow] = []
    base_primal = base_dual = None
    for t in range(1, t_max + 1):
        if f.size**t > cap:
            break
        ft = product_function(f, t)
        primal = primal_value(ft, compose_gamma(gamma1, t))
        dual = dual_value(ft, compose_dual(p1, t))
        if t == 1:
            base_primal, base_dual = primal, dual
        primal_ratio = primal / base_primal
        dual_ratio = dual / base_dual
        report.append(
            DirectSumRow(
                t=t,
                primal=primal,
                dual=dual,
                primal_ratio=primal_ratio,
                dual_ratio=dual_ratio,
                primal_ok=abs(primal - t * base_primal) <= rel_tol * t * base_primal,
                dual_ok=abs(dual - t * base_dual) <= rel_tol * t * base_dual,
            )
        )
    return report


def kron_norm_check(a, b, mask=None) -> dict:
    """Check norm multiplicativity of a Kronecker product, and optionally
    that masking before tensoring with I equals tensoring then masking with
    mask (x) J.

    Returns a report dict; raises nothing on mismatch (the caller asserts).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    require(a.shape[0] * b.shape[0], current_caps().matrix_rows, "Kronecker check")
    norm_a = spectral_norm(a)
    norm_b = spectral_norm(b)
    norm_kron = spectral_norm(np.kron(a, b))
    report = {
        "norm_a": norm_a,
        "norm_b": norm_b,
        "norm_kron": norm_kron,
        "product": norm_a * norm_b,
        "multiplicative_ok": bool(abs(norm_kron - norm_a * norm_b) <= 1e-9),
    }
    if mask is not None:
        mask = np.asarray(mask, dtype=float)
        m = b.shape[0]
        eye = np.eye(m)
        ones = np.ones((m, m))
        masked_first = np.kron(a * mask, eye)
        masked_last = np.kron(a, eye) * np.kron(mask, ones)
        report["mask_identity_ok"] = bool(np.array_equal(masked_first, masked_last))
    return report
