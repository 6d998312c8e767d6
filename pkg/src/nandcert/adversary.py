"""Spectral adversary bounds for partial Boolean functions.

A function table lists the promise set S with one label per input.  A
feasible weight matrix is symmetric, entrywise nonnegative, and zero on
equal-label pairs; its spectral norm divided by the largest norm after
masking to pairs that differ in one bit lower-bounds the adversary value.
Probability witnesses give the matching upper bound.  The explicit
constructions at the bottom cover the one-level unique-search problem and
the two-level promise problem with exactly one all-ones subtree.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Optional

import numpy as np
import scipy.sparse

from .caps import current_caps, require

logger = logging.getLogger(__name__)

POWER_TOL = 1e-12
POWER_MAX_ITER = 10**5


@dataclass(frozen=True)
class FunctionTable:
    """A finite partial function f: S subset of {0,1}^n -> labels, as explicit rows.

    Row order is canonical: matrices and witnesses follow it everywhere.
    """

    n: int
    rows: tuple[tuple[str, object], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple((str(x), label) for x, label in self.rows))
        seen = set()
        labels = set()
        for x, label in self.rows:
            if len(x) != self.n or any(c not in "01" for c in x):
                raise ValueError(f"input {x!r} is not a {self.n}-bit string")
            if x in seen:
                raise ValueError(f"duplicate input {x!r}")
            seen.add(x)
            labels.add(label)
        if len(labels) < 2:
            raise ValueError("need at least two distinct labels for an adversary bound")

    @property
    def size(self) -> int:
        return len(self.rows)

    @cached_property
    def bit_array(self) -> np.ndarray:
        """|S| x n uint8 array of input bits."""
        return np.array([[int(c) for c in x] for x, _ in self.rows], dtype=np.uint8)

    @cached_property
    def label_ids(self) -> np.ndarray:
        """|S| integer array; equal entries iff equal labels."""
        mapping: dict = {}
        ids = []
        for _, label in self.rows:
            ids.append(mapping.setdefault(label, len(mapping)))
        return np.array(ids, dtype=np.int64)

    def to_json(self) -> dict:
        return {"n": self.n, "rows": [{"x": x, "label": label} for x, label in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> "FunctionTable":
        return cls(int(data["n"]), tuple((r["x"], r["label"]) for r in data["rows"]))


@dataclass(frozen=True, eq=False)
class AdversaryMatrix:
    """Feasible adversary weights for a table, in the table's row order."""

    table: FunctionTable
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", m)
        s = self.table.size
        if m.shape != (s, s):
            raise ValueError(f"matrix shape {m.shape} does not match table size {s}")
        if not np.array_equal(m, m.T):
            raise ValueError("adversary matrix must be symmetric")
        if np.any(m < 0):
            raise ValueError("adversary matrix must be entrywise nonnegative")
        if not m.any():
            raise ValueError("adversary matrix must not be identically zero")
        same = self.table.label_ids[:, None] == self.table.label_ids[None, :]
        if np.any(m[same] != 0):
            raise ValueError("adversary matrix must vanish on equal-label pairs")


@dataclass(frozen=True, eq=False)
class DualWitness:
    """One probability distribution over bit positions per table row."""

    table: FunctionTable
    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.shape != (self.table.size, self.table.n):
            raise ValueError(
                f"witness shape {p.shape} does not match ({self.table.size}, {self.table.n})"
            )
        if np.any(p < 0):
            raise ValueError("witness rows must be nonnegative")
        if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-10:
            raise ValueError("witness rows must sum to 1 within 1e-10")


def _power_top_eigenvalue(matvec, size: int, start: np.ndarray) -> tuple[float, bool]:
    """Largest eigenvalue of a symmetric PSD-shifted operator by power iteration."""
    v = start / np.linalg.norm(start)
    lam = 0.0
    for _ in range(POWER_MAX_ITER):
        w = matvec(v)
        lam = float(v @ w)
        resid = np.linalg.norm(w - lam * v)
        if resid <= POWER_TOL * max(1.0, abs(lam)):
            return lam, True
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, True
        v = w / norm
    return lam, False


def _power_iteration_norm(m) -> float:
    """Spectral norm of a symmetric matrix via shifted power iteration.

    Shifting by the max absolute row sum makes both extreme eigenvalues the
    top of a PSD operator.  The all-ones start is exact for entrywise
    nonnegative matrices (it overlaps the top eigenvector); a seeded random
    restart guards against a start orthogonal to the dominant eigenvector.
    """
    size = m.shape[0]
    if scipy.sparse.issparse(m):
        shift = float(np.max(np.abs(m).sum(axis=1)))
    else:
        shift = float(np.max(np.sum(np.abs(m), axis=1)))
    if shift == 0.0:
        return 0.0

    rng = np.random.default_rng(0)
    starts = [np.ones(size), rng.standard_normal(size)]
    best = 0.0
    for sign in (1.0, -1.0):  # top of shift*I + M, then of shift*I - M

        def matvec(v, sign=sign):
            return shift * v + sign * (m @ v)

        for start in starts:
            lam, converged = _power_top_eigenvalue(matvec, size, start)
            if not converged:
                logger.warning("power iteration hit the %d-step cap", POWER_MAX_ITER)
            best = max(best, abs(lam - shift))
    return best


def spectral_norm(m, method: str = "auto") -> float:
    """Largest absolute eigenvalue of a symmetric real matrix.

    method: "auto" uses a dense eigensolve up to the dense_eig cap and
    power iteration above it; "eigh" and "power" force one path (the two
    are cross-validated in the test suite).
    """
    sparse_input = scipy.sparse.issparse(m)
    if not sparse_input:
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if not np.allclose(m, m.T, rtol=1e-12, atol=1e-12):
            raise ValueError("matrix is not symmetric")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix has non-finite entries")

    if method not in ("auto", "eigh", "power"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "eigh" if m.shape[0] <= current_caps().dense_eig and not sparse_input else "power"

    if method == "eigh":
        dense = m.toarray() if sparse_input else m
        return float(np.max(np.abs(np.linalg.eigvalsh(dense))))

    if not sparse_input and m.shape[0] > current_caps().dense_eig:
        # large masked matrices are sparse in practice; matvecs are much cheaper there
        nnz = np.count_nonzero(m)
        if nnz < 0.05 * m.size:
            m = scipy.sparse.csr_matrix(m)
    return _power_iteration_norm(m)


def difference_mask(table: FunctionTable, i: int) -> np.ndarray:
    """Boolean |S| x |S| mask of pairs whose inputs differ in bit i (1-based)."""
    if not 1 <= i <= table.n:
        raise ValueError(f"bit index {i} out of range 1..{table.n}")
    col = table.bit_array[:, i - 1]
    return col[:, None] != col[None, :]


def hadamard_difference_norm(gamma: AdversaryMatrix, i: int) -> float:
    """Spectral norm of the weights restricted to pairs differing in bit i."""
    return spectral_norm(gamma.entries * difference_mask(gamma.table, i))


def primal_value(f: FunctionTable, gamma: AdversaryMatrix) -> float:
    """norm(weights) / max_i norm(masked weights); lower-bounds the adversary value."""
    if gamma.table is not f and gamma.table != f:
        raise ValueError("matrix was built for a different function table")
    masked = [hadamard_difference_norm(gamma, i) for i in range(1, f.n + 1)]
    peak = max(masked)
    if peak == 0.0:
        raise ValueError("all masked norms vanish; degenerate adversary matrix")
    return spectral_norm(gamma.entries) / peak


def dual_value(f: FunctionTable, witness: DualWitness) -> float:
    """max over differing-label pairs of 1 / sum_i sqrt(p_x(i) p_y(i)) over differing bits.

    Upper-bounds the adversary value for any feasible witness; pairs with a
    zero denominator make the value +inf (returned, not raised).
    """
    if witness.table is not f and witness.table != f:
        raise ValueError("witness was built for a different function table")
    denoms = _pair_denominators(f, witness.p)
    differ = f.label_ids[:, None] != f.label_ids[None, :]
    if not differ.any():
        raise ValueError("no differing-label pair exists")
    worst = float(denoms[differ].min())
    return math.inf if worst == 0.0 else 1.0 / worst


def _pair_denominators(f: FunctionTable, p: np.ndarray) -> np.ndarray:
    """|S| x |S| matrix of sum_i [x_i != y_i] sqrt(p_x(i) p_y(i))."""
    sqrtp = np.sqrt(p)
    bits = f.bit_array
    out = np.zeros((f.size, f.size))
    for i in range(f.n):
        col = bits[:, i]
        mask = col[:, None] != col[None, :]
        out += mask * np.outer(sqrtp[:, i], sqrtp[:, i])
    return out


def uniform_dual_witness(f: FunctionTable) -> DualWitness:
    return DualWitness(f, np.full((f.size, f.n), 1.0 / f.n))


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, len(v) + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def optimize_dual(
    f: FunctionTable, target: Optional[float] = None, budget: int = 400
) -> DualWitness:
    """Improve a dual witness by projected coordinate descent from uniform.

    Each pass cycles over rows; a row takes a gradient step that widens its
    pair denominators, weighted by a softmin over how tight each pair is
    (annealed toward the hard minimum), then projects back onto the
    simplex.  The soft weights stop rows from chasing single pairs in
    circles.  Returns the best witness seen; no optimality guarantee.
    budget counts full passes.
    """
    require(f.size * f.n, current_caps().optimize_cells, "dual optimization")
    differ = f.label_ids[:, None] != f.label_ids[None, :]
    if not differ.any():
        raise ValueError("no differing-label pair exists")
    bits = f.bit_array
    diff_bits = bits[:, None, :] != bits[None, :, :]  # |S| x |S| x n

    p = np.full((f.size, f.n), 1.0 / f.n)
    best_p = p.copy()
    best_val = dual_value(f, DualWitness(f, p))
    floor = 1e-14

    for sweep in range(budget):
        step = 0.3 / math.sqrt(sweep + 1.0)
        for x in range(f.size):
            others = np.nonzero(differ[x])[0]
            sqrtp = np.sqrt(np.maximum(p, floor))
            denoms = (diff_bits[x, others] * sqrtp[x][None, :] * sqrtp[others]).sum(axis=1)
            dmin = denoms.min()
            tau = max(dmin, 1e-9) * (0.5 / (1.0 + 0.2 * sweep) + 1e-3)
            weights = np.exp(-(denoms - dmin) / tau)
            weights /= weights.sum()
            # d denom / d p_x(i) = [x_i != y_i] * sqrt(p_y(i)/p_x(i)) / 2
            grad = (
                diff_bits[x, others] * sqrtp[others] / (2.0 * sqrtp[x][None, :])
                * weights[:, None]
            ).sum(axis=0)
            norm = np.linalg.norm(grad)
            if norm == 0.0:
                continue
            p[x] = _project_to_simplex(p[x] + step * grad / norm)
        val = dual_value(f, DualWitness(f, p))
        if val < best_val:
            best_val = val
            best_p = p.copy()
        if target is not None and best_val <= target:
            return DualWitness(f, best_p)

    if target is not None and best_val > target:
        logger.info(
            "dual optimizer stopped at %.6g without reaching target %.6g after %d passes",
            best_val,
            target,
            budget,
        )
    return DualWitness(f, best_p)


def query_lower_bound(adv_value: float, eps: float) -> float:
    """Bounded-error query lower bound (1 - 2 sqrt(eps(1-eps))) / 2 * adv_value."""
    if not 0 <= eps < 0.5:
        raise ValueError("error rate must lie in [0, 1/2)")
    return (1.0 - 2.0 * math.sqrt(eps * (1.0 - eps))) / 2.0 * adv_value


# ---------------------------------------------------------------------------
# explicit constructions


def build_unique_search_function(d: int) -> FunctionTable:
    """d-bit inputs with exactly one 0; the label is the 0's position (1-based)."""
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"branching factor must be an integer >= 2, got {d!r}")
    rows = []
    for j in range(d):
        bits = ["1"] * d
        bits[j] = "0"
        rows.append(("".join(bits), j + 1))
    return FunctionTable(d, tuple(rows))


def build_search_gamma(d: int) -> AdversaryMatrix:
    """Unit weights on all differing-label pairs: the complete graph on S."""
    f = build_unique_search_function(d)
    m = 1.0 - np.eye(f.size)
    return AdversaryMatrix(f, m)


def build_two_level_promise_function(d: int) -> FunctionTable:
    """Two-level promise inputs: one all-ones subtree, one 0 in every other.

    n = d^2 bits in d blocks of d.  Exactly one block is all ones (that
    subtree evaluates to 0, so the formula evaluates to 1); each remaining
    block has exactly d-1 ones.  The label is the all-ones block's index
    (1-based).  |S| = d * d^(d-1).
    """
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"branching factor must be an integer >= 2, got {d!r}")
    require(d, current_caps().promise_d, "two-level promise table")
    rows = []
    for j in range(d):
        for zeros in product(range(d), repeat=d - 1):
            blocks = []
            others = iter(zeros)
            for b in range(d):
                if b == j:
                    blocks.append("1" * d)
                else:
                    z = next(others)
                    blocks.append("1" * z + "0" + "1" * (d - 1 - z))
            rows.append(("".join(blocks), j + 1))
    return FunctionTable(d * d, tuple(rows))


def build_promise_gamma(d: int) -> AdversaryMatrix:
    """Unit weights on differing-label pairs at Hamming distance exactly 2.

    Moving the all-ones block from x's block to another block j' takes two
    flips: one 1 -> 0 in x's block and j''s lone 0 -> 1, so every row has
    d * (d-1) neighbors and the matrix is the adjacency matrix of a
    d(d-1)-regular graph.
    """
    f = build_two_level_promise_function(d)
    bits = f.bit_array
    weights = np.packbits(bits, axis=1)
    xor = weights[:, None, :] ^ weights[None, :, :]
    distance = np.bitwise_count(xor).sum(axis=2)
    differ = f.label_ids[:, None] != f.label_ids[None, :]
    m = ((distance == 2) & differ).astype(float)
    return AdversaryMatrix(f, m)
