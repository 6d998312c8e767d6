"""Balanced NAND trees: evaluation, certificates, and exhaustive ground truth.

A shape (d, k) denotes the complete d-ary tree with k levels of NAND gates
and n = d**k leaves.  Leaves are indexed 1..n left to right, matching the
serialized form (bit strings with leaf 1 first).  All types are immutable
and all functions are pure, so everything here is safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .caps import current_caps, require


@dataclass(frozen=True)
class FormulaShape:
    """A d-regular, k-level balanced NAND tree.  k = 0 is a single leaf."""

    d: int
    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or self.d < 2:
            raise ValueError(f"branching factor must be an integer >= 2, got {self.d!r}")
        if not isinstance(self.k, int) or self.k < 0:
            raise ValueError(f"level count must be an integer >= 0, got {self.k!r}")

    @property
    def n(self) -> int:
        return self.d**self.k

    def subtree_size(self, level: int) -> int:
        return self.d**level


@dataclass(frozen=True)
class Certificate:
    """A set of leaf indices claimed to force the formula value."""

    indices: frozenset[int]
    value: int

    def __post_init__(self) -> None:
        if not self.indices:
            raise ValueError("certificate index set must be nonempty")
        if self.value not in (0, 1):
            raise ValueError(f"certificate value must be 0 or 1, got {self.value!r}")

    @property
    def sorted_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def __len__(self) -> int:
        return len(self.indices)


Assignment = tuple[int, ...]


def parse_assignment(shape: FormulaShape, bits) -> Assignment:
    """Normalize a bit string like "0110" or a 0/1 sequence; leaf 1 first."""
    if isinstance(bits, str):
        try:
            x = tuple(int(c) for c in bits)
        except ValueError:
            raise ValueError(f"assignment string must contain only 0/1, got {bits!r}")
    else:
        x = tuple(int(b) for b in bits)
    if len(x) != shape.n:
        raise ValueError(f"assignment length {len(x)} != leaf count {shape.n}")
    if any(b not in (0, 1) for b in x):
        raise ValueError("assignment bits must be 0 or 1")
    return x


def format_assignment(x: Sequence[int]) -> str:
    return "".join(str(b) for b in x)


def _check_indices(shape: FormulaShape, indices: Iterable[int]) -> frozenset[int]:
    idx = frozenset(indices)
    for i in idx:
        if not 1 <= i <= shape.n:
            raise ValueError(f"leaf index {i} out of range 1..{shape.n}")
    return idx


def evaluate(shape: FormulaShape, x: Sequence[int]) -> int:
    """Value at the root: each gate outputs 0 iff all d children output 1."""
    x = parse_assignment(shape, x)
    d = shape.d

    def node(level: int, offset: int) -> int:
        if level == 0:
            return x[offset]
        sub = shape.subtree_size(level - 1)
        value = 0
        for j in range(d):
            if node(level - 1, offset + j * sub) == 0:
                value = 1  # NAND: any 0 child makes the output 1
        return value

    return node(shape.k, 0)


def closed_form_cert_size(d: int, k: int, b: int) -> int:
    """Minimal certificate size for a (d, k) tree evaluating to b.

    Both sizes are 1 at k = 0.  For k >= 1 the sizes follow the alternating
    recursion size0(k) = d * size1(k-1), size1(k) = size0(k-1), which solves
    to d^(k/2) at even k for both values, and to d^((k+1)/2) / d^((k-1)/2)
    for value 0 / value 1 at odd k.
    """
    shape = FormulaShape(d, k)  # validates d, k
    if b not in (0, 1):
        raise ValueError(f"formula value must be 0 or 1, got {b!r}")
    k = shape.k
    if k % 2 == 0:
        return d ** (k // 2)
    return d ** ((k + 1) // 2) if b == 0 else d ** ((k - 1) // 2)


def forced_value_partial(shape: FormulaShape, fixed: Mapping[int, int]) -> Optional[int]:
    """Three-valued root value when only the leaves in `fixed` are pinned.

    Returns 0 or 1 when every completion of the partial assignment yields
    that value, None otherwise.  Exact for trees because each leaf feeds a
    single gate, so unknowns in disjoint subtrees are independent.
    """
    for i, b in fixed.items():
        if not 1 <= i <= shape.n:
            raise ValueError(f"leaf index {i} out of range 1..{shape.n}")
        if b not in (0, 1):
            raise ValueError(f"leaf value must be 0 or 1, got {b!r}")
    d = shape.d

    def node(level: int, offset: int) -> Optional[int]:
        if level == 0:
            return fixed.get(offset + 1)
        sub = shape.subtree_size(level - 1)
        saw_unknown = False
        for j in range(d):
            v = node(level - 1, offset + j * sub)
            if v == 0:
                return 1  # one forced-0 child forces the NAND to 1
            if v is None:
                saw_unknown = True
        return None if saw_unknown else 0

    return node(shape.k, 0)


def forced_value(shape: FormulaShape, x: Sequence[int], indices: Iterable[int]) -> Optional[int]:
    """Three-valued root value when x is revealed only on `indices`."""
    x = parse_assignment(shape, x)
    idx = _check_indices(shape, indices)
    return forced_value_partial(shape, {i: x[i - 1] for i in idx})


def is_certificate(shape: FormulaShape, indices: Iterable[int], x: Sequence[int]) -> bool:
    """True iff fixing x on `indices` forces the root value."""
    return forced_value(shape, x, indices) is not None


def certifying_patterns(shape: FormulaShape, indices: Sequence[int]) -> frozenset[tuple[int, ...]]:
    """All value patterns on `indices` (ascending order) that force the root.

    A pattern p certifies every input x with x[i] = p position-wise on the
    sorted index set, so one call covers all 2^n inputs at once.
    """
    idx = sorted(_check_indices(shape, indices))
    out = []
    for m in range(1 << len(idx)):
        pattern = tuple((m >> t) & 1 for t in range(len(idx)))
        if forced_value_partial(shape, dict(zip(idx, pattern))) is not None:
            out.append(pattern)
    return frozenset(out)


def min_certificate_size(shape: FormulaShape, x: Sequence[int]) -> int:
    """Minimum certificate size for (shape, x) by a linear tree DP.

    Forcing a gate to 0 needs every child forced to 1; forcing to 1 needs
    the cheapest 0-valued child forced to 0.  Independent of the closed
    form, so it can serve as its oracle.
    """
    x = parse_assignment(shape, x)
    d = shape.d

    def node(level: int, offset: int) -> tuple[int, int]:
        if level == 0:
            return x[offset], 1
        sub = shape.subtree_size(level - 1)
        children = [node(level - 1, offset + j * sub) for j in range(d)]
        zero_costs = [c for v, c in children if v == 0]
        if zero_costs:
            return 1, min(zero_costs)
        return 0, sum(c for _, c in children)

    return node(shape.k, 0)[1]


def brute_force_minimal_certificates(
    shape: FormulaShape, x: Sequence[int], exhaustive: bool = False
) -> list[Certificate]:
    """All inclusion-minimal certificates for (shape, x), smallest index set first.

    Default mode enumerates exactly the subsets of the minimum size reported
    by the tree DP; this returns all minimal certificates provided minimal
    certificates of a balanced tree share one size, which the exhaustive
    mode (full sweep over subset sizes, required for validation) confirms on
    every shape with n <= 12.
    """
    caps = current_caps()
    require(shape.n, caps.brute_force_n, "brute-force certificate search")
    x = parse_assignment(shape, x)
    b = evaluate(shape, x)
    n = shape.n

    if not exhaustive:
        size = min_certificate_size(shape, x)
        found = [
            frozenset(c)
            for c in combinations(range(1, n + 1), size)
            if is_certificate(shape, c, x)
        ]
    else:
        found = []
        for size in range(1, n + 1):
            for c in combinations(range(1, n + 1), size):
                cand = frozenset(c)
                # subsets containing an already-found certificate are not minimal
                if any(prev <= cand for prev in found):
                    continue
                if is_certificate(shape, cand, x):
                    found.append(cand)

    certs = [Certificate(idx, b) for idx in found]
    certs.sort(key=lambda c: c.sorted_indices)
    return certs


def homogeneity_check(shape: FormulaShape, x: Sequence[int], cert: Certificate) -> bool:
    """Do all certificate leaves carry the single value the level parity predicts?

    A minimal certificate for value b consists of leaves that all equal b
    when k is even and 1 - b when k is odd.
    """
    x = parse_assignment(shape, x)
    expected = cert.value ^ (shape.k & 1)
    return all(x[i - 1] == expected for i in cert.indices)
