"""Randomized zero-error NAND-tree evaluation and its exact expectations.

The strategy evaluates each gate's children in a fresh uniformly random
order and short-circuits to 1 at the first child that evaluates to 0.  Its
expected query count grows like growth_constant(d)**k in the worst case.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Union

from .caps import current_caps, require
from .formula import Assignment, FormulaShape, parse_assignment


def growth_constant(d: int) -> float:
    """Worst-case growth rate (d - 1 + sqrt(d^2 + 14d + 1)) / 4 of the strategy."""
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"branching factor must be an integer >= 2, got {d!r}")
    return (d - 1 + math.sqrt(d * d + 14 * d + 1)) / 4


@dataclass(frozen=True)
class LambdaConstant:
    """A branching factor paired with its growth constant."""

    d: int
    value: float

    @classmethod
    def for_branching(cls, d: int) -> "LambdaConstant":
        return cls(d, growth_constant(d))


@dataclass(frozen=True)
class EvalTrace:
    """Outcome of one randomized evaluation: true value and leaves queried."""

    value: int
    queries: int


def randomized_evaluate(shape: FormulaShape, x: Sequence[int], seed) -> EvalTrace:
    """One run of the random-order short-circuit evaluator.

    Zero-error: the returned value always equals the true formula value;
    only the query count is random.
    """
    x = parse_assignment(shape, x)
    rng = random.Random(seed)
    d = shape.d
    queries = 0

    def node(level: int, offset: int) -> int:
        nonlocal queries
        if level == 0:
            queries += 1
            return x[offset]
        sub = shape.subtree_size(level - 1)
        order = list(range(d))
        rng.shuffle(order)
        for j in order:
            if node(level - 1, offset + j * sub) == 0:
                return 1
        return 0

    value = node(shape.k, 0)
    return EvalTrace(value, queries)


def trial_seed(seed, trial: int) -> str:
    """Derived per-trial seed; str seeding of random.Random is deterministic."""
    return f"{seed}:{trial}"


def monte_carlo_queries(
    shape: FormulaShape, x: Sequence[int], trials: int, seed
) -> tuple[float, float]:
    """Sample mean and standard error of the query count over seeded trials."""
    if trials < 2:
        raise ValueError("need at least 2 trials for a standard error")
    x = parse_assignment(shape, x)
    total = 0
    total_sq = 0
    for t in range(trials):
        q = randomized_evaluate(shape, x, trial_seed(seed, t)).queries
        total += q
        total_sq += q * q
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0) * trials / (trials - 1)
    return mean, math.sqrt(var / trials)


def exact_expected_queries(
    shape: FormulaShape, x: Sequence[int], denominator_limit: Optional[int] = 10**12
) -> Union[Fraction, float]:
    """Exact expected query count of randomized_evaluate, by a bottom-up DP.

    At a gate whose children have values v_j and expected costs c_j, a
    uniformly random order pays every 0-child's cost with probability 1/z
    (first among the z 0-children) and every 1-child's cost with
    probability 1/(z+1) (before all 0-children); with z = 0 all costs add.
    Falls back to floats if a denominator exceeds denominator_limit.
    """
    x = parse_assignment(shape, x)
    require(shape.n, current_caps().expectation_n, "exact-expectation DP")
    d = shape.d

    def node(level: int, offset: int) -> tuple[int, Union[Fraction, float]]:
        if level == 0:
            return x[offset], Fraction(1)
        sub = shape.subtree_size(level - 1)
        children = [node(level - 1, offset + j * sub) for j in range(d)]
        zero_costs = [c for v, c in children if v == 0]
        one_costs = [c for v, c in children if v == 1]
        z = len(zero_costs)
        if z == 0:
            cost = sum(one_costs)
            value = 0
        else:
            cost = sum(zero_costs) / z + sum(one_costs) / (z + 1)
            value = 1
        if (
            denominator_limit is not None
            and isinstance(cost, Fraction)
            and cost.denominator > denominator_limit
        ):
            cost = float(cost)
        return value, cost

    return node(shape.k, 0)[1]


def worst_case_expected(shape: FormulaShape) -> tuple[Assignment, Union[Fraction, float]]:
    """Input maximizing exact_expected_queries, by enumerating all 2^n inputs.

    Ties resolve to the lexicographically smallest input.
    """
    require(shape.n, current_caps().enumeration_n, "worst-case input enumeration")
    best_x: Optional[Assignment] = None
    best = Fraction(-1)
    for bits in product((0, 1), repeat=shape.n):
        cost = exact_expected_queries(shape, bits)
        if cost > best:
            best_x, best = bits, cost
    assert best_x is not None
    return best_x, best


def worst_case_recursive(d: int, k: int) -> Fraction:
    """Worst-case expected queries by the identical-subtree recursion.

    Over a balanced tree the worst 0-input forces all d children to their
    worst 1-inputs, and the worst 1-input uses exactly one 0-child:
    w0(k) = d*w1(k-1), w1(k) = w0(k-1) + (d-1)*w1(k-1)/2.  Cross-validated
    against worst_case_expected enumeration for n <= 16.
    """
    FormulaShape(d, k)  # validates
    w0, w1 = Fraction(1), Fraction(1)
    for _ in range(k):
        w0, w1 = d * w1, w0 + Fraction(d - 1, 2) * w1
    return max(w0, w1)
