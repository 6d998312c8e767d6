"""Tests for the randomized evaluator, exact expectations, and growth constants."""

import math
import random
from fractions import Fraction
from itertools import product

import pytest

from nandcert import (
    FormulaShape,
    evaluate,
    exact_expected_queries,
    growth_constant,
    LambdaConstant,
    monte_carlo_queries,
    randomized_evaluate,
    worst_case_expected,
    worst_case_recursive,
)
from nandcert.caps import CapExceeded


def test_growth_constant_values():
    assert growth_constant(2) == pytest.approx((1 + math.sqrt(33)) / 4, rel=1e-12)
    # d=2 exponent of the polynomial speedup
    assert 0.753 <= math.log2(growth_constant(2)) <= 0.754
    assert growth_constant(3) == pytest.approx((2 + math.sqrt(52)) / 4, rel=1e-12)


def test_growth_constant_rejects_small_d():
    with pytest.raises(ValueError):
        growth_constant(1)


def test_lambda_constant_wrapper():
    lc = LambdaConstant.for_branching(2)
    assert lc.d == 2
    assert abs(lc.value - (1 + math.sqrt(33)) / 4) <= 1e-12 * lc.value


def test_randomized_evaluate_no_short_circuit():
    s = FormulaShape(2, 1)
    for seed in range(10):
        tr = randomized_evaluate(s, "11", seed)
        assert (tr.value, tr.queries) == (0, 2)


def test_randomized_evaluate_immediate_short_circuit():
    s = FormulaShape(2, 1)
    for seed in range(10):
        tr = randomized_evaluate(s, "00", seed)
        assert (tr.value, tr.queries) == (1, 1)


def test_randomized_evaluate_mixed_input_mean():
    # x = (0,1): query 1 with prob 1/2, else 2; mean 3/2 by hand
    s = FormulaShape(2, 1)
    counts = {1: 0, 2: 0}
    for seed in range(4000):
        tr = randomized_evaluate(s, "01", seed)
        assert tr.value == 1
        counts[tr.queries] += 1
    mean = (counts[1] + 2 * counts[2]) / 4000
    assert abs(mean - 1.5) < 0.05


def test_zero_error_everywhere():
    """The returned value always equals the true value, every seed, every input."""
    rng = random.Random("zero-error")
    for d, k in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)]:
        shape = FormulaShape(d, k)
        for _ in range(30):
            x = tuple(rng.randrange(2) for _ in range(shape.n))
            seed = rng.random()
            assert randomized_evaluate(shape, x, seed).value == evaluate(shape, x)


def test_queries_bounded_by_leaf_count():
    rng = random.Random("bounds")
    shape = FormulaShape(3, 2)
    for _ in range(50):
        x = tuple(rng.randrange(2) for _ in range(9))
        tr = randomized_evaluate(shape, x, rng.random())
        assert 1 <= tr.queries <= 9


def test_exact_expected_hand_values():
    s = FormulaShape(2, 1)
    assert exact_expected_queries(s, "01") == Fraction(3, 2)
    assert exact_expected_queries(s, "11") == Fraction(2)
    # two subtrees of value 1 and cost 3/2 each; the root evaluates both
    assert exact_expected_queries(FormulaShape(2, 2), "0101") == Fraction(3)


def test_exact_expected_single_leaf():
    assert exact_expected_queries(FormulaShape(2, 0), "1") == Fraction(1)


@pytest.mark.parametrize(
    "d,k,bits,trials",
    [
        (2, 1, "01", 30000),
        (2, 2, "0101", 20000),
        (2, 2, "1101", 20000),
        (3, 1, "011", 20000),
        (2, 3, "01111011", 15000),
        (3, 2, "011011011", 15000),
    ],
)
def test_monte_carlo_matches_exact(d, k, bits, trials):
    shape = FormulaShape(d, k)
    expected = float(exact_expected_queries(shape, bits))
    mean, stderr = monte_carlo_queries(shape, bits, trials, seed=f"mc:{d}:{k}:{bits}")
    assert abs(mean - expected) <= 5 * max(stderr, 1e-12)


def test_worst_case_small_shapes():
    assert worst_case_expected(FormulaShape(2, 1)) == ((1, 1), Fraction(2))
    # frozen from the full 16-input enumeration at build time
    assert worst_case_expected(FormulaShape(2, 2)) == ((0, 1, 0, 1), Fraction(3))
    assert worst_case_expected(FormulaShape(2, 0)) == ((0,), Fraction(1))


def test_worst_case_cap():
    with pytest.raises(CapExceeded):
        worst_case_expected(FormulaShape(2, 5))


@pytest.mark.parametrize("d,k", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1), (4, 2)])
def test_recursion_matches_enumeration(d, k):
    """Two independent routes to the worst-case expectation agree."""
    _, best = worst_case_expected(FormulaShape(d, k))
    assert worst_case_recursive(d, k) == best


def test_worst_case_monotone_and_bounded():
    for d in (2, 3):
        prev = Fraction(0)
        for k in range(0, 10):
            w = worst_case_recursive(d, k)
            assert prev <= w <= d**k
            prev = w


def test_worst_case_growth_approaches_constant():
    """Successive worst-case ratios oscillate toward the growth constant."""
    for d in (2, 3):
        lam = growth_constant(d)
        w = [worst_case_recursive(d, k) for k in range(1, 14)]
        ratios = [float(b / a) for a, b in zip(w, w[1:])]
        assert abs(ratios[-1] - lam) < abs(ratios[0] - lam)
        # measured at build time: |ratio - lam| < 0.005 by k = 12 for d in {2, 3}
        assert abs(ratios[-1] - lam) < 0.005


def test_exact_expected_float_fallback():
    shape = FormulaShape(2, 3)
    exact = exact_expected_queries(shape, "01100111")
    loose = exact_expected_queries(shape, "01100111", denominator_limit=1)
    assert isinstance(loose, float)
    assert loose == pytest.approx(float(exact), rel=1e-12)


def test_deterministic_given_seed():
    shape = FormulaShape(3, 2)
    x = "011010110"
    a = randomized_evaluate(shape, x, "fixed")
    b = randomized_evaluate(shape, x, "fixed")
    assert a == b
