"""Tests for spectral norms, adversary values, and the explicit constructions."""

import math
import random

import numpy as np
import pytest

from nandcert import (
    AdversaryMatrix,
    DualWitness,
    FormulaShape,
    FunctionTable,
    build_promise_gamma,
    build_search_gamma,
    build_two_level_promise_function,
    build_unique_search_function,
    dual_value,
    evaluate,
    hadamard_difference_norm,
    optimize_dual,
    primal_value,
    query_lower_bound,
    spectral_norm,
    uniform_dual_witness,
)
from nandcert.caps import CapExceeded


def cycle_adjacency(n):
    m = np.zeros((n, n))
    for i in range(n):
        m[i, (i + 1) % n] = m[(i + 1) % n, i] = 1.0
    return m


# --- spectral norm ------------------------------------------------------------


def test_spectral_norm_basics():
    assert spectral_norm(np.ones((2, 2))) == pytest.approx(2.0, abs=1e-9)
    assert spectral_norm(np.eye(7)) == pytest.approx(1.0, abs=1e-9)
    # 6-cycle eigenvalues are 2cos(2 pi j / 6); largest magnitude is 2
    assert spectral_norm(cycle_adjacency(6)) == pytest.approx(2.0, abs=1e-9)


def test_spectral_norm_negative_dominant():
    # eigenvalues are +-1; norm must report the magnitude
    m = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert spectral_norm(m, method="power") == pytest.approx(1.0, abs=1e-9)
    m2 = np.diag([-3.0, 2.0])
    assert spectral_norm(m2, method="power") == pytest.approx(3.0, abs=1e-9)


def test_spectral_norm_rejects_non_symmetric():
    with pytest.raises(ValueError):
        spectral_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_power_iteration_cross_validates_eigensolve():
    rng = np.random.default_rng(7)
    for trial in range(25):
        size = int(rng.integers(2, 40))
        a = rng.standard_normal((size, size))
        m = (a + a.T) / 2
        if trial % 2 == 0:
            m = np.abs(m)
        dense = spectral_norm(m, method="eigh")
        power = spectral_norm(m, method="power")
        assert abs(dense - power) <= 1e-9 * max(1.0, dense)


def test_spectral_norm_zero_matrix():
    assert spectral_norm(np.zeros((4, 4))) == 0.0
    assert spectral_norm(np.zeros((4, 4)), method="power") == 0.0


# --- tables and witnesses -----------------------------------------------------


def test_function_table_validation():
    with pytest.raises(ValueError):
        FunctionTable(2, (("00", 0), ("00", 1)))  # duplicate input
    with pytest.raises(ValueError):
        FunctionTable(2, (("00", 0), ("01", 0)))  # single label
    with pytest.raises(ValueError):
        FunctionTable(2, (("0", 0), ("01", 1)))  # wrong width


def test_function_table_round_trip():
    f = build_unique_search_function(3)
    assert FunctionTable.from_json(f.to_json()) == f


def test_adversary_matrix_validation():
    f = build_unique_search_function(3)
    with pytest.raises(ValueError):
        AdversaryMatrix(f, np.zeros((3, 3)))  # identically zero
    with pytest.raises(ValueError):
        AdversaryMatrix(f, np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float))
    bad = 1.0 - np.eye(3)
    bad[0, 0] = 1.0  # equal labels (the diagonal) must stay zero
    with pytest.raises(ValueError):
        AdversaryMatrix(f, bad)
    with pytest.raises(ValueError):
        AdversaryMatrix(f, -(1.0 - np.eye(3)))


def test_dual_witness_validation():
    f = build_unique_search_function(3)
    with pytest.raises(ValueError):
        DualWitness(f, np.full((3, 3), 0.5))  # rows sum to 1.5
    with pytest.raises(ValueError):
        DualWitness(f, np.array([[1.5, -0.5, 0], [0, 1, 0], [0, 0, 1]]))


# --- primal and dual values ----------------------------------------------------


def test_hadamard_difference_norm_star():
    # pairs differing in bit 1 form the star around the input with its 0 there
    g = build_search_gamma(3)
    assert hadamard_difference_norm(g, 1) == pytest.approx(math.sqrt(2), abs=1e-9)
    with pytest.raises(ValueError):
        hadamard_difference_norm(g, 4)


def test_hadamard_difference_norm_zero_when_masked_out():
    f = FunctionTable(2, (("00", 0), ("01", 1)))
    g = AdversaryMatrix(f, np.array([[0.0, 1.0], [1.0, 0.0]]))
    # the two inputs agree on bit 1, so the mask kills everything
    assert hadamard_difference_norm(g, 1) == 0.0
    assert hadamard_difference_norm(g, 2) == pytest.approx(1.0, abs=1e-9)


def test_primal_value_search():
    for d in (3, 4):
        g = build_search_gamma(d)
        assert primal_value(g.table, g) == pytest.approx(math.sqrt(d - 1), abs=1e-9)


def test_primal_scale_invariance():
    g = build_promise_gamma(2)
    base = primal_value(g.table, g)
    for c in (0.5, 3.0, 10.0):
        scaled = AdversaryMatrix(g.table, c * g.entries)
        assert abs(primal_value(g.table, scaled) - base) <= 1e-10 * max(1.0, base)


def test_primal_single_bit_identity():
    f = FunctionTable(1, (("0", 0), ("1", 1)))
    g = AdversaryMatrix(f, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert primal_value(f, g) == pytest.approx(1.0, abs=1e-12)


def test_primal_rejects_foreign_table():
    g = build_search_gamma(3)
    other = build_unique_search_function(4)
    with pytest.raises(ValueError):
        primal_value(other, g)


def test_dual_value_single_index():
    f = FunctionTable(1, (("0", 0), ("1", 1)))
    w = DualWitness(f, np.ones((2, 1)))
    assert dual_value(f, w) == pytest.approx(1.0, abs=1e-12)


def test_dual_value_infinite_on_zero_denominator():
    f = FunctionTable(2, (("00", 0), ("11", 1)))
    # all mass on bit 1 for one row, bit 2 for the other: no shared difference mass
    w = DualWitness(f, np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert dual_value(f, w) == math.inf


def test_weak_duality_on_constructions():
    for d in (2, 3):
        g = build_promise_gamma(d)
        w = uniform_dual_witness(g.table)
        assert primal_value(g.table, g) <= dual_value(g.table, w) + 1e-8


def test_weak_duality_random_tables():
    """Any feasible (weights, witness) pair sandwiches the adversary value."""
    rng = random.Random("weak-duality")
    nprng = np.random.default_rng(17)
    for _ in range(25):
        n = rng.randint(2, 4)
        universe = [format(v, f"0{n}b") for v in range(2**n)]
        rows = tuple(
            (x, rng.randint(0, 2)) for x in rng.sample(universe, rng.randint(3, min(8, 2**n)))
        )
        try:
            f = FunctionTable(n, rows)
        except ValueError:
            continue  # happened to draw a single label
        differ = f.label_ids[:, None] != f.label_ids[None, :]
        weights = np.abs(nprng.standard_normal((f.size, f.size)))
        weights = (weights + weights.T) * differ
        if not weights.any():
            continue
        gamma = AdversaryMatrix(f, weights)
        p = nprng.random((f.size, f.n)) + 1e-3
        p /= p.sum(axis=1, keepdims=True)
        witness = DualWitness(f, p)
        assert primal_value(f, gamma) <= dual_value(f, witness) + 1e-8


def test_masked_norm_never_exceeds_full_norm():
    rng = np.random.default_rng(3)
    for d in (2, 3, 4):
        g = build_promise_gamma(d)
        full = spectral_norm(g.entries)
        for i in range(1, g.table.n + 1):
            assert hadamard_difference_norm(g, i) <= full + 1e-9
    # also with random nonnegative weights
    f = build_unique_search_function(4)
    w = np.abs(rng.standard_normal((4, 4)))
    w = (w + w.T) * (f.label_ids[:, None] != f.label_ids[None, :])
    g = AdversaryMatrix(f, w)
    full = spectral_norm(g.entries)
    for i in range(1, 5):
        assert hadamard_difference_norm(g, i) <= full + 1e-9


# --- constructions --------------------------------------------------------------


def test_promise_table_sizes():
    assert build_two_level_promise_function(2).size == 4  # 2 * 2^1
    assert build_two_level_promise_function(3).size == 27  # 3 * 3^2
    assert build_two_level_promise_function(4).size == 4 * 4**3


def test_promise_table_cap():
    with pytest.raises(CapExceeded):
        build_two_level_promise_function(6)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_promise_inputs_evaluate_to_one(d):
    f = build_two_level_promise_function(d)
    shape = FormulaShape(d, 2)
    for x, label in f.rows:
        assert evaluate(shape, x) == 1
        # the labeled block is the all-ones block
        block = x[(label - 1) * d : label * d]
        assert block == "1" * d
        # every other block has exactly d-1 ones
        for j in range(d):
            if j != label - 1:
                assert x[j * d : (j + 1) * d].count("1") == d - 1


@pytest.mark.parametrize("d", [2, 3, 4])
def test_promise_gamma_regularity_and_norms(d):
    g = build_promise_gamma(d)
    degrees = g.entries.sum(axis=1)
    assert np.all(degrees == d * (d - 1))
    assert spectral_norm(g.entries) == pytest.approx(d * (d - 1), abs=1e-9)
    masked = [hadamard_difference_norm(g, i) for i in range(1, g.table.n + 1)]
    assert max(masked) <= d + 1e-9
    assert primal_value(g.table, g) >= d - 1 - 1e-9


def test_promise_gamma_edges_differ_in_exactly_two_bits():
    g = build_promise_gamma(3)
    rows = [x for x, _ in g.table.rows]
    idx = np.argwhere(g.entries > 0)
    for a, b in idx:
        assert sum(c1 != c2 for c1, c2 in zip(rows[a], rows[b])) == 2


def test_search_table():
    f = build_unique_search_function(2)
    assert f.size == 2
    assert len({label for _, label in f.rows}) == 2  # a bijection on two rows


@pytest.mark.parametrize("d", list(range(2, 9)))
def test_search_gamma_spectra(d):
    g = build_search_gamma(d)
    assert spectral_norm(g.entries) == pytest.approx(d - 1, abs=1e-9)
    masked = [hadamard_difference_norm(g, i) for i in range(1, d + 1)]
    assert max(masked) == pytest.approx(math.sqrt(d - 1), abs=1e-9)
    assert primal_value(g.table, g) == pytest.approx(math.sqrt(d - 1), abs=1e-9)


# --- dual optimization -----------------------------------------------------------


def test_optimize_dual_identity_function():
    f = FunctionTable(1, (("0", 0), ("1", 1)))
    w = optimize_dual(f, budget=5)
    assert dual_value(f, w) == pytest.approx(1.0, abs=1e-12)


def test_optimize_dual_two_bit_or():
    f = FunctionTable(2, (("00", 0), ("01", 1), ("10", 1), ("11", 1)))
    w = optimize_dual(f, target=math.sqrt(2) * (1 + 1e-4), budget=600)
    assert dual_value(f, w) <= math.sqrt(2) + 1e-3


def test_optimize_dual_search_sandwich():
    f = build_unique_search_function(3)
    g = build_search_gamma(3)
    w = optimize_dual(f, target=math.sqrt(2) * (1 + 1e-4), budget=500)
    dual = dual_value(f, w)
    primal = primal_value(f, g)
    assert dual <= math.sqrt(2) + 1e-3
    assert primal <= dual + 1e-8


def test_optimize_dual_cap():
    with pytest.raises(CapExceeded):
        optimize_dual(build_two_level_promise_function(5), budget=1)


def test_optimize_dual_never_worse_than_uniform():
    f = build_two_level_promise_function(3)
    uniform = dual_value(f, uniform_dual_witness(f))
    assert dual_value(f, optimize_dual(f, budget=40)) <= uniform + 1e-12


# --- reporting helper -------------------------------------------------------------


def test_query_lower_bound():
    assert query_lower_bound(10.0, 0.0) == pytest.approx(5.0)
    # the factor shrinks as the allowed error grows
    assert query_lower_bound(10.0, 0.1) < query_lower_bound(10.0, 0.01)
    with pytest.raises(ValueError):
        query_lower_bound(1.0, 0.5)
