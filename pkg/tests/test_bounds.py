import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polycap.bounds import (
    coefficient_bounds,
    g,
    generalized_factor,
    permanent_lower_bound,
    schrijver_comparison,
    uniform_factor,
    vdw_factor,
)
from polycap.errors import ValidationError
from polycap.exact import random_doubly_stochastic
from polycap.polynomials import build_determinantal, build_sparse
from polycap.samples import random_01_matrix, random_psd_tuple, regular_matrices

from conftest import brute_mixed_discriminant, brute_permanent


def test_g_values():
    assert g(2) == Fraction(1, 2)
    assert g(3) == Fraction(4, 9)
    assert g(0) == 1 and g(1) == 1
    assert g(2.5) == pytest.approx((1.5 / 2.5) ** 1.5)
    with pytest.raises(ValidationError):
        g(-1)
    with pytest.raises(ValidationError):
        g(0.5)


def test_g_strictly_decreasing():
    vals = [g(k) for k in range(1, 51)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@given(st.floats(1.0, 100.0), st.floats(0.001, 10.0))
def test_g_decreasing_on_reals(k, h):
    assert g(k + h) < g(k) or math.isclose(g(k + h), g(k), rel_tol=1e-12)


def test_vdw_factor_values():
    assert vdw_factor(3) == Fraction(2, 9)
    assert vdw_factor(1) == 1
    assert vdw_factor(5) == Fraction(24, 625)


@pytest.mark.parametrize("n", range(1, 21))
def test_product_identity(n):
    assert math.prod((g(k) for k in range(1, n + 1)), start=Fraction(1)) == vdw_factor(n)


def test_generalized_factor_examples():
    for n in range(1, 7):
        assert generalized_factor([n] * n)[0] == vdw_factor(n)
        for k in range(1, n + 1):
            assert generalized_factor([k] * n)[0] == uniform_factor(k, n)
    assert generalized_factor([1, 1])[0] == 1
    with pytest.raises(ValidationError):
        generalized_factor([0, 2])
    with pytest.raises(ValidationError):
        generalized_factor([1, 2], ordering=(0, 0))


def test_uniform_factor_closed_form():
    # g(k)^(n-k) k!/k^k written out
    k, n = 3, 5
    assert uniform_factor(k, n) == Fraction(2, 3) ** (2 * 2) * Fraction(6, 27)


def test_explicit_ordering():
    S = [1, 3, 3]
    f, order = generalized_factor(S, (1, 2, 0))
    assert order == (1, 2, 0)
    assert f == g(3) * g(2) * g(1)


@given(st.lists(st.integers(1, 6), min_size=6, max_size=6))
def test_best_dominates_identity(S):
    best, _ = generalized_factor(S, "best")
    ident, _ = generalized_factor(S, "identity")
    assert best >= ident
    # best really is the max over all orderings
    brute = max(generalized_factor(S, perm)[0] for perm in itertools.permutations(range(6)))
    assert best == brute


def test_best_dominates_identity_large(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        S = rng.integers(1, n + 1, n).tolist()
        assert generalized_factor(S, "best")[0] >= generalized_factor(S, "identity")[0]


def test_schrijver_comparison():
    assert schrijver_comparison(3, 3) == (Fraction(2, 9), Fraction(64, 729))
    assert schrijver_comparison(2, 2) == (Fraction(1, 2), Fraction(1, 4))
    for n in range(1, 15):
        assert schrijver_comparison(n, n)[0] == vdw_factor(n)
        for k in range(1, n + 1):
            ours, classic = schrijver_comparison(k, n)
            assert ours >= classic


def test_doubly_stochastic_lower_bound(rng):
    A = random_doubly_stochastic(3, rng)
    r = permanent_lower_bound(A, tol=1e-8)
    assert r.formula == "vdw"
    assert r.coefficient_lower == pytest.approx(2 / 9, rel=1e-7)
    assert r.coefficient_lower <= 2 / 9
    assert r.coefficient_lower <= brute_permanent(A) <= r.coefficient_upper


def test_identity_bracket():
    r = permanent_lower_bound(np.eye(3))
    assert r.factor == 1 and r.degrees == [1, 1, 1]
    assert r.coefficient_lower == pytest.approx(1.0) and r.coefficient_upper == pytest.approx(1.0)


def test_regular_class_bound():
    mats = list(regular_matrices(4, 3, 2))
    assert len(mats) == 1344
    # a 0-1 member: every column has 3 nonzeros, factor g(3) * 3!/3^3 = 8/81
    r = permanent_lower_bound(np.ones((4, 4)) - np.eye(4))
    assert r.coefficient_upper == pytest.approx(81.0)
    assert r.factor == uniform_factor(3, 4) == Fraction(8, 81)
    assert r.coefficient_lower == pytest.approx(8.0)
    # a member using an entry 2 has a column with two nonzeros, hence a larger factor
    r = permanent_lower_bound(mats[0])
    assert r.factor >= Fraction(8, 81)
    assert min(brute_permanent(A) for A in mats) >= 8


def test_zero_column():
    r = permanent_lower_bound([[1, 0], [1, 0]])
    assert r.formula == "zero-column" and r.coefficient_upper == 0


def test_sandwich_exhaustive_01_small():
    for n in (2, 3):
        for bits in itertools.product((0, 1), repeat=n * n):
            A = np.array(bits).reshape(n, n)
            per = brute_permanent(A.tolist())
            if per == 0:
                continue
            r = permanent_lower_bound(A)
            assert r.coefficient_lower <= per * (1 + 1e-9)
            assert per <= r.coefficient_upper * (1 + 1e-9)


def test_sandwich_random_01(rng):
    count = 0
    while count < 60:
        n = int(rng.integers(4, 6))
        A = random_01_matrix(n, rng, density=0.6)
        per = brute_permanent(A.entries.astype(int).tolist())
        if per == 0:
            continue
        count += 1
        r = permanent_lower_bound(A, ordering="identity" if count % 2 else "best")
        assert r.coefficient_lower <= per * (1 + 1e-9) and per <= r.coefficient_upper * (1 + 1e-9)


def test_coefficient_bounds_determinantal(rng):
    T = random_psd_tuple(3, rng, low_rank=True)
    r = coefficient_bounds(build_determinantal(T))
    D = brute_mixed_discriminant(T.matrices)
    assert r.coefficient_lower <= D * (1 + 1e-9) and D <= r.coefficient_upper * (1 + 1e-9)
    ranks = [int(np.linalg.matrix_rank(M, tol=1e-8)) for M in T.matrices]
    assert r.degrees == ranks


def test_coefficient_bounds_missing_variable():
    r = coefficient_bounds(build_sparse({(2, 0): 1}))
    assert r.formula == "missing-variable"
