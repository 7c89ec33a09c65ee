import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from polycap.hyperbolicity import (
    af_inequality_check,
    analyse_coefficients,
    check_pos_hyperbolic,
    exact_all_real,
    factorization_check_propC1,
    inf_ratio,
    lemma29_bound,
    newton_inequalities,
    restriction_roots,
    sturm_real_root_count,
)
from polycap.polynomials import build_determinantal, build_multilinear, build_sparse, mixed_form, partial_at_zero
from polycap.samples import random_matrix, random_psd, random_psd_tuple

SUM_SQUARES = {(2, 0): 1, (0, 2): 1}


# -- roots ----------------------------------------------------------------

def test_product_roots():
    a, b = 0.7, 2.5
    rep = restriction_roots(build_sparse({(1, 1): 1}), [a, b])
    np.testing.assert_allclose(np.sort(rep.roots.real), [a, b], atol=1e-12)
    assert rep.all_real and rep.all_nonneg and rep.degree == 2


def test_sum_of_squares_complex():
    rep = restriction_roots(build_sparse(SUM_SQUARES), [1, 0])
    assert not rep.all_real
    assert rep.max_imag == pytest.approx(0.5)


def test_determinantal_roots_are_generalized_eigenvalues(rng):
    A, B = random_psd(2, rng), random_psd(2, rng)
    p = build_determinantal([A, B])
    rep = restriction_roots(p, [1.0, 0.0])
    # det(A - t (A + B)) = 0
    want = np.sort(scipy.linalg.eigvalsh(A, A + B))
    np.testing.assert_allclose(np.sort(rep.roots.real), want, rtol=1e-8, atol=1e-10)


def test_reconstruction_invariant(rng):
    p = build_determinantal(random_psd_tuple(4, rng))
    for _ in range(5):
        rep = restriction_roots(p, rng.normal(size=4))
        c = np.asarray(rep.coefficients, dtype=float)
        recon = c[rep.degree] * np.poly(rep.roots.real)[::-1]
        np.testing.assert_allclose(recon, c[: rep.degree + 1], rtol=1e-7, atol=1e-7 * np.abs(c).max())
        assert len(rep.roots) == rep.degree


def test_multiple_zero_roots_are_nonnegative(rng):
    # rank-one members put a multiple root at zero; noise must not push it negative
    T = random_psd_tuple(3, rng, low_rank=True)
    p = build_determinantal(T)
    assert restriction_roots(p, [0.0, 0.0, 0.5]).all_nonneg


def test_analyse_edge_cases():
    assert analyse_coefficients([0.0, 0.0, 0.0]).is_zero
    assert analyse_coefficients([3.0]).degree == 0
    rep = analyse_coefficients([0, 0, 1.0])
    assert rep.all_real and rep.all_nonneg
    # (t - 1)^4 is numerically a cluster
    rep = analyse_coefficients(np.poly([1, 1, 1, 1])[::-1])
    assert rep.all_real


def test_sturm():
    # (t-1)(t-2)(t^2+1)
    c = np.polynomial.polynomial.polyfromroots([1, 2, 1j, -1j]).real
    fc = [Fraction(int(round(v))) for v in c]
    assert sturm_real_root_count(fc) == 2
    assert not exact_all_real(fc)
    sq = [Fraction(v) for v in (1, -2, 1)]
    assert exact_all_real(sq)


def test_fact_one_product_of_roots(rng):
    # p(X) = p(e) prod lambda_i(X)
    p = build_determinantal(random_psd_tuple(3, rng))
    pe = p.evaluate(np.ones(3))
    for _ in range(20):
        X = rng.normal(size=3)
        rep = restriction_roots(p, X)
        assert p.evaluate(X) == pytest.approx(pe * np.prod(rep.roots.real), rel=1e-7, abs=1e-9)


def test_derivative_closure(rng):
    for n in range(2, 6):
        p = build_multilinear(random_matrix(n, rng))
        q = partial_at_zero(p, 0)
        for _ in range(5):
            X = rng.normal(size=n)
            if restriction_roots(p, X).all_real:
                assert restriction_roots(q, X[1:]).all_real


# -- POS-hyperbolicity ----------------------------------------------------

def test_pos_hyperbolic_examples(rng):
    assert check_pos_hyperbolic(build_multilinear(random_matrix(4, rng, density=0.5)), 100)
    assert check_pos_hyperbolic(build_determinantal(random_psd_tuple(3, rng, complex_=True)), 100)
    v = check_pos_hyperbolic(build_sparse(SUM_SQUARES), 50)
    assert not v and v.counterexample is not None and v.seed == 42


def test_verdict_is_reproducible():
    p = build_sparse(SUM_SQUARES)
    assert check_pos_hyperbolic(p, 10, seed=7).to_dict() == check_pos_hyperbolic(p, 10, seed=7).to_dict()


def test_negative_orthant_root_detected():
    # x1^2 - ... not allowed; use x1 (x1 + x2) shifted direction: nonneg X with negative root
    p = build_sparse({(1, 1): 1})
    v = check_pos_hyperbolic(p, 20, e=[1.0, -0.5])
    assert not v


# -- Newton inequalities --------------------------------------------------

def test_newton_examples(rng):
    r = newton_inequalities([1, 2, 1])
    assert r.nis_hold and r.wnis_hold
    r = newton_inequalities([1, 1, 1])
    assert not r.nis_hold and r.first_violation == 1
    b = rng.uniform(0.1, 3, 6)
    c = np.polynomial.polynomial.polyfromroots(-b)
    r = newton_inequalities(list(c))
    assert r.nis_hold and r.wnis_hold


@given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=8))
def test_real_rooted_implies_newton(roots):
    c = np.polynomial.polynomial.polyfromroots([-r for r in roots])
    rep = newton_inequalities(list(c))
    assert rep.nis_hold and rep.wnis_hold


def test_newton_exact():
    assert newton_inequalities([Fraction(1), Fraction(2), Fraction(1)]).nis_hold


# -- Lemma-type bound -----------------------------------------------------

@pytest.mark.parametrize("n", range(1, 9))
def test_equality_case(n):
    rep = lemma29_bound([math.comb(n, i) for i in range(n + 1)])
    if n > 1:
        assert rep.C == pytest.approx(n**n / (n - 1) ** (n - 1), rel=1e-10)
    assert rep.d1 == pytest.approx(rep.bound, rel=1e-10)
    assert rep.holds


def test_zero_constant_term():
    n = 5
    coeffs = [0] + [math.comb(n - 1, i) for i in range(n)]
    rep = lemma29_bound(coeffs)
    assert rep.C == pytest.approx(1.0)
    assert rep.d1 == 1 and rep.holds


@given(st.lists(st.tuples(st.floats(0.1, 3.0), st.floats(0.0, 3.0)), min_size=1, max_size=6))
def test_factored_polynomials(pairs):
    c = np.ones(1)
    for a, b in pairs:
        c = np.polynomial.polynomial.polymul(c, [b, a])
    assert lemma29_bound(list(c))


def test_inf_ratio_against_grid():
    c = [2.0, 1.0, 3.0, 0.5]
    t = np.logspace(-4, 4, 200001)
    brute = np.min(np.polynomial.polynomial.polyval(t, c) / t)
    assert inf_ratio(c) == pytest.approx(brute, rel=1e-6)
    assert inf_ratio(c) <= brute


def test_inapplicable_when_wnis_fail():
    rep = lemma29_bound([1, 0.1, 5])
    assert not rep.applicable and not rep.holds


# -- Alexandrov-Fenchel ---------------------------------------------------

def test_af_example():
    p = build_sparse({(1, 1): 1})
    m12 = mixed_form(p, [[1, 0], [0, 1]])
    m11 = mixed_form(p, [[1, 0], [1, 0]])
    assert m12 == pytest.approx(1.0) and m11 == pytest.approx(0.0)
    assert af_inequality_check(p, 20)


def test_af_random(rng):
    assert af_inequality_check(build_multilinear([["1/3"] * 3] * 3), 100)
    T = [random_psd(3, rng) for _ in range(3)]
    assert af_inequality_check(build_determinantal(T), 100)


def test_af_detects_violation():
    # x1^3 + x2^3: M(X1,X2,X)^2 >= M(X1,X1,X) M(X2,X2,X) fails for some nonnegative tuples
    assert not af_inequality_check(build_sparse({(3, 0): 1, (0, 3): 1}), 200)


def test_positive_mixed_forms(rng):
    for p in (build_multilinear(random_matrix(3, rng, density=0.5)), build_determinantal(random_psd_tuple(3, rng, low_rank=True))):
        for _ in range(5):
            assert mixed_form(p, rng.uniform(0.1, 1, (3, 3))) > 0


# -- restricted factorisation ---------------------------------------------

def test_factorization_examples(rng):
    v = factorization_check_propC1(build_multilinear(np.eye(2)), [1, 0], [0, 1])
    assert v and v.details["coefficients"][:2] == pytest.approx([0.0, 1.0], abs=1e-12)
    J3 = build_multilinear([["1/3"] * 3] * 3)
    for _ in range(5):
        assert factorization_check_propC1(J3, rng.uniform(0, 1, 3), rng.uniform(0.1, 1, 3))
    T = random_psd_tuple(2, rng)
    v = factorization_check_propC1(build_determinantal(T), [1, 1], [1, 1])
    np.testing.assert_allclose(v.details["roots"], [-1, -1], atol=1e-6)
