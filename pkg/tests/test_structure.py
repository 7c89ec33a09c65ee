import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import linprog

from polycap.errors import ValidationError
from polycap.polynomials import (
    NonnegativeMatrix,
    build_determinantal,
    build_multilinear,
    build_sparse,
    compositions,
)
from polycap.samples import random_01_matrix, random_matrix, random_psd_tuple
from polycap.structure import (
    SupportFunction,
    detect_decomposition,
    in_newton_polytope,
    in_support,
    is_indecomposable,
    is_submodular,
    rank,
    support_degree,
)

REMARK = {(1, 1, 1, 1): 1, (0, 2, 0, 2): 1}


def brute_support(A):
    """Exponents of Mul_A: one nonzero column chosen per row."""
    A = np.asarray(A)
    n = A.shape[0]
    out = set()
    for cols in itertools.product(*[np.nonzero(A[i])[0] for i in range(n)]):
        out.add(tuple(np.bincount(cols, minlength=n)))
    return out


def in_hull(points, x):
    P = np.array(sorted(points), dtype=float)
    res = linprog(np.zeros(len(P)), A_eq=np.vstack([P.T, np.ones(len(P))]), b_eq=np.r_[x, 1.0],
                  bounds=[(0, None)] * len(P), method="highs")
    return res.status == 0


# -- support degrees ------------------------------------------------------

def test_column_counts(rng):
    A = random_01_matrix(5, rng)
    p = build_multilinear(A)
    assert [support_degree(p, [j]) for j in range(5)] == A.column_support()
    assert support_degree(p, range(5)) == 5


def test_non_submodular_witness_values():
    p = build_sparse(REMARK)
    S = SupportFunction.from_oracle(p)
    assert S([0, 1, 2]) == 3
    assert S([0, 1]) == 2 and S([1, 2]) == 2 and S([1]) == 2


def test_float_and_exact_paths_agree(rng):
    A = random_01_matrix(4, rng)
    exact = SupportFunction.from_oracle(build_multilinear(A)).all_values()
    p = build_multilinear(A.entries * rng.uniform(0.5, 2, (4, 4)))
    np.testing.assert_array_equal(SupportFunction.from_oracle(p, exact=False).all_values(), exact)


def test_support_function_invariants(rng):
    for p in (build_multilinear(random_01_matrix(4, rng)), build_determinantal(random_psd_tuple(4, rng, low_rank=True))):
        vals = SupportFunction.from_oracle(p).all_values()
        assert vals[0] == 0 and vals[-1] == 4
        for a in range(16):
            for i in range(4):
                assert vals[a | 1 << i] >= vals[a]


# -- rank -----------------------------------------------------------------

def test_rank_examples(rng):
    A = random_01_matrix(4, rng)
    p = build_multilinear(A)
    for j in range(4):
        assert rank(p, np.eye(4)[j]) == A.column_support()[j]
    assert rank(p, np.zeros(4)) == 0
    T = random_psd_tuple(4, rng, low_rank=True)
    q = build_determinantal(T)
    for j in range(4):
        assert rank(q, np.eye(4)[j]) == np.linalg.matrix_rank(T.matrices[j], tol=1e-8)


def test_rank_general_vectors(rng):
    # for Mul_A the roots of p(X - t 1) are (AX)_i / (A1)_i
    A = random_matrix(5, rng, density=0.5)
    p = build_multilinear(A)
    for _ in range(10):
        X = rng.uniform(0.5, 2, 5) * (rng.random(5) < 0.5)
        if set(X) <= {0.0, 1.0}:
            continue
        want = int(np.count_nonzero(A.entries @ X))
        assert rank(p, X) == want


def test_rank_on_indicators_matches_degrees(rng):
    T = random_psd_tuple(3, rng, low_rank=True)
    for p in (build_multilinear(random_01_matrix(4, rng)), build_determinantal(T)):
        n = p.num_vars
        S = SupportFunction.from_oracle(p)
        for mask in range(1 << n):
            X = [(mask >> i) & 1 for i in range(n)]
            assert rank(p, X) == S.value_mask(mask)


def test_rank_rejects_non_hyperbolic():
    with pytest.raises(ValidationError, match="non-real"):
        rank(build_sparse({(2, 0): 1, (0, 2): 1}), [1.0, 0.5])


# -- submodularity --------------------------------------------------------

def test_submodular_examples(rng):
    for _ in range(5):
        S = SupportFunction.from_oracle(build_multilinear(random_01_matrix(4, rng)))
        assert is_submodular(S)
    v = is_submodular(SupportFunction.from_oracle(build_sparse(REMARK)))
    assert not v and v.witness == ((0, 1), (1, 2))
    modular = SupportFunction(5, lambda A: len(A))
    assert is_submodular(modular)


def test_submodular_on_generated_instances(rng):
    for n in range(2, 7):
        assert is_submodular(SupportFunction.from_oracle(build_multilinear(random_01_matrix(n, rng))))
        assert is_submodular(SupportFunction.from_oracle(build_determinantal(random_psd_tuple(n, rng, low_rank=True))))


def test_submodular_sampled_beyond_cap():
    v = is_submodular(SupportFunction(22, lambda A: len(A)), samples=200)
    assert v.holds and v.probabilistic


# -- support membership ---------------------------------------------------

def test_in_support_examples():
    p = build_multilinear(np.eye(4))
    assert in_support(p, [1, 1, 1, 1])
    assert not in_support(p, [2, 0, 1, 1])
    assert in_support(build_multilinear([["1/3"] * 3] * 3), [3, 0, 0])
    with pytest.raises(ValidationError):
        in_support(p, [1, 1, 1, 0])


def test_in_support_matches_expansion(rng):
    for _ in range(20):
        A = random_01_matrix(4, rng, density=0.5)
        supp = brute_support(A.entries)
        S = SupportFunction.from_oracle(build_multilinear(A))
        for r in compositions(4, 4):
            assert bool(in_support(None, r, S=S)) == (r in supp)


# -- Newton polytope ------------------------------------------------------

def test_newton_examples(rng):
    from polycap.exact import random_doubly_stochastic

    assert in_newton_polytope(build_multilinear(random_doubly_stochastic(4, rng)), np.ones(4))
    p = build_multilinear(np.eye(3))
    assert in_newton_polytope(p, [1, 1, 1])
    v = in_newton_polytope(p, [1.5, 0.5, 1])
    assert not v and v.witness == (0,)
    with pytest.raises(ValidationError):
        in_newton_polytope(p, [1, 1, 2])


@pytest.mark.parametrize("seed", range(4))
def test_newton_matches_hull(seed):
    rng = np.random.default_rng(seed)
    n = 3 + seed % 3
    A = random_01_matrix(n, rng, density=0.6)
    supp = brute_support(A.entries)
    if not supp:
        return
    S = SupportFunction.from_oracle(build_multilinear(A))
    for _ in range(40):
        x = rng.dirichlet(np.ones(n)) * n
        assert bool(in_newton_polytope(None, x, S=S)) == in_hull(supp, x)
    for r in supp:
        assert in_newton_polytope(None, np.array(r, float), S=S)


def test_non_hyperbolic_polytope_differs():
    # x1 x2^2 + x2 x3^2 + x3 x1^2: the subset polytope is a hexagon, the hull a triangle
    p = build_sparse({(1, 2, 0): 1, (0, 1, 2): 1, (2, 0, 1): 1})
    x = [2.0, 1.0, 0.0]
    assert in_newton_polytope(p, x)
    assert not in_hull({(1, 2, 0), (0, 1, 2), (2, 0, 1)}, x)


# -- indecomposability ----------------------------------------------------

def test_indecomposable_examples():
    v = is_indecomposable(build_multilinear(np.ones((4, 4))))
    assert v and v.details["conditions_agree"]
    v = is_indecomposable(build_sparse({(1, 1, 1): 1}))
    assert not v and v.witness == (0,)
    B = np.zeros((4, 4))
    B[:2, :2] = [[1, 2], [3, 1]]
    B[2:, 2:] = [[2, 1], [1, 1]]
    v = is_indecomposable(build_multilinear(B))
    assert not v and v.witness in ((0, 1), (2, 3))
    assert v.details["conditions_agree"]


def test_conditions_agree_on_random_instances(rng):
    for n in range(2, 6):
        for p in (build_multilinear(random_01_matrix(n, rng, density=0.5)),
                  build_determinantal(random_psd_tuple(n, rng, low_rank=True))):
            assert is_indecomposable(p).details["conditions_agree"]


def test_block_matrix_witness_is_block():
    B = np.zeros((4, 4))
    B[:2, :2] = 1
    B[2:, 2:] = 1
    v = is_indecomposable(build_multilinear(B))
    assert not v
    assert set(v.witness) in ({0, 1}, {2, 3})


# -- decomposition --------------------------------------------------------

def test_decomposition_examples():
    # x1 x2 (x3 + x4)^2
    p = build_sparse({(1, 1, 2, 0): 1, (1, 1, 1, 1): 2, (1, 1, 0, 2): 1})
    d = detect_decomposition(p)
    assert {d.block, d.complement} == {(0, 1), (2, 3)} and d.verified
    assert detect_decomposition(build_multilinear([["1/3"] * 3] * 3)) is None
    d = detect_decomposition(build_sparse({(1, 1, 1): 1}))
    assert d.verified


def test_unverified_decomposition():
    # S({0}) = 1 = |{0}| but x1x2x3x4 + x2^2x4^2 is no product over {0} | {1, 2, 3}
    p = build_sparse({(1, 1, 1, 1): 1, (0, 2, 0, 2): 1})
    d = detect_decomposition(p)
    assert d is not None
    assert not d.verified and "unverified" in d.message


@given(st.integers(0, 10_000))
def test_indecomposable_iff_no_decomposition(seed):
    rng = np.random.default_rng(seed)
    A = random_01_matrix(4, rng, density=0.4)
    assume(np.all(np.asarray(A.entries).sum(axis=0) > 0))
    p = build_multilinear(A)
    v = is_indecomposable(p)
    assert v.details["conditions_agree"]
    assert (detect_decomposition(p) is None) == v.holds


def test_missing_variable_is_decomposable_without_blocks():
    # x_1 never appears: a coefficient is missing, but no block has S(A) = |A|
    A = [[0, 0, 1, 1], [1, 0, 1, 1], [1, 0, 0, 1], [1, 0, 1, 0]]
    p = build_multilinear(NonnegativeMatrix(A))
    assert not is_indecomposable(p).holds
    assert SupportFunction.from_oracle(p).value([1]) == 0
    assert detect_decomposition(p) is None
