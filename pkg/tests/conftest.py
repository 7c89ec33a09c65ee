import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=150,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def brute_permanent(A):
    """Permutation sum, independent of every code path in the package."""
    A = list(map(list, A))
    n = len(A)
    total = 0
    for sigma in itertools.permutations(range(n)):
        term = 1
        for i in range(n):
            term *= A[i][sigma[i]]
        total += term
    return total


def brute_mixed_discriminant(mats):
    """Coefficient of t1...tn in det(sum t_i A_i), via finite differences of
    the determinant over all 0/1 subsets (inclusion-exclusion)."""
    n = len(mats)
    total = 0.0
    for r in range(n + 1):
        for sub in itertools.combinations(range(n), r):
            M = sum((mats[i] for i in sub), np.zeros((n, n), dtype=complex))
            total += (-1) ** (n - r) * np.linalg.det(M)
    return total.real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def J3():
    from fractions import Fraction
    return [[Fraction(1, 3)] * 3 for _ in range(3)]


def falling(n):
    return math.factorial(n) / n ** n
