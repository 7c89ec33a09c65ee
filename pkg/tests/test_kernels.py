import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from polycap import kernels
from polycap.kernels import backends

from conftest import brute_permanent

BACKENDS = sorted(backends().items())
IDS = [name for name, _ in BACKENDS]


@pytest.fixture(params=BACKENDS, ids=IDS, scope="module")
def impl(request):
    return request.param[1]


def test_backend_selected():
    assert kernels.BACKEND in backends()


def test_cython_backend_built():
    assert "cython" in backends(), "compiled extension missing; run pip install -e . --no-build-isolation"


@pytest.mark.parametrize("n", range(0, 8))
def test_ryser_matches_permutation_sum(impl, n, rng):
    A = np.ascontiguousarray(rng.uniform(0, 1, (n, n)))
    want = brute_permanent(A.tolist()) if n else 1.0
    assert impl.ryser_permanent(A) == pytest.approx(want, rel=1e-12)


def test_ryser_identity_and_ones(impl):
    assert impl.ryser_permanent(np.eye(5)) == 1.0
    assert impl.ryser_permanent(np.ones((6, 6))) == pytest.approx(720.0)


@given(arrays(np.float64, (4, 4), elements=st.floats(0, 10)))
def test_ryser_property(impl, A):
    A = np.ascontiguousarray(A)
    want = brute_permanent(A.tolist())
    assert impl.ryser_permanent(A) == pytest.approx(want, rel=1e-10, abs=1e-9)


def test_polarization_gives_mixed_coefficient(impl, rng):
    # coefficient of x_1...x_m in prod_i (A x)_i with x = sum_k s_k X_k
    n = 4
    A = np.ascontiguousarray(rng.uniform(0, 1, (n, n)))
    assert impl.multilinear_polarization(A, np.eye(n)) == pytest.approx(brute_permanent(A.tolist()), rel=1e-12)
    X = np.ascontiguousarray(rng.uniform(0, 1, (n, n)))
    # permanent of A X^T: columns of A X^T are A X_k
    assert impl.multilinear_polarization(A, X) == pytest.approx(brute_permanent((A @ X.T).tolist()), rel=1e-12)


def test_sinkhorn_fixed_point(impl):
    A = np.full((4, 4), 0.25)
    u, v, it, res = impl.sinkhorn(A, 1e-14, 100)
    np.testing.assert_allclose(u * v[0], 1.0)
    assert res <= 1e-14


def test_sinkhorn_scales(impl, rng):
    A = np.ascontiguousarray(rng.uniform(0.1, 1, (5, 5)))
    u, v, it, res = impl.sinkhorn(A, 1e-12, 10000)
    B = u[:, None] * A * v[None, :]
    np.testing.assert_allclose(B.sum(axis=0), 1, atol=1e-11)
    np.testing.assert_allclose(B.sum(axis=1), 1, atol=1e-11)


def test_subset_min_gap(impl, rng):
    n = 5
    svals = np.array([bin(m).count("1") for m in range(1 << n)], dtype=np.int64)
    x = np.ascontiguousarray(rng.uniform(0, 2, n))
    gap, arg = impl.subset_min_gap(svals, x)
    brute = min((bin(m).count("1") - sum(x[i] for i in range(n) if m >> i & 1), m) for m in range(1 << n))
    assert gap == pytest.approx(brute[0])
    assert arg == brute[1]


def test_submodular_violation(impl):
    # S values for x1x2x3x4 + x2^2 x4^2 (0-based masks)
    svals = np.array([0] * 16, dtype=np.int64)
    exps = [(1, 1, 1, 1), (0, 2, 0, 2)]
    for m in range(16):
        svals[m] = max(sum(e[i] for i in range(4) if m >> i & 1) for e in exps)
    u, i, j = impl.submodular_violation(svals, 4)
    assert u >= 0
    c = u ^ (1 << i) ^ (1 << j)
    assert svals[c | 1 << i] + svals[c | 1 << j] < svals[u] + svals[c]
    modular = np.array([bin(m).count("1") for m in range(16)], dtype=np.int64)
    assert tuple(impl.submodular_violation(modular, 4)) == (-1, -1, -1)


def test_backends_agree(rng):
    mods = [m for _, m in BACKENDS]
    if len(mods) < 2:
        pytest.skip("single backend")
    for n in (3, 9, 12):
        A = np.ascontiguousarray(rng.uniform(0, 1, (n, n)))
        vals = [m.ryser_permanent(A) for m in mods]
        assert vals[0] == pytest.approx(vals[1], rel=1e-12)
    svals = rng.integers(0, 6, 64).astype(np.int64)
    svals[0] = 0
    assert len({tuple(m.submodular_violation(svals, 6)) for m in mods}) == 1
    x = np.ascontiguousarray(rng.uniform(0, 1, 6))
    assert len({m.subset_min_gap(svals, x)[1] for m in mods}) == 1


def test_pure_python_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("POLYCAP_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("POLYCAP_PURE_PYTHON")
        importlib.reload(kernels)
