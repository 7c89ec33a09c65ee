"""Random test instances: nonnegative matrices, PSD tuples, regular matrices."""

from __future__ import annotations

import itertools

import numpy as np

from .polynomials import HermitianTuple, NonnegativeMatrix


def random_matrix(n: int, rng: np.random.Generator, *, density: float = 1.0,
                  integer: bool = False) -> NonnegativeMatrix:
    """Nonnegative matrix with no zero row; entries vanish with probability 1 - density."""
    while True:
        vals = rng.integers(1, 4, size=(n, n)) if integer else rng.uniform(0.05, 1.0, size=(n, n))
        mask = rng.random((n, n)) < density
        A = np.where(mask, vals, 0)
        if np.all(A.sum(axis=1) > 0):
            return NonnegativeMatrix(A.astype(int).tolist() if integer else A)


def random_01_matrix(n: int, rng: np.random.Generator, density: float = 0.5) -> NonnegativeMatrix:
    while True:
        A = (rng.random((n, n)) < density).astype(int)
        if np.all(A.sum(axis=1) > 0):
            return NonnegativeMatrix(A.tolist())


def random_psd(n: int, rng: np.random.Generator, *, rank: int | None = None,
               complex_: bool = False) -> np.ndarray:
    r = n if rank is None else rank
    B = rng.normal(size=(n, r))
    if complex_:
        B = B + 1j * rng.normal(size=(n, r))
    M = B @ B.conj().T
    return 0.5 * (M + M.conj().T)


def random_psd_tuple(n: int, rng: np.random.Generator, *, complex_: bool = False,
                     low_rank: bool = False) -> HermitianTuple:
    """n PSD matrices; with ``low_rank`` each has a random rank in [1, n]."""
    while True:
        mats = [random_psd(n, rng, rank=int(rng.integers(1, n + 1)) if low_rank else None,
                           complex_=complex_) for _ in range(n)]
        if np.linalg.eigvalsh(sum(mats)).min() > 1e-3:
            return HermitianTuple(mats)


def regular_matrices(n: int, k: int, max_entry: int):
    """All n x n matrices with entries in 0..max_entry and every row and column sum k."""
    rows = [r for r in itertools.product(range(max_entry + 1), repeat=n) if sum(r) == k]

    def extend(prefix, colsum):
        if len(prefix) == n:
            if all(c == k for c in colsum):
                yield [list(r) for r in prefix]
            return
        left = n - len(prefix) - 1
        for r in rows:
            new = [c + v for c, v in zip(colsum, r)]
            if all(c <= k and k - c <= left * max_entry for c in new):
                yield from extend(prefix + [r], new)

    yield from extend([], [0] * n)
