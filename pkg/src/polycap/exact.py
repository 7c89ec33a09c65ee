"""Brute-force ground truth: permanents, mixed discriminants, grid capacity,
and the two small lemmas behind the single-variable capacity bound.

Everything here is deliberately slow and simple.  It exists to check the
rest of the package and must not share code paths with what it checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BudgetError, ValidationError
from .polynomials import (
    HermitianTuple,
    NonnegativeMatrix,
    PolynomialOracle,
    bareiss_det,
    build_determinantal,
    mixed_form,
)

RYSER_CAP = 24
EXACT_RYSER_CAP = 20
EXACT_POLARIZATION_CAP = 12


@dataclass(frozen=True)
class ExactValue:
    value: object  # Fraction on the rational path, float otherwise
    method: str

    def __float__(self):
        return float(self.value)


def _as_matrix(A) -> NonnegativeMatrix:
    return A if isinstance(A, NonnegativeMatrix) else NonnegativeMatrix(A, allow_zero_rows=True)


def _integer_scaled(rows):
    """Integer matrix and common denominator L with rows = M / L."""
    L = 1
    for r in rows:
        for v in r:
            L = math.lcm(L, v.denominator)
    return [[int(v * L) for v in r] for r in rows], L


def _ryser_int(M):
    n = len(M)
    if n == 0:
        return 1
    rowsum = [0] * n
    total = 0
    prev = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        j = (g ^ prev).bit_length() - 1
        if g >> j & 1:
            for i in range(n):
                rowsum[i] += M[i][j]
        else:
            for i in range(n):
                rowsum[i] -= M[i][j]
        prev = g
        prod = 1
        for v in rowsum:
            prod *= v
            if prod == 0:
                break
        total += -prod if (n - bin(g).count("1")) & 1 else prod
    return total


def permanent_exact(A, *, exact: bool | None = None) -> ExactValue:
    """per(A) by Ryser's formula.

    The rational path (default for matrices given as ints / fractions)
    clears denominators and runs in integers; the float path uses the
    compiled kernel with extended-precision accumulation.
    """
    A = _as_matrix(A)
    n = A.n
    if n > RYSER_CAP:
        raise BudgetError(f"exact permanent limited to n <= {RYSER_CAP} (got {n})")
    if exact is None:
        exact = A.rational_input and n <= EXACT_RYSER_CAP
    if exact:
        if n > EXACT_RYSER_CAP:
            raise BudgetError(f"rational permanent limited to n <= {EXACT_RYSER_CAP}")
        M, L = _integer_scaled(A.exact)
        return ExactValue(Fraction(_ryser_int(M), L**n), "ryser")
    return ExactValue(kernels.ryser_permanent(np.ascontiguousarray(A.entries)), "ryser")


def permanent_permutation_sum(A, *, exact: bool = True) -> ExactValue:
    """per(A) straight from the definition; n <= 9."""
    A = _as_matrix(A)
    if A.n > 9:
        raise BudgetError("permutation sum limited to n <= 9")
    rows = A.exact if exact else A.entries.tolist()
    total = Fraction(0) if exact else 0.0
    terms = []
    for sigma in itertools.permutations(range(A.n)):
        prod = Fraction(1) if exact else 1.0
        for i, j in enumerate(sigma):
            prod *= rows[i][j]
        if exact:
            total += prod
        else:
            terms.append(prod)
    return ExactValue(total if exact else math.fsum(terms), "permutation-sum")


def _perm_sign(perm):
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def mixed_discriminant_exact(T, *, exact: bool | None = None, method: str = "auto") -> ExactValue:
    """D(A_1, ..., A_n), the coefficient of t_1...t_n in det(sum t_i A_i).

    ``permutation-sum``: D = sum over assignments pi of matrices to rows of
    det(row i taken from A_pi(i)); n <= 10.  ``polarization``: mixed form of
    the determinantal oracle; n <= 20, in rational arithmetic (2^n Bareiss
    determinants) for rational tuples up to n = 12.
    """
    if not isinstance(T, HermitianTuple):
        T = HermitianTuple(T)
    n = T.n
    rational = T.exact is not None and exact is not False
    if method == "auto":
        if rational and 6 < n <= EXACT_POLARIZATION_CAP:
            method = "polarization"
        else:
            method = "permutation-sum" if n <= 10 else "polarization"
    if method == "polarization":
        if n > 20:
            raise BudgetError("mixed discriminant limited to n <= 20")
        p = build_determinantal(T)
        if rational and n <= EXACT_POLARIZATION_CAP:
            return ExactValue(mixed_form(p, np.eye(n, dtype=int), exact=True), "polarization")
        return ExactValue(mixed_form(p, np.eye(n)), "polarization")
    if method != "permutation-sum":
        raise ValidationError(f"unknown method {method!r}")
    if n > 10:
        raise BudgetError("permutation-sum mixed discriminant limited to n <= 10")
    if exact is None:
        exact = T.exact is not None and n <= 6
    if exact:
        if T.exact is None:
            raise ValidationError("exact mixed discriminant needs real rational matrices")
        total = Fraction(0)
        for pi in itertools.permutations(range(n)):
            total += bareiss_det([T.exact[pi[i]][i] for i in range(n)])
        return ExactValue(total, "permutation-sum")
    stack = np.array(T.matrices)
    if T.is_real:
        stack = stack.real
    rows = np.arange(n)
    dets = []
    chunk = []
    for pi in itertools.permutations(range(n)):
        chunk.append(stack[list(pi), rows, :])
        if len(chunk) == 4096:
            dets.append(np.linalg.det(np.array(chunk)))
            chunk = []
    if chunk:
        dets.append(np.linalg.det(np.array(chunk)))
    allv = np.concatenate(dets)
    if np.iscomplexobj(allv):
        value = complex(math.fsum(allv.real), math.fsum(allv.imag))
        if abs(value.imag) > 1e-9 * (1 + abs(value.real)):
            raise ValidationError("mixed discriminant has a large imaginary part")
        return ExactValue(value.real, "permutation-sum")
    return ExactValue(math.fsum(allv), "permutation-sum")


def hyperplane_basis(n: int) -> np.ndarray:
    """Orthonormal n x (n-1) basis of {y : sum(y) = 0}."""
    if n <= 1:
        return np.zeros((n, 0))
    q, _ = np.linalg.qr(np.hstack([np.ones((n, 1)), np.eye(n)[:, : n - 1]]))
    return q[:, 1:]


def _log_values(p: PolynomialOracle, Y):
    shift = Y.max(axis=1)
    vals = p.evaluate_batch(np.exp(Y - shift[:, None]))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(vals > 0, np.log(np.maximum(vals, 1e-300)) + p.degree * shift, np.inf)
    return out


def capacity_grid(p: PolynomialOracle, resolution: int = 9, *, radius: float | None = None,
                  min_step: float = 1e-10, max_points: int = 20000) -> float:
    """Upper estimate of Cap(p) by a grid on the hyperplane and compass refinement.

    Uses function values only, so it is independent of the gradient
    solver it is meant to check.  n <= 6.
    """
    n = p.num_vars
    if n > 6:
        raise BudgetError("grid capacity limited to n <= 6")
    if p.degree != n:
        raise ValidationError("capacity needs degree == number of variables")
    if n == 1:
        return float(p.evaluate(np.ones(1)))
    d = n - 1
    U = hyperplane_basis(n)
    if radius is None:
        radius = math.sqrt(n) * math.log(2 * p.evaluate(np.ones(n)))
        radius = max(radius, 1.0)
    res = max(2, min(resolution, int(max_points ** (1.0 / d))))
    axis = np.linspace(-radius, radius, res)
    grid = np.array(list(itertools.product(axis, repeat=d)))
    vals = _log_values(p, grid @ U.T)
    best = int(np.argmin(vals))
    z, fz = grid[best].copy(), float(vals[best])
    step = axis[1] - axis[0]
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    while step > min_step:
        cand = z[None, :] + step * dirs
        cv = _log_values(p, cand @ U.T)
        k = int(np.argmin(cv))
        if cv[k] < fz:
            z, fz = cand[k], float(cv[k])
        else:
            step *= 0.5
    return math.exp(fz)


def mini_vdw_verify(a) -> tuple[object, bool]:
    """Permanent of [a | b | ... | b] with b_i = (1 - a_i)/(n - 1).

    Computed from the closed form and by Ryser (which must agree to 1e-10);
    returns the value and whether it is >= n!/n^n.
    """
    exact = all(isinstance(v, (int, Fraction)) for v in a)
    a = [Fraction(v) if exact else float(v) for v in a]
    n = len(a)
    if n < 2:
        raise ValidationError("need n >= 2")
    if any(v < 0 for v in a) or abs(sum(a) - 1) > 1e-12:
        raise ValidationError("a must be a probability vector")
    one = Fraction(1) if exact else 1.0
    b = [(one - v) / (n - 1) for v in a]
    M = [[a[i]] + [b[i]] * (n - 1) for i in range(n)]
    s = sum((a[i] * math.prod(one - a[j] for j in range(n) if j != i) for i in range(n)), 0 * one)
    closed = Fraction(math.factorial(n - 1), (n - 1) ** (n - 1)) * s if exact else \
        math.factorial(n - 1) / (n - 1) ** (n - 1) * s
    ryser = permanent_exact(NonnegativeMatrix(M), exact=exact).value
    if exact:
        if closed != ryser:
            raise AssertionError(f"closed form {closed} != Ryser {ryser}")
        return closed, closed >= Fraction(math.factorial(n), n**n)
    if abs(closed - ryser) > 1e-10 * abs(ryser):
        raise AssertionError(f"closed form {closed} != Ryser {ryser}")
    bound = math.factorial(n) / n**n
    return closed, closed >= bound * (1 - 1e-12)


def entropic_inequality(c) -> tuple[float, float, bool]:
    """S_{n-1} - n S_n >= exp(sum c_i log c_i) for c in [0,1]^n with sum n - 1.

    Uses 0 log 0 = 0.  Returns (lhs, rhs, holds) with a 1e-12 relative slack.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if np.any(c < -1e-15) or np.any(c > 1 + 1e-15) or abs(c.sum() - (n - 1)) > 1e-9:
        raise ValidationError("c must lie in [0,1]^n with sum n - 1")
    c = np.clip(c, 0.0, 1.0)
    sn = float(np.prod(c))
    sn1 = math.fsum(float(np.prod(np.delete(c, i))) for i in range(n))
    lhs = sn1 - n * sn
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(c > 0, c * np.log(np.where(c > 0, c, 1.0)), 0.0)
    rhs = math.exp(math.fsum(ent))
    return lhs, rhs, lhs >= rhs * (1 - 1e-12) - 1e-15


def random_doubly_stochastic(n: int, rng: np.random.Generator, *, tol: float = 1e-13) -> np.ndarray:
    """Sinkhorn balancing of exp(uniform[0, 1)) entries."""
    A = np.exp(rng.uniform(0.0, 1.0, size=(n, n)))
    u, v, _, _ = kernels.sinkhorn(np.ascontiguousarray(A), tol, 100000)
    return u[:, None] * A * v[None, :]
