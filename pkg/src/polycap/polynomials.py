"""Polynomial oracles.

Every polynomial in this package is a homogeneous polynomial with
nonnegative coefficients that we can only *evaluate*.  The classes below wrap
the concrete constructions (products of linear forms, determinants of
Hermitian pencils, explicit monomial lists) together with the derived oracles
the algorithms need: partial derivatives at zero, the mixed-derivative
oracle ``p_k`` and Laplace-type combinations.

Oracles are immutable after construction.  ``evaluate`` works in floating
point; oracles with ``exact = True`` also provide ``evaluate_exact`` on
``Fraction`` inputs, which the structural code uses for exact degree
detection.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import BudgetError, NumericalError, ValidationError
from .interpolation import (
    chebyshev_nodes,
    derivative_at,
    exact_coefficients,
    power_coefficients,
)

POLARIZATION_CAP = 22
DERIVATIVE_BUDGET = 10**7
IM_TOL = 1e-9
_BATCH = 1 << 14


def to_fraction(value) -> Fraction:
    """Exact rational value of an int, float, Fraction or ``"p/q"`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise ValidationError(f"boolean is not a number: {value!r}")
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValidationError(f"non-finite entry {value!r}")
        return Fraction(float(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as exc:
            raise ValidationError(f"cannot parse number {value!r}") from exc
    raise ValidationError(f"unsupported numeric type {type(value).__name__}")


def _is_rational_literal(value) -> bool:
    return isinstance(value, (int, np.integer, Fraction, str)) and not isinstance(value, bool)


def bareiss_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return Fraction(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


# ---------------------------------------------------------------------------
# data types


class NonnegativeMatrix:
    """Square matrix with nonnegative entries and positive row sums.

    ``exact`` holds the entries as fractions (floats convert exactly);
    ``rational_input`` records whether the caller supplied non-float
    rationals, which selects exact arithmetic by default downstream.
    """

    def __init__(self, entries, *, allow_zero_rows: bool = False):
        rows = [list(r) for r in np.asarray(entries, dtype=object).tolist()] if isinstance(
            entries, np.ndarray
        ) else [list(r) for r in entries]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValidationError("matrix must be square and non-empty")
        self.exact = tuple(tuple(to_fraction(v) for v in r) for r in rows)
        self.rational_input = all(_is_rational_literal(v) for r in rows for v in r)
        for i, r in enumerate(self.exact):
            for j, v in enumerate(r):
                if v < 0:
                    raise ValidationError(f"negative entry {float(v)} at ({i}, {j})")
            if not allow_zero_rows and sum(r) == 0:
                raise ValidationError(f"row {i} is identically zero")
        arr = np.array([[float(v) for v in r] for r in self.exact], dtype=float)
        arr.setflags(write=False)
        self.entries = arr
        self.n = n

    def __repr__(self):
        return f"NonnegativeMatrix(n={self.n})"

    def column_support(self):
        """Number of nonzero entries in each column."""
        return [sum(1 for i in range(self.n) if self.exact[i][j] != 0) for j in range(self.n)]

    def submatrix(self, rows, cols, **kw) -> "NonnegativeMatrix":
        return NonnegativeMatrix([[self.exact[i][j] for j in cols] for i in rows], **kw)


class HermitianTuple:
    """n Hermitian positive semidefinite n x n matrices with a positive definite sum.

    Real matrices given with rational literals (ints, fractions, ``"p/q"``)
    keep an exact copy used by exact evaluation.
    """

    def __init__(self, matrices, *, psd_tol: float = 1e-9, herm_tol: float = 1e-10):
        raw = [m.tolist() if isinstance(m, np.ndarray) else [list(r) for r in m] for m in matrices]
        mats = [np.array([[_to_complex(v) for v in row] for row in m], dtype=complex) for m in raw]
        n = len(mats)
        if n == 0:
            raise ValidationError("empty tuple")
        for k, m in enumerate(mats):
            if m.shape != (n, n):
                raise ValidationError(f"matrix {k} has shape {m.shape}, expected {(n, n)}")
        scale = max(1.0, max(float(np.abs(m).max()) for m in mats))
        for k, m in enumerate(mats):
            err = float(np.abs(m - m.conj().T).max())
            if err > herm_tol * scale:
                raise ValidationError(f"matrix {k} is not Hermitian (asymmetry {err:.3g})")
            lam = float(np.linalg.eigvalsh(m).min())
            if lam < -psd_tol * scale:
                raise ValidationError(
                    f"matrix {k} is not positive semidefinite (min eigenvalue {lam:.3g})"
                )
        lam = float(np.linalg.eigvalsh(sum(mats)).min())
        if lam <= psd_tol * scale:
            raise ValidationError(f"sum of matrices is not positive definite (min eigenvalue {lam:.3g})")
        self.n = n
        self.is_real = all(float(np.abs(m.imag).max()) == 0.0 for m in mats)
        for m in mats:
            m.setflags(write=False)
        self.matrices = tuple(mats)
        self.exact = None
        if self.is_real and all(_is_rational_literal(v) for m in raw for row in m for v in row):
            self.exact = tuple(tuple(tuple(to_fraction(v) for v in row) for row in m) for m in raw)

    def __repr__(self):
        return f"HermitianTuple(n={self.n})"

    @classmethod
    def from_parts(cls, parts, **kw):
        """Build from ``[{"re": [[...]], "im": [[...]]}, ...]`` (``im`` optional)."""
        mats = []
        for p in parts:
            re = p["re"]
            im = p.get("im")
            if im is None or not any(float(to_fraction(v)) for row in im for v in row):
                mats.append(re)
            else:
                mats.append([[float(to_fraction(a)) + 1j * float(to_fraction(b)) for a, b in zip(ra, rb)]
                             for ra, rb in zip(re, im)])
        return cls(mats, **kw)


def _to_complex(v):
    if isinstance(v, (complex, np.complexfloating)):
        return complex(v)
    return float(to_fraction(v))


# ---------------------------------------------------------------------------
# oracle base


class PolynomialOracle:
    """Homogeneous polynomial of ``degree`` in ``num_vars`` variables, known by evaluation."""

    provenance = "callable"
    exact = False
    is_zero = False
    # widest max(log x) - min(log x) at which evaluation is trusted
    stable_spread = math.inf

    def __init__(self, num_vars: int, degree: int):
        if num_vars < 0 or degree < 0:
            raise ValidationError("num_vars and degree must be nonnegative")
        self.num_vars = int(num_vars)
        self.degree = int(degree)

    def __repr__(self):
        return f"{type(self).__name__}(num_vars={self.num_vars}, degree={self.degree}, provenance={self.provenance!r})"

    def __call__(self, x):
        return self.evaluate(x)

    def _check(self, x):
        x = np.asarray(x)
        if x.shape != (self.num_vars,):
            raise ValidationError(f"expected a point of dimension {self.num_vars}, got shape {x.shape}")
        return x

    def evaluate(self, x) -> float:
        raise NotImplementedError

    def evaluate_batch(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        return np.array([self.evaluate(p) for p in points], dtype=float)

    def evaluate_exact(self, x: Sequence[Fraction]) -> Fraction:
        raise TypeError(f"{type(self).__name__} has no exact evaluation")


class FunctionOracle(PolynomialOracle):
    """Wrap a plain callable (and optionally an exact counterpart)."""

    def __init__(self, func, num_vars, degree, exact_func=None, provenance="callable"):
        super().__init__(num_vars, degree)
        self._func = func
        self._exact_func = exact_func
        self.exact = exact_func is not None
        self.provenance = provenance

    def evaluate(self, x):
        return float(self._func(np.asarray(self._check(x), dtype=float)))

    def evaluate_exact(self, x):
        if self._exact_func is None:
            return super().evaluate_exact(x)
        return Fraction(self._exact_func([to_fraction(v) for v in x]))


class ZeroOracle(PolynomialOracle):
    """The zero polynomial, kept explicit so downstream code can refuse it."""

    exact = True
    is_zero = True

    def __init__(self, num_vars, degree, provenance="derivative"):
        super().__init__(num_vars, degree)
        self.provenance = provenance

    def evaluate(self, x):
        self._check(x)
        return 0.0

    def evaluate_batch(self, points):
        return np.zeros(np.asarray(points).reshape(-1, self.num_vars).shape[0])

    def evaluate_exact(self, x):
        return Fraction(0)


class MultilinearOracle(PolynomialOracle):
    """Product of the row linear forms of a nonnegative matrix."""

    provenance = "multilinear"
    exact = True

    def __init__(self, matrix: NonnegativeMatrix):
        super().__init__(matrix.n, matrix.n)
        self.matrix = matrix

    def evaluate(self, x):
        x = self._check(x)
        val = np.prod(self.matrix.entries @ x)
        return val if np.iscomplexobj(val) else float(val)

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        return np.prod(points @ self.matrix.entries.T, axis=1)

    def evaluate_exact(self, x):
        x = [to_fraction(v) for v in x]
        out = Fraction(1)
        for row in self.matrix.exact:
            out *= sum((a * b for a, b in zip(row, x)), Fraction(0))
        return out


class DeterminantalOracle(PolynomialOracle):
    """det(x_1 A_1 + ... + x_n A_n) for a Hermitian PSD tuple."""

    provenance = "determinantal"
    # det of a sum with weights e^18 apart cancels to ~1e-8 relative accuracy
    stable_spread = 18.0

    def __init__(self, tup: HermitianTuple):
        super().__init__(tup.n, tup.n)
        self.tuple = tup
        self._stack = np.array(tup.matrices)
        if tup.is_real:
            self._stack = self._stack.real.copy()
        self.exact = tup.exact is not None

    def _finish(self, val, real_input):
        if not real_input:
            return val
        val = complex(val)
        if abs(val.imag) > IM_TOL * (1.0 + abs(val.real)):
            raise NumericalError(f"determinant has imaginary residue {val.imag:.3g} on real input")
        return val.real

    def evaluate(self, x):
        x = self._check(x)
        real_input = not np.iscomplexobj(x)
        m = np.tensordot(x, self._stack, axes=1)
        return self._finish(np.linalg.det(m), real_input)

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        out = np.empty(points.shape[0])
        for start in range(0, points.shape[0], _BATCH):
            chunk = points[start:start + _BATCH]
            dets = np.linalg.det(np.tensordot(chunk, self._stack, axes=1))
            if np.iscomplexobj(dets):
                bad = np.abs(dets.imag) > IM_TOL * (1.0 + np.abs(dets.real))
                if bad.any():
                    raise NumericalError("determinant has non-negligible imaginary residue on real input")
                dets = dets.real
            out[start:start + _BATCH] = dets
        return out

    def evaluate_exact(self, x):
        if self.tuple.exact is None:
            return super().evaluate_exact(x)
        x = [to_fraction(v) for v in x]
        n = self.num_vars
        m = [[sum((x[k] * self.tuple.exact[k][i][j] for k in range(n)), Fraction(0)) for j in range(n)]
             for i in range(n)]
        return bareiss_det(m)


class SparsePolynomial(PolynomialOracle):
    """Explicit homogeneous polynomial: exponent vector -> positive coefficient."""

    provenance = "sparse"
    exact = True

    def __init__(self, num_vars: int, degree: int, terms: Mapping[Sequence[int], object]):
        super().__init__(num_vars, degree)
        clean = {}
        for exp, coef in dict(terms).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars:
                raise ValidationError(f"exponent {exp} has length {len(exp)}, expected {num_vars}")
            if any(e < 0 for e in exp):
                raise ValidationError(f"negative exponent in {exp}")
            if sum(exp) != degree:
                raise ValidationError(f"exponent {exp} is not of total degree {degree}")
            c = to_fraction(coef)
            if c < 0:
                raise ValidationError(f"negative coefficient {coef} for {exp}")
            if c != 0:
                clean[exp] = clean.get(exp, Fraction(0)) + c
        self.terms = dict(sorted(clean.items()))
        self.is_zero = not self.terms
        self._exps = np.array(list(self.terms) or np.zeros((0, num_vars)), dtype=np.int64).reshape(-1, num_vars)
        self._coefs = np.array([float(c) for c in self.terms.values()], dtype=float)

    def support(self):
        return set(self.terms)

    def evaluate(self, x):
        x = self._check(x)
        if self.is_zero:
            return 0.0
        mons = np.prod(np.power(x[None, :], self._exps), axis=1)
        val = self._coefs @ mons
        return val if np.iscomplexobj(val) else float(val)

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        if self.is_zero:
            return np.zeros(points.shape[0])
        mons = np.prod(np.power(points[:, None, :], self._exps[None, :, :]), axis=2)
        return mons @ self._coefs

    def evaluate_exact(self, x):
        x = [to_fraction(v) for v in x]
        total = Fraction(0)
        for exp, c in self.terms.items():
            term = c
            for xi, e in zip(x, exp):
                if e:
                    term *= xi**e
            total += term
        return total


def build_multilinear(A) -> MultilinearOracle:
    """Mul_A(t) = prod_i sum_j A(i, j) t_j."""
    if not isinstance(A, NonnegativeMatrix):
        A = NonnegativeMatrix(A)
    return MultilinearOracle(A)


def build_determinantal(T) -> DeterminantalOracle:
    """det(sum_i t_i A_i)."""
    if not isinstance(T, HermitianTuple):
        T = HermitianTuple(T)
    return DeterminantalOracle(T)


def build_sparse(terms: Mapping[Sequence[int], object], num_vars=None, degree=None) -> SparsePolynomial:
    """Sparse polynomial from ``{exponent: coefficient}``; sizes inferred when omitted."""
    terms = dict(terms)
    if not terms and (num_vars is None or degree is None):
        raise ValidationError("cannot infer sizes of an empty polynomial")
    first = next(iter(terms)) if terms else None
    num_vars = len(first) if num_vars is None else num_vars
    degree = sum(first) if degree is None else degree
    return SparsePolynomial(num_vars, degree, terms)


def evaluate_sparse(q: SparsePolynomial, x):
    """Exact value when every coordinate is a rational literal, float otherwise."""
    if all(_is_rational_literal(v) for v in x):
        return q.evaluate_exact(x)
    return q.evaluate(np.asarray(x, dtype=float))


def expand(p: PolynomialOracle) -> SparsePolynomial:
    """Explicit monomial expansion.

    Products of linear forms are multiplied out directly; other exact
    oracles are expanded by polarization (n <= 10).
    """
    if isinstance(p, SparsePolynomial):
        return p
    if isinstance(p, MultilinearOracle):
        acc = {(0,) * p.num_vars: Fraction(1)}
        for row in p.matrix.exact:
            nxt = {}
            for exp, c in acc.items():
                for j, a in enumerate(row):
                    if a == 0:
                        continue
                    e = list(exp)
                    e[j] += 1
                    e = tuple(e)
                    nxt[e] = nxt.get(e, Fraction(0)) + c * a
            acc = nxt
        return SparsePolynomial(p.num_vars, p.degree, acc)
    if p.is_zero:
        return SparsePolynomial(p.num_vars, p.degree, {})
    if not p.exact:
        raise ValidationError("expansion requires an exact oracle")
    if p.degree > 10:
        raise BudgetError("expansion by polarization is limited to degree 10")
    terms = {}
    eye = np.eye(p.num_vars, dtype=int)
    for r in compositions(p.degree, p.num_vars):
        vecs = [eye[i] for i in range(p.num_vars) for _ in range(r[i])]
        m = mixed_form(p, vecs, exact=True)
        denom = math.prod(math.factorial(k) for k in r)
        if m != 0:
            terms[r] = m / denom
    return SparsePolynomial(p.num_vars, p.degree, terms)


def compositions(total: int, parts: int):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# mixed forms and derivative oracles


def mixed_form(p: PolynomialOracle, vectors, *, cap: int = POLARIZATION_CAP, exact: bool = False):
    """M_p(X_1, ..., X_n) = d^n/da_1...da_n p(sum a_i X_i).

    Computed by the polarization identity
    ``2^-n sum_{b in {+-1}^n} prod(b) p(sum b_i X_i)``.  Products of linear
    forms go through the compiled Gray-code kernel.
    """
    n = p.degree
    vectors = list(vectors)
    if len(vectors) != n:
        raise ValidationError(f"mixed form of a degree-{n} polynomial needs {n} vectors, got {len(vectors)}")
    if n > cap:
        raise BudgetError(
            f"polarization needs 2^{n} evaluations (cap 2^{cap}); use derivative_oracle for high degree"
        )
    if exact:
        if not p.exact:
            raise ValidationError("exact mixed form requires an exact oracle")
        vecs = [[to_fraction(v) for v in vec] for vec in vectors]
        total = Fraction(0)
        for signs in itertools.product((1, -1), repeat=n):
            point = [sum((s * vec[j] for s, vec in zip(signs, vecs)), Fraction(0)) for j in range(p.num_vars)]
            total += math.prod(signs) * p.evaluate_exact(point)
        return total / 2**n
    X = np.asarray(vectors, dtype=float).reshape(n, p.num_vars)
    if n == 0:
        return float(p.evaluate(np.zeros(p.num_vars)))
    if p.is_zero:
        return 0.0
    if isinstance(p, MultilinearOracle):
        return kernels.multilinear_polarization(np.ascontiguousarray(p.matrix.entries), np.ascontiguousarray(X))
    total = 1 << n
    acc = np.longdouble(0.0)
    shifts = np.arange(n, dtype=np.int64)
    for start in range(0, total, _BATCH):
        idx = np.arange(start, min(total, start + _BATCH), dtype=np.int64)
        b = 1 - 2 * ((idx[:, None] >> shifts) & 1)
        vals = p.evaluate_batch(b @ X)
        acc += np.sum(np.prod(b, axis=1).astype(np.longdouble) * vals.astype(np.longdouble))
    return float(acc / total)


def _is_zero_oracle(p: PolynomialOracle, reference: float) -> bool:
    ones = np.ones(p.num_vars)
    if p.exact:
        return p.evaluate_exact([Fraction(1)] * p.num_vars) == 0
    return abs(p.evaluate(ones)) <= 1e-13 * max(abs(reference), 1e-300)


class PartialOracle(PolynomialOracle):
    """p_{x_i}(x without x_i) = d/dx_i p at x_i = 0, read off a univariate interpolant."""

    provenance = "derivative"

    def __init__(self, base: PolynomialOracle, index: int):
        super().__init__(base.num_vars - 1, base.degree - 1)
        self.base = base
        self.index = index
        self.exact = base.exact

    def _lift(self, y, t):
        return np.insert(np.asarray(y, dtype=float), self.index, t)

    def _points(self, y):
        hi = 2.0 * (float(np.max(np.abs(y))) if len(y) else 0.0) + 1.0
        nodes = chebyshev_nodes(0.0, hi, self.base.degree + 1)
        pts = np.repeat(np.asarray(y, dtype=float)[None, :], len(nodes), axis=0)
        pts = np.insert(pts, self.index, nodes, axis=1)
        return pts, hi

    def evaluate(self, y):
        y = self._check(y)
        pts, hi = self._points(y)
        return derivative_at(self.base.evaluate_batch(pts), 0.0, hi, 0.0)

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        allpts, his = [], []
        for y in points:
            pts, hi = self._points(y)
            allpts.append(pts)
            his.append(hi)
        if not allpts:
            return np.zeros(0)
        vals = self.base.evaluate_batch(np.vstack(allpts)).reshape(len(points), -1)
        return np.array([derivative_at(v, 0.0, hi, 0.0) for v, hi in zip(vals, his)])

    def evaluate_exact(self, y):
        y = [to_fraction(v) for v in y]
        nodes = list(range(self.base.degree + 1))
        vals = [self.base.evaluate_exact(y[: self.index] + [Fraction(t)] + y[self.index:]) for t in nodes]
        return exact_coefficients(nodes, vals)[1]


def partial_at_zero(p: PolynomialOracle, i: int) -> PolynomialOracle:
    """The operator p -> p_{x_i}: differentiate in x_i, then set x_i = 0 (0-based ``i``)."""
    if not 0 <= i < p.num_vars:
        raise ValidationError(f"index {i} out of range for {p.num_vars} variables")
    if p.degree < 1:
        raise ValidationError("cannot differentiate a constant")
    if p.is_zero:
        return ZeroOracle(p.num_vars - 1, p.degree - 1)
    q = PartialOracle(p, i)
    if _is_zero_oracle(q, p.evaluate(np.ones(p.num_vars))):
        return ZeroOracle(q.num_vars, q.degree)
    return q


class DerivativeOracle(PolynomialOracle):
    """p_k(y) = d^k/dx_1...dx_k p(0, ..., 0, y).

    F(eps) = 2^-k sum_b prod(b) p(eps*b, y) only keeps monomials whose first
    k exponents are all odd, so its eps^k coefficient is p_k(y).  That
    coefficient is read off an interpolant in eps.
    """

    provenance = "derivative"

    def __init__(self, base: PolynomialOracle, k: int):
        super().__init__(base.num_vars - k, base.degree - k)
        self.base = base
        self.k = k
        self.exact = base.exact
        shifts = np.arange(k, dtype=np.int64)
        idx = np.arange(1 << k, dtype=np.int64)
        self._signs = (1 - 2 * ((idx[:, None] >> shifts) & 1)).astype(float)
        self._parity = np.prod(self._signs, axis=1)

    def _values(self, y):
        h = (float(np.max(np.abs(y))) if len(y) else 0.0) + 1.0
        nodes = chebyshev_nodes(-h, h, self.base.degree + 1)
        blocks = []
        for eps in nodes:
            head = eps * self._signs
            tail = np.repeat(np.asarray(y, dtype=float)[None, :], head.shape[0], axis=0)
            blocks.append(np.hstack([head, tail]))
        vals = self.base.evaluate_batch(np.vstack(blocks)).reshape(len(nodes), -1)
        fvals = (vals * self._parity[None, :]).sum(axis=1) / (1 << self.k)
        return fvals, h

    def evaluate(self, y):
        y = self._check(y)
        fvals, h = self._values(y)
        return float(power_coefficients(fvals, -h, h)[self.k])

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        return np.array([self.evaluate(y) for y in points])

    def evaluate_exact(self, y):
        y = [to_fraction(v) for v in y]
        nodes = list(range(self.base.degree + 1))
        vals = []
        for eps in nodes:
            total = Fraction(0)
            for signs in itertools.product((1, -1), repeat=self.k):
                total += math.prod(signs) * self.base.evaluate_exact([Fraction(eps * s) for s in signs] + y)
            vals.append(total / 2**self.k)
        return exact_coefficients(nodes, vals)[self.k]


def derivative_oracle(p: PolynomialOracle, k: int, *, budget: int = DERIVATIVE_BUDGET) -> PolynomialOracle:
    """Oracle for p_k(x_{k+1}, ..., x_n) = d^k/dx_1...dx_k p(0, ..., 0, x_{k+1}, ..., x_n)."""
    if not 0 <= k <= min(p.num_vars, p.degree):
        raise ValidationError(f"k={k} out of range")
    if k == 0:
        return p
    cost = (1 << k) * (p.degree + 1)
    if cost > budget:
        raise BudgetError(f"derivative oracle needs {cost} base evaluations per call (budget {budget})")
    if p.is_zero:
        return ZeroOracle(p.num_vars - k, p.degree - k)
    q = DerivativeOracle(p, k)
    if _is_zero_oracle(q, p.evaluate(np.ones(p.num_vars))):
        return ZeroOracle(q.num_vars, q.degree)
    return q


class CombinationOracle(PolynomialOracle):
    """Nonnegative combination sum_j w_j q_j of oracles of equal shape."""

    def __init__(self, weights, oracles, provenance="laplace-hybrid"):
        oracles = list(oracles)
        if not oracles:
            raise ValidationError("empty combination")
        super().__init__(oracles[0].num_vars, oracles[0].degree)
        for q in oracles:
            if (q.num_vars, q.degree) != (self.num_vars, self.degree):
                raise ValidationError("combined oracles must share shape")
        self.weights = [to_fraction(w) for w in weights]
        self._fw = np.array([float(w) for w in self.weights])
        self.oracles = oracles
        self.exact = all(q.exact for q in oracles)
        self.provenance = provenance

    def evaluate(self, x):
        x = self._check(x)
        return float(sum(w * q.evaluate(x) for w, q in zip(self._fw, self.oracles)))

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        return sum(w * q.evaluate_batch(points) for w, q in zip(self._fw, self.oracles))

    def evaluate_exact(self, x):
        return sum((w * q.evaluate_exact(x) for w, q in zip(self.weights, self.oracles)), Fraction(0))


def laplace_hybrid(A, S: Iterable[int], *, budget: int = 10**6) -> PolynomialOracle:
    """sum_{|T| = |S|} per(A[S, T]) * Mul_{A[S', T']}.

    ``S`` is a set of 0-based rows.  Each Mul term lives in n - |S|
    variables indexed positionally by the sorted complementary columns, so
    the mixed-derivative coefficient of the result equals per(A).
    """
    from .exact import permanent_exact

    if not isinstance(A, NonnegativeMatrix):
        A = NonnegativeMatrix(A)
    S = sorted(set(int(s) for s in S))
    n = A.n
    if any(not 0 <= s < n for s in S):
        raise ValidationError("row index out of range")
    if not S:
        return MultilinearOracle(A)
    s = len(S)
    count = math.comb(n, s)
    if s > 20 or count > budget:
        raise BudgetError(f"Laplace expansion needs {count} minors of size {s} (budget {budget})")
    rest = [i for i in range(n) if i not in S]
    weights, oracles = [], []
    for T in itertools.combinations(range(n), s):
        w = permanent_exact(A.submatrix(S, T, allow_zero_rows=True), exact=True).value
        if w == 0:
            continue
        cols = [j for j in range(n) if j not in T]
        if s == n:
            weights.append(w)
            oracles.append(FunctionOracle(lambda x: 1.0, 0, 0, exact_func=lambda x: Fraction(1)))
            continue
        sub = A.submatrix(rest, cols, allow_zero_rows=True)
        if any(sum(r) == 0 for r in sub.exact):
            continue
        weights.append(w)
        oracles.append(MultilinearOracle(sub))
    if not oracles:
        return ZeroOracle(n - s, n - s, provenance="laplace-hybrid")
    return CombinationOracle(weights, oracles, provenance="laplace-hybrid")


class ScaledOracle(PolynomialOracle):
    """x -> p(beta * x) / normaliser."""

    provenance = "scaled"

    def __init__(self, base: PolynomialOracle, beta, normaliser: float):
        super().__init__(base.num_vars, base.degree)
        self.base = base
        self.beta = np.asarray(beta, dtype=float)
        self.normaliser = float(normaliser)
        self.exact = base.exact

    def evaluate(self, x):
        return self.base.evaluate(self.beta * self._check(x)) / self.normaliser

    def evaluate_batch(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.num_vars)
        return self.base.evaluate_batch(points * self.beta[None, :]) / self.normaliser

    def evaluate_exact(self, x):
        b = [to_fraction(v) for v in self.beta]
        return self.base.evaluate_exact([bi * to_fraction(xi) for bi, xi in zip(b, x)]) / to_fraction(self.normaliser)


# ---------------------------------------------------------------------------
# first derivatives


def stable_spread(p: PolynomialOracle) -> float:
    """Trusted log-coordinate spread of p, inherited through derived oracles."""
    own = p.stable_spread
    for q in [getattr(p, "base", None), *getattr(p, "oracles", ())]:
        if q is not None:
            own = min(own, stable_spread(q))
    return own


def gradient(p: PolynomialOracle, x) -> np.ndarray:
    """Gradient of p at x; each component from one univariate interpolant."""
    x = np.asarray(x, dtype=float)
    n = p.num_vars
    h = max(1.0, float(np.max(np.abs(x))) if n else 1.0)
    nodes = chebyshev_nodes(-h, h, p.degree + 1)
    pts = np.repeat(x[None, None, :], n, axis=0).repeat(len(nodes), axis=1)
    for i in range(n):
        pts[i, :, i] += nodes
    vals = p.evaluate_batch(pts.reshape(-1, n)).reshape(n, len(nodes))
    return np.array([derivative_at(vals[i], -h, h, 0.0) for i in range(n)])


def log_gradient(p: PolynomialOracle, x) -> tuple[float, np.ndarray]:
    """(p(x), [x_i * dp/dx_i(x)]) for positive x, via s -> p(x with x_i scaled by s)."""
    x = np.asarray(x, dtype=float)
    n = p.num_vars
    nodes = chebyshev_nodes(0.0, 2.0, p.degree + 1)
    pts = np.repeat(x[None, None, :], n, axis=0).repeat(len(nodes), axis=1)
    for i in range(n):
        pts[i, :, i] = x[i] * nodes
    flat = np.vstack([pts.reshape(-1, n), x[None, :]])
    vals = p.evaluate_batch(flat)
    value = float(vals[-1])
    vals = vals[:-1].reshape(n, len(nodes))
    return value, np.array([derivative_at(vals[i], 0.0, 2.0, 1.0) for i in range(n)])
