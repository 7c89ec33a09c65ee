"""Support degrees S_p(A), submodularity, support / Newton polytope membership,
indecomposability and block decomposition.

Subsets are 0-based index collections; internally they are bitmasks with
bit i standing for variable i.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BudgetError, ValidationError
from .interpolation import (
    chebyshev_nodes,
    detect_degree,
    exact_coefficients,
    lowest_order,
    power_coefficients,
)
from .polynomials import PolynomialOracle, ZeroOracle, mixed_form

SUBSET_CAP = 20
DEG_TOL = 1e-9
RANK_TOL = 1e-8
POLY_TOL = 1e-9


def mask_of(A, n: int) -> int:
    mask = 0
    for i in A:
        i = int(i)
        if not 0 <= i < n:
            raise ValidationError(f"index {i} out of range for {n} variables")
        mask |= 1 << i
    return mask


def members(mask: int) -> tuple:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc += (masks >> i) & 1
    return pc


def _restriction_points(n, masks, nodes):
    """Rows 1 + t * 1_A for every mask and node, mask-major."""
    masks = np.asarray(masks, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    return 1.0 + bits[:, None, :] * np.asarray(nodes, dtype=float)[None, :, None]


def _degrees_float(p: PolynomialOracle, masks) -> list[int]:
    n, d = p.num_vars, p.degree
    lo, hi = 0.0, 3.0
    nodes = chebyshev_nodes(lo, hi, d + 1)
    out = []
    step = max(1, (1 << 16) // (d + 1))
    for start in range(0, len(masks), step):
        chunk = masks[start:start + step]
        pts = _restriction_points(n, chunk, nodes).reshape(-1, n)
        vals = p.evaluate_batch(pts).reshape(len(chunk), d + 1)
        for row in vals:
            out.append(detect_degree(power_coefficients(row, lo, hi), DEG_TOL))
    return out


def _degree_exact(p: PolynomialOracle, mask: int) -> int:
    n, d = p.num_vars, p.degree
    bits = [mask >> i & 1 for i in range(n)]
    nodes = list(range(d + 1))
    vals = [p.evaluate_exact([Fraction(1 + t * b) for b in bits]) for t in nodes]
    return detect_degree(exact_coefficients(nodes, vals))


class SupportFunction:
    """S(A) for subsets of {0, ..., n-1}, filled lazily from an oracle or given outright.

    ``values`` may be a dict mask -> int or a callable on a tuple of indices.
    """

    def __init__(self, n: int, values=None, *, oracle: PolynomialOracle | None = None,
                 exact: bool | None = None):
        self.n = int(n)
        self._oracle = oracle
        self._cache: dict[int, int] = {}
        self._lock = threading.Lock()
        self._func = None
        if callable(values):
            self._func = values
        elif values is not None:
            self._cache.update({int(k): int(v) for k, v in values.items()})
        if oracle is not None:
            self.exact = bool(oracle.exact) if exact is None else bool(exact)
        else:
            self.exact = True

    @classmethod
    def from_oracle(cls, p: PolynomialOracle, *, exact: bool | None = None) -> "SupportFunction":
        if isinstance(p, ZeroOracle) or p.is_zero:
            raise ValidationError("support function of the zero polynomial is undefined")
        sf = cls(p.num_vars, oracle=p, exact=exact)
        if sf.value_mask((1 << p.num_vars) - 1) < 0:
            raise ValidationError("polynomial interpolates to zero")
        return sf

    def _compute(self, masks):
        if self._func is not None:
            return [int(self._func(members(m))) for m in masks]
        if self._oracle is None:
            raise KeyError(f"no value for subsets {masks[:3]}...")
        if self.exact:
            return [_degree_exact(self._oracle, m) for m in masks]
        return _degrees_float(self._oracle, masks)

    def value_mask(self, mask: int) -> int:
        if mask == 0:
            return 0
        hit = self._cache.get(mask)
        if hit is not None:
            return hit
        val = self._compute([mask])[0]
        with self._lock:
            self._cache.setdefault(mask, val)
        return val

    def value(self, A) -> int:
        return self.value_mask(mask_of(A, self.n))

    __call__ = value

    def all_values(self) -> np.ndarray:
        """int64 array indexed by mask."""
        if self.n > SUBSET_CAP:
            raise BudgetError(f"enumerating all subsets limited to n <= {SUBSET_CAP}")
        missing = [m for m in range(1, 1 << self.n) if m not in self._cache]
        if missing:
            vals = self._compute(missing)
            with self._lock:
                for m, v in zip(missing, vals):
                    self._cache.setdefault(m, v)
        out = np.zeros(1 << self.n, dtype=np.int64)
        for m in range(1, 1 << self.n):
            out[m] = self._cache[m]
        return out


def support_degree(p: PolynomialOracle, A) -> int:
    """Degree in t of p(1 + t 1_A)."""
    mask = mask_of(A, p.num_vars)
    if mask == 0:
        return 0
    d = _degree_exact(p, mask) if p.exact else _degrees_float(p, [mask])[0]
    if d < 0:
        raise ValidationError("restriction interpolates to the zero polynomial")
    return d


def _is_indicator(X) -> bool:
    return all(v == 0 or v == 1 for v in X)


def rank(p: PolynomialOracle, X, *, check: bool = True) -> int:
    """Number of nonzero roots of t -> p(X - t 1).

    Indicator vectors take the support-degree path.  Otherwise the count is
    n minus the order of vanishing at t = 0 of the restriction.
    """
    from .hyperbolicity import restriction_roots

    X = list(X)
    if len(X) != p.num_vars:
        raise ValidationError(f"expected {p.num_vars} coordinates")
    if _is_indicator(X):
        return support_degree(p, [i for i, v in enumerate(X) if v == 1])
    rep = restriction_roots(p, X)
    if check and not rep.real_rooted:
        raise ValidationError(f"restriction at {X} has non-real roots: hyperbolicity violated")
    order = lowest_order(rep.coefficients, RANK_TOL)
    if order < 0:
        return 0
    return p.degree - order


@dataclass
class Verdict:
    holds: bool
    witness: object = None
    probabilistic: bool = False
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, tuple) and w and isinstance(w[0], tuple):
            w = [list(x) for x in w]
        elif isinstance(w, tuple):
            w = list(w)
        return {"holds": self.holds, "witness": w, "probabilistic": self.probabilistic, **self.details}


def is_submodular(S: SupportFunction, *, samples: int = 20000, seed: int = 0) -> Verdict:
    """Check S(C+i) + S(C+j) >= S(C+i+j) + S(C) for all C, i, j outside C.

    These local inequalities are equivalent to submodularity.  The witness
    (A, B) = (C+i, C+j) comes from the smallest union, then smallest (i, j).
    Beyond n = 20 random triples are sampled and the verdict is flagged.
    """
    n = S.n
    if n <= SUBSET_CAP:
        u, i, j = kernels.submodular_violation(S.all_values(), n)
        if u < 0:
            return Verdict(True)
        c = u & ~(1 << i) & ~(1 << j)
        return Verdict(False, (members(c | 1 << i), members(c | 1 << j)))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        i, j = sorted(int(v) for v in rng.choice(n, 2, replace=False))
        c = int(sum(1 << k for k in range(n) if rng.random() < 0.5 and k not in (i, j)))
        a, b = c | 1 << i, c | 1 << j
        if S.value_mask(a) + S.value_mask(b) < S.value_mask(a | b) + S.value_mask(c):
            return Verdict(False, (members(a), members(b)), probabilistic=True)
    return Verdict(True, probabilistic=True)


def _support_values(p_or_S) -> SupportFunction:
    if isinstance(p_or_S, SupportFunction):
        return p_or_S
    return SupportFunction.from_oracle(p_or_S)


def in_support(p, r, *, S: SupportFunction | None = None) -> Verdict:
    """r is in the support iff r(A) <= S_p(A) for every subset A."""
    S = S or _support_values(p)
    n = S.n
    if len(r) != n:
        raise ValidationError(f"expected {n} exponents")
    if any(int(v) != v or v < 0 for v in r):
        raise ValidationError("exponents must be nonnegative integers")
    if sum(r) != n:
        raise ValidationError(f"exponents must sum to {n}, got {sum(r)}")
    if n > SUBSET_CAP:
        raise BudgetError(f"support membership limited to n <= {SUBSET_CAP}")
    gap, mask = kernels.subset_min_gap(S.all_values(), np.asarray(r, dtype=float))
    if gap >= -0.5:
        return Verdict(True)
    return Verdict(False, members(mask), details={"gap": gap})


def in_newton_polytope(p, x, *, tol: float = POLY_TOL, S: SupportFunction | None = None) -> Verdict:
    """min over subsets of S_p(A) - x(A) >= -tol."""
    S = S or _support_values(p)
    n = S.n
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise ValidationError(f"expected {n} coordinates")
    if np.any(x < -1e-12):
        raise ValidationError("point must be nonnegative")
    if abs(float(x.sum()) - n) > 1e-9:
        raise ValidationError(f"coordinates must sum to {n} (got {float(x.sum())})")
    if n > SUBSET_CAP:
        raise BudgetError(f"Newton polytope membership limited to n <= {SUBSET_CAP}")
    gap, mask = kernels.subset_min_gap(S.all_values(), x)
    if gap >= -tol:
        return Verdict(True, details={"min_gap": gap})
    return Verdict(False, members(mask), details={"min_gap": gap})


def _swap_vectors(n, i, j):
    """e with e_i doubled and e_j dropped, as a list of n basis vectors."""
    eye = np.eye(n)
    idx = [k for k in range(n) if k != j] + [i]
    return [eye[k] for k in sorted(idx)]


def _condition_one(p: PolynomialOracle, pairs) -> tuple[bool, tuple | None]:
    n = p.num_vars
    ref = abs(float(p.evaluate(np.ones(n))))
    for i, j in pairs:
        vecs = _swap_vectors(n, i, j)
        if p.exact:
            val = mixed_form(p, vecs, exact=True)
            ok = val > 0
        else:
            val = mixed_form(p, vecs)
            ok = val > 1e-9 * ref
        if not ok:
            return False, (i, j)
    return True, None


def is_indecomposable(p: PolynomialOracle, *, cross_check: bool = True, samples: int = 200,
                      seed: int = 0) -> Verdict:
    """Indecomposable iff S_p(A) > |A| for every proper nonempty A.

    For n <= 10 the equivalent coefficient condition (every monomial
    x_1...x_n * x_i / x_j present) is also evaluated and reported.  Beyond
    n = 20 only sampled pairs of the coefficient condition are checked.
    """
    n = p.num_vars
    if p.degree != n:
        raise ValidationError("indecomposability needs degree == number of variables")
    if n <= 1:
        return Verdict(True)
    if n > SUBSET_CAP:
        if n > 22:
            raise BudgetError("indecomposability limited to n <= 22")
        rng = np.random.default_rng(seed)
        pairs = [tuple(rng.choice(n, 2, replace=False)) for _ in range(samples)]
        ok, pair = _condition_one(p, pairs)
        return Verdict(ok, None if ok else {"pair": [int(v) for v in pair]}, probabilistic=True)
    S = SupportFunction.from_oracle(p)
    vals = S.all_values()
    pc = _popcounts(n)
    bad = np.nonzero(vals[1:-1] <= pc[1:-1])[0]
    witness = members(int(bad[0]) + 1) if bad.size else None
    verdict = Verdict(witness is None, witness)
    if cross_check and n <= 10:
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        ok, pair = _condition_one(p, pairs)
        verdict.details["coefficient_condition"] = ok
        verdict.details["conditions_agree"] = ok == verdict.holds
        if pair is not None:
            verdict.details["missing_pair"] = list(pair)
    return verdict


@dataclass
class Decomposition:
    block: tuple
    complement: tuple
    verified: bool
    max_rel_error: float
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "block": list(self.block),
            "complement": list(self.complement),
            "verified": self.verified,
            "max_rel_error": self.max_rel_error,
            "message": self.message,
        }


def detect_decomposition(p: PolynomialOracle, *, points: int = 20, seed: int = 0,
                         rel_tol: float = 1e-8) -> Decomposition | None:
    """Find A with S_p(A) = |A| and check p(x) = p(x_A, 1) p(1, x_A') / p(1).

    Among all such blocks the one with |A| closest to n/2 is reported (ties
    by smallest bitmask).
    """
    n = p.num_vars
    if n <= 1:
        return None
    S = SupportFunction.from_oracle(p)
    vals = S.all_values()
    pc = _popcounts(n)
    cand = [m for m in range(1, (1 << n) - 1) if vals[m] == pc[m]]
    if not cand:
        return None
    best = min(cand, key=lambda m: (abs(2 * int(pc[m]) - n), m))
    block = members(best)
    comp = tuple(i for i in range(n) if i not in block)
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.2, 2.0, size=(points, n))
    inA = np.zeros(n, dtype=bool)
    inA[list(block)] = True
    X1 = np.where(inA, X, 1.0)
    X2 = np.where(inA, 1.0, X)
    full = p.evaluate_batch(X)
    q1 = p.evaluate_batch(X1)
    q2 = p.evaluate_batch(X2)
    at_ones = float(p.evaluate(np.ones(n)))
    err = float(np.max(np.abs(full - q1 * q2 / at_ones) / np.abs(full)))
    ok = err <= rel_tol
    msg = "factorization verified" if ok else "rank-deficient but factorization unverified"
    return Decomposition(block, comp, ok, err, msg)
