"""The g function, van der Waerden type factors, and certified coefficient brackets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Real

import numpy as np

from .errors import ValidationError
from .polynomials import NonnegativeMatrix, PolynomialOracle, build_multilinear

EXHAUSTIVE_ORDERING_CAP = 8


def g(k):
    """((k - 1)/k)^(k - 1), with g(0) = g(1) = 1.  Exact for integers."""
    if isinstance(k, bool) or not isinstance(k, Real):
        raise ValidationError(f"g needs a real argument, got {k!r}")
    if k < 0:
        raise ValidationError(f"g is undefined for negative k ({k})")
    if isinstance(k, Integral) or (isinstance(k, Fraction) and k.denominator == 1):
        k = int(k)
        if k <= 1:
            return Fraction(1)
        return Fraction(k - 1, k) ** (k - 1)
    k = float(k)
    if k < 1:
        raise ValidationError("g is defined on integers 0, 1 and reals >= 1")
    return ((k - 1) / k) ** (k - 1)


def vdw_factor(n: int) -> Fraction:
    """n!/n^n."""
    if n < 1:
        raise ValidationError("n must be positive")
    return Fraction(math.factorial(n), n**n)


def _factor_for(S, order):
    n = len(S)
    prod = Fraction(1)
    for pos, var in enumerate(order):
        prod *= g(min(S[var], n - pos))
    return prod


def generalized_factor(S, ordering="best"):
    """(prod_i g(min(S_sigma(i), n + 1 - i)), sigma).

    ``ordering`` is a permutation (0-based), "identity", or "best".  The best
    ordering is found exhaustively for n <= 8; beyond that the variables are
    sorted by increasing S (and the identity is kept if it happens to be
    better).
    """
    S = [int(s) for s in S]
    n = len(S)
    if n == 0:
        raise ValidationError("need at least one support degree")
    if any(not 1 <= s <= n for s in S):
        raise ValidationError(f"support degrees must lie in [1, {n}], got {S}")
    identity = tuple(range(n))
    if ordering == "identity":
        return _factor_for(S, identity), identity
    if ordering == "best":
        if n <= EXHAUSTIVE_ORDERING_CAP:
            logg = {k: math.log(float(g(k))) for k in range(n + 1)}
            best, best_val = identity, -math.inf
            seen = set()
            for perm in itertools.permutations(range(n)):
                key = tuple(S[v] for v in perm)
                if key in seen:
                    continue
                seen.add(key)
                val = sum(logg[min(S[v], n - pos)] for pos, v in enumerate(perm))
                if val > best_val + 1e-15:
                    best, best_val = perm, val
            return _factor_for(S, best), tuple(best)
        greedy = tuple(sorted(range(n), key=lambda v: (S[v], v)))
        fg, fi = _factor_for(S, greedy), _factor_for(S, identity)
        return (fg, greedy) if fg >= fi else (fi, identity)
    order = tuple(int(v) for v in ordering)
    if sorted(order) != list(range(n)):
        raise ValidationError(f"ordering must be a permutation of 0..{n - 1}")
    return _factor_for(S, order), order


def uniform_factor(k: int, n: int) -> Fraction:
    """g(k)^(n-k) k!/k^k, the factor when every S_p({i}) equals k."""
    if not 1 <= k <= n:
        raise ValidationError("need 1 <= k <= n")
    return g(k) ** (n - k) * vdw_factor(k)


def schrijver_comparison(k: int, n: int) -> tuple[Fraction, Fraction]:
    """(g(k)^(n-k) k!/k^k, g(k)^n); the first is never smaller."""
    ours, classic = uniform_factor(k, n), g(k) ** n
    if ours < classic:
        raise AssertionError(f"factor {ours} below classic {classic} at k={k}, n={n}")
    return ours, classic


def _formula_tag(S, n):
    if all(s == n for s in S):
        return "vdw"
    if len(set(S)) == 1:
        return "uniform"
    return "support-degrees"


@dataclass
class BoundReport:
    coefficient_lower: float
    coefficient_upper: float
    factor: Fraction
    ordering: tuple
    formula: str
    degrees: list = field(default_factory=list)
    identity_factor: Fraction | None = None
    capacity: object = None

    def to_dict(self) -> dict:
        return {
            "coefficient_lower": self.coefficient_lower,
            "coefficient_upper": self.coefficient_upper,
            "factor": float(self.factor),
            "factor_exact": str(self.factor),
            "identity_factor": float(self.identity_factor) if self.identity_factor is not None else None,
            "ordering": list(self.ordering),
            "formula": self.formula,
            "degrees": list(self.degrees),
            "capacity": self.capacity.to_dict() if self.capacity is not None else None,
        }


def _report(S, cap, ordering):
    n = len(S)
    factor, order = generalized_factor(S, ordering)
    ident, _ = generalized_factor(S, "identity")
    return BoundReport(
        coefficient_lower=float(factor) * cap.cap_lower,
        coefficient_upper=cap.cap_estimate,
        factor=factor,
        ordering=order,
        formula=_formula_tag(S, n),
        degrees=list(S),
        identity_factor=ident,
        capacity=cap,
    )


def permanent_lower_bound(A, ordering="best", *, tol: float = 1e-8) -> BoundReport:
    """Bracket per(A) between factor * Cap_lower and the capacity estimate.

    The support degrees of Mul_A are the column counts of nonzero entries.
    """
    from .capacity import capacity

    if not isinstance(A, NonnegativeMatrix):
        A = NonnegativeMatrix(A)
    counts = [int(c) for c in np.count_nonzero(A.entries, axis=0)]
    if min(counts) == 0:
        zero = Fraction(0)
        return BoundReport(0.0, 0.0, zero, tuple(range(A.n)), "zero-column", counts, zero, None)
    cap = capacity(build_multilinear(A), tol)
    return _report(counts, cap, ordering)


def coefficient_bounds(p: PolynomialOracle, ordering="best", *, tol: float = 1e-8) -> BoundReport:
    """Same bracket for any polynomial in Hom+(n, n), with S_p({i}) from the structure module."""
    from .capacity import capacity
    from .structure import SupportFunction

    sf = SupportFunction.from_oracle(p)
    S = [sf.value([i]) for i in range(p.num_vars)]
    if min(S) == 0:
        zero = Fraction(0)
        return BoundReport(0.0, 0.0, zero, tuple(range(p.num_vars)), "missing-variable", S, zero, None)
    return _report(S, capacity(p, tol), ordering)
