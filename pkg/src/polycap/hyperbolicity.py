"""Restriction roots, sampled POS-hyperbolicity, Newton and Alexandrov-Fenchel checks.

Every sampled verdict is evidence only.  Sample i of a run with seed s
draws from ``numpy.random.default_rng(s ^ i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .bounds import g
from .errors import ValidationError
from .interpolation import (
    chebyshev_nodes,
    detect_degree,
    exact_coefficients,
    lowest_order,
    power_coefficients,
)
from .polynomials import PolynomialOracle, mixed_form, to_fraction

ROOT_IM_TOL = 1e-7
RECON_TOL = 1e-7
NONNEG_TOL = 1e-7
ZERO_COEF_TOL = 1e-13
INEQ_TOL = 1e-9


# --- exact univariate helpers ------------------------------------------------

def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _polydiv(a, b):
    """Quotient and remainder of ascending Fraction polynomials."""
    a, b = _trim(a), _trim(b)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = a[:]
    while len(r) >= len(b) and r:
        k = len(r) - len(b)
        f = r[-1] / b[-1]
        q[k] = f
        for i, bv in enumerate(b):
            r[i + k] -= f * bv
        r = _trim(r)
    return _trim(q), r


def _derivative(c):
    return [i * c[i] for i in range(1, len(c))]


def _gcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _polydiv(a, b)
        a, b = b, r
    return a


def squarefree_part(coeffs):
    c = _trim([Fraction(v) for v in coeffs])
    if len(c) <= 1:
        return c
    q, _ = _polydiv(c, _gcd(c, _derivative(c)))
    return q


def sturm_real_root_count(coeffs) -> int:
    """Number of distinct real roots of an exact polynomial."""
    p = squarefree_part(coeffs)
    if len(p) <= 1:
        return 0
    seq = [p, _derivative(p)]
    while True:
        _, r = _polydiv(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-v for v in r])

    def changes(at_pos_inf):
        signs = []
        for s in seq:
            lead = s[-1]
            deg = len(s) - 1
            sign = 1 if lead > 0 else -1
            if not at_pos_inf and deg % 2:
                sign = -sign
            signs.append(sign)
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    return changes(False) - changes(True)


def exact_all_real(coeffs) -> bool:
    p = squarefree_part(coeffs)
    return sturm_real_root_count(p) == len(p) - 1


# --- roots ---------------------------------------------------------------------

@dataclass
class RootReport:
    coefficients: list
    roots: np.ndarray
    max_imag: float
    all_real: bool
    all_nonneg: bool
    degree: int
    method: str = "companion"

    @property
    def real_rooted(self) -> bool:
        return self.all_real

    @property
    def is_zero(self) -> bool:
        return self.degree < 0

    def to_dict(self) -> dict:
        return {
            "coefficients": [float(c) for c in self.coefficients],
            "roots_re": [float(z.real) for z in self.roots],
            "roots_im": [float(z.imag) for z in self.roots],
            "max_imag": self.max_imag,
            "all_real": self.all_real,
            "all_nonneg": self.all_nonneg,
            "degree": self.degree,
            "method": self.method,
        }


def _aberth_pass(desc, z):
    dp = np.polyder(desc)
    pz = np.polyval(desc, z)
    dpz = np.polyval(dp, z)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, np.inf)
        s = (1.0 / diff).sum(axis=1)
        znew = z - ratio / (1.0 - ratio * s)
        better = np.isfinite(znew) & (np.abs(np.polyval(desc, znew)) <= np.abs(pz))
    return np.where(better, znew, z)


def _clusters(z, tau):
    m = len(z)
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(m):
        for j in range(i + 1, m):
            if abs(z[i] - z[j]) <= tau:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _polish_multiple(desc, c, mult):
    """A root of multiplicity m is a simple root of the (m-1)-th derivative."""
    if mult < 2:
        return c
    d = np.polyder(desc, mult - 1)
    dd = np.polyder(d)
    for _ in range(8):
        slope = np.polyval(dd, c)
        if slope == 0:
            break
        step = np.polyval(d, c) / slope
        if not np.isfinite(step) or abs(step) > 1e-2 * (1 + abs(c)):
            break
        c = c - step
    return c


def _cluster_real(desc, z, scale):
    """Real root list when clustering explains the polynomial, else None."""
    top = np.max(np.abs(desc))
    for rel in (1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1):
        groups = _clusters(z, rel * scale)
        if len(groups) == len(z):
            continue
        cents = [(np.mean(z[gr]), len(gr)) for gr in groups]
        if any(abs(c.imag) > ROOT_IM_TOL * scale for c, _ in cents):
            continue
        cents = [(_polish_multiple(desc, c.real, mult), mult) for c, mult in cents]
        real = np.concatenate([np.full(mult, c) for c, mult in cents])
        recon = desc[0] * np.poly(real)
        if np.max(np.abs(recon - desc)) <= RECON_TOL * top:
            return np.sort(real)
    return None


def analyse_coefficients(coeffs, exact_coeffs=None) -> RootReport:
    """Roots and real-rootedness of an ascending coefficient vector."""
    coeffs_f = np.asarray([float(c) for c in coeffs], dtype=float)
    deg = detect_degree(exact_coeffs if exact_coeffs is not None else list(coeffs_f), 1e-9)
    shown = exact_coeffs if exact_coeffs is not None else list(coeffs_f)
    if deg < 0:
        return RootReport(shown, np.zeros(0, complex), 0.0, True, True, -1, "zero")
    if deg == 0:
        return RootReport(shown, np.zeros(0, complex), 0.0, True, True, 0)
    # roots at zero are split off first: interpolation noise in the low
    # coefficients would otherwise scatter a multiple zero root by eps^(1/m)
    if exact_coeffs is not None:
        low = lowest_order(exact_coeffs[: deg + 1])
    else:
        low = lowest_order(coeffs_f[: deg + 1], ZERO_COEF_TOL)
    reduced = coeffs_f[low: deg + 1][::-1].copy()
    z = _aberth_pass(reduced, np.roots(reduced).astype(complex))
    z = np.concatenate([z, np.zeros(low, complex)])
    desc = coeffs_f[: deg + 1][::-1].copy()
    scale = 1.0 + float(np.max(np.abs(z)))
    max_imag = float(np.max(np.abs(z.imag)))
    method = "companion"
    all_real = max_imag <= ROOT_IM_TOL * scale
    if not all_real:
        clustered = _cluster_real(desc, z, scale)
        if clustered is not None:
            z, max_imag, all_real, method = clustered.astype(complex), 0.0, True, "cluster"
    if exact_coeffs is not None and method != "companion":
        all_real = exact_all_real(exact_coeffs[: deg + 1])
        method = "sturm"
    elif exact_coeffs is not None and not all_real:
        all_real = exact_all_real(exact_coeffs[: deg + 1])
        method = "sturm"
    if all_real and method == "sturm" and max_imag > ROOT_IM_TOL * scale:
        clustered = _cluster_real(desc, z, scale)
        if clustered is not None:
            z, max_imag = clustered.astype(complex), 0.0
    z = z[np.argsort(z.real, kind="stable")]
    all_nonneg = bool(all_real and np.all(z.real >= -NONNEG_TOL * scale))
    return RootReport(shown, z, max_imag, bool(all_real), all_nonneg, deg, method)


def _as_rational(vec):
    try:
        return [to_fraction(v) for v in vec]
    except ValidationError:
        return None


def _line_coefficients(p: PolynomialOracle, base, direction, lo, hi):
    """Ascending coefficients of t -> p(base + t * direction), exact when possible."""
    d = p.degree
    if p.exact:
        b, v = _as_rational(base), _as_rational(direction)
        if b is not None and v is not None:
            nodes = list(range(d + 1))
            try:
                vals = [p.evaluate_exact([bi + t * vi for bi, vi in zip(b, v)]) for t in nodes]
                ex = exact_coefficients(nodes, vals)
                return [float(c) for c in ex], ex
            except TypeError:
                pass
    nodes = chebyshev_nodes(lo, hi, d + 1)
    base = np.asarray(base, dtype=float)
    direction = np.asarray(direction, dtype=float)
    vals = p.evaluate_batch(base[None, :] + nodes[:, None] * direction[None, :])
    return list(power_coefficients(vals, lo, hi)), None


def restriction_roots(p: PolynomialOracle, X, e=None) -> RootReport:
    """Roots of t -> p(X - t e); e defaults to the all-ones vector."""
    n = p.num_vars
    X = list(X)
    e = [1] * n if e is None else list(e)
    if len(X) != n or len(e) != n:
        raise ValidationError(f"expected vectors of dimension {n}")
    h = max(1.0, 2.0 * max(abs(float(v)) for v in X) / max(min(abs(float(v)) for v in e) or 1.0, 1e-12))
    neg_e = [-v for v in e]
    coeffs, ex = _line_coefficients(p, X, neg_e, -h, h)
    return analyse_coefficients(coeffs, ex)


@dataclass
class SampledVerdict:
    passed: bool
    trials: int
    seed: int
    counterexample: list | None = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "trials": self.trials,
            "seed": self.seed,
            "counterexample": self.counterexample,
            "reason": self.reason,
            **self.details,
        }


def check_pos_hyperbolic(p: PolynomialOracle, trials: int = 200, seed: int = 42, e=None) -> SampledVerdict:
    """Sampled test: p(e) > 0, real roots along e for Gaussian X,
    nonnegative roots for nonnegative X."""
    n = p.num_vars
    e = np.ones(n) if e is None else np.asarray(e, dtype=float)
    pe = float(p.evaluate(e))
    if not pe > 0:
        return SampledVerdict(False, 0, seed, list(map(float, e)), "p(e) is not positive")
    for i in range(trials):
        rng = np.random.default_rng(seed ^ i)
        X = rng.normal(size=n)
        rep = restriction_roots(p, X, e)
        if not rep.all_real:
            return SampledVerdict(False, i + 1, seed, X.tolist(), "non-real restriction roots",
                                  {"max_imag": rep.max_imag})
        Y = rng.uniform(0.0, 1.0, size=n) * (rng.random(n) < 0.8)
        rep = restriction_roots(p, Y, e)
        if not rep.all_nonneg:
            return SampledVerdict(False, i + 1, seed, Y.tolist(), "negative or non-real root at a nonnegative point")
    return SampledVerdict(True, trials, seed)


@dataclass
class NewtonReport:
    nis_hold: bool
    wnis_hold: bool
    first_violation: int | None
    first_weak_violation: int | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ge(lhs, rhs, tol):
    if isinstance(lhs, Fraction) and isinstance(rhs, Fraction):
        return lhs >= rhs
    return lhs >= rhs - tol * max(abs(lhs), abs(rhs))


def newton_inequalities(coefficients, *, tol: float = INEQ_TOL) -> NewtonReport:
    """NIs: d_i^2 >= d_{i-1} d_{i+1} C(n,i)^2 / (C(n,i-1) C(n,i+1)).
    WNIs: d_i d_0^(i-1) <= (d_1/n)^i C(n,i)."""
    exact = all(isinstance(c, (int, Fraction)) for c in coefficients)
    d = [Fraction(c) for c in coefficients] if exact else [float(c) for c in coefficients]
    n = len(d) - 1
    first = None
    for i in range(1, n):
        w = Fraction(math.comb(n, i) ** 2, math.comb(n, i - 1) * math.comb(n, i + 1))
        rhs = d[i - 1] * d[i + 1] * (w if exact else float(w))
        if not _ge(d[i] * d[i], rhs, tol):
            first = i
            break
    weak = None
    if n >= 1:
        for i in range(2, n + 1):
            lhs = d[i] * d[0] ** (i - 1)
            rhs = (d[1] / n) ** i * math.comb(n, i)
            if not _ge(rhs, lhs, tol):
                weak = i
                break
    return NewtonReport(first is None, weak is None, first, weak)


@dataclass
class Lemma29Report:
    holds: bool
    applicable: bool
    d1: float
    C: float
    bound: float

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def inf_ratio(coefficients) -> float:
    """inf over t > 0 of R(t)/t for R with nonnegative coefficients d_0..d_n."""
    d = np.asarray([float(c) for c in coefficients], dtype=float)
    if np.any(d < 0):
        raise ValidationError("coefficients must be nonnegative")
    if d[0] == 0 or not np.any(d[2:] > 0):
        return float(d[1]) if d.size > 1 else 0.0
    k = np.arange(d.size)
    pos = d > 0
    logd, kk = np.log(d[pos]), k[pos]

    def h(s):
        v = logd + kk * s
        m = v.max()
        return m + math.log(np.exp(v - m).sum()) - s

    grid = np.linspace(-60.0, 60.0, 2401)
    vals = np.array([h(s) for s in grid])
    j = int(np.argmin(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    res = minimize_scalar(h, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return float(math.exp(min(res.fun, vals[j])))


def lemma29_bound(coefficients, C: float | None = None, *, tol: float = 1e-10) -> Lemma29Report:
    """d_1 >= C ((n-1)/n)^(n-1) when the WNIs hold and R(t) >= C t on t >= 0."""
    n = len(coefficients) - 1
    if n < 1:
        raise ValidationError("need degree >= 1")
    rep = newton_inequalities(coefficients)
    if C is None:
        C = inf_ratio(coefficients)
    d1 = float(coefficients[1])
    bound = C * float(g(n))
    if not rep.wnis_hold:
        return Lemma29Report(False, False, d1, C, bound)
    return Lemma29Report(d1 >= bound - tol * max(1.0, bound), True, d1, C, bound)


def af_inequality_check(p: PolynomialOracle, trials: int = 100, seed: int = 42,
                        *, tol: float = INEQ_TOL) -> SampledVerdict:
    """M(X1, X2, ...)^2 >= M(X1, X1, ...) M(X2, X2, ...) on random nonnegative tuples."""
    n, m = p.degree, p.num_vars
    if n < 2:
        return SampledVerdict(True, 0, seed, reason="degree below 2")
    for i in range(trials):
        rng = np.random.default_rng(seed ^ i)
        X = rng.uniform(0.0, 1.0, size=(n, m))
        rest = list(X[2:])
        m12 = mixed_form(p, [X[0], X[1]] + rest)
        m11 = mixed_form(p, [X[0], X[0]] + rest)
        m22 = mixed_form(p, [X[1], X[1]] + rest)
        lhs, rhs = m12 * m12, m11 * m22
        if lhs < rhs - tol * max(abs(lhs), abs(rhs), 1e-300):
            return SampledVerdict(False, i + 1, seed, X.tolist(), "Alexandrov-Fenchel inequality violated",
                                  {"lhs": lhs, "rhs": rhs})
    return SampledVerdict(True, trials, seed)


def factorization_check_propC1(p: PolynomialOracle, Z, Y) -> SampledVerdict:
    """p(tZ + Y) should have nonnegative coefficients and only real nonpositive roots."""
    Zf = np.asarray(Z, dtype=float)
    Yf = np.asarray(Y, dtype=float)
    if Zf.shape != (p.num_vars,) or Yf.shape != (p.num_vars,):
        raise ValidationError(f"expected vectors of dimension {p.num_vars}")
    if np.any(Zf < 0) or np.any(Yf < 0) or np.any(Zf + Yf <= 0):
        raise ValidationError("Z and Y must be nonnegative with Z + Y positive")
    h = 2.0
    coeffs, ex = _line_coefficients(p, list(Y), list(Z), 0.0, h)
    rep = analyse_coefficients(coeffs, ex)
    cf = np.asarray([float(c) for c in coeffs])
    top = float(np.max(np.abs(cf))) if cf.size else 0.0
    nonneg = bool(np.all(cf >= -1e-9 * top)) if ex is None else all(c >= 0 for c in ex)
    scale = 1.0 + (float(np.max(np.abs(rep.roots))) if rep.roots.size else 0.0)
    nonpos = bool(rep.all_real and np.all(rep.roots.real <= NONNEG_TOL * scale))
    ok = nonneg and nonpos
    reason = "" if ok else ("negative coefficient" if not nonneg else "root not real and nonpositive")
    return SampledVerdict(ok, 1, 0, None if ok else [list(map(float, Z)), list(map(float, Y))], reason,
                          {"coefficients": [float(c) for c in coeffs],
                           "roots": [float(r.real) for r in rep.roots]})
