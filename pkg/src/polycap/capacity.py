"""Capacity of homogeneous polynomials with nonnegative coefficients.

Cap(p) = inf p(x) over positive x with prod(x) = 1.  In logarithmic
coordinates this is the minimum of the convex function
phi(y) = log p(e^y) on the hyperplane sum(y) = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import BudgetError, NumericalError, ValidationError
from .exact import hyperplane_basis
from .polynomials import (
    NonnegativeMatrix,
    PolynomialOracle,
    ScaledOracle,
    ZeroOracle,
    derivative_oracle,
    gradient,
    log_gradient,
    stable_spread,
)

CONVERGED = "converged"
BUDGET_EXHAUSTED = "budget-exhausted"
UNBOUNDED = "unbounded-below-suspected"

GRAD_TOL = 1e-11
STALL_TOL = 1e-8
# keeps exp(y - max y) and degree-n monomials in it above underflow
SAFE_SPREAD = 500.0


@dataclass
class CapacityResult:
    cap_estimate: float
    minimizer: np.ndarray
    gap_bound: float
    iterations: int
    status: str
    radius: float = 0.0

    @property
    def cap_lower(self) -> float:
        """Certified lower end cap_estimate * exp(-gap_bound); 0 when uncertified."""
        if not math.isfinite(self.gap_bound):
            return 0.0
        return self.cap_estimate * math.exp(-self.gap_bound)

    def to_dict(self) -> dict:
        return {
            "cap_estimate": self.cap_estimate,
            "gap_bound": self.gap_bound if math.isfinite(self.gap_bound) else None,
            "minimizer": [float(v) for v in self.minimizer],
            "status": self.status,
            "iterations": self.iterations,
        }


@dataclass
class ScalingResult:
    d1: np.ndarray
    d2: np.ndarray
    B: NonnegativeMatrix
    cap_product: float
    converged: bool
    iterations: int
    residual: float

    def to_dict(self) -> dict:
        return {
            "d1": self.d1.tolist(),
            "d2": self.d2.tolist(),
            "B": self.B.entries.tolist(),
            "cap_product": self.cap_product,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
        }


def _check_capacity_input(p: PolynomialOracle) -> float:
    if isinstance(p, ZeroOracle) or p.is_zero:
        raise ValidationError("capacity of the zero polynomial is undefined")
    if p.degree != p.num_vars:
        raise ValidationError(f"capacity needs degree == number of variables ({p.degree} != {p.num_vars})")
    at_ones = float(p.evaluate(np.ones(p.num_vars)))
    if not at_ones > 0:
        raise ValidationError("polynomial vanishes at the all-ones point (zero polynomial)")
    return at_ones


def _phi(p, y):
    m = float(y.max())
    v = float(p.evaluate(np.exp(y - m)))
    if not v > 0:
        return math.inf
    return p.degree * m + math.log(v)


def _phi_grad(p, y):
    m = float(y.max())
    val, xg = log_gradient(p, np.exp(y - m))
    if not val > 0:
        raise NumericalError("polynomial evaluated to a non-positive value at a positive point")
    g = xg / val
    return p.degree * m + math.log(val), g - g.mean()


def _value(p, y, f):
    """Reported estimate p(e^y), taken straight from the oracle when representable."""
    if float(y.max()) * p.degree < 700:
        v = float(p.evaluate(np.exp(y)))
        if v > 0 and math.isfinite(v):
            return v
    return math.exp(f)


def _start_radius(n, at_ones, f):
    return math.sqrt(n) * max(math.log(2 * at_ones / math.exp(f)), math.log(2))


def _spread(y):
    return float(y.max() - y.min())


def _descend(p, y, at_ones, max_iters, limit=math.inf):
    """Projected gradient with Armijo backtracking and Barzilai-Borwein steps.

    Returns the last iterate, its value and projected gradient, the
    iteration count, an earlier iterate for estimating the drift, and
    whether the iterates were seen escaping to infinity (or leaving the
    region of trusted evaluation, ``limit`` on the spread of y).
    """
    n = p.num_vars
    f, g = _phi_grad(p, y)
    step = 1.0
    it = 0
    mark, mark_it = f, 0
    snap = y
    for it in range(1, max_iters + 1):
        if it & (it - 1) == 0:
            if it >= 64:
                yc = y - y.mean()
                if np.linalg.norm(yc) > _start_radius(n, at_ones, f) and _escapes(p, yc, f, snap):
                    return y, f, g, it, snap, True
            snap = y
        if it - mark_it >= 100:
            # stagnation: the last 100 steps gained almost nothing
            if mark - f <= 1e-13 * (1 + abs(f)):
                break
            mark, mark_it = f, it
        gn2 = float(g @ g)
        if math.sqrt(gn2) <= GRAD_TOL:
            break
        t = step
        while True:
            yn = y - t * g
            yn -= yn.mean()  # long BB steps would otherwise amplify rounding off the hyperplane
            if _spread(yn) > limit:
                if _phi(p, _toward(y, yn, limit)) < f:
                    return y, f, g, it, snap, True
                t *= 0.5
                continue
            fn = _phi(p, yn)
            if fn <= f - 1e-4 * t * gn2:
                break
            t *= 0.5
            if t < 1e-18:
                return y, f, g, it, snap, False
        fn, gnew = _phi_grad(p, yn)
        s, dg = yn - y, gnew - g
        if fn > f:
            return y, f, g, it, snap, False
        y, f, g = yn, fn, gnew
        sy = float(s @ dg)
        step = float(s @ s) / sy if sy > 0 else 2 * t
        step = min(max(step, 1e-8), 1e8)
    return y, f, g, it, snap, False


def _toward(y, yn, limit):
    """Point on the segment y -> yn whose spread equals ``limit``."""
    lo, hi = 0.0, 1.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if _spread(y + mid * (yn - y)) > limit:
            hi = mid
        else:
            lo = mid
    return y + lo * (yn - y)


def _newton(p, U, y, f, g, max_iters=60, h=1e-5, limit=math.inf):
    """Damped Newton steps on the hyperplane with a finite-difference Hessian.

    Used when the gradient method stalls in a flat, narrow valley where
    function values alone no longer resolve progress; a step is accepted
    when it lowers phi or, at equal phi, shrinks the gradient.
    """
    d = U.shape[1]
    it = 0
    for it in range(1, max_iters + 1):
        gn = float(np.linalg.norm(g))
        if gn <= GRAD_TOL:
            break
        H = np.empty((d, d))
        try:
            for j in range(d):
                _, gp = _phi_grad(p, y + h * U[:, j])
                _, gm = _phi_grad(p, y - h * U[:, j])
                H[:, j] = U.T @ (gp - gm) / (2 * h)
        except NumericalError:
            break
        if not np.all(np.isfinite(H)):
            break
        lam, V = np.linalg.eigh(0.5 * (H + H.T))
        if lam.max() <= 0:
            break
        lam = np.maximum(lam, float(lam.max()) * 1e-12)
        step = U @ (V @ ((V.T @ (U.T @ g)) / lam))
        cap = max(1.0, float(np.linalg.norm(y)))
        sn = float(np.linalg.norm(step))
        if sn > cap:
            step *= cap / sn
        t, accepted = 1.0, False
        for _ in range(40):
            yn = y - t * step
            yn -= yn.mean()
            fn = _phi(p, yn) if _spread(yn) <= limit else math.inf
            if math.isfinite(fn) and fn <= f + 1e-14 * (1 + abs(f)):
                try:
                    fn, gnew = _phi_grad(p, yn)
                except NumericalError:
                    fn = math.inf
                if fn < f or (fn <= f + 1e-14 * (1 + abs(f)) and np.linalg.norm(gnew) < gn):
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        y, f, g = yn, fn, gnew
    return y, f, g, it


def _certify(p, U, center, r, f_best, y_best, tol, max_iters):
    """Central-cut ellipsoid in hyperplane coordinates, started at ``center``.

    Returns (best f, best y, certified lower bound, iterations).  The lower
    bound is valid for the minimum of phi over the ball of radius r.
    """
    d = U.shape[1]
    n = U.shape[0]
    c = U.T @ center
    P = np.eye(d) * r * r
    lower = -math.inf
    grad_err = 1e-10 * n
    it = 0
    for it in range(1, max_iters + 1):
        y = U @ c
        try:
            f, gy = _phi_grad(p, y)
        except NumericalError:
            break
        if f < f_best:
            f_best, y_best = f, y
        g = U.T @ gy
        width = math.sqrt(max(float(g @ P @ g), 0.0))
        slack = math.sqrt(max(float(np.trace(P)), 0.0)) * grad_err + 1e-13 * (1 + abs(f))
        lower = max(lower, f - width - slack)
        if f_best - lower <= tol or width == 0.0:
            break
        if d == 1:
            c = c - np.sign(g) * math.sqrt(P[0, 0]) / 2
            P = P / 4
            continue
        b = (P @ g) / width
        c = c - b / (d + 1)
        P = (d * d / (d * d - 1.0)) * (P - (2.0 / (d + 1)) * np.outer(b, b))
        P = 0.5 * (P + P.T)
    return f_best, y_best, lower, it


def _escapes(p, y, f, snap):
    """True when phi does not rise along the ray through y or along the recent drift."""
    snap = snap - snap.mean()
    t = max(float(np.linalg.norm(y)), 1.0)
    for d in (y, y - snap):
        dn = float(np.linalg.norm(d))
        if dn > 1e-9 and _phi(p, y + t * d / dn) <= f + 1e-12 * (1 + abs(f)):
            return True
    return False


def capacity(p: PolynomialOracle, tol: float = 1e-6, *, max_iters: int = 20000,
             certify_iters: int | None = None) -> CapacityResult:
    """Minimize log p(e^y) over sum(y) = 0 and certify the gap.

    A projected-gradient run finds the minimizer; a central-cut ellipsoid
    seeded there turns the gradient into a certified lower bound.  Inputs
    whose infimum is not attained are flagged when the descent stalls
    outside the start ball, or runs far outside it while phi is still not
    increasing along the ray through the last iterate.  The certificate
    covers a ball around the minimizer whose radius is capped so that
    every evaluation stays clear of floating-point underflow.
    """
    at_ones = _check_capacity_input(p)
    n = p.num_vars
    if n == 1:
        return CapacityResult(at_ones, np.zeros(1), 0.0, 0, CONVERGED)

    U = hyperplane_basis(n)
    limit = stable_spread(p)
    y, f, g, iters, snap, escaped = _descend(p, np.zeros(n), at_ones, max_iters, limit)
    if escaped:
        y = y - y.mean()
        f = _phi(p, y)
        return CapacityResult(_value(p, y, f), y, math.inf, iters, UNBOUNDED, _start_radius(n, at_ones, f))
    if float(np.linalg.norm(g)) > GRAD_TOL:
        y, f, g, more = _newton(p, U, y, f, g, limit=limit)
        iters += more
    y = y - y.mean()
    f = _phi(p, y)
    radius = _start_radius(n, at_ones, f)
    norm = float(np.linalg.norm(y))
    stalled = float(np.linalg.norm(g)) > STALL_TOL
    if norm > radius and (stalled or norm > 4 * radius or _escapes(p, y, f, snap)):
        return CapacityResult(_value(p, y, f), y, math.inf, iters, UNBOUNDED, radius)

    if certify_iters is None:
        certify_iters = 50 * (n - 1) ** 2 + 200
    r = min(radius + norm, SAFE_SPREAD / (2 * n), max(0.5 * (limit - _spread(y)), 1e-3))
    f_best, y_best, lower, cit = _certify(p, U, y, r, f, y, tol, certify_iters)
    y_best = y_best - y_best.mean()
    value = _value(p, y_best, _phi(p, y_best))
    gap = max(math.log(value) - lower, 0.0)
    status = CONVERGED if gap <= tol else BUDGET_EXHAUSTED
    return CapacityResult(value, y_best, gap, iters + cit, status, radius)


def sinkhorn_scale(A, ds_tol: float = 1e-10, max_iters: int = 100000) -> ScalingResult:
    """Alternate row and column normalisation: A = diag(d1) B diag(d2)."""
    if not isinstance(A, NonnegativeMatrix):
        A = NonnegativeMatrix(A)
    a = np.ascontiguousarray(A.entries)
    u, v, it, res = kernels.sinkhorn(a, float(ds_tol), int(max_iters))
    B = u[:, None] * a * v[None, :]
    col_res = float(np.max(np.abs(B.sum(axis=0) - 1)))
    row_res = float(np.max(np.abs(B.sum(axis=1) - 1)))
    res = max(row_res, col_res)
    log_cap = -(math.fsum(np.log(u)) + math.fsum(np.log(v)))
    return ScalingResult(
        d1=1.0 / u,
        d2=1.0 / v,
        B=NonnegativeMatrix(B, allow_zero_rows=True),
        cap_product=math.exp(log_cap),
        converged=res <= ds_tol,
        iterations=int(it),
        residual=res,
    )


def ds_defect(p: PolynomialOracle) -> float:
    """sum_i (dp/dx_i(1, ..., 1) - 1)^2."""
    g = gradient(p, np.ones(p.num_vars))
    return float(math.fsum((g - 1.0) ** 2))


def scale_to_doubly_stochastic(p: PolynomialOracle, tol: float = 1e-8):
    """(beta, q) with q(x) = p(beta * x) / p(beta) doubly stochastic."""
    res = capacity(p, tol)
    if res.status != CONVERGED:
        raise NumericalError(f"capacity did not converge (status {res.status}, gap {res.gap_bound})")
    beta = np.exp(res.minimizer)
    return beta, ScaledOracle(p, beta, float(p.evaluate(beta)))


@dataclass
class Approximation:
    value: float
    lower: float
    upper: float
    factor: float
    capacity: CapacityResult
    k: int = 0
    worst_case: float = field(default=math.nan)

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        return {
            "F": self.value,
            "coefficient_lower": self.lower,
            "coefficient_upper": self.upper,
            "factor": self.factor,
            "k": self.k,
            "worst_case_ratio": self.worst_case,
            "capacity": self.capacity.to_dict(),
        }


def approximate_coefficient(p: PolynomialOracle) -> Approximation:
    """F(p) = capacity estimate at relative gap log 2.

    The mixed coefficient lies in [factor * Cap_lower, F] where factor is
    the product of g(min(S_p({i}), n + 1 - i)) over the best ordering.
    """
    from .bounds import generalized_factor
    from .structure import SupportFunction

    n = p.num_vars
    res = capacity(p, math.log(2))
    if res.status == UNBOUNDED:
        raise ValidationError("capacity infimum appears unattained (decomposable input?)")
    if res.status != CONVERGED:
        raise BudgetError(f"capacity not certified within log 2 (gap {res.gap_bound})")
    sf = SupportFunction.from_oracle(p)
    singles = [sf.value([i]) for i in range(n)]
    factor, _ = generalized_factor(singles)
    worst = 2.0 / factor
    return Approximation(res.cap_estimate, factor * res.cap_lower, res.cap_estimate, factor,
                         res, 0, worst)


def improved_approximate(p: PolynomialOracle, m: int, *, budget: int = 10**7) -> Approximation:
    """Approximate the coefficient of p_k = d^k p / dx_1..dx_k at x_1..x_k = 0.

    k = ceil(m log2 n), clamped to n - 1; the coefficient of p_k equals that
    of p, and the worst-case ratio drops to 2 (n-k)^(n-k) / (n-k)!.
    """
    n = p.num_vars
    if m < 0:
        raise ValidationError("m must be nonnegative")
    k = min(math.ceil(m * math.log2(n)) if n > 1 else 0, n - 1)
    if k == 0:
        return approximate_coefficient(p)
    try:
        pk = derivative_oracle(p, k, budget=budget)
    except BudgetError as exc:
        warnings.warn(f"{exc}; falling back to the plain approximation", RuntimeWarning, stacklevel=2)
        return approximate_coefficient(p)
    approx = approximate_coefficient(pk)
    approx.k = k
    nk = n - k
    approx.worst_case = 2.0 * nk**nk / math.factorial(nk)
    return approx
