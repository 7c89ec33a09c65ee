"""The acceptance suite: ten numbered criteria plus a fixture smoke check.

``level="full"`` runs the stated sample counts; ``level="quick"`` runs a
reduced version of each criterion for fast feedback.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

import numpy as np

from .bounds import g, generalized_factor, permanent_lower_bound, uniform_factor, vdw_factor
from .capacity import approximate_coefficient, capacity, improved_approximate
from .exact import (
    entropic_inequality,
    mixed_discriminant_exact,
    permanent_exact,
    random_doubly_stochastic,
)
from .hyperbolicity import check_pos_hyperbolic, lemma29_bound, newton_inequalities, restriction_roots
from .io import load_input, to_oracle
from .polynomials import (
    NonnegativeMatrix,
    build_determinantal,
    build_multilinear,
    build_sparse,
    compositions,
    expand,
    mixed_form,
    partial_at_zero,
)
from .samples import random_01_matrix, random_matrix, random_psd_tuple, regular_matrices
from .structure import SupportFunction, in_support, is_indecomposable, is_submodular, support_degree

LEVELS = ("quick", "full")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2}. {self.name}: {self.detail} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _pick(level, quick, full):
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    return quick if level == "quick" else full


def _rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


def vdw_chain(level="full", seed=101):
    count = _pick(level, 60, 500)
    rng = np.random.default_rng(seed)
    bad = 0
    start = time.perf_counter()
    for k in range(count):
        n = 3 + k % 3
        A = random_doubly_stochastic(n, rng)
        per = permanent_exact(A).value
        cap = capacity(build_multilinear(A), 1e-8)
        lower = float(vdw_factor(n)) * cap.cap_lower
        if not (lower <= per * (1 + 1e-12) and per <= cap.cap_estimate * (1 + 1e-12)):
            bad += 1
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 120
    return ok, f"{count} matrices, {bad} violations, {elapsed:.1f}s (limit 120s)"


def equality_at_J(level="full", seed=0):
    worst = 0.0
    for n in range(1, 9):
        J = NonnegativeMatrix([[Fraction(1, n)] * n] * n)
        if permanent_exact(J).value != vdw_factor(n):
            return False, f"per(J_{n}) != {vdw_factor(n)}"
        cap = capacity(build_multilinear(J), 1e-10)
        worst = max(worst, abs(cap.cap_estimate - 1))
    return worst <= 1e-8, f"per(J_n) = n!/n^n exactly for n <= 8; max |Cap - 1| = {worst:.2e}"


def schrijver_bound(level="full", seed=303):
    eq19 = float(uniform_factor(3, 4)) * 3**4
    mats = list(regular_matrices(4, 3, 2))
    low = min(permanent_exact(m).value for m in mats)
    ok1 = low >= eq19 * (1 - 1e-6)
    count = _pick(level, 40, 200)
    rng = np.random.default_rng(seed)
    bad = done = 0
    while done < count:
        n = int(rng.integers(2, 7))
        A = random_01_matrix(n, rng, float(rng.uniform(0.3, 0.8)))
        per = permanent_exact(A).value
        if per <= 0:
            continue
        done += 1
        rep = permanent_lower_bound(A)
        if rep.coefficient_lower > float(per) * (1 + 1e-9):
            bad += 1
    return ok1 and bad == 0, (f"{len(mats)} matrices in the 3-regular class, min per = {low} "
                              f"(bound {eq19:.6g}); {count} sparse 0-1 matrices, {bad} violations")


def product_identity(level="full", seed=0):
    for n in range(1, 21):
        if math.prod((g(k) for k in range(1, n + 1)), start=Fraction(1)) != Fraction(math.factorial(n), n**n):
            return False, f"identity fails at n = {n}"
    return True, "prod_{k<=n} g(k) = n!/n^n exactly for n <= 20"


def _derivative_capacity_ok(p):
    cap = capacity(p, 1e-8)
    q = partial_at_zero(p, 0)
    capq = capacity(q, 1e-8)
    k = support_degree(p, [0])
    return capq.cap_estimate >= float(g(k)) * cap.cap_estimate * (1 - 1e-5)


def _indecomposable(make):
    """Draw until the polynomial is indecomposable, so its capacity is attained."""
    while True:
        p = make()
        if is_indecomposable(p, cross_check=False):
            return p


def derivative_capacity(level="full", seed=505):
    n_mul, n_det = _pick(level, (15, 8), (100, 50))
    rng = np.random.default_rng(seed)
    bad = 0
    for k in range(n_mul):
        n = 2 + k % 4
        dens = float(rng.uniform(0.5, 1.0))
        p = _indecomposable(lambda: build_multilinear(random_matrix(n, rng, density=dens)))
        bad += not _derivative_capacity_ok(p)
    for k in range(n_det):
        n = 2 + k % 4
        p = _indecomposable(lambda: build_determinantal(random_psd_tuple(n, rng, low_rank=True)))
        bad += not _derivative_capacity_ok(p)
    return bad == 0, f"{n_mul} Mul and {n_det} DET instances (indecomposable), {bad} violations"


def _exact_instance(k, rng):
    n = 2 + k % 5
    if k % 2 == 0:
        p = _indecomposable(lambda: build_multilinear(random_matrix(n, rng, density=0.8)))
        return p, permanent_exact(p.matrix).value
    p = _indecomposable(lambda: build_determinantal(random_psd_tuple(n, rng, low_rank=True)))
    return p, mixed_discriminant_exact(p.tuple).value


def approximation_contract(level="full", seed=606):
    count = _pick(level, 10, 50)
    rng = np.random.default_rng(seed)
    bad = 0
    start = time.perf_counter()
    for k in range(count):
        p, C = _exact_instance(k, rng)
        ap = approximate_coefficient(p)
        upper = 2.0 / float(ap.factor) * C
        if not (C <= ap.value * (1 + 1e-9) and ap.value <= upper * (1 + 1e-9)):
            bad += 1
    elapsed = time.perf_counter() - start
    return bad == 0 and elapsed < 300, f"{count} instances, {bad} violations, {elapsed:.1f}s (limit 300s)"


def support_machinery(level="full", seed=707):
    count = _pick(level, 10, 50)
    rng = np.random.default_rng(seed)
    exps = list(compositions(4, 4))
    bad = 0
    for _ in range(count):
        A = random_01_matrix(4, rng, 0.5)
        p = build_multilinear(A)
        supp = expand(p).support()
        S = SupportFunction.from_oracle(p)
        for r in exps:
            if bool(in_support(p, r, S=S)) != (tuple(r) in supp):
                bad += 1
    q = build_sparse({(1, 1, 1, 1): 1, (0, 2, 0, 2): 1})
    Sq = SupportFunction.from_oracle(q)
    vals = (Sq([0, 1]), Sq([1, 2]), Sq([1]), Sq([0, 1, 2]))
    verdict = is_submodular(Sq)
    ok_witness = vals == (2, 2, 2, 3) and not verdict and verdict.witness == ((0, 1), (1, 2))
    return bad == 0 and ok_witness, (f"{count} instances x {len(exps)} exponents, {bad} disagreements; "
                                    f"counterexample values {vals}, witness {verdict.witness}")


def hyperbolicity_suite(level="full", seed=808):
    count, trials = _pick(level, (10, 40), (100, 200))
    rng = np.random.default_rng(seed)
    failed = 0
    ni_bad = ni_seen = 0
    for k in range(count):
        n = 2 + k % 4
        if k % 2 == 0:
            p = build_multilinear(random_matrix(n, rng, density=float(rng.uniform(0.4, 1.0))))
        else:
            p = build_determinantal(random_psd_tuple(n, rng, low_rank=True, complex_=k % 4 == 1))
        if not check_pos_hyperbolic(p, trials, seed=int(rng.integers(1 << 30))):
            failed += 1
        for _ in range(10):
            rep = restriction_roots(p, rng.normal(size=n))
            if rep.all_real:
                ni_seen += 1
                ni_bad += not newton_inequalities(rep.coefficients).nis_hold
    bad = check_pos_hyperbolic(build_sparse({(2, 0): 1, (0, 2): 1}), trials, seed=42)
    ok = failed == 0 and not bad and bad.counterexample is not None and ni_bad == 0
    return ok, (f"{count} instances x {trials} trials, {failed} failures; x1^2 + x2^2 rejected at "
                f"{bad.counterexample}; {ni_seen} real-rooted restrictions, {ni_bad} Newton violations")


def lemma_verifiers(level="full", seed=909):
    n_ent, n_lem = _pick(level, (5000, 1000), (100000, 10000))
    rng = np.random.default_rng(seed)
    ent_bad = 0
    for k in range(n_ent):
        n = 2 + k % 9
        u = rng.dirichlet(np.ones(n))
        if k % 10 == 0:
            u = np.zeros(n)
            u[int(rng.integers(n))] = 1.0
        if not entropic_inequality(1.0 - u)[2]:
            ent_bad += 1
    eq_err = 0.0
    for n in range(2, 11):
        lhs, rhs, _ = entropic_inequality(np.full(n, (n - 1) / n))
        eq_err = max(eq_err, abs(lhs - rhs))
    lem_bad = 0
    for k in range(n_lem):
        n = 1 + k % 8
        a = rng.uniform(0.1, 2.0, n)
        b = rng.uniform(0.0, 2.0, n) * (rng.random(n) < 0.9)
        coeffs = np.ones(1)
        for ai, bi in zip(a, b):
            coeffs = np.polynomial.polynomial.polymul(coeffs, [bi, ai])
        if not lemma29_bound(list(coeffs)):
            lem_bad += 1
    eq29 = 0.0
    for n in range(1, 9):
        rep = lemma29_bound([math.comb(n, i) for i in range(n + 1)])
        eq29 = max(eq29, abs(rep.d1 - rep.bound) / rep.d1)
    ok = ent_bad == 0 and eq_err <= 1e-12 and lem_bad == 0 and eq29 <= 1e-10
    return ok, (f"entropic: {n_ent} vectors, {ent_bad} violations, equality error {eq_err:.1e}; "
                f"d1 bound: {n_lem} polynomials, {lem_bad} violations, (t+1)^n error {eq29:.1e}")


def oracle_agreement(level="full", seed=1010):
    rng = np.random.default_rng(seed)
    reps = _pick(level, 1, 3)
    worst_mul = worst_det = 0.0
    for _ in range(reps):
        for n in range(1, 9):
            A = random_matrix(n, rng)
            per = permanent_exact(A).value
            worst_mul = max(worst_mul, abs(mixed_form(build_multilinear(A), np.eye(n)) - per) / per)
            if level == "quick" and n > 6:
                continue
            T = random_psd_tuple(n, rng, complex_=n % 2 == 0)
            D = mixed_discriminant_exact(T, exact=False).value
            worst_det = max(worst_det, abs(mixed_form(build_determinantal(T), np.eye(n)) - D) / abs(D))
    same = True
    for n in (2, 3, 4):
        p = build_multilinear(random_matrix(n, rng))
        a, b = improved_approximate(p, 0), approximate_coefficient(p)
        same &= a.value == b.value and a.lower == b.lower
    ok = worst_mul <= 1e-9 and worst_det <= 1e-9 and same
    return ok, (f"mixed form vs permanent max rel err {worst_mul:.1e}; vs mixed discriminant "
                f"{worst_det:.1e}; m = 0 improvement identical: {same}")


def fixtures(level="full", seed=0):
    """Every shipped fixture loads and runs through the basic operations."""
    data = resources.files("polycap") / "data"
    names = sorted(f.name for f in data.iterdir() if f.name.endswith(".json"))
    for name in names:
        with resources.as_file(data / name) as path:
            p = to_oracle(load_input(path))
        SupportFunction.from_oracle(p).value(range(p.num_vars))
        if p.num_vars == p.degree:
            capacity(p, 1e-6)
    with resources.as_file(data / "I3.json") as path:
        I3 = to_oracle(load_input(path))
    return mixed_form(I3, np.eye(3), exact=True) == 1, f"{len(names)} fixtures"


CRITERIA = {
    1: ("VDW bound chain", vdw_chain),
    2: ("equality at J_n", equality_at_J),
    3: ("generalized Schrijver bound", schrijver_bound),
    4: ("product identity for g", product_identity),
    5: ("capacity after differentiation", derivative_capacity),
    6: ("approximation contract", approximation_contract),
    7: ("support and Newton machinery", support_machinery),
    8: ("hyperbolicity suite", hyperbolicity_suite),
    9: ("lemma verifiers", lemma_verifiers),
    10: ("oracle agreement", oracle_agreement),
}


def run_criterion(number: int, level: str = "full") -> CriterionResult:
    if number == 0:
        name, func = "shipped fixtures", fixtures
    else:
        name, func = CRITERIA[number]
    start = time.perf_counter()
    try:
        ok, detail = func(level)
    except Exception as exc:  # a crash is a failure, reported as such
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, name, bool(ok), detail, time.perf_counter() - start)


def run_all(level: str = "quick", numbers=None) -> list[CriterionResult]:
    numbers = [0, *CRITERIA] if numbers is None else numbers
    return [run_criterion(k, level) for k in numbers]
