"""Univariate interpolation used to read coefficients and derivatives off oracles.

Float mode samples at Chebyshev nodes of a chosen interval; exact mode samples
at integer nodes with ``Fraction`` arithmetic and Newton divided differences.
"""

from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P


def chebyshev_nodes(lo, hi, count):
    k = np.arange(count)
    t = np.cos((2 * k + 1) * np.pi / (2 * count))
    return 0.5 * (lo + hi) + 0.5 * (hi - lo) * t


def chebyshev_fit(values, lo, hi):
    """Chebyshev series (on the window [-1, 1]) interpolating ``values``.

    ``values`` must be sampled at ``chebyshev_nodes(lo, hi, len(values))``.
    """
    count = len(values)
    k = np.arange(count)
    t = np.cos((2 * k + 1) * np.pi / (2 * count))
    return C.chebfit(t, np.asarray(values, dtype=float), count - 1)


def power_coefficients(values, lo, hi):
    """Power-basis coefficients (ascending) of the interpolant in the original variable."""
    cheb = chebyshev_fit(values, lo, hi)
    # map t in [-1, 1] back to s = mid + half * t
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    in_t = C.cheb2poly(cheb)
    # substitute t = (s - mid) / half
    out = np.zeros(len(in_t))
    basis = np.array([1.0])
    lin = np.array([-mid / half, 1.0 / half])
    for c in in_t:
        out[: len(basis)] += c * basis
        basis = P.polymul(basis, lin)
    return out


def derivative_at(values, lo, hi, point, order=1):
    """Derivative of the interpolant at ``point`` (inside [lo, hi])."""
    cheb = chebyshev_fit(values, lo, hi)
    half = 0.5 * (hi - lo)
    t = (point - 0.5 * (lo + hi)) / half
    return float(C.chebval(t, C.chebder(cheb, order)) / half**order)


def exact_coefficients(nodes, values):
    """Exact ascending coefficients of the polynomial through ``(nodes, values)``."""
    xs = [Fraction(x) for x in nodes]
    dd = [Fraction(v) for v in values]
    n = len(xs)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level])
    coeffs = [Fraction(0)] * n
    # Horner on the Newton form
    for i in range(n - 1, -1, -1):
        shifted = [Fraction(0)] + coeffs[:-1]
        coeffs = [shifted[j] - xs[i] * coeffs[j] for j in range(n)]
        coeffs[0] += dd[i]
    return coeffs


def detect_degree(coeffs, rel_tol=1e-9):
    """Largest index whose coefficient is significant; -1 for the zero polynomial.

    Exact (``Fraction``) coefficients are compared with zero directly.
    """
    if len(coeffs) and isinstance(coeffs[0], Fraction):
        for k in range(len(coeffs) - 1, -1, -1):
            if coeffs[k] != 0:
                return k
        return -1
    mags = np.abs(np.asarray(coeffs, dtype=float))
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return -1
    idx = np.nonzero(mags > rel_tol * top)[0]
    return int(idx[-1])


def lowest_order(coeffs, rel_tol=1e-9):
    """Smallest index with a significant coefficient; -1 for the zero polynomial."""
    if len(coeffs) and isinstance(coeffs[0], Fraction):
        for k, c in enumerate(coeffs):
            if c != 0:
                return k
        return -1
    mags = np.abs(np.asarray(coeffs, dtype=float))
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return -1
    return int(np.nonzero(mags > rel_tol * top)[0][0])
