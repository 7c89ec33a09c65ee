# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_fallback`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()


def ryser_permanent(const double[:, ::1] a):
    """Ryser inclusion-exclusion over column subsets, Gray-code order."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef unsigned long long g, prev, diff, total
    cdef long double prod, acc = 0.0
    cdef long double[64] rows
    cdef int sign
    if n == 0:
        return 1.0
    if n > 62:
        raise ValueError("matrix too large for Ryser kernel")
    for i in range(n):
        rows[i] = 0.0
    total = 1ULL << n
    prev = 0
    for k in range(1, total):
        g = k ^ (k >> 1)
        diff = g ^ prev
        j = 0
        while not (diff >> j) & 1:
            j += 1
        if g & (1ULL << j):
            for i in range(n):
                rows[i] += a[i, j]
        else:
            for i in range(n):
                rows[i] -= a[i, j]
        prev = g
        prod = 1.0
        for i in range(n):
            prod *= rows[i]
        # (-1)^(n - |S|)
        if (n - _popcount(g)) & 1:
            acc -= prod
        else:
            acc += prod
    return float(acc)


cdef inline int _popcount(unsigned long long x) nogil:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


def multilinear_polarization(const double[:, ::1] a, const double[:, ::1] x):
    """2^-n sum_b prod(b) prod_i (A sum_k b_k x_k)_i with Gray-code sign flips."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t i, j, l
    cdef unsigned long long k, g, prev, diff, total
    cdef long double prod, acc = 0.0
    cdef int parity = 0
    if m == 0:
        return 1.0
    if m > 62:
        raise ValueError("too many vectors for polarization kernel")
    ax = np.asarray(a) @ np.asarray(x).T      # ax[:, k] = A x_k
    cdef double[:, ::1] axv = np.ascontiguousarray(ax)
    cdef long double[256] v
    if n > 256:
        raise ValueError("dimension too large for polarization kernel")
    for i in range(n):
        v[i] = 0.0
        for l in range(m):
            v[i] += axv[i, l]
    prod = 1.0
    for i in range(n):
        prod *= v[i]
    acc = prod
    total = 1ULL << m
    prev = 0
    for k in range(1, total):
        g = k ^ (k >> 1)
        diff = g ^ prev
        j = 0
        while not (diff >> j) & 1:
            j += 1
        # bit set in g means b_j = -1
        if g & (1ULL << j):
            for i in range(n):
                v[i] -= 2.0 * axv[i, j]
        else:
            for i in range(n):
                v[i] += 2.0 * axv[i, j]
        prev = g
        parity ^= 1
        prod = 1.0
        for i in range(n):
            prod *= v[i]
        if parity:
            acc -= prod
        else:
            acc += prod
    return float(acc / (<long double> total))


def sinkhorn(const double[:, ::1] a, double tol, long max_iter):
    """Alternate row/column normalisation of diag(u) A diag(v)."""
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = a.shape[1]
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef double s, res = 0.0, r
    u_arr = np.ones(n)
    v_arr = np.ones(m)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    while it < max_iter:
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += a[i, j] * v[j]
            u[i] = 1.0 / s
        for j in range(m):
            s = 0.0
            for i in range(n):
                s += a[i, j] * u[i]
            v[j] = 1.0 / s
        it += 1
        # columns are exact after the v-step; rows carry the residual
        res = 0.0
        for i in range(n):
            s = 0.0
            for j in range(m):
                s += a[i, j] * v[j]
            r = fabs(u[i] * s - 1.0)
            if r > res:
                res = r
        if res <= tol:
            break
    return u_arr, v_arr, it, res


def subset_min_gap(const long long[::1] svals, const double[::1] x):
    """min over masks of svals[mask] - sum_{i in mask} x_i (first minimiser)."""
    cdef Py_ssize_t n = x.shape[0]
    cdef unsigned long long total = 1ULL << n
    cdef unsigned long long mask, low
    cdef Py_ssize_t i
    sums_arr = np.zeros(total)
    cdef double[::1] sums = sums_arr
    cdef double best, val
    cdef unsigned long long arg = 0
    best = <double> svals[0]
    for mask in range(1, total):
        low = mask & (~mask + 1)
        i = 0
        while (low >> i) != 1:
            i += 1
        sums[mask] = sums[mask ^ low] + x[i]
        val = <double> svals[mask] - sums[mask]
        if val < best:
            best = val
            arg = mask
    return best, arg


def submodular_violation(const long long[::1] svals, int n):
    """First (union, i, j) in ascending union order with
    S(C+i) + S(C+j) < S(C+i+j) + S(C), C = union minus {i, j}."""
    cdef unsigned long long total = 1ULL << n
    cdef unsigned long long u, c, bi, bj
    cdef int i, j
    for u in range(total):
        for i in range(n):
            bi = 1ULL << i
            if not u & bi:
                continue
            for j in range(i + 1, n):
                bj = 1ULL << j
                if not u & bj:
                    continue
                c = u ^ bi ^ bj
                if svals[c | bi] + svals[c | bj] < svals[u] + svals[c]:
                    return int(u), i, j
    return -1, -1, -1
