"""Pure numpy versions of the compiled kernels (same signatures, same results)."""

import numpy as np

_CHUNK = 1 << 14


def _sign_rows(start, stop, m):
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(m, dtype=np.int64)) & 1
    return bits


def ryser_permanent(a):
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return 1.0
    total = 1 << n
    acc = np.longdouble(0.0)
    al = a.astype(np.longdouble)
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        bits = _sign_rows(start, stop, n).astype(np.longdouble)
        rows = bits @ al.T  # row sums restricted to the subset
        prods = np.prod(rows, axis=1)
        sizes = bits.sum(axis=1).astype(np.int64)
        signs = np.where((n - sizes) % 2 == 0, 1.0, -1.0).astype(np.longdouble)
        acc += np.sum(signs * prods)
    return float(acc)


def multilinear_polarization(a, x):
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if m == 0:
        return 1.0
    ax = (a @ x.T).astype(np.longdouble)  # column k is A x_k
    total = 1 << m
    acc = np.longdouble(0.0)
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        bits = _sign_rows(start, stop, m)
        b = (1 - 2 * bits).astype(np.longdouble)
        vals = np.prod(b @ ax.T, axis=1)
        signs = np.prod(b, axis=1)
        acc += np.sum(signs * vals)
    return float(acc / total)


def sinkhorn(a, tol, max_iter):
    a = np.asarray(a, dtype=np.float64)
    n, m = a.shape
    u = np.ones(n)
    v = np.ones(m)
    it = 0
    res = 0.0
    while it < max_iter:
        u = 1.0 / (a @ v)
        v = 1.0 / (a.T @ u)
        it += 1
        res = float(np.max(np.abs(u * (a @ v) - 1.0)))
        if res <= tol:
            break
    return u, v, it, res


def subset_sums(x):
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    sums = np.zeros(1 << n)
    for i in range(n):
        w = 1 << i
        sums[w:2 * w] = sums[:w] + x[i]
    return sums


def subset_min_gap(svals, x):
    svals = np.asarray(svals, dtype=np.int64)
    vals = svals.astype(np.float64) - subset_sums(x)
    arg = int(np.argmin(vals))
    return float(vals[arg]), arg


def submodular_violation(svals, n):
    svals = np.asarray(svals, dtype=np.int64)
    masks = np.arange(1 << n, dtype=np.int64)
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            bi, bj = 1 << i, 1 << j
            u = masks[((masks & bi) != 0) & ((masks & bj) != 0)]
            c = u ^ bi ^ bj
            bad = svals[c | bi] + svals[c | bj] < svals[u] + svals[c]
            if bad.any():
                cand = (int(u[np.argmax(bad)]), i, j)
                if best is None or cand < best:
                    best = cand
    return best if best is not None else (-1, -1, -1)
