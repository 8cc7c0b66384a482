# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: cyclic Jacobi, Cholesky, and binary enumeration.

Every function here has a line-for-line counterpart in ``_kernels_py``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs

cnp.import_array()


def jacobi_eigh(double[:, :] m, double tol=1e-15, int max_sweeps=100):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(values, vectors, sweeps)`` with values ascending.
    """
    cdef Py_ssize_t n = m.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.array(m, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, :] a = a_arr
    cdef double[:, :] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep = 0
    cdef double off, total, apq, theta, t, c, s, x, y
    cdef double scale = 0.0

    for p in range(n):
        for q in range(n):
            scale += a[p, q] * a[p, q]
    scale = sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), v_arr, 0

    while sweep < max_sweeps:
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += a[p, q] * a[p, q]
        if sqrt(2.0 * off) <= tol * scale:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = c * x - s * y
                    a[k, q] = s * x + c * y
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x - s * y
                    a[q, k] = s * x + c * y
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = c * x - s * y
                    v[k, q] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0

    values = np.array([a_arr[i, i] for i in range(n)])
    order = np.argsort(values, kind="stable")
    return values[order], v_arr[:, order], sweep


def cholesky(double[:, :] m):
    """Lower Cholesky factor, or ``None`` if a pivot is not positive."""
    cdef Py_ssize_t n = m.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] l_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, :] l = l_arr
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(n):
        s = m[j, j]
        for k in range(j):
            s -= l[j, k] * l[j, k]
        if not s > 0.0:
            return None
        l[j, j] = sqrt(s)
        for i in range(j + 1, n):
            s = m[i, j]
            for k in range(j):
                s -= l[i, k] * l[j, k]
            l[i, j] = s / l[j, j]
    return l_arr


def cho_solve(double[:, :] l, double[:, :] b):
    """Solve ``L L^T X = B`` column by column for a lower factor ``L``."""
    cdef Py_ssize_t n = l.shape[0]
    cdef Py_ssize_t r = b.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x_arr = np.array(b, dtype=np.float64, copy=True)
    cdef double[:, :] x = x_arr
    cdef Py_ssize_t i, k, col
    cdef double s
    for col in range(r):
        for i in range(n):
            s = x[i, col]
            for k in range(i):
                s -= l[i, k] * x[k, col]
            x[i, col] = s / l[i, i]
        for i in range(n - 1, -1, -1):
            s = x[i, col]
            for k in range(i + 1, n):
                s -= l[k, i] * x[k, col]
            x[i, col] = s / l[i, i]
    return x_arr


def brute_force_binary(double[:, :] q, double[:] f, bint spins, double tie_tol=1e-12):
    """Exhaustive minimum of ``0.5 x'Qx - f'x`` over {0,1}^n or {-1,1}^n.

    Gray-code traversal with O(n) incremental updates. Ties within
    ``tie_tol`` (relative) go to the lexicographically smallest vector,
    where the first coordinate is most significant and the low value
    (0 or -1) precedes the high one.
    Returns ``(code, value)`` with bit ``n-1-i`` of ``code`` set when x_i is high.
    """
    cdef Py_ssize_t n = q.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_arr = np.empty(n, dtype=np.float64)
    cdef double[:] x = x_arr
    cdef double[:] g = g_arr
    cdef double lo = -1.0 if spins else 0.0
    cdef double val = 0.0, best, dx, scale = 1.0
    cdef Py_ssize_t i, j, bit
    cdef unsigned long long step, total, gray, code, best_code
    for i in range(n):
        x[i] = lo
    # g = Qx - f  (gradient at x)
    for i in range(n):
        g[i] = -f[i]
        for j in range(n):
            g[i] += q[i, j] * x[j]
    for i in range(n):
        val += 0.5 * x[i] * (g[i] - f[i])
        scale += fabs(f[i])
        for j in range(n):
            scale += 0.5 * fabs(q[i, j])
    best = val
    best_code = 0
    gray = 0
    total = 1ULL << n
    for step in range(1, total):
        # flip the lowest set bit of step
        bit = 0
        while not ((step >> bit) & 1ULL):
            bit += 1
        gray ^= (1ULL << bit)
        i = n - 1 - bit
        dx = (1.0 - lo) if x[i] == lo else (lo - 1.0)
        val += dx * g[i] + 0.5 * q[i, i] * dx * dx
        for j in range(n):
            g[j] += q[j, i] * dx
        x[i] += dx
        code = gray
        if val < best - tie_tol * scale:
            best = val
            best_code = code
        elif val <= best + tie_tol * scale and code < best_code:
            best = val if val < best else best
            best_code = code
    return best_code, best
