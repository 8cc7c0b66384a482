"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np


def jacobi_eigh(m, tol=1e-15, max_sweeps=100):
    a = np.array(m, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    scale = math.sqrt(float(np.sum(a * a)))
    if scale == 0.0:
        return np.zeros(n), v, 0
    sweep = 0
    iu = np.triu_indices(n, 1)
    while sweep < max_sweeps:
        off = float(np.sum(a[iu] ** 2))
        if math.sqrt(2.0 * off) <= tol * scale:
            break
        sweep += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                x = a[:, p].copy()
                y = a[:, q]
                a[:, p] = c * x - s * y
                a[:, q] = s * x + c * y
                x = a[p, :].copy()
                y = a[q, :]
                a[p, :] = c * x - s * y
                a[q, :] = s * x + c * y
                x = v[:, p].copy()
                y = v[:, q]
                v[:, p] = c * x - s * y
                v[:, q] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order], sweep


def cholesky(m):
    m = np.asarray(m, dtype=np.float64)
    n = m.shape[0]
    l = np.zeros((n, n))
    for j in range(n):
        s = m[j, j] - l[j, :j] @ l[j, :j]
        if not s > 0.0:
            return None
        l[j, j] = math.sqrt(s)
        l[j + 1:, j] = (m[j + 1:, j] - l[j + 1:, :j] @ l[j, :j]) / l[j, j]
    return l


def cho_solve(l, b):
    l = np.asarray(l, dtype=np.float64)
    x = np.array(b, dtype=np.float64, copy=True)
    n = l.shape[0]
    for i in range(n):
        x[i] = (x[i] - l[i, :i] @ x[:i]) / l[i, i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - l[i + 1:, i] @ x[i + 1:]) / l[i, i]
    return x


def brute_force_binary(q, f, spins, tie_tol=1e-12):
    q = np.asarray(q, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    n = q.shape[0]
    lo = -1.0 if spins else 0.0
    scale = 1.0 + float(np.abs(f).sum()) + 0.5 * float(np.abs(q).sum())
    best, best_code = math.inf, 0
    chunk = 1 << min(n, 16)
    weights = 1 << np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
        bits = ((codes[:, None] & weights[None, :]) != 0).astype(np.float64)
        x = lo + (1.0 - lo) * bits
        vals = 0.5 * np.einsum("ij,jk,ik->i", x, q, x) - x @ f
        i = int(np.argmin(vals))
        # codes ascend, so the first hit within tolerance is the lexicographic winner
        if vals[i] < best - tie_tol * scale:
            ties = np.nonzero(vals <= vals[i] + tie_tol * scale)[0]
            best, best_code = float(vals[i]), int(codes[ties[0]])
    return best_code, best
