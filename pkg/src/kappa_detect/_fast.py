"""Optional numba-compiled inner loop for the projection solver.

The kernel mirrors the pure-numpy iteration in `solver` exactly: constant
exploration steps, then polish with step halving and re-centering on the
incumbent.  Importing this module never fails; `AVAILABLE` says whether the
compiled path can be used.
"""

from __future__ import annotations

import os

import numpy as np

AVAILABLE = False

if not os.environ.get("KAPPA_DETECT_PURE_PYTHON"):
    try:
        from numba import njit

        AVAILABLE = True
    except ImportError:  # pragma: no cover
        pass

if AVAILABLE:

    @njit(cache=True)
    def _mgs(a):
        """Modified Gram-Schmidt with a second pass, in place."""
        n, k = a.shape
        for j in range(k):
            for _ in range(2):
                for i in range(j):
                    dot = 0.0
                    for t in range(n):
                        dot += a[t, i] * a[t, j]
                    for t in range(n):
                        a[t, j] -= dot * a[t, i]
            norm = 0.0
            for t in range(n):
                norm += a[t, j] * a[t, j]
            norm = np.sqrt(norm)
            for t in range(n):
                a[t, j] /= norm
        return a

    @njit(cache=True)
    def solve_kernel(
        directions,
        p0,
        step_size,
        max_iters,
        tol,
        patience,
        rescue,
        explore_iters,
        trace,
        collect_trace,
    ):
        m, n = directions.shape
        k = p0.shape[1]
        p = p0.copy()

        sp = directions @ p
        norms = np.empty(m)
        for i in range(m):
            acc = 0.0
            for j in range(k):
                acc += sp[i, j] * sp[i, j]
            norms[i] = np.sqrt(acc)
        best_kappa = norms.min()
        best_p = p.copy()

        alpha = step_size
        alpha_floor = step_size * 1e-7
        stall_ref = best_kappa
        stall = 0
        in_polish = False

        it = 0
        while it < max_iters:
            if not in_polish and it >= explore_iters:
                in_polish = True
                alpha = step_size / 4.0
                p = best_p.copy()
                sp = directions @ p
                for i in range(m):
                    acc = 0.0
                    for j in range(k):
                        acc += sp[i, j] * sp[i, j]
                    norms[i] = np.sqrt(acc)
                stall_ref = best_kappa
                stall = 0

            worst = 0
            for i in range(1, m):
                if norms[i] < norms[worst]:
                    worst = i
            c = sp[worst].copy()
            cn2 = 0.0
            for j in range(k):
                cn2 += c[j] * c[j]
            s_star = directions[worst]

            if cn2 > 0.0:
                beta = 2.0 * alpha + alpha * alpha
                gamma = (1.0 / np.sqrt(1.0 + beta * cn2) - 1.0) / cn2
                work = np.empty((n, k))
                mc = np.zeros(n)
                for t in range(n):
                    acc = 0.0
                    for j in range(k):
                        v = p[t, j] + alpha * s_star[t] * c[j]
                        work[t, j] = v
                        acc += v * c[j]
                    mc[t] = acc
                for t in range(n):
                    for j in range(k):
                        p[t, j] = work[t, j] + gamma * mc[t] * c[j]
            else:
                for t in range(n):
                    for j in range(k):
                        p[t, j] += alpha * s_star[t] * rescue[j]
                p = _mgs(p)

            sp = directions @ p
            kappa = np.inf
            for i in range(m):
                acc = 0.0
                for j in range(k):
                    acc += sp[i, j] * sp[i, j]
                norms[i] = np.sqrt(acc)
                if norms[i] < kappa:
                    kappa = norms[i]

            if kappa > best_kappa:
                best_kappa = kappa
                best_p = p.copy()
            if collect_trace:
                trace[it] = best_kappa
            it += 1

            if in_polish:
                if best_kappa - stall_ref >= tol:
                    stall_ref = best_kappa
                    stall = 0
                else:
                    stall += 1
                    if stall >= patience:
                        alpha *= 0.5
                        stall = 0
                        if alpha < alpha_floor:
                            break
                        p = best_p.copy()
                        sp = directions @ p
                        for i in range(m):
                            acc = 0.0
                            for j in range(k):
                                acc += sp[i, j] * sp[i, j]
                            norms[i] = np.sqrt(acc)

        return best_p, best_kappa, it
