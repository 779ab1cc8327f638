# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
# cython: initializedcheck=False
"""Compiled inner loop of the damped Gauss-Newton solver.

Operates on factored support-restricted ensembles (z^T B_i z =
(Cz)_i^2 + (Dz)_i^2) and mirrors the NumPy loop in ``gespar.dgn`` step for
step; backend selection happens in ``gespar.backend``.  The least-squares
subproblem uses LAPACK dgelsd (rank-revealing SVD with minimum-norm
solution), the same routine behind numpy.linalg.lstsq.
"""

import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport dgelsd


cdef double _eval_g(const double[:, ::1] C, const double[:, ::1] D,
                    const double[::1] y, const double[::1] sw,
                    const double[::1] z, int nmeas, int ncols) noexcept nogil:
    cdef int i, j
    cdef double ci, di, h, acc = 0.0
    for i in range(nmeas):
        ci = 0.0
        di = 0.0
        for j in range(ncols):
            ci += C[i, j] * z[j]
            di += D[i, j] * z[j]
        h = sw[i] * (ci * ci + di * di - y[i])
        acc += h * h
    return acc


def run_rank2(const double[:, ::1] C, const double[:, ::1] D,
              const double[::1] y, const double[::1] sw,
              const double[::1] z0,
              double eps, int max_iters, double t0,
              double rcond, int ls_cap,
              double[::1] g_after, double[::1] grad_norm,
              double[::1] grad_dot_d, double[::1] t_out,
              double[::1] step_norm, double[::1] z_norm,
              double[::1] min_singular):
    """Run the damped Gauss-Newton loop.

    Trace buffers must hold ``max_iters`` entries; the first ``iters`` are
    filled.  Returns ``(z, g0, iters, reason)`` with reason codes
    0=step_tol, 1=max_iters, 2=line_search_stall, 3=stationary.
    """
    cdef int nmeas = C.shape[0]
    cdef int ncols = C.shape[1]
    cdef int minmn = nmeas if nmeas < ncols else ncols
    cdef int maxmn = nmeas if nmeas > ncols else ncols

    z_arr = np.array(z0, dtype=np.float64, copy=True)
    znew_arr = np.empty(ncols)
    d_arr = np.empty(ncols)
    grad_arr = np.empty(ncols)
    hw_arr = np.empty(nmeas)
    jf_arr = np.empty((ncols, nmeas))   # column-major nmeas x ncols for LAPACK
    b_arr = np.empty(maxmn)
    sing_arr = np.empty(minmn)

    cdef double[::1] z = z_arr
    cdef double[::1] znew = znew_arr
    cdef double[::1] d = d_arr
    cdef double[::1] grad = grad_arr
    cdef double[::1] hw = hw_arr
    cdef double[:, ::1] jf = jf_arr
    cdef double[::1] b = b_arr
    cdef double[::1] sing = sing_arr

    # LAPACK workspace query
    cdef int m = nmeas, n_ = ncols, nrhs = 1, lda = nmeas, ldb = maxmn
    cdef int rank = 0, info = 0, lwork = -1
    cdef double rc = rcond
    cdef double wk_query = 0.0
    cdef int iwk_query = 0
    dgelsd(&m, &n_, &nrhs, &jf[0, 0], &lda, &b[0], &ldb, &sing[0], &rc,
           &rank, &wk_query, &lwork, &iwk_query, &info)
    if info != 0:
        raise np.linalg.LinAlgError(f"dgelsd workspace query failed (info={info})")
    lwork = int(wk_query)
    work_arr = np.empty(lwork)
    iwork_arr = np.empty(max(1, iwk_query), dtype=np.intc)
    cdef double[::1] work = work_arr
    cdef int[::1] iwork = iwork_arr

    cdef double g_z = _eval_g(C, D, y, sw, z, nmeas, ncols)
    cdef double g0 = g_z
    cdef double t_prev = t0
    cdef int iters = 0
    cdef int reason = 1            # max_iters unless a break overrides
    cdef int k, i, j, mm, accepted
    cdef double ci, di, q, swi2, gdd, gn, smin, u, t, gnew, stepn, zn, diff

    for k in range(max_iters):
        # residuals, scaled Jacobian (built transposed: jf[j, i]), gradient, rhs
        for i in range(nmeas):
            ci = 0.0
            di = 0.0
            for j in range(ncols):
                ci += C[i, j] * z[j]
                di += D[i, j] * z[j]
            q = ci * ci + di * di
            hw[i] = sw[i] * (q - y[i])
            b[i] = sw[i] * (q + y[i])
            swi2 = 2.0 * sw[i]
            for j in range(ncols):
                jf[j, i] = swi2 * (ci * C[i, j] + di * D[i, j])
        gn = 0.0
        for j in range(ncols):
            ci = 0.0
            for i in range(nmeas):
                ci += jf[j, i] * hw[i]
            grad[j] = 2.0 * ci
            gn += grad[j] * grad[j]
        gn = sqrt(gn)

        # minimum-norm least squares; jf and b are rebuilt next iteration,
        # so dgelsd may overwrite them
        dgelsd(&m, &n_, &nrhs, &jf[0, 0], &lda, &b[0], &ldb, &sing[0], &rc,
               &rank, &work[0], &lwork, &iwork[0], &info)
        if info != 0:
            raise np.linalg.LinAlgError(f"dgelsd failed (info={info})")
        smin = sing[minmn - 1]

        gdd = 0.0
        for j in range(ncols):
            d[j] = z[j] - b[j]
            gdd += grad[j] * d[j]
        if not gdd > 0.0:
            reason = 3             # stationary
            break

        # backtracking from the doubling warm start
        u = 2.0 * t_prev
        if u > 1.0:
            u = 1.0
        t = u
        accepted = 0
        for mm in range(ls_cap + 1):
            for j in range(ncols):
                znew[j] = z[j] - t * d[j]
            gnew = _eval_g(C, D, y, sw, znew, nmeas, ncols)
            if gnew < g_z - 0.5 * t * gdd:
                accepted = 1
                break
            t *= 0.5
        if not accepted:
            reason = 2             # line_search_stall
            break

        stepn = 0.0
        zn = 0.0
        for j in range(ncols):
            diff = znew[j] - z[j]
            stepn += diff * diff
            zn += znew[j] * znew[j]
            z[j] = znew[j]
        stepn = sqrt(stepn)
        zn = sqrt(zn)

        g_after[k] = gnew
        grad_norm[k] = gn
        grad_dot_d[k] = gdd
        t_out[k] = t
        step_norm[k] = stepn
        z_norm[k] = zn
        min_singular[k] = smin
        iters = k + 1
        g_z = gnew
        t_prev = t
        if stepn < eps:
            reason = 0             # step_tol
            break

    return z_arr, g0, iters, reason
