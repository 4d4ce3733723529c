# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the hot kernels in ``_kernels_py``.

Same signatures, same random-variate consumption order; LAPACK/BLAS calls go
through scipy's Cython bindings. Buffers are C-contiguous and handed to
Fortran routines in transposed view, which is transparent for the symmetric
matrices involved (triangle flags are swapped where it matters).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log, sqrt, fabs
from scipy.linalg.cython_blas cimport dgemm, dsyrk, dtrmm
from scipy.linalg.cython_lapack cimport dpotrf, dpotri, dpotrs

cnp.import_array()

cdef double _PIVOT_RTOL = 1e-12


def energy_grad(double[::1] x, int[::1] rows, int[::1] cols, double[::1] cvec,
                double[::1] mult, double hb, int p, double[::1] grad_out):
    """See ``_kernels_py.energy_grad``."""
    cdef int d = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] abuf = np.zeros(p * p)
    cdef double[::1] a = abuf
    cdef int u, i, j, info = 0
    cdef double maxdiag = 0.0, logdet = 0.0, lin = 0.0, v

    for u in range(d):
        i = rows[u]
        j = cols[u]
        v = x[u]
        a[i * p + j] = v
        a[j * p + i] = v
        if i == j and v > maxdiag:
            maxdiag = v
        lin += cvec[u] * x[u]

    # C-order buffer read as Fortran is the same (symmetric) matrix; factor
    # the Fortran-lower triangle, which lives in the C-upper entries.
    dpotrf('L', &p, &a[0], &p, &info)
    if info != 0:
        return np.nan, False
    cdef double mind = a[0]
    for i in range(1, p):
        if a[i * p + i] < mind:
            mind = a[i * p + i]
    if mind * mind <= _PIVOT_RTOL * maxdiag:
        return np.nan, False
    for i in range(p):
        logdet += log(a[i * p + i])
    logdet *= 2.0

    dpotri('L', &p, &a[0], &p, &info)
    if info != 0:
        return np.nan, False
    # inverse entry (i, j) with i <= j sits at C offset i*p + j
    for u in range(d):
        i = rows[u]
        j = cols[u]
        grad_out[u] = -hb * mult[u] * a[i * p + j] + cvec[u]
    return -hb * logdet + lin, True


def bg_sweep(double[:, ::1] lam, int[::1] members, int[::1] offsets,
             double[::1] tmats, int[::1] tmat_offsets,
             double[::1] z, double[::1] g):
    """See ``_kernels_py.bg_sweep``."""
    cdef int p = lam.shape[0]
    cdef int n_cliques = offsets.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] srr_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] brl_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] xsol_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] gam_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] cb_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] hb_b = np.empty(p * p)
    cdef cnp.ndarray[double, ndim=1] ab_b = np.empty(p * p)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] rest_b = np.empty(p, dtype=np.intp)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flag_b = np.zeros(p, dtype=np.uint8)
    cdef double[::1] srr = srr_b, brl = brl_b, xsol = xsol_b, gam = gam_b
    cdef double[::1] cb = cb_b, hbuf = hb_b, ab = ab_b
    cdef cnp.intp_t[::1] rest = rest_b
    cdef cnp.uint8_t[::1] flag = flag_b

    cdef int ci, k, m, t0, i, j, r, s, info, zc = 0, gc = 0
    cdef double one = 1.0, zero = 0.0, v
    cdef int ir, js

    for ci in range(n_cliques):
        t0 = offsets[ci]
        k = offsets[ci + 1] - t0
        # complement of the clique, ascending
        for i in range(k):
            flag[members[t0 + i]] = 1
        m = 0
        for i in range(p):
            if flag[i] == 0:
                rest[m] = i
                m += 1
        for i in range(k):
            flag[members[t0 + i]] = 0

        # Bartlett factor in C-lower view: sub-diagonal normals row-major,
        # then chi-square diagonal from the gamma draws.
        for i in range(k):
            for j in range(k):
                cb[i * k + j] = 0.0
        for i in range(1, k):
            for j in range(i):
                cb[i * k + j] = z[zc]
                zc += 1
        for i in range(k):
            cb[i * k + i] = sqrt(2.0 * g[gc])
            gc += 1
        # H = C^T T^T in Fortran view (cb reads as upper, tmat as lower)
        for i in range(k * k):
            hbuf[i] = tmats[tmat_offsets[ci] + i]
        dtrmm('L', 'U', 'N', 'N', &k, &k, &one, &cb[0], &k, &hbuf[0], &k)
        # A = H^T H into the Fortran-lower triangle
        dsyrk('L', 'T', &k, &k, &one, &hbuf[0], &k, &zero, &ab[0], &k)

        if m > 0:
            for s in range(m):
                js = <int>rest[s]
                for r in range(m):
                    srr[r + s * m] = lam[rest[r], js]
            for s in range(k):
                js = members[t0 + s]
                for r in range(m):
                    v = lam[rest[r], js]
                    brl[r + s * m] = v
                    xsol[r + s * m] = v
            dpotrf('L', &m, &srr[0], &m, &info)
            if info != 0:
                return ci + 1
            dpotrs('L', &m, &k, &srr[0], &m, &xsol[0], &m, &info)
            if info != 0:
                return ci + 1
            dgemm('T', 'N', &k, &k, &m, &one, &brl[0], &m, &xsol[0], &m,
                  &zero, &gam[0], &k)
        else:
            for i in range(k * k):
                gam[i] = 0.0

        for r in range(k):
            ir = members[t0 + r]
            for s in range(r + 1):
                js = members[t0 + s]
                v = ab[r + s * k] + gam[r + s * k]
                lam[ir, js] = v
                lam[js, ir] = v
    return 0


def glasso_core(double[:, ::1] s, double gamma, double[:, ::1] w,
                double[:, ::1] b_mat, double tol, double inner_tol,
                int max_inner, int max_sweeps,
                double[::1] dw_path, double[::1] obj_path):
    """See ``_kernels_py.glasso_core``."""
    cdef int p = s.shape[0]
    cdef int pm1 = p - 1
    cdef cnp.ndarray[double, ndim=1] w11_b = np.empty(max(pm1 * pm1, 1))
    cdef cnp.ndarray[double, ndim=1] s12_b = np.empty(max(pm1, 1))
    cdef cnp.ndarray[double, ndim=1] beta_b = np.empty(max(pm1, 1))
    cdef cnp.ndarray[double, ndim=1] r_b = np.empty(max(pm1, 1))
    cdef cnp.ndarray[double, ndim=1] wf_b = np.empty(p * p)
    cdef double[::1] w11 = w11_b, s12 = s12_b, beta = beta_b, rr = r_b, wf = wf_b

    cdef int sweep, sweeps = 0, converged = 0, j, i, ii, kk, it, info
    cdef double dmax, dbeta, a, old, num, new, diff, ld

    for sweep in range(max_sweeps):
        dmax = 0.0
        for j in range(p):
            ii = 0
            for i in range(p):
                if i == j:
                    continue
                s12[ii] = s[i, j]
                beta[ii] = b_mat[i, j]
                kk = 0
                for it in range(p):
                    if it == j:
                        continue
                    w11[ii * pm1 + kk] = w[i, it]
                    kk += 1
                ii += 1
            for i in range(pm1):
                rr[i] = 0.0
                for kk in range(pm1):
                    rr[i] += w11[i * pm1 + kk] * beta[kk]
            for it in range(max_inner):
                dbeta = 0.0
                for kk in range(pm1):
                    a = w11[kk * pm1 + kk]
                    old = beta[kk]
                    num = s12[kk] - (rr[kk] - a * old)
                    if num > gamma:
                        new = (num - gamma) / a
                    elif num < -gamma:
                        new = (num + gamma) / a
                    else:
                        new = 0.0
                    if new != old:
                        beta[kk] = new
                        diff = new - old
                        for i in range(pm1):
                            rr[i] += diff * w11[i * pm1 + kk]
                        if fabs(diff) > dbeta:
                            dbeta = fabs(diff)
                if dbeta < inner_tol:
                    break
            ii = 0
            for i in range(p):
                if i == j:
                    continue
                diff = fabs(rr[ii] - w[i, j])
                if diff > dmax:
                    dmax = diff
                w[i, j] = rr[ii]
                w[j, i] = rr[ii]
                b_mat[i, j] = beta[ii]
                ii += 1
        sweeps = sweep + 1
        for i in range(p):
            for kk in range(p):
                wf[i * p + kk] = w[i, kk]
        info = 0
        dpotrf('L', &p, &wf[0], &p, &info)
        if info == 0:
            ld = 0.0
            for i in range(p):
                ld += log(wf[i * p + i])
            obj_path[sweep] = 2.0 * ld
        else:
            obj_path[sweep] = np.nan
        dw_path[sweep] = dmax
        if dmax < tol:
            converged = 1
            break
    return sweeps, converged
