"""Pure numpy/scipy implementations of the hot kernels.

This module is the fallback backend used when the compiled extension is
unavailable (or forced via ``GWSAMP_PURE_PYTHON=1``). Function signatures and
random-variate consumption order match ``_kernels.pyx`` exactly; results agree
up to BLAS rounding differences.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

_PIVOT_RTOL = 1e-12


def energy_grad(x, rows, cols, cvec, mult, hb, p, grad_out):
    """Unnormalized negative-log-density value and gradient on free coords.

    Embeds ``x`` into a dense symmetric matrix, runs a Cholesky PD check,
    and evaluates  E = -hb * logdet + cvec . x  with gradient
    -hb * mult * inv[rows, cols] + cvec. Returns ``(energy, ok)``;
    ``ok=False`` means the embedded matrix was not positive definite.
    """
    lam = np.zeros((p, p))
    lam[rows, cols] = x
    lam[cols, rows] = x
    c, info = scipy.linalg.lapack.dpotrf(lam, lower=0)
    if info != 0:
        return np.nan, False
    d = np.diagonal(c)
    if np.min(d) ** 2 <= _PIVOT_RTOL * np.max(np.diagonal(lam)):
        return np.nan, False
    logdet = 2.0 * float(np.sum(np.log(d)))
    inv, info = scipy.linalg.lapack.dpotri(c, lower=0)
    if info != 0:
        return np.nan, False
    grad_out[:] = -hb * mult * inv[rows, cols] + cvec
    energy = -hb * logdet + float(cvec @ x)
    return energy, True


def bg_sweep(lam, members, offsets, tmats, tmat_offsets, z, g):
    """One in-place block-Gibbs sweep over a clique cover.

    For each clique I with complement R the update is
    ``lam[I, I] = A + lam[I,R] lam[R,R]^{-1} lam[R,I]`` where ``A`` is a
    Wishart draw built from the pre-drawn variates ``z`` (sub-diagonal
    normals, row-major per clique) and ``g`` (gamma draws for the Bartlett
    diagonal). Returns 0 on success, or 1 + clique index whose complement
    block failed to factor.
    """
    p = lam.shape[0]
    n_cliques = offsets.size - 1
    in_clique = np.zeros(p, dtype=bool)
    zc = 0
    gc = 0
    for ci in range(n_cliques):
        idx = members[offsets[ci]:offsets[ci + 1]]
        k = idx.size
        t = tmats[tmat_offsets[ci]:tmat_offsets[ci + 1]].reshape(k, k)
        nz = k * (k - 1) // 2
        c = np.zeros((k, k))
        if nz:
            c[np.tril_indices(k, -1)] = z[zc:zc + nz]
        zc += nz
        c[np.arange(k), np.arange(k)] = np.sqrt(2.0 * g[gc:gc + k])
        gc += k
        f = t @ c
        blk = f @ f.T
        in_clique[idx] = True
        rest = np.nonzero(~in_clique)[0]
        in_clique[idx] = False
        if rest.size:
            srr = lam[np.ix_(rest, rest)]
            brl = lam[np.ix_(rest, idx)]
            try:
                cf = scipy.linalg.cho_factor(srr, lower=True, check_finite=False)
            except scipy.linalg.LinAlgError:
                return ci + 1
            blk = blk + brl.T @ scipy.linalg.cho_solve(cf, brl, check_finite=False)
        blk = np.triu(blk) + np.triu(blk, 1).T
        lam[np.ix_(idx, idx)] = blk
    return 0


def glasso_core(s, gamma, w, b_mat, tol, inner_tol, max_inner, max_sweeps,
                dw_path, obj_path):
    """Covariance-side graphical-lasso block coordinate ascent.

    Cycles over columns of ``w``; each column subproblem is an l1 regression
    solved by cyclic coordinate descent with soft thresholding, warm-started
    from ``b_mat``. Both ``w`` and ``b_mat`` are updated in place. Records per
    sweep the max entry change of ``w`` and log det ``w`` (the quantity the
    block updates ascend). Returns ``(sweeps_done, converged)``.
    """
    p = s.shape[0]
    sweeps = 0
    converged = 0
    for sweep in range(max_sweeps):
        dmax = 0.0
        for j in range(p):
            keep = np.arange(p) != j
            w11 = w[np.ix_(keep, keep)]
            s12 = s[keep, j]
            beta = b_mat[keep, j].copy()
            r = w11 @ beta
            for _ in range(max_inner):
                dbeta = 0.0
                for kk in range(p - 1):
                    a = w11[kk, kk]
                    old = beta[kk]
                    num = s12[kk] - (r[kk] - a * old)
                    new = np.sign(num) * max(abs(num) - gamma, 0.0) / a
                    if new != old:
                        beta[kk] = new
                        r += (new - old) * w11[:, kk]
                        dbeta = max(dbeta, abs(new - old))
                if dbeta < inner_tol:
                    break
            dmax = max(dmax, float(np.max(np.abs(r - w[keep, j]))) if p > 1 else 0.0)
            w[keep, j] = r
            w[j, keep] = r
            b_mat[keep, j] = beta
        sweeps = sweep + 1
        cw, info = scipy.linalg.lapack.dpotrf(w, lower=0)
        obj_path[sweep] = (2.0 * float(np.sum(np.log(np.diagonal(cw))))
                           if info == 0 else np.nan)
        dw_path[sweep] = dmax
        if dmax < tol:
            converged = 1
            break
    return sweeps, converged
