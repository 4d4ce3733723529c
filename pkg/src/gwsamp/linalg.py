"""Dense symmetric linear algebra and matrix-variate sampling primitives.

Symmetric matrices are plain float64 ``ndarray``s kept exactly symmetric by
construction. Cholesky factors are wrapped in :class:`CholFactor` so that
downstream code can tell "already factored" apart from raw matrices.

The Wishart here uses the density convention

    p(A) ∝ |A|^((b-2)/2) * exp(-tr(D A) / 2)     (A positive definite)

i.e. ``b`` acts as a shape offset and ``D`` as an inverse scale. This maps to
the textbook Wishart with degrees of freedom ``n = b + dim - 1`` and scale
``V = D^{-1}``; the mean is ``(b + dim - 1) * D^{-1}``. The conversion is
moment-tested rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NotPositiveDefinite

# Relative pivot threshold of the positive-definiteness test: a factorization
# whose smallest pivot is <= PIVOT_RTOL * max(diag) is rejected.
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class CholFactor:
    """Upper-triangular factor ``phi`` with ``phi.T @ phi`` = source matrix."""

    factor: np.ndarray

    @property
    def dim(self) -> int:
        return self.factor.shape[0]


def sym(m: np.ndarray) -> np.ndarray:
    """Exactly symmetric copy of ``m`` (averages the two triangles)."""
    return (m + m.T) / 2.0


def cholesky(m: np.ndarray) -> CholFactor:
    """Upper-triangular Cholesky factor; doubles as the PD test.

    Raises
    ------
    NotPositiveDefinite
        If LAPACK reports a non-positive pivot, or any pivot falls below
        ``PIVOT_RTOL * max(diag(m))``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise NotPositiveDefinite("matrix contains non-finite entries")
    try:
        u = scipy.linalg.cholesky(m, lower=False, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    d = np.diagonal(u)
    if np.min(d) ** 2 <= PIVOT_RTOL * np.max(np.diagonal(m)):
        raise NotPositiveDefinite("pivot below relative threshold")
    return CholFactor(u)


def is_pd(m: np.ndarray) -> bool:
    try:
        cholesky(m)
    except NotPositiveDefinite:
        return False
    return True


def logdet_pd(f: CholFactor) -> float:
    """log-determinant of the source matrix: ``2 * sum(log diag(phi))``."""
    return 2.0 * float(np.sum(np.log(np.diagonal(f.factor))))


def inv_pd(f: CholFactor) -> np.ndarray:
    """Symmetric inverse of the source matrix from its factor."""
    inv, info = scipy.linalg.lapack.dpotri(f.factor, lower=0)
    if info != 0:
        raise NotPositiveDefinite(f"dpotri failed with info={info}")
    return np.triu(inv) + np.triu(inv, 1).T


def solve_pd(f: CholFactor, b: np.ndarray) -> np.ndarray:
    """Solve ``M x = b`` given the factor of ``M``."""
    return scipy.linalg.cho_solve((f.factor, False), b, check_finite=False)


def inv_upper(u: np.ndarray) -> np.ndarray:
    """Inverse of an upper-triangular matrix (LAPACK dtrtri)."""
    out, info = scipy.linalg.lapack.dtrtri(u, lower=0)
    if info != 0:
        raise NotPositiveDefinite(f"dtrtri failed with info={info}")
    return out


def sample_std_gaussian(rng: np.random.Generator, d: int) -> np.ndarray:
    """``d`` i.i.d. standard normal draws."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return rng.standard_normal(d)


def sample_mvn_precision(rng: np.random.Generator, precision_chol: CholFactor) -> np.ndarray:
    """One draw from N(0, M^{-1}) given the upper factor of the precision M.

    Solves ``phi y = z`` for standard-normal ``z``, so
    cov(y) = phi^{-1} phi^{-T} = (phi^T phi)^{-1} = M^{-1}.
    """
    z = rng.standard_normal(precision_chol.dim)
    return scipy.linalg.solve_triangular(precision_chol.factor, z, lower=False,
                                         check_finite=False)


def _bartlett_factors(rng: np.random.Generator, n_dof: float, dim: int,
                      size: int) -> np.ndarray:
    """Stack of lower-triangular Bartlett factors C with C C^T ~ W(n_dof, I).

    Draw order (fixed; other samplers rely on it): all sub-diagonal normals
    in row-major order per draw, then the chi-square diagonals.
    """
    c = np.zeros((size, dim, dim))
    rows, cols = np.tril_indices(dim, -1)
    if rows.size:
        c[:, rows, cols] = rng.standard_normal((size, rows.size))
    shapes = (n_dof - np.arange(dim)) / 2.0
    chi2 = 2.0 * rng.standard_gamma(np.broadcast_to(shapes, (size, dim)))
    c[:, np.arange(dim), np.arange(dim)] = np.sqrt(chi2)
    return c


def sample_wishart(rng: np.random.Generator, b: float, d_scale: np.ndarray) -> np.ndarray:
    """One draw with density ∝ |A|^((b-2)/2) exp(-tr(d_scale A)/2)."""
    return sample_wishart_batch(rng, b, d_scale, 1)[0]


def sample_wishart_batch(rng: np.random.Generator, b: float, d_scale: np.ndarray,
                         size: int) -> np.ndarray:
    """Stack of ``size`` draws via the Bartlett decomposition.

    Uses standard-Wishart degrees of freedom ``n = b + dim - 1`` and standard
    scale ``V = d_scale^{-1}``; ``V`` is applied through the inverse of the
    upper Cholesky factor of ``d_scale`` so ``d_scale`` is never inverted
    explicitly.
    """
    if b <= 0:
        raise ValueError("degrees of freedom must be positive")
    d_scale = np.asarray(d_scale, dtype=np.float64)
    dim = d_scale.shape[0]
    t = inv_upper(cholesky(d_scale).factor)  # t @ t.T = d_scale^{-1}
    c = _bartlett_factors(rng, b + dim - 1, dim, size)
    f = np.einsum("ij,njk->nik", t, c, optimize=True)
    a = np.einsum("nik,njk->nij", f, f, optimize=True)
    # mirror one triangle so every draw is exactly symmetric
    iu = np.triu_indices(dim, 1)
    a[:, iu[1], iu[0]] = a[:, iu[0], iu[1]]
    return a
