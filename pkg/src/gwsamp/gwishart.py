"""GWishart density machinery and the block Gibbs sampler.

The distribution over precision matrices constrained to a graph ``G`` has
unnormalized density

    f(L) = |L|^((b-2)/2) * exp(-tr(D L) / 2),   L in the PD cone with
                                                L[i,j] = 0 off the edges.

Everything here works on the *energy* ``E = -log f`` and its derivatives with
respect to the free coordinates (the graph's free index set, row-wise upper
triangular). The block Gibbs sampler resamples clique blocks from conditional
Wisharts; a sweep plan precomputes per-clique factors so the hot loop runs in
the selected kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels, linalg
from .errors import DegenerateTrace, NonConvergence, NotPositiveDefinite, StepOutOfCone
from .graphs import CliqueCover, FreeIndexSet, Graph, free_index_set


@dataclass(frozen=True)
class GWishartParams:
    """Degrees of freedom ``b``, inverse-scale ``d_scale``, and the graph."""

    b: float
    d_scale: np.ndarray
    graph: Graph
    free: FreeIndexSet = field(init=False)

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("degrees of freedom must be positive")
        d = np.asarray(self.d_scale, dtype=np.float64)
        if d.shape != (self.graph.p, self.graph.p):
            raise ValueError("scale matrix and graph dimensions differ")
        object.__setattr__(self, "d_scale", linalg.sym(d))
        linalg.cholesky(self.d_scale)  # PD check
        object.__setattr__(self, "free", free_index_set(self.graph))

    @property
    def p(self) -> int:
        return self.graph.p

    # derivative helpers shared by the energy functions and the HMC target
    @property
    def half_shape(self) -> float:
        return (self.b - 2.0) / 2.0

    def linear_coeffs(self) -> np.ndarray:
        """Coefficients of the trace term on free coords: mult * D / 2."""
        return 0.5 * self.free.mult * self.d_scale[self.free.rows, self.free.cols]


def posterior_params(prior: GWishartParams, data_gram: np.ndarray, n: int) -> GWishartParams:
    """Conjugate update: ``(b, D)`` becomes ``(b + n, D + data_gram)``."""
    gram = linalg.sym(np.asarray(data_gram, dtype=np.float64))
    return GWishartParams(prior.b + n, prior.d_scale + gram, prior.graph)


class PrecisionState:
    """A precision matrix respecting a graph's zero pattern, with cached factor."""

    __slots__ = ("graph", "lam", "_chol")

    def __init__(self, graph: Graph, lam: np.ndarray, validate: bool = True):
        lam = np.asarray(lam, dtype=np.float64)
        if validate:
            if lam.shape != (graph.p, graph.p):
                raise ValueError("matrix and graph dimensions differ")
            if not np.array_equal(lam, lam.T):
                raise ValueError("precision must be exactly symmetric")
            off = ~graph.adj & ~np.eye(graph.p, dtype=bool)
            if np.any(lam[off] != 0.0):
                raise ValueError("nonzero entry at a non-edge")
        self.graph = graph
        self.lam = lam
        self._chol = None

    @property
    def chol(self) -> linalg.CholFactor:
        if self._chol is None:
            self._chol = linalg.cholesky(self.lam)
        return self._chol

    def vec(self, free: FreeIndexSet) -> np.ndarray:
        return free.gather(self.lam)

    @classmethod
    def identity(cls, graph: Graph) -> "PrecisionState":
        return cls(graph, np.eye(graph.p), validate=False)

    @classmethod
    def from_vec(cls, graph: Graph, free: FreeIndexSet, x: np.ndarray) -> "PrecisionState":
        return cls(graph, free.scatter(x), validate=False)


def energy(state: PrecisionState, params: GWishartParams) -> float:
    """E = -((b-2)/2) logdet(L) + tr(D L)/2."""
    ld = linalg.logdet_pd(state.chol)
    return -params.half_shape * ld + 0.5 * float(np.sum(params.d_scale * state.lam))


def grad_energy(state: PrecisionState, params: GWishartParams) -> np.ndarray:
    """Gradient over free coords; edges carry the symmetric-pair factor 2."""
    free = params.free
    a = linalg.inv_pd(state.chol)
    return -params.half_shape * free.mult * a[free.rows, free.cols] + params.linear_coeffs()


def hessian_energy(state: PrecisionState, params: GWishartParams) -> np.ndarray:
    """Hessian over free coords (zero when b = 2: the energy is then linear)."""
    free = params.free
    a = linalg.inv_pd(state.chol)
    i, j = free.rows, free.cols
    term1 = a[np.ix_(i, i)] * a[np.ix_(j, j)]
    term2 = a[np.ix_(i, j)] * a[np.ix_(j, i)]
    offd = (~free.diag_mask).astype(np.float64)
    h = params.half_shape * free.mult[:, None] * (term1 + offd[None, :] * term2)
    return linalg.sym(h)


# ---------------------------------------------------------------------------
# block Gibbs


@dataclass(frozen=True)
class SweepPlan:
    """Precomputed per-clique data for block Gibbs sweeps.

    ``tmats`` holds, per clique, the inverse upper Cholesky factor of the
    clique block of ``d_scale`` (row-major); ``gamma_shapes`` the Bartlett
    gamma shape parameters, clique by clique.
    """

    members: np.ndarray
    offsets: np.ndarray
    tmats: np.ndarray
    tmat_offsets: np.ndarray
    gamma_shapes: np.ndarray
    n_normals: int

    @staticmethod
    def build(params: GWishartParams, cover: CliqueCover) -> "SweepPlan":
        d = params.d_scale
        diag_only = not np.any(d[~np.eye(params.p, dtype=bool)])
        members, offsets = [], [0]
        tmats, tmat_offsets = [], [0]
        shapes = []
        for c in cover:
            k = c.size
            members.append(c)
            offsets.append(offsets[-1] + k)
            if diag_only:
                t = np.diag(1.0 / np.sqrt(d[c, c]))
            else:
                t = linalg.inv_upper(linalg.cholesky(d[np.ix_(c, c)]).factor)
            tmats.append(t.ravel())
            tmat_offsets.append(tmat_offsets[-1] + k * k)
            shapes.append((params.b + k - 1 - np.arange(k)) / 2.0)
        n_normals = sum(k * (k - 1) // 2 for k in cover.sizes())
        return SweepPlan(
            members=np.concatenate(members).astype(np.int32),
            offsets=np.asarray(offsets, dtype=np.int32),
            tmats=np.concatenate(tmats) if tmats else np.zeros(0),
            tmat_offsets=np.asarray(tmat_offsets, dtype=np.int32),
            gamma_shapes=np.concatenate(shapes) if shapes else np.zeros(0),
            n_normals=n_normals,
        )


def draw_sweep_variates(rng: np.random.Generator, plan: SweepPlan):
    """All normal/gamma variates one sweep consumes, in consumption order."""
    z = rng.standard_normal(plan.n_normals)
    g = rng.standard_gamma(plan.gamma_shapes)
    return z, g


def sweep_in_place(lam: np.ndarray, plan: SweepPlan, rng: np.random.Generator) -> None:
    """Run one block-Gibbs sweep on ``lam`` (modified in place)."""
    z, g = draw_sweep_variates(rng, plan)
    status = kernels.bg_sweep(lam, plan.members, plan.offsets, plan.tmats,
                              plan.tmat_offsets, z, g)
    if status:
        raise NotPositiveDefinite(
            f"conditional block {status - 1} lost positive definiteness")


def block_gibbs_step(state: PrecisionState, params: GWishartParams,
                     cover: CliqueCover, rng: np.random.Generator) -> PrecisionState:
    """One full sweep over the cover, returning a fresh state."""
    lam = state.lam.copy()
    sweep_in_place(lam, SweepPlan.build(params, cover), rng)
    return PrecisionState(state.graph, lam, validate=False)


def sample_block_gibbs(params: GWishartParams, cover: CliqueCover,
                       init: PrecisionState, n_samples: int, burn_in: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Trace of free-coordinate vectors after ``burn_in`` warmup sweeps."""
    plan = SweepPlan.build(params, cover)
    free = params.free
    lam = init.lam.copy()
    for _ in range(burn_in):
        sweep_in_place(lam, plan, rng)
    out = np.empty((n_samples, free.n))
    for t in range(n_samples):
        sweep_in_place(lam, plan, rng)
        out[t] = lam[free.rows, free.cols]
    return out


# ---------------------------------------------------------------------------
# mode finding and mass matrices


def laplace_mode(params: GWishartParams, init: PrecisionState | None = None,
                 tol_scale: float = 1e-8, max_iter: int = 10_000) -> PrecisionState:
    """Energy minimizer over the free coordinates, by gradient descent.

    Backtracking halves the step until the iterate passes the Cholesky PD
    test and does not increase the energy; the step seed between iterations
    is a Barzilai-Borwein estimate. Requires ``b > 2`` so the mode is
    interior.
    """
    if params.b <= 2:
        raise ValueError("mode requires b > 2")
    free = params.free
    rows, cols = free.rows, free.cols
    cvec = params.linear_coeffs()
    mult = free.mult
    hb = params.half_shape
    p = params.p

    if init is None:
        x = np.zeros(free.n)
        x[free.diag_mask] = (params.b - 2 + p) / np.diagonal(params.d_scale)
    else:
        x = init.vec(free).copy()

    grad = np.empty(free.n)
    e, ok = kernels.energy_grad(x, rows, cols, cvec, mult, hb, p, grad)
    if not ok:
        raise NotPositiveDefinite("initial point is not positive definite")
    step = 1.0 / (1.0 + float(np.max(np.abs(grad))))
    gnew = np.empty(free.n)
    for _ in range(max_iter):
        if np.max(np.abs(grad)) <= tol_scale * (1.0 + abs(e)):
            return PrecisionState.from_vec(params.graph, free, x)
        trial = step
        while True:
            xn = x - trial * grad
            en, ok = kernels.energy_grad(xn, rows, cols, cvec, mult, hb, p, gnew)
            if ok and en <= e:
                break
            trial /= 2.0
            if trial < 1e-18:
                raise StepOutOfCone("line search exhausted without a PD iterate")
        dx = xn - x
        dg = gnew - grad
        x, e = xn, en
        grad, gnew = gnew.copy(), grad
        denom = float(dx @ dg)
        step = float(dx @ dx) / denom if denom > 0 else trial * 2.0
    raise NonConvergence(f"no stationary point within {max_iter} iterations")


@dataclass(frozen=True)
class MassFactor:
    """HMC mass matrix with its upper Cholesky factor and dense inverse."""

    mass: np.ndarray
    chol: linalg.CholFactor
    inv_mass: np.ndarray

    @property
    def dim(self) -> int:
        return self.mass.shape[0]

    @staticmethod
    def from_matrix(m: np.ndarray) -> "MassFactor":
        c = linalg.cholesky(m)
        return MassFactor(m, c, linalg.inv_pd(c))


def _precision_of_rows(xs: np.ndarray) -> np.ndarray:
    """Inverse of the (n-1)-normalized covariance of sample rows.

    On factorization failure, retries once with ridge jitter
    ``1e-10 * mean(diag)``; a second failure raises DegenerateTrace.
    """
    n = xs.shape[0]
    xc = xs - xs.mean(axis=0)
    cov = linalg.sym(xc.T @ xc / (n - 1))
    try:
        return linalg.inv_pd(linalg.cholesky(cov))
    except NotPositiveDefinite:
        jitter = 1e-10 * float(np.mean(np.diagonal(cov)))
        try:
            return linalg.inv_pd(linalg.cholesky(
                cov + jitter * np.eye(cov.shape[0])))
        except NotPositiveDefinite as exc:
            raise DegenerateTrace("sample covariance is rank deficient") from exc


def mass_identity(dim: int) -> MassFactor:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    eye = np.eye(dim)
    return MassFactor(eye, linalg.CholFactor(eye.copy()), eye.copy())


def mass_from_trace(trace: np.ndarray) -> MassFactor:
    """Inverse empirical covariance of a preliminary sampling run."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim != 2 or trace.shape[0] <= trace.shape[1]:
        raise ValueError("trace must have more rows than coordinates")
    return MassFactor.from_matrix(_precision_of_rows(trace))


def mass_laplace(params: GWishartParams, mode: PrecisionState) -> MassFactor:
    """Mass = energy Hessian at the mode (inverse Laplace covariance)."""
    h = hessian_energy(mode, params)
    try:
        return MassFactor.from_matrix(h)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite("Hessian is not positive definite at the "
                                  "claimed mode") from exc


def wishart_full_precision(params: GWishartParams, n_prelim: int,
                           rng: np.random.Generator) -> np.ndarray:
    """Empirical precision of full-triangle vectorized unconstrained draws.

    Samples ``n_prelim`` matrices from the *full-graph* Wishart with the
    parameters' ``(b, d_scale)``, vectorizes each over the complete upper
    triangle, and inverts the empirical covariance. The result stays valid
    when the graph changes: conditioning on removed edges is a submatrix
    selection (see :func:`mass_from_full_precision`).
    """
    p = params.p
    n_w = p * (p + 1) // 2
    if n_prelim <= n_w:
        raise ValueError("need more preliminary draws than triangle entries")
    draws = linalg.sample_wishart_batch(rng, params.b, params.d_scale, n_prelim)
    iu = np.triu_indices(p)
    return _precision_of_rows(draws[:, iu[0], iu[1]])


def mass_from_full_precision(k_full: np.ndarray, free: FreeIndexSet) -> MassFactor:
    """Restrict a full-triangle precision to a graph's free coordinates."""
    pos = free.positions_in_full()
    return MassFactor.from_matrix(k_full[np.ix_(pos, pos)])


def mass_wishart_conditioned(params: GWishartParams, n_prelim: int,
                             rng: np.random.Generator) -> MassFactor:
    """Mass from unconstrained Wishart draws, conditioned on missing edges."""
    k_full = wishart_full_precision(params, n_prelim, rng)
    return mass_from_full_precision(k_full, params.free)
