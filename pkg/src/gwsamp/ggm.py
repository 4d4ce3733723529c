"""Spike-and-slab Gaussian graphical model: joint (graph, precision, s) sampling.

The model places a Bernoulli(s) prior on each edge, a GWishart slab on the
precision given the graph, and a Beta hyperprior on ``s``. One sampler
iteration refreshes the precision given the graph (block Gibbs or HMC on the
conjugate posterior), proposes single-edge flips with a reversible-jump move,
and Gibbs-updates ``s``.

The edge move edits one Cholesky element: relabel so the flipped pair sits in
the last two positions, replace the factor entry coupling them (a Gaussian
proposal centred at the value that zeroes the precision entry), and map back.
Only the flipped entry and one diagonal change, and the determinant is
preserved exactly, so density ratios reduce to trace terms. The intractable
prior-normalizer ratio is cancelled exchange-style with an auxiliary draw
from the proposed graph's prior (a few block-Gibbs sweeps), mirrored through
the same Cholesky edit. The construction is validated against closed-form
posteriors in the tests rather than trusted on derivation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import NotPositiveDefinite
from .graphs import CliqueCover, FreeIndexSet, Graph, build_cover, free_index_set
from .gwishart import (GWishartParams, MassFactor, PrecisionState, SweepPlan,
                       mass_from_full_precision, posterior_params, sweep_in_place,
                       wishart_full_precision)
from .hmc import GWishartTarget, HmcConfig, hmc_step


@dataclass(frozen=True)
class DataSummary:
    """Observation count, dimension, and Gram matrix of (centered) rows."""

    n: int
    p: int
    gram: np.ndarray

    def __post_init__(self):
        g = linalg.sym(np.asarray(self.gram, dtype=np.float64))
        if g.shape != (self.p, self.p):
            raise ValueError("gram matrix has wrong shape")
        object.__setattr__(self, "gram", g)

    @staticmethod
    def from_rows(y: np.ndarray) -> "DataSummary":
        y = np.asarray(y, dtype=np.float64)
        return DataSummary(y.shape[0], y.shape[1], y.T @ y)


@dataclass(frozen=True)
class GgmConfig:
    """Priors and sampler settings for the joint chain.

    The GWishart prior defaults to degrees of freedom ``1 + n0`` with scale
    ``(p + n0) * I``; ``b0``/``d0_diag`` override either piece. ``inner``
    selects the precision-refresh sampler; ``cover`` is the clique-cover
    strategy used for block Gibbs refreshes and for the auxiliary prior
    sweeps of the edge move.
    """

    n0: float = 10.0
    b0: float | None = None
    d0_diag: float | None = None
    s_prior_a: float = 1.0
    s_prior_b: float = 1.0
    sigma_e: float = 0.5
    inner: str = "hmc"
    cover: str = "heuristic"
    hmc_alpha: float = 0.06
    hmc_beta: float = 1.2
    refresh_steps: int = 1
    aux_sweeps: int = 1
    mass_prelim: int = 20_000
    fixed_s: float | None = None
    init_s: float = 0.5
    proposals_per_iter: int | None = None

    def prior(self, graph: Graph) -> GWishartParams:
        b = self.b0 if self.b0 is not None else 1.0 + self.n0
        d = self.d0_diag if self.d0_diag is not None else graph.p + self.n0
        return GWishartParams(b, d * np.eye(graph.p), graph)


@dataclass
class GgmState:
    graph: Graph
    precision: PrecisionState
    s: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie strictly inside (0, 1)")


def graph_mask(g: Graph) -> int:
    """Edge bitmask: bit k set for the k-th row-wise off-diagonal pair."""
    mask = 0
    k = 0
    for i in range(g.p):
        for j in range(i + 1, g.p):
            if g.adj[i, j]:
                mask |= 1 << k
            k += 1
    return mask


def graph_from_mask(p: int, mask: int) -> Graph:
    adj = np.zeros((p, p), dtype=bool)
    k = 0
    for i in range(p):
        for j in range(i + 1, p):
            if (mask >> k) & 1:
                adj[i, j] = adj[j, i] = True
            k += 1
    return Graph(adj)


class _CoverCache:
    """Per-run memo of covers/sweep plans keyed by graph mask.

    The heuristic cover draws its permutation on first visit to a graph and
    is reused afterwards, which keeps runs deterministic and avoids
    rebuilding plans for graphs the chain revisits.
    """

    def __init__(self, strategy: str, rng: np.random.Generator, cap: int = 50_000):
        self.strategy = strategy
        self.rng = rng
        self.cap = cap
        self._covers: dict[int, CliqueCover] = {}
        self._plans: dict[tuple[int, float, int], SweepPlan] = {}

    def cover(self, g: Graph, mask: int) -> CliqueCover:
        got = self._covers.get(mask)
        if got is None:
            got = build_cover(self.strategy, self.rng, g)
            if len(self._covers) < self.cap:
                self._covers[mask] = got
        return got

    def plan(self, params: GWishartParams, mask: int, tag: int) -> SweepPlan:
        key = (mask, params.b, tag)
        got = self._plans.get(key)
        if got is None:
            got = SweepPlan.build(params, self.cover(params.graph, mask))
            if len(self._plans) < self.cap:
                self._plans[key] = got
        return got


class _Workspace:
    """Caches shared across iterations of one joint-sampler run.

    Parameter objects for visited graphs are memoized (bounded), and the
    method-4 mass reuses the single full-triangle precision ``k_full``: a
    graph change only selects a submatrix of it.
    """

    _CAP = 4096

    def __init__(self, config: GgmConfig, data: DataSummary,
                 rng: np.random.Generator, need_mass: bool):
        self.config = config
        self.data = data
        self.covers = _CoverCache(config.cover, rng)
        self._post: dict[int, GWishartParams] = {}
        self._prior: dict[int, GWishartParams] = {}
        self.k_full = None
        if need_mass:
            post_full = posterior_params(config.prior(Graph.complete(data.p)),
                                         data.gram, data.n)
            self.k_full = wishart_full_precision(post_full, config.mass_prelim, rng)

    @staticmethod
    def create(config, data, rng, need_mass: bool) -> "_Workspace":
        return _Workspace(config, data, rng, need_mass)

    def posterior(self, g: Graph, mask: int) -> GWishartParams:
        got = self._post.get(mask)
        if got is None:
            got = posterior_params(self.config.prior(g), self.data.gram, self.data.n)
            if len(self._post) < self._CAP:
                self._post[mask] = got
        return got

    def prior(self, g: Graph, mask: int) -> GWishartParams:
        got = self._prior.get(mask)
        if got is None:
            got = self.config.prior(g)
            if len(self._prior) < self._CAP:
                self._prior[mask] = got
        return got

    def mass(self, free: FreeIndexSet, mask: int) -> MassFactor:
        return mass_from_full_precision(self.k_full, free)


def refresh_precision(state: GgmState, data: DataSummary, config: GgmConfig,
                      rng: np.random.Generator,
                      workspace: _Workspace | None = None) -> GgmState:
    """Resample the precision given the graph, via the configured sampler."""
    if workspace is None:
        workspace = _Workspace.create(config, data, rng,
                                      need_mass=config.inner == "hmc")
    mask = graph_mask(state.graph)
    post = workspace.posterior(state.graph, mask)
    if config.refresh_steps <= 0:
        return state
    if config.inner == "block_gibbs":
        lam = state.precision.lam.copy()
        plan = workspace.covers.plan(post, mask, tag=1)
        for _ in range(config.refresh_steps):
            sweep_in_place(lam, plan, rng)
        prec = PrecisionState(state.graph, lam, validate=False)
    elif config.inner == "hmc":
        target = GWishartTarget(post)
        mass = workspace.mass(post.free, mask)
        cfg = HmcConfig(config.hmc_alpha, config.hmc_beta, mass)
        x = state.precision.vec(post.free)
        for _ in range(config.refresh_steps):
            x, _rep = hmc_step(x, target, cfg, rng)
        prec = PrecisionState.from_vec(state.graph, post.free, x)
    else:
        raise ValueError(f"unknown inner sampler {config.inner!r}")
    return GgmState(state.graph, prec, state.s)


def _upper_chol_permuted(lam: np.ndarray, order: np.ndarray) -> np.ndarray:
    return np.linalg.cholesky(lam[np.ix_(order, order)]).T


def _pair_order(p: int, i: int, j: int) -> np.ndarray:
    order = [v for v in range(p) if v != i and v != j]
    order.extend((i, j))
    return np.asarray(order, dtype=np.intp)


def _log_normal(x: float, mu: float, sd: float) -> float:
    return -0.5 * ((x - mu) / sd) ** 2 - math.log(sd) - 0.5 * math.log(2.0 * math.pi)


def edge_flip_move(state: GgmState, data: DataSummary, config: GgmConfig,
                   rng: np.random.Generator,
                   workspace: _Workspace | None = None,
                   pair: tuple[int, int] | None = None) -> tuple[GgmState, bool]:
    """Propose flipping one edge with the reversible-jump exchange move.

    ``pair`` fixes the proposed edge; by default one unordered pair is drawn
    uniformly. Returns the (possibly unchanged) state and an accepted flag.
    A factorization failure anywhere counts as a rejection.
    """
    p = state.graph.p
    if p < 2:
        raise ValueError("edge moves need p >= 2")
    if workspace is None:
        workspace = _Workspace.create(config, data, rng, need_mass=False)
    if pair is None:
        k = int(rng.integers(p * (p - 1) // 2))
        i, j = _kth_pair(p, k)
    else:
        i, j = pair
    try:
        return _edge_flip(state, data, config, rng, workspace, i, j)
    except (NotPositiveDefinite, np.linalg.LinAlgError):
        return state, False


def _kth_pair(p: int, k: int) -> tuple[int, int]:
    for i in range(p):
        row = p - 1 - i
        if k < row:
            return i, i + 1 + k
        k -= row
    raise ValueError("pair index out of range")


def _edge_flip(state, data, config, rng, workspace, i, j):
    p = state.graph.p
    lam = state.precision.lam
    adding = not state.graph.adj[i, j]
    mask = graph_mask(state.graph)
    bit = 1 << _pair_bit(p, i, j)
    new_mask = mask | bit if adding else mask & ~bit
    g_new = graph_from_mask(p, new_mask)

    order = _pair_order(p, i, j)
    a = p - 2
    phi = _upper_chol_permuted(lam, order)
    piv = phi[a, a]
    head = float(phi[:a, a] @ phi[:a, p - 1]) if a else 0.0
    phi0 = -head / piv
    phi_cur = phi[a, p - 1]

    d_n = workspace.posterior(state.graph, mask).d_scale
    d_0 = workspace.prior(state.graph, mask).d_scale
    sd = config.sigma_e

    # the Gaussian density is charged where the edit is random (the proposal
    # draw) and credited where it is deterministic (the paired reverse edit)
    lam_new = lam.copy()
    if adding:
        phi_star = phi0 + sd * float(rng.standard_normal())
        new_ij = head + piv * phi_star
        new_jj = lam[j, j] + phi_star ** 2 - phi_cur ** 2
        log_q_rand = _log_normal(phi_star, phi0, sd)
    else:
        new_ij = 0.0
        new_jj = lam[j, j] + phi0 ** 2 - phi_cur ** 2
        log_q_det = _log_normal(phi_cur, phi0, sd)
    lam_new[i, j] = lam_new[j, i] = new_ij
    lam_new[j, j] = new_jj
    d_post = -0.5 * (2.0 * d_n[i, j] * (new_ij - lam[i, j])
                     + d_n[j, j] * (new_jj - lam[j, j]))

    # auxiliary draw from the proposed graph's prior, started at the proposal
    prior_new = workspace.prior(g_new, new_mask)
    plan = workspace.covers.plan(prior_new, new_mask, tag=0)
    aux = lam_new.copy()
    for _ in range(config.aux_sweeps):
        sweep_in_place(aux, plan, rng)

    phi_t = _upper_chol_permuted(aux, order)
    piv_t = phi_t[a, a]
    head_t = float(phi_t[:a, a] @ phi_t[:a, p - 1]) if a else 0.0
    phi0_t = -head_t / piv_t
    phi_cur_t = phi_t[a, p - 1]
    if adding:
        # mirror edit removes the edge from the auxiliary matrix
        aux_ij = 0.0
        aux_jj = aux[j, j] + phi0_t ** 2 - phi_cur_t ** 2
        log_q_det = _log_normal(phi_cur_t, phi0_t, sd)
        log_jac = math.log(piv) - math.log(piv_t)
    else:
        phi_star_t = phi0_t + sd * float(rng.standard_normal())
        aux_ij = head_t + piv_t * phi_star_t
        aux_jj = aux[j, j] + phi_star_t ** 2 - phi_cur_t ** 2
        log_q_rand = _log_normal(phi_star_t, phi0_t, sd)
        log_jac = math.log(piv_t) - math.log(piv)
    d_prior = -0.5 * (2.0 * d_0[i, j] * (aux_ij - aux[i, j])
                      + d_0[j, j] * (aux_jj - aux[j, j]))

    odds = math.log(state.s) - math.log1p(-state.s)
    log_r = ((odds if adding else -odds) + d_post + d_prior
             + log_q_det - log_q_rand + log_jac)
    if math.log(rng.random()) < log_r:
        prec = PrecisionState(g_new, lam_new, validate=False)
        return GgmState(g_new, prec, state.s), True
    return state, False


def _pair_bit(p: int, i: int, j: int) -> int:
    return i * (2 * p - i - 1) // 2 + (j - i - 1)


def sample_s(state: GgmState, config: GgmConfig,
             rng: np.random.Generator) -> GgmState:
    """Conjugate Beta update of the edge-inclusion probability."""
    if config.fixed_s is not None:
        return state
    n_pairs = state.graph.p * (state.graph.p - 1) // 2
    k = state.graph.n_edges
    s = float(rng.beta(config.s_prior_a + k, config.s_prior_b + n_pairs - k))
    s = min(max(s, 1e-12), 1.0 - 1e-12)
    return GgmState(state.graph, state.precision, s)


@dataclass
class JointTrace:
    """Per-iteration record of the joint chain."""

    p: int
    masks: list = field(default_factory=list)
    s_values: list = field(default_factory=list)
    lam_upper: list = field(default_factory=list)  # full upper-triangle vecs
    t_ms: list = field(default_factory=list)
    edge_accepts: int = 0
    edge_proposals: int = 0

    def record(self, state: GgmState, t_ms: float) -> None:
        iu = np.triu_indices(self.p)
        self.masks.append(graph_mask(state.graph))
        self.s_values.append(state.s)
        self.lam_upper.append(state.precision.lam[iu])
        self.t_ms.append(t_ms)

    def __len__(self) -> int:
        return len(self.masks)

    def precision_at(self, t: int) -> np.ndarray:
        m = np.zeros((self.p, self.p))
        iu = np.triu_indices(self.p)
        m[iu] = self.lam_upper[t]
        m.T[iu] = self.lam_upper[t]
        return m

    def edge_probability_matrix(self) -> np.ndarray:
        prob = np.zeros((self.p, self.p))
        for mask in self.masks:
            g = graph_from_mask(self.p, mask)
            prob += g.adj
        prob /= max(len(self.masks), 1)
        return prob

    def edge_frequency(self, i: int, j: int) -> float:
        bit = _pair_bit(self.p, min(i, j), max(i, j))
        hits = sum((m >> bit) & 1 for m in self.masks)
        return hits / max(len(self.masks), 1)


def run_joint_sampler(data: DataSummary, config: GgmConfig, n_iter: int,
                      burn_in: int, rng: np.random.Generator,
                      init: GgmState | None = None) -> JointTrace:
    """Run the joint chain and record (graph, precision, s, wall clock).

    Each iteration refreshes the precision, proposes ``p(p-1)/2`` edge flips
    (every unordered pair once, in fresh random order), and updates ``s``.
    """
    p = data.p
    if init is None:
        graph = Graph.empty(p)
        state = GgmState(graph, PrecisionState.identity(graph), config.init_s)
    else:
        state = init
    workspace = _Workspace.create(config, data, rng,
                                  need_mass=config.inner == "hmc")
    n_prop = (config.proposals_per_iter if config.proposals_per_iter is not None
              else p * (p - 1) // 2)
    all_pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    trace = JointTrace(p)
    t0 = time.perf_counter()
    for it in range(burn_in + n_iter):
        state = refresh_precision(state, data, config, rng, workspace)
        if p >= 2:
            if n_prop == len(all_pairs):
                chosen = [all_pairs[k] for k in rng.permutation(len(all_pairs))]
            else:
                chosen = [all_pairs[int(k)] for k in
                          rng.integers(len(all_pairs), size=n_prop)]
            for pair in chosen:
                state, ok = edge_flip_move(state, data, config, rng, workspace,
                                           pair=pair)
                trace.edge_proposals += 1
                trace.edge_accepts += ok
        state = sample_s(state, config, rng)
        if it >= burn_in:
            trace.record(state, (time.perf_counter() - t0) * 1e3)
    return trace


def gaussian_loglik(precision, data_test: DataSummary) -> float:
    """Zero-mean Gaussian log likelihood of the test rows under a precision."""
    lam = precision.lam if isinstance(precision, PrecisionState) else np.asarray(precision)
    ld = linalg.logdet_pd(linalg.cholesky(lam))
    n, p = data_test.n, data_test.p
    return (0.5 * n * ld - 0.5 * float(np.sum(data_test.gram * lam))
            - 0.5 * n * p * math.log(2.0 * math.pi))


def expected_test_loglik(trace: JointTrace, data_test: DataSummary):
    """Running posterior-average test log likelihood, with timestamps.

    Element ``k`` is the mean of ``gaussian_loglik`` over the first ``k + 1``
    samples, paired with the wall-clock time of sample ``k + 1``.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    vals = np.array([gaussian_loglik(trace.precision_at(t), data_test)
                     for t in range(len(trace))])
    running = np.cumsum(vals) / np.arange(1, len(vals) + 1)
    return running, np.asarray(trace.t_ms)


def per_point_loglik(precisions, y_test: np.ndarray) -> np.ndarray:
    """Posterior-mean per-row log likelihood under a set of precisions."""
    out = np.zeros(y_test.shape[0])
    for lam in precisions:
        ld = linalg.logdet_pd(linalg.cholesky(lam))
        quad = np.sum((y_test @ lam) * y_test, axis=1)
        out += 0.5 * ld - 0.5 * quad - 0.5 * y_test.shape[1] * math.log(2.0 * math.pi)
    return out / len(precisions)
