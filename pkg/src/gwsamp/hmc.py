"""Hamiltonian Monte Carlo with randomized step size and fixed path length.

Each transition draws a step size ``eps ~ Gamma(shape 2, scale alpha)`` (mean
``2 * alpha``) and takes ``L = max(1, round(beta / eps))`` leapfrog steps, so
small-step draws still travel the target trajectory length ``beta`` while
integrating accurately near the positive-definite boundary. ``round`` is
half-away-from-zero.

Targets expose energy and gradient on an unconstrained vector; a target may
declare a point invalid (outside its support), which aborts the trajectory
and counts as a rejection. The kinetic energy is ``p' M^{-1} p / 2`` for a
user-supplied mass matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AllRejected
from .gwishart import GWishartParams, MassFactor
from .graphs import FreeIndexSet


class Target:
    """Interface of HMC targets.

    Subclasses implement ``energy_grad(x) -> (energy, grad) | None`` and
    ``energy(x) -> float | None``; ``None`` flags an invalid point.
    """

    dim: int

    def energy(self, x: np.ndarray):
        raise NotImplementedError

    def energy_grad(self, x: np.ndarray):
        raise NotImplementedError


class GWishartTarget(Target):
    """Energy of a GWishart density on its free coordinates."""

    def __init__(self, params: GWishartParams):
        self.params = params
        free = params.free
        self.free: FreeIndexSet = free
        self.dim = free.n
        self._rows, self._cols = free.rows, free.cols
        self._cvec = params.linear_coeffs()
        self._mult = free.mult
        self._hb = params.half_shape
        self._p = params.p

    def energy_grad(self, x: np.ndarray):
        grad = np.empty(self.dim)
        e, ok = kernels.energy_grad(x, self._rows, self._cols, self._cvec,
                                    self._mult, self._hb, self._p, grad)
        return (e, grad) if ok else None

    def energy(self, x: np.ndarray):
        out = self.energy_grad(x)
        return None if out is None else out[0]


class QuadraticTarget(Target):
    """Standard Gaussian energy ``|x|^2 / 2``; handy for integrator tests."""

    def __init__(self, dim: int):
        self.dim = dim

    def energy(self, x):
        return 0.5 * float(x @ x)

    def energy_grad(self, x):
        return self.energy(x), x.copy()


@dataclass(frozen=True)
class HmcConfig:
    alpha: float
    beta: float
    mass: MassFactor

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be a finite positive number")
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError("beta must be a finite positive number")


@dataclass(frozen=True)
class HmcStepReport:
    accepted: bool
    epsilon: float
    steps: int
    hamiltonian_delta: float
    cone_exit: bool


def draw_step(rng: np.random.Generator, config: HmcConfig) -> tuple[float, int]:
    """Step size and leapfrog count: eps ~ Gamma(2, alpha), L = max(1, round(beta/eps))."""
    eps = float(rng.standard_gamma(2.0)) * config.alpha
    ratio = config.beta / eps
    return eps, max(1, int(math.floor(ratio + 0.5)))


def leapfrog(x0: np.ndarray, p0: np.ndarray, eps: float, steps: int,
             target: Target, mass: MassFactor):
    """``steps`` leapfrog iterations; ``None`` when the path leaves the support."""
    out = target.energy_grad(x0)
    if out is None:
        return None
    _, grad = out
    x = x0.copy()
    p = p0 - 0.5 * eps * grad
    for step in range(steps):
        x += eps * (mass.inv_mass @ p)
        out = target.energy_grad(x)
        if out is None:
            return None
        e, grad = out
        p -= (eps if step < steps - 1 else 0.5 * eps) * grad
    return x, p, e


def _kinetic(p: np.ndarray, mass: MassFactor) -> float:
    return 0.5 * float(p @ (mass.inv_mass @ p))


def hmc_step(x: np.ndarray, target: Target, config: HmcConfig,
             rng: np.random.Generator):
    """One Metropolis-corrected trajectory from ``x``.

    Returns ``(x_new, report)``; a trajectory that exits the support is a
    rejection with ``cone_exit`` set.
    """
    eps, steps = draw_step(rng, config)
    z = rng.standard_normal(target.dim)
    p0 = config.mass.chol.factor.T @ z
    e0 = target.energy(x)
    h0 = e0 + _kinetic(p0, config.mass)
    result = leapfrog(x, p0, eps, steps, target, config.mass)
    if result is None:
        return x, HmcStepReport(False, eps, steps, math.inf, True)
    x1, p1, e1 = result
    h1 = e1 + _kinetic(p1, config.mass)
    delta = h1 - h0
    accept = delta <= 0 or math.log(rng.random()) < -delta
    if accept:
        return x1, HmcStepReport(True, eps, steps, delta, False)
    return x, HmcStepReport(False, eps, steps, delta, False)


def sample_hmc(target: Target, config: HmcConfig, init: np.ndarray,
               n_samples: int, burn_in: int, rng: np.random.Generator):
    """Trace of post-burn-in states plus the overall acceptance rate.

    Raises AllRejected when burn-in finishes without a single acceptance,
    which indicates unusable (alpha, beta, mass) settings.
    """
    x = np.asarray(init, dtype=np.float64).copy()
    if target.energy(x) is None:
        raise ValueError("initial point is outside the target support")
    accepted = 0
    burn_accepted = 0
    for _ in range(burn_in):
        x, rep = hmc_step(x, target, config, rng)
        burn_accepted += rep.accepted
    if burn_in > 0 and burn_accepted == 0:
        raise AllRejected("no acceptances during burn-in")
    trace = np.empty((n_samples, target.dim))
    for t in range(n_samples):
        x, rep = hmc_step(x, target, config, rng)
        accepted += rep.accepted
        trace[t] = x
    total = burn_in + n_samples
    rate = (burn_accepted + accepted) / total if total else 0.0
    return trace, rate
