"""Samplers and baselines for Bayesian structure learning in sparse GGMs.

Subpackages cover: dense linear-algebra and random primitives (``linalg``,
``rng``), graphs and clique covers (``graphs``), the GWishart density and its
samplers (``gwishart``), Hamiltonian Monte Carlo (``hmc``), the joint
graph/precision sampler (``ggm``), the graphical-lasso baseline (``glasso``),
chain diagnostics (``diagnostics``), and the experiment harness
(``experiments``, ``cli``).
"""

from .kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
