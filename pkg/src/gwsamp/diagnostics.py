"""Effective sample size and sampler efficiency reports.

ESS of a scalar chain is ``N / tau`` with ``tau = 1 + 2 * sum_k rho_k``, the
autocorrelations summed by Geyer's initial monotone positive sequence:
consecutive-lag pairs are kept while their sums stay positive, and the pair
sums are forced non-increasing. The result is clamped to ``(0, N]``; a chain
mixing at the i.i.d. rate reports (up to noise) its full length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChain


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased-normalization autocovariances via FFT, lags 0..N-1."""
    n = x.size
    xc = x - x.mean()
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:n]
    return acov / n


def ess(chain: np.ndarray) -> float:
    """Effective sample size of one scalar chain (length >= 10)."""
    x = np.asarray(chain, dtype=np.float64)
    if x.ndim != 1 or x.size < 10:
        raise ValueError("need a 1-d chain of length >= 10")
    acov = _autocovariance(x)
    scale = 1.0 + abs(float(x.mean()))
    if acov[0] <= (1e-14 * scale) ** 2:
        raise DegenerateChain("chain has zero variance")
    rho = acov / acov[0]
    n = x.size
    n_pairs = n // 2
    tau = -1.0
    prev = np.inf
    for m in range(n_pairs):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair <= 0:
            break
        pair = min(pair, prev)
        tau += 2.0 * pair
        prev = pair
    tau = max(tau, 1.0 / n)
    return float(min(n / tau, n))


@dataclass(frozen=True)
class EssReport:
    """Per-coordinate ESS with a conservative aggregate and timing."""

    per_coordinate: np.ndarray
    aggregate: float
    seconds: float
    ess_per_sec: float


def ess_report(trace: np.ndarray, elapsed_seconds: float) -> EssReport:
    """ESS over every trace column; aggregate = min across coordinates.

    ``elapsed_seconds`` should cover sampling only (index-set and mass-matrix
    construction are reported separately by the experiment runners).
    """
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim == 1:
        trace = trace[:, None]
    if trace.shape[0] == 0:
        raise ValueError("empty trace")
    per = np.array([ess(trace[:, k]) for k in range(trace.shape[1])])
    agg = float(min(per.min(), trace.shape[0]))
    rate = agg / elapsed_seconds if elapsed_seconds > 0 else 0.0
    return EssReport(per, agg, elapsed_seconds, rate)
