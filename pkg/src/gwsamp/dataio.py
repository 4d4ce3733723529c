"""CSV plumbing: price ingestion, matrix and trace files.

Price files are UTF-8 CSV with a header row of asset names, one closing price
per cell, ``.`` decimal separator, rows in chronological order. Returns are
simple consecutive-day price ratios ``r_t = price_t / price_{t-1}`` (not log
returns and not ``ratio - 1``; this shifts the mean to around 1 and is
handled by the centering step).

Floats are serialized with ``repr`` (shortest round-trip form), so files are
byte-reproducible for identical inputs.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .errors import (ColumnCountMismatch, InsufficientRows, NonPositivePrice,
                     SingularInput)


def fmt(x) -> str:
    return repr(float(x))


def read_price_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise InsufficientRows("price file needs a header and data rows")
    names = [c.strip() for c in lines[0].split(",")]
    rows = []
    for k, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(names):
            raise ColumnCountMismatch(f"line {k}: {len(cells)} fields, "
                                      f"expected {len(names)}")
        rows.append([float(c) for c in cells])
    return names, np.asarray(rows, dtype=np.float64)


def prices_to_returns(prices: np.ndarray) -> np.ndarray:
    if np.any(prices <= 0) or not np.all(np.isfinite(prices)):
        raise NonPositivePrice("prices must be positive and finite")
    return prices[1:] / prices[:-1]


def split_and_standardize(returns_train: np.ndarray, returns_test: np.ndarray):
    """Center both splits by the training mean and rescale per column.

    Column scales are ``c_i = sqrt((S^{-1})_ii)`` of the training empirical
    covariance (1/n normalization), so the standardized training empirical
    precision has unit diagonal.
    """
    mu = returns_train.mean(axis=0)
    yc = returns_train - mu
    n = yc.shape[0]
    s = linalg.sym(yc.T @ yc / n)
    try:
        prec = linalg.inv_pd(linalg.cholesky(s))
    except linalg.NotPositiveDefinite as exc:
        raise SingularInput("training covariance is singular; cannot "
                            "standardize") from exc
    c = np.sqrt(np.diagonal(prec))
    return yc * c, (returns_test - mu) * c


def ingest_returns(path_or_prices, train_fraction: float):
    """Prices -> returns -> (train, test) standardized matrices.

    The price series is split at row ``k = round(train_fraction * T)``;
    training covers the returns computed within the first ``k`` prices
    (``k - 1`` rows) and the test split gets the remaining ``T - k`` return
    rows, so a 1000-row file at 0.5 yields 499 training and 500 test rows.
    """
    if isinstance(path_or_prices, np.ndarray):
        prices = path_or_prices
    else:
        _, prices = read_price_csv(path_or_prices)
    t_rows = prices.shape[0]
    k = int(np.floor(train_fraction * t_rows + 0.5))
    if k < 3 or t_rows - k < 1:
        raise InsufficientRows(f"cannot split {t_rows} price rows at "
                               f"fraction {train_fraction}")
    returns = prices_to_returns(prices)
    return split_and_standardize(returns[:k - 1], returns[k - 1:])


def write_matrix_csv(path, m: np.ndarray, header: list[str] | None = None) -> None:
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in m:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_matrix_csv(path, has_header: bool = False):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = None
    if has_header:
        header, lines = lines[0].split(","), lines[1:]
    m = np.asarray([[float(c) for c in ln.split(",")] for ln in lines])
    return (header, m) if has_header else m


def write_trace_csv(path, trace: np.ndarray, labels: list[str]) -> None:
    """Sampler trace: one row per sample, columns in free-index order."""
    write_matrix_csv(path, trace, header=labels)


def read_trace_csv(path):
    return read_matrix_csv(path, has_header=True)
