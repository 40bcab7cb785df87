"""Rank correlation and dynamic time warping used by the validity protocols."""

from __future__ import annotations

import numpy as np


def average_ranks(values) -> np.ndarray:
    """Ranks 1..n with ties given the mean of the ranks they occupy."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size, dtype=np.float64)
    i = 0
    while i < arr.size:
        j = i
        while j + 1 < arr.size and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks.

    Returns 0.0 when either side has zero rank variance (constant input),
    rather than NaN; callers that care can detect the degeneracy themselves.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("spearman requires two equal-length 1-d sequences")
    if xs.size < 2:
        raise ValueError("spearman requires at least two observations")
    rx = average_ranks(xs) - (xs.size + 1) / 2.0
    ry = average_ranks(ys) - (ys.size + 1) / 2.0
    denom = np.sqrt((rx * rx).sum() * (ry * ry).sum())
    if denom == 0.0:
        return 0.0
    return float(np.clip((rx * ry).sum() / denom, -1.0, 1.0))


def is_degenerate(values) -> bool:
    """True when a sequence is constant (zero variance)."""
    arr = np.asarray(values, dtype=np.float64)
    return bool(arr.size == 0 or (arr == arr[0]).all())


def _znorm(arr: np.ndarray) -> np.ndarray:
    std = arr.std()
    if std == 0.0:
        return arr - arr.mean()
    return (arr - arr.mean()) / std


def dtw(a, b, normalize: bool = False) -> float:
    """Dynamic time warping distance with |a_i - b_j| local cost.

    Classic unwindowed dynamic program over match / insert / delete steps.
    ``normalize`` z-scores both series first (off by default; the raw scales
    are part of what the growing-size comparison looks at).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("dtw requires nonempty series")
    if normalize:
        a = _znorm(a)
        b = _znorm(b)
    n, m = a.size, b.size
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    cost = np.abs(a[:, None] - b[None, :])
    for i in range(1, n + 1):
        row = acc[i]
        prev = acc[i - 1]
        for j in range(1, m + 1):
            row[j] = cost[i - 1, j - 1] + min(prev[j], row[j - 1], prev[j - 1])
    return float(acc[n, m])
