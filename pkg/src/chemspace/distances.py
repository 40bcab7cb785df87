"""Pairwise distance oracles: fingerprint-backed Tanimoto and explicit matrices.

Both oracle flavors answer ``distance(i, j)``, row and submatrix queries over
a fixed point set. They are read-only after construction and safe to query
from multiple workers.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DatasetFormatError, MatrixValidationError
from .fingerprints import Dataset

TRIANGLE_TOL = 1e-9


def _bitwise_rows(words_a: np.ndarray, words_b: np.ndarray) -> np.ndarray:
    """Popcount of AND between one packed row and many packed rows."""
    return np.bitwise_count(words_a[None, :] & words_b).sum(axis=1, dtype=np.int64)


def tanimoto_row(
    words: np.ndarray, popcounts: np.ndarray, i: int, targets: np.ndarray | None = None
) -> np.ndarray:
    """Distances from point ``i`` to ``targets`` (default: all points)."""
    tw = words if targets is None else words[targets]
    tp = popcounts if targets is None else popcounts[targets]
    inter = _bitwise_rows(words[i], tw)
    union = popcounts[i] + tp - inter
    out = np.ones(len(tw), dtype=np.float64)
    nz = union > 0
    out[nz] = 1.0 - inter[nz] / union[nz]
    out[~nz] = 0.0
    return out


def pairwise_tanimoto(
    words: np.ndarray, popcounts: np.ndarray, block_rows: int = 256
) -> np.ndarray:
    """Full pairwise Tanimoto distance matrix from packed fingerprints.

    Blocked over rows so the (block, n, words) AND buffer stays small.
    """
    n = words.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for start in range(0, n, block_rows):
        stop = min(start + block_rows, n)
        inter = np.bitwise_count(words[start:stop, None, :] & words[None, :, :]).sum(
            axis=2, dtype=np.int64
        )
        union = popcounts[start:stop, None] + popcounts[None, :] - inter
        blk = np.ones(inter.shape, dtype=np.float64)
        nz = union > 0
        blk[nz] = 1.0 - inter[nz] / union[nz]
        blk[~nz] = 0.0
        out[start:stop] = blk
    return out


class TanimotoOracle:
    """Lazy Tanimoto distance oracle over a fingerprint dataset."""

    def __init__(self, dataset: Dataset):
        if len(dataset) == 0:
            raise ValueError("cannot build an oracle over an empty dataset")
        self.dataset = dataset
        self._words = dataset.words
        self._pops = dataset.popcounts
        self._full: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self._words.shape[0]

    def distance(self, i: int, j: int) -> float:
        inter = int(np.bitwise_count(self._words[i] & self._words[j]).sum())
        union = int(self._pops[i]) + int(self._pops[j]) - inter
        if union == 0:
            return 0.0
        return 1.0 - inter / union

    def row(self, i: int, targets: np.ndarray | None = None) -> np.ndarray:
        targets = None if targets is None else np.asarray(targets, dtype=np.int64)
        return tanimoto_row(self._words, self._pops, i, targets)

    def submatrix(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if self._full is not None:
            return self._full[np.ix_(idx, idx)]
        return pairwise_tanimoto(self._words[idx], self._pops[idx])

    def full_matrix(self) -> np.ndarray:
        """Materialize (and cache) the complete n x n distance matrix."""
        if self._full is None:
            full = pairwise_tanimoto(self._words, self._pops)
            full.setflags(write=False)
            self._full = full
        return self._full


class MatrixOracle:
    """Distance oracle backed by an explicit symmetric matrix in [0, 1]."""

    def __init__(self, matrix: np.ndarray, validate: bool = True, tol: float = TRIANGLE_TOL):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise MatrixValidationError(f"matrix must be square, got shape {matrix.shape}")
        if matrix.shape[0] == 0:
            raise MatrixValidationError("matrix must be nonempty")
        if validate:
            _validate_metric(matrix, tol)
        matrix = matrix.copy()
        np.fill_diagonal(matrix, 0.0)
        matrix.setflags(write=False)
        self._matrix = matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    def distance(self, i: int, j: int) -> float:
        return float(self._matrix[i, j])

    def row(self, i: int, targets: np.ndarray | None = None) -> np.ndarray:
        if targets is None:
            return self._matrix[i].copy()
        return self._matrix[i, np.asarray(targets, dtype=np.int64)]

    def submatrix(self, indices) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        return self._matrix[np.ix_(idx, idx)]

    def full_matrix(self) -> np.ndarray:
        return self._matrix


DistanceOracle = TanimotoOracle | MatrixOracle


def _validate_metric(matrix: np.ndarray, tol: float) -> None:
    n = matrix.shape[0]
    if not np.isfinite(matrix).all():
        raise MatrixValidationError("matrix contains non-finite entries")
    bad = np.argwhere((matrix < -tol) | (matrix > 1.0 + tol))
    if bad.size:
        i, j = map(int, bad[0])
        raise MatrixValidationError(
            f"distance out of [0,1] at ({i},{j}): {matrix[i, j]}", indices=(i, j)
        )
    diag = np.abs(np.diag(matrix))
    if (diag > tol).any():
        i = int(np.argmax(diag > tol))
        raise MatrixValidationError(f"nonzero diagonal at ({i},{i}): {matrix[i, i]}", indices=(i, i))
    asym = np.abs(matrix - matrix.T)
    if (asym > tol).any():
        i, j = map(int, np.argwhere(asym > tol)[0])
        raise MatrixValidationError(
            f"asymmetric entries at ({i},{j}): {matrix[i, j]} vs {matrix[j, i]}", indices=(i, j)
        )
    # Triangle inequality: d(i,k) <= d(i,via) + d(via,k) for every via.
    for via in range(n):
        slack = matrix - (matrix[:, via][:, None] + matrix[via][None, :])
        viol = np.argwhere(slack > tol)
        if viol.size:
            i, k = map(int, viol[0])
            raise MatrixValidationError(
                f"triangle violation at ({i},{via},{k}): "
                f"d({i},{k})={matrix[i, k]} > d({i},{via})+d({via},{k})="
                f"{matrix[i, via] + matrix[via, k]}",
                indices=(i, via, k),
            )


def load_matrix(path: str | Path, tol: float = TRIANGLE_TOL) -> MatrixOracle:
    """Load an explicit distance matrix from CSV (n rows of n reals)."""
    path = Path(path)
    try:
        matrix = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: cannot parse matrix CSV: {exc}") from exc
    return MatrixOracle(matrix, validate=True, tol=tol)


def build_oracle(dataset: Dataset | None, metric: str = "tanimoto") -> DistanceOracle:
    """Build an oracle: ``metric`` is ``"tanimoto"`` or a path to a matrix CSV."""
    if metric == "tanimoto":
        if dataset is None or len(dataset) == 0:
            raise ValueError("tanimoto oracle requires a nonempty dataset")
        return TanimotoOracle(dataset)
    oracle = load_matrix(metric)
    if dataset is not None and len(dataset) != oracle.n:
        raise MatrixValidationError(
            f"matrix size {oracle.n} does not match dataset size {len(dataset)}"
        )
    return oracle
