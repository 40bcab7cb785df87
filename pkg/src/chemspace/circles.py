"""Sphere-packing count of a molecule set: largest subset with all pairwise
distances strictly above a threshold t.

The count equals the maximum independent set of the threshold graph (edge
where d <= t). Small sets are solved exactly by branch and bound; larger sets
fall back to best-of-k greedy sphere exclusion.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import MeasureSizeError

DEFAULT_EXACT_CAP = 64
DEFAULT_RESTARTS = 8
EXACT_CAP_ENV = "CHEMSPACE_EXACT_CAP"


def resolve_exact_cap(explicit: int | None = None) -> int:
    """Exact-solver size cap: explicit argument, else env override, else 64."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(EXACT_CAP_ENV)
    return int(env) if env else DEFAULT_EXACT_CAP


@dataclass(frozen=True)
class PackingResult:
    """A witnessed packing: centers are pairwise farther than t apart."""

    count: int
    centers: tuple[int, ...]
    t: float
    mode: str
    optimal: bool


def threshold_adjacency(dmatrix: np.ndarray, t: float) -> list[int]:
    """Conflict bitmasks: bit j set in mask i when d(i,j) <= t (i != j)."""
    n = dmatrix.shape[0]
    close = dmatrix <= t
    np.fill_diagonal(close, False)
    masks = []
    for i in range(n):
        mask = 0
        for j in np.nonzero(close[i])[0]:
            mask |= 1 << int(j)
        masks.append(mask)
    return masks


def _clique_cover_bound(avail: int, adj: list[int]) -> int:
    """Greedy clique cover of the conflict graph restricted to ``avail``.

    An independent set takes at most one vertex per clique, so the number of
    cliques bounds the packing size from above.
    """
    count = 0
    rest = avail
    while rest:
        v = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        cand = rest & adj[v]
        while cand:
            u = (cand & -cand).bit_length() - 1
            rest &= ~(1 << u)
            cand &= cand - 1
            cand &= adj[u]
        count += 1
    return count


def max_independent_set(adj: list[int]) -> tuple[int, int]:
    """Exact maximum independent set of a conflict graph given as bitmasks.

    Branch and bound: branch on the max-degree vertex, prune with the greedy
    clique-cover bound. Returns (size, chosen-vertices bitmask).
    """
    n = len(adj)
    best_size = 0
    best_mask = 0

    def expand(avail: int, count: int, chosen: int) -> None:
        nonlocal best_size, best_mask
        # Vertices isolated within avail always belong to some optimum.
        while True:
            pick_v = -1
            pick_deg = -1
            rest = avail
            isolated = 0
            while rest:
                v = (rest & -rest).bit_length() - 1
                rest &= rest - 1
                deg = (adj[v] & avail).bit_count()
                if deg == 0:
                    isolated |= 1 << v
                elif deg > pick_deg:
                    pick_deg = deg
                    pick_v = v
            if isolated:
                chosen |= isolated
                count += isolated.bit_count()
                avail &= ~isolated
            if pick_v < 0:
                if count > best_size:
                    best_size = count
                    best_mask = chosen
                return
            if count + _clique_cover_bound(avail, adj) <= best_size:
                return
            bit = 1 << pick_v
            expand(avail & ~(adj[pick_v] | bit), count + 1, chosen | bit)
            avail &= ~bit
            # Loop continues as the exclude branch.

    expand((1 << n) - 1 if n else 0, 0, 0)
    return best_size, best_mask


def circles_exact(
    subset, oracle, t: float, exact_cap: int | None = None
) -> PackingResult:
    """Optimal packing count via branch-and-bound maximum independent set."""
    idx = np.asarray(list(subset), dtype=np.int64)
    cap = resolve_exact_cap(exact_cap)
    if idx.size > cap:
        raise MeasureSizeError(
            f"exact packing refused for n={idx.size} > cap {cap}; use greedy mode "
            f"(or raise {EXACT_CAP_ENV})"
        )
    if idx.size == 0:
        return PackingResult(count=0, centers=(), t=t, mode="exact", optimal=True)
    adj = threshold_adjacency(oracle.submatrix(idx), t)
    size, mask = max_independent_set(adj)
    centers = tuple(int(idx[i]) for i in range(idx.size) if mask >> i & 1)
    return PackingResult(count=size, centers=centers, t=t, mode="exact", optimal=True)


def greedy_pack_positions(
    dist_rows, n: int, t: float, order: np.ndarray
) -> list[int]:
    """One sphere-exclusion pass: admit a point when it is farther than t
    from every already-admitted center. ``dist_rows(pos)`` yields the distance
    row of a point against all n points."""
    min_dist = np.full(n, np.inf)
    centers: list[int] = []
    for pos in order:
        pos = int(pos)
        if min_dist[pos] > t:
            centers.append(pos)
            np.minimum(min_dist, dist_rows(pos), out=min_dist)
    return centers


def circles_greedy(
    subset,
    oracle,
    t: float,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
) -> PackingResult:
    """Best-of-k greedy sphere exclusion.

    The first pass scans in input order; the remaining passes use seeded
    random permutations. Only center rows are ever materialized, so this
    scales to large sets.
    """
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size == 0:
        return PackingResult(count=0, centers=(), t=t, mode="greedy", optimal=False)
    n = int(idx.size)
    rng = np.random.default_rng(seed)

    def dist_rows(pos: int) -> np.ndarray:
        return oracle.row(int(idx[pos]), targets=idx)

    best: list[int] | None = None
    for restart in range(max(1, restarts)):
        order = np.arange(n) if restart == 0 else rng.permutation(n)
        centers = greedy_pack_positions(dist_rows, n, t, order)
        if best is None or len(centers) > len(best):
            best = centers
    centers_idx = tuple(int(idx[p]) for p in best)
    return PackingResult(
        count=len(best), centers=centers_idx, t=t, mode="greedy", optimal=False
    )


def greedy_pack_count(
    dmatrix: np.ndarray, t: float, restarts: int = DEFAULT_RESTARTS, seed: int = 0
) -> int:
    """Greedy packing count straight from a precomputed distance matrix."""
    n = dmatrix.shape[0]
    if n == 0:
        return 0
    rng = np.random.default_rng(seed)
    best = 0
    for restart in range(max(1, restarts)):
        order = np.arange(n) if restart == 0 else rng.permutation(n)
        centers = greedy_pack_positions(lambda pos: dmatrix[pos], n, t, order)
        best = max(best, len(centers))
    return best


def circles_auto(
    subset,
    oracle,
    t: float,
    mode: str = "auto",
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    exact_cap: int | None = None,
) -> PackingResult:
    """Dispatch to the exact solver under the size cap, greedy above it."""
    idx = np.asarray(list(subset), dtype=np.int64)
    cap = resolve_exact_cap(exact_cap)
    if mode == "exact":
        return circles_exact(idx, oracle, t, exact_cap=cap)
    if mode == "greedy":
        return circles_greedy(idx, oracle, t, restarts=restarts, seed=seed)
    if idx.size <= cap:
        return circles_exact(idx, oracle, t, exact_cap=cap)
    return circles_greedy(idx, oracle, t, restarts=restarts, seed=seed)


class IncrementalPacking:
    """Arrival-order sphere exclusion over a growing set.

    Feeding points one at a time, the running count equals a single greedy
    pass over each prefix in arrival order. Used by the growing-size protocol
    and matches the admit-if-novel rule of the streaming novelty scorer.
    """

    def __init__(self, t: float):
        self.t = t
        self.center_positions: list[int] = []
        self._size = 0

    def add(self, dists_to_members: np.ndarray) -> int:
        """Add the next point given its distances to all previous members."""
        pos = self._size
        self._size += 1
        if not self.center_positions:
            self.center_positions.append(pos)
        elif float(dists_to_members[self.center_positions].min()) > self.t:
            self.center_positions.append(pos)
        return len(self.center_positions)

    @property
    def count(self) -> int:
        return len(self.center_positions)
