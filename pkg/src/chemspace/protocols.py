"""Empirical validity protocols: correlate measures against the number of
distinct bioactivity classes covered by a sampled molecule set.

Two settings. Fixed-size draws many random subsets (biased toward a random
label sub-universe) and rank-correlates each measure with the label-count
gold standard. Growing-size builds one set a molecule at a time under a
sampling bias, records per-step curves, and compares incremental curves by
dynamic time warping. Everything is a deterministic function of (dataset,
parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import scipy.linalg

from .circles import IncrementalPacking, greedy_pack_count
from .errors import MeasureParamError, ProtocolError
from .fingerprints import Dataset
from .distances import TanimotoOracle
from .measures import (
    MeasureSpec,
    bottleneck_from_dmatrix,
    diameter_from_dmatrix,
    diversity_from_dmatrix,
    dpp_from_dmatrix,
    sum_bottleneck_from_dmatrix,
    sum_diameter_from_dmatrix,
    sum_diversity_from_dmatrix,
)
from .stats import dtw, is_degenerate, spearman

BIAS_MODES = ("uniform", "similar", "most-similar")
BIAS_LABELS = {
    "uniform": "uniformly sampled",
    "similar": "needs to be similar (power=10)",
    "most-similar": "most similar",
}
DEFAULT_SIMILAR_POWER = 10.0
MAX_SAMPLING_RETRIES = 100

DEFAULT_PROTOCOL_MEASURES: tuple[str, ...] = (
    "diversity",
    "sum_diversity",
    "diameter",
    "sum_diameter",
    "bottleneck",
    "sum_bottleneck",
    "dpp",
    "richness",
    "circles:t=0.75",
)


@dataclass
class CurveSeries:
    """Per-step values of several measures over a growing set."""

    steps: np.ndarray
    values: dict[str, np.ndarray]
    form: str  # "cumulative" or "incremental"

    def to_incremental(self) -> "CurveSeries":
        """First differences; the step-1 value is kept as-is."""
        if self.form == "incremental":
            return self
        out = {
            k: np.concatenate(([v[0]], np.diff(v))) for k, v in self.values.items()
        }
        return CurveSeries(steps=self.steps, values=out, form="incremental")

    def to_cumulative(self) -> "CurveSeries":
        if self.form == "cumulative":
            return self
        out = {k: np.cumsum(v) for k, v in self.values.items()}
        return CurveSeries(steps=self.steps, values=out, form="cumulative")


@dataclass
class MeasureStat:
    """One (measure, statistic) row aggregated over independent runs."""

    measure: str
    statistic: str
    per_run: list[float]
    degenerate_runs: int = 0

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_run))

    @property
    def dev(self) -> float:
        if len(self.per_run) < 2:
            return 0.0
        return float(np.std(self.per_run, ddof=1))

    def to_dict(self) -> dict[str, Any]:
        return {
            "measure": self.measure,
            "statistic": self.statistic,
            "mean": self.mean,
            "dev": self.dev,
            "per_run": [float(v) for v in self.per_run],
            "degenerate_runs": self.degenerate_runs,
        }


@dataclass
class ProtocolResult:
    stats: list[MeasureStat]
    config: dict[str, Any]
    curves: list[CurveSeries] = field(default_factory=list)

    def stat(self, measure_key: str) -> MeasureStat:
        for s in self.stats:
            if s.measure == measure_key:
                return s
        raise KeyError(measure_key)


def _require_labels(dataset: Dataset) -> None:
    for rec in dataset.records:
        if rec.label is None:
            raise ProtocolError(f"protocols need a fully labeled dataset; {rec.id!r} has no label")


def _resolve_specs(measures: Sequence[MeasureSpec | str]) -> list[MeasureSpec]:
    from .measures import parse_measure_spec

    out = []
    for m in measures:
        out.append(parse_measure_spec(m) if isinstance(m, str) else m)
    return out


def _sample_label_pool(
    rng: np.random.Generator, dataset: Dataset, classes: list[str], n: int
) -> np.ndarray:
    """Pick a uniform label-count m, then m labels, then return the pooled
    record indices; retries when the pool cannot supply n molecules."""
    for _ in range(MAX_SAMPLING_RETRIES):
        m = int(rng.integers(1, len(classes) + 1))
        chosen = rng.choice(len(classes), size=m, replace=False)
        pool = dataset.indices_for_labels(classes[i] for i in chosen)
        if len(pool) >= n:
            return pool
    raise ProtocolError(
        f"could not sample {n} molecules from a random label subset after "
        f"{MAX_SAMPLING_RETRIES} attempts"
    )


# ---------------------------------------------------------------------------
# Fixed-size setting.

def _eval_on_submatrix(
    spec: MeasureSpec,
    dsub: np.ndarray,
    subset: np.ndarray,
    dataset: Dataset,
    rng: np.random.Generator,
) -> float:
    kind = spec.kind
    if kind == "gold_standard":
        return float(len({dataset.records[int(i)].label for i in subset}))
    if kind == "richness":
        return float(len({dataset.fingerprint_key(int(i)) for i in subset}))
    if kind == "coverage":
        from .reference import ReferenceSet, coverage

        ref = ReferenceSet(kind=str(spec.param("kind", "custom")), universe=spec.param("universe"))
        return float(coverage(subset, dataset, ref))
    if kind == "circles":
        seed = int(rng.integers(0, 2**31))
        return float(
            greedy_pack_count(
                dsub,
                t=float(spec.param("t")),
                restarts=int(spec.param("restarts", 8)),
                seed=seed,
            )
        )
    if kind == "dpp":
        value, _ = dpp_from_dmatrix(dsub)
        return value
    kernel = {
        "diversity": diversity_from_dmatrix,
        "sum_diversity": sum_diversity_from_dmatrix,
        "diameter": diameter_from_dmatrix,
        "sum_diameter": sum_diameter_from_dmatrix,
        "bottleneck": bottleneck_from_dmatrix,
        "sum_bottleneck": sum_bottleneck_from_dmatrix,
    }.get(kind)
    if kernel is None:
        raise MeasureParamError(f"measure {kind!r} is not supported inside protocols")
    return float(kernel(dsub))


def protocol_fixed(
    dataset: Dataset,
    n: int,
    measures: Sequence[MeasureSpec | str] = DEFAULT_PROTOCOL_MEASURES,
    seed: int = 0,
    repeats: int = 200,
    runs: int = 10,
    oracle: TanimotoOracle | None = None,
    jobs: int = 1,
) -> ProtocolResult:
    """Fixed-size setting: rank correlation of each measure with the gold
    standard over repeated random subsets, aggregated over independent runs.

    Each repeat draws a label sub-universe, then n molecules from it, and
    evaluates every measure on the same subset. Degenerate correlations
    (constant measure) are reported as 0 and counted per measure.
    """
    _require_labels(dataset)
    if not 1 <= n <= len(dataset):
        raise ProtocolError(f"subset size n={n} not in [1, {len(dataset)}]")
    specs = _resolve_specs(measures)
    classes = dataset.label_classes()
    oracle = oracle or TanimotoOracle(dataset)
    full = oracle.full_matrix()
    run_seeds = np.random.SeedSequence(seed).spawn(runs)

    def one_run(run_idx: int) -> dict[str, tuple[float, bool]]:
        gs_vals = np.empty(repeats)
        meas_vals = {spec.key(): np.empty(repeats) for spec in specs}
        repeat_seqs = run_seeds[run_idx].spawn(repeats)
        for rep in range(repeats):
            sample_ss, measure_ss = repeat_seqs[rep].spawn(2)
            rng_sample = np.random.default_rng(sample_ss)
            rng_measure = np.random.default_rng(measure_ss)
            pool = _sample_label_pool(rng_sample, dataset, classes, n)
            subset = rng_sample.choice(pool, size=n, replace=False)
            dsub = full[np.ix_(subset, subset)]
            gs_vals[rep] = len({dataset.records[int(i)].label for i in subset})
            for spec in specs:
                meas_vals[spec.key()][rep] = _eval_on_submatrix(
                    spec, dsub, subset, dataset, rng_measure
                )
        out: dict[str, tuple[float, bool]] = {}
        for key, vals in meas_vals.items():
            degenerate = is_degenerate(vals) or is_degenerate(gs_vals)
            rho = 0.0 if degenerate else spearman(vals, gs_vals)
            out[key] = (rho, degenerate)
        return out

    per_run = _map_jobs(one_run, range(runs), jobs)
    stats = []
    for spec in specs:
        key = spec.key()
        values = [per_run[r][key][0] for r in range(runs)]
        degenerate = sum(1 for r in range(runs) if per_run[r][key][1])
        stats.append(
            MeasureStat(
                measure=key,
                statistic="spearman_vs_gold",
                per_run=values,
                degenerate_runs=degenerate,
            )
        )
    config = {
        "protocol": "fixed",
        "n": n,
        "repeats": repeats,
        "runs": runs,
        "seed": seed,
        "measures": [s.key() for s in specs],
    }
    return ProtocolResult(stats=stats, config=config)


# ---------------------------------------------------------------------------
# Growing-size setting.

class _GrowthTrackers:
    """Incremental per-step values of every tracked measure.

    ``add`` receives the new point's distances to all previous members and
    returns the current value of each measure on the grown set. Values agree
    with evaluating the measures from scratch on each prefix (the packing
    count uses the arrival-order greedy approximation; the determinant uses
    an incrementally extended Cholesky factor and freezes at zero once the
    similarity matrix goes singular, which for a PSD kernel is permanent).
    """

    def __init__(self, specs: Sequence[MeasureSpec], dataset: Dataset):
        self.specs = list(specs)
        self.dataset = dataset
        self.size = 0
        self.pair_sum = 0.0
        self.max_dist = 0.0
        self.min_dist = np.inf
        self.row_max: list[float] = []
        self.row_min: list[float] = []
        self.keys: set[bytes] = set()
        self.labels: set[str] = set()
        self.frag_union: set[str] = set()
        self.packers = {
            spec.key(): IncrementalPacking(float(spec.param("t")))
            for spec in self.specs
            if spec.kind == "circles"
        }
        self._has_dpp = any(spec.kind == "dpp" for spec in self.specs)
        self.chol = np.zeros((0, 0))
        self.logdet = 0.0
        self.singular = False

    def _dpp_value(self, dists: np.ndarray) -> float:
        if self.size == 0:  # first point: matrix [[1]], but singleton => 0
            self.chol = np.ones((1, 1))
            return 0.0
        if self.singular:
            return 0.0
        sims = 1.0 - dists
        L = self.chol
        if L.shape[0] == 1:
            l = sims / L[0, 0]
        else:
            l = scipy.linalg.solve_triangular(L, sims, lower=True, check_finite=False)
        s = 1.0 - float(l @ l)
        if s <= 1e-300:
            self.singular = True
            return 0.0
        k = L.shape[0]
        new = np.zeros((k + 1, k + 1))
        new[:k, :k] = L
        new[k, :k] = l
        new[k, k] = np.sqrt(s)
        self.chol = new
        self.logdet += np.log(s)
        if self.logdet < -745.0:  # exp underflows to 0.0
            return 0.0
        return float(np.exp(self.logdet))

    def add(self, dists: np.ndarray, key: bytes, label: str, fragments) -> dict[str, float]:
        dists = np.asarray(dists, dtype=np.float64)
        values: dict[str, float] = {}
        dpp_value = self._dpp_value(dists) if self._has_dpp else None
        if self.size > 0:
            self.pair_sum += float(dists.sum())
            self.max_dist = max(self.max_dist, float(dists.max()))
            self.min_dist = min(self.min_dist, float(dists.min()))
            for j in range(self.size):
                d = float(dists[j])
                if d > self.row_max[j]:
                    self.row_max[j] = d
                if d < self.row_min[j]:
                    self.row_min[j] = d
            self.row_max.append(float(dists.max()))
            self.row_min.append(float(dists.min()))
        else:
            self.row_max.append(0.0)
            self.row_min.append(np.inf)
        self.keys.add(key)
        self.labels.add(label)
        if fragments is not None:
            self.frag_union |= fragments
        for packer in self.packers.values():
            packer.add(dists)
        self.size += 1
        n = self.size
        for spec in self.specs:
            kind = spec.kind
            if kind == "gold_standard":
                values[spec.key()] = float(len(self.labels))
            elif kind == "richness":
                values[spec.key()] = float(len(self.keys))
            elif kind == "coverage":
                values[spec.key()] = float(len(self.frag_union))
            elif kind == "circles":
                values[spec.key()] = float(self.packers[spec.key()].count)
            elif kind == "dpp":
                values[spec.key()] = dpp_value if n > 1 else 0.0
            elif n < 2:
                values[spec.key()] = 0.0
            elif kind == "diversity":
                values[spec.key()] = 2.0 * self.pair_sum / (n * (n - 1))
            elif kind == "sum_diversity":
                values[spec.key()] = 2.0 * self.pair_sum / (n - 1)
            elif kind == "diameter":
                values[spec.key()] = self.max_dist
            elif kind == "sum_diameter":
                values[spec.key()] = float(sum(self.row_max))
            elif kind == "bottleneck":
                values[spec.key()] = self.min_dist
            elif kind == "sum_bottleneck":
                values[spec.key()] = float(sum(self.row_min))
            else:
                raise MeasureParamError(f"measure {kind!r} is not supported inside protocols")
        return values


def _grow_order(
    rng: np.random.Generator,
    pool: np.ndarray,
    n: int,
    bias: str,
    full: np.ndarray,
    power: float,
) -> np.ndarray:
    """Order in which pool molecules enter the growing set under a bias.

    similar: pick with probability proportional to (max similarity to the
    current set) ** power. most-similar: always pick the argmax. uniform:
    ignore distances entirely.
    """
    pool = np.asarray(pool)
    m = len(pool)
    if bias == "uniform":
        return pool[rng.permutation(m)[:n]]
    chosen = np.zeros(m, dtype=bool)
    best_sim = np.zeros(m)
    order = np.empty(n, dtype=np.int64)
    first = int(rng.integers(0, m))
    order[0] = pool[first]
    chosen[first] = True
    np.maximum(best_sim, 1.0 - full[pool[first], pool], out=best_sim)
    for step in range(1, n):
        avail = np.nonzero(~chosen)[0]
        sims = best_sim[avail]
        if bias == "most-similar":
            pick = avail[int(np.argmax(sims))]
        else:
            weights = np.power(np.maximum(sims, 0.0), power)
            total = weights.sum()
            if total <= 0.0:
                pick = avail[int(rng.integers(0, len(avail)))]
            else:
                pick = avail[int(rng.choice(len(avail), p=weights / total))]
        order[step] = pool[pick]
        chosen[pick] = True
        np.maximum(best_sim, 1.0 - full[pool[pick], pool], out=best_sim)
    return order


def protocol_growing(
    dataset: Dataset,
    n: int,
    measures: Sequence[MeasureSpec | str] = DEFAULT_PROTOCOL_MEASURES,
    bias: str = "similar",
    power: float = DEFAULT_SIMILAR_POWER,
    seed: int = 0,
    runs: int = 10,
    normalize_dtw: bool = False,
    oracle: TanimotoOracle | None = None,
    jobs: int = 1,
) -> ProtocolResult:
    """Growing-size setting: per-step measure curves under a sampling bias,
    compared with the gold-standard curve by DTW on incremental series."""
    _require_labels(dataset)
    if bias not in BIAS_MODES:
        raise ProtocolError(f"bias must be one of {BIAS_MODES}, got {bias!r}")
    if not 1 <= n <= len(dataset):
        raise ProtocolError(f"subset size n={n} not in [1, {len(dataset)}]")
    specs = _resolve_specs(measures)
    gs_spec = MeasureSpec("gold_standard")
    tracked = [gs_spec] + [s for s in specs if s.kind != "gold_standard"]
    classes = dataset.label_classes()
    oracle = oracle or TanimotoOracle(dataset)
    full = oracle.full_matrix()
    run_seeds = np.random.SeedSequence(seed).spawn(runs)

    def one_run(run_idx: int) -> tuple[CurveSeries, dict[str, float]]:
        sample_ss, growth_ss = run_seeds[run_idx].spawn(2)
        rng_sample = np.random.default_rng(sample_ss)
        rng_growth = np.random.default_rng(growth_ss)
        pool = _sample_label_pool(rng_sample, dataset, classes, n)
        order = _grow_order(rng_growth, pool, n, bias, full, power)
        trackers = _GrowthTrackers(tracked, dataset)
        series = {spec.key(): np.empty(n) for spec in tracked}
        for step, idx in enumerate(order):
            idx = int(idx)
            dists = full[idx, order[:step]]
            rec = dataset.records[idx]
            values = trackers.add(dists, dataset.fingerprint_key(idx), rec.label, rec.fragments)
            for key, val in values.items():
                series[key][step] = val
        curve = CurveSeries(steps=np.arange(1, n + 1), values=series, form="cumulative")
        inc = curve.to_incremental()
        gs_inc = inc.values[gs_spec.key()]
        dtws = {
            spec.key(): dtw(inc.values[spec.key()], gs_inc, normalize=normalize_dtw)
            for spec in specs
            if spec.kind != "gold_standard"
        }
        for spec in specs:
            if spec.kind == "gold_standard":
                dtws[spec.key()] = dtw(gs_inc, gs_inc, normalize=normalize_dtw)
        return curve, dtws

    results = _map_jobs(one_run, range(runs), jobs)
    curves = [r[0] for r in results]
    stats = []
    for spec in specs:
        key = spec.key()
        values = [results[r][1][key] for r in range(runs)]
        stats.append(MeasureStat(measure=key, statistic="dtw_vs_gold", per_run=values))
    config = {
        "protocol": "growing",
        "n": n,
        "runs": runs,
        "seed": seed,
        "bias": bias,
        "bias_label": BIAS_LABELS[bias],
        "power": power if bias == "similar" else None,
        "normalize_dtw": normalize_dtw,
        "measures": [s.key() for s in specs],
    }
    return ProtocolResult(stats=stats, config=config, curves=curves)


# ---------------------------------------------------------------------------
# Threshold sweep.

@dataclass
class SweepResult:
    rows: list[dict[str, Any]]
    best_t: float
    config: dict[str, Any]


def threshold_sweep(
    dataset: Dataset,
    protocol: str = "fixed",
    t_grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75),
    seed: int = 0,
    n: int = 200,
    repeats: int = 100,
    runs: int = 10,
    bias: str = "similar",
    restarts: int = 8,
    oracle: TanimotoOracle | None = None,
    jobs: int = 1,
) -> SweepResult:
    """Run the chosen protocol for the packing measure across a threshold
    grid. Best t maximizes the fixed-size correlation (ties to the smallest
    t) or minimizes the growing-size DTW distance."""
    if protocol not in ("fixed", "growing"):
        raise ProtocolError(f"protocol must be fixed|growing, got {protocol!r}")
    oracle = oracle or TanimotoOracle(dataset)
    rows = []
    scores = []
    for t in t_grid:
        t = float(t)
        spec = MeasureSpec("circles", {"t": t, "restarts": restarts})
        if protocol == "fixed":
            result = protocol_fixed(
                dataset, n=n, measures=[spec], seed=seed, repeats=repeats, runs=runs,
                oracle=oracle, jobs=jobs,
            )
        else:
            result = protocol_growing(
                dataset, n=n, measures=[spec], bias=bias, seed=seed, runs=runs,
                oracle=oracle, jobs=jobs,
            )
        stat = result.stats[0]
        rows.append({"t": t, **stat.to_dict()})
        scores.append(stat.mean)
    scores_arr = np.asarray(scores)
    best_idx = int(np.argmax(scores_arr)) if protocol == "fixed" else int(np.argmin(scores_arr))
    config = {
        "protocol": protocol,
        "t_grid": [float(t) for t in t_grid],
        "n": n,
        "seed": seed,
        "repeats": repeats if protocol == "fixed" else None,
        "runs": runs,
        "bias": bias if protocol == "growing" else None,
    }
    return SweepResult(rows=rows, best_t=float(t_grid[best_idx]), config=config)


def _map_jobs(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
