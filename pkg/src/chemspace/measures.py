"""Distance-based coverage measures, richness, and the measure dispatch layer.

Every measure maps a set of molecules to a non-negative real and returns 0 on
the empty set. Distance-based measures also return 0 for singletons, so the
value never depends on an arbitrary single-point weight.

Kernel functions (``*_from_dmatrix``) operate on a precomputed pairwise
distance submatrix; the public wrappers take (indices, oracle) and are what
the CLI and protocols go through.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import MeasureParamError, MeasureSizeError
from .fingerprints import Dataset

DPP_EXACT_CAP = 2048
DPP_NEGATIVE_CLAMP = 1e-12

MEASURE_KINDS = (
    "richness",
    "diversity",
    "sum_diversity",
    "diameter",
    "sum_diameter",
    "bottleneck",
    "sum_bottleneck",
    "dpp",
    "coverage",
    "circles",
    "gold_standard",
)

DISTANCE_BASED_KINDS = (
    "diversity",
    "sum_diversity",
    "diameter",
    "sum_diameter",
    "bottleneck",
    "sum_bottleneck",
    "dpp",
)


@dataclass(frozen=True)
class MeasureSpec:
    """Which measure to run and with which parameters."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def key(self) -> str:
        """Canonical spec string, e.g. ``circles:t=0.75``."""
        if not self.params:
            return self.kind
        parts = ",".join(f"{k}={_format_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{parts}"

    def __str__(self) -> str:
        return self.key()


def _format_param(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, frozenset):
        return ",".join(sorted(value))
    return str(value)


@dataclass
class MeasureResult:
    """Scalar outcome of one measure evaluation."""

    spec: MeasureSpec
    value: float
    set_size: int
    metadata: dict[str, Any] = field(default_factory=dict)


def _coerce_param(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_measure_spec(text: str) -> MeasureSpec:
    """Parse the ``name[:key=value,...]`` measure mini-grammar."""
    name, _, rest = text.strip().partition(":")
    name = name.strip()
    if name == "gs":
        name = "gold_standard"
    params: dict[str, Any] = {}
    if rest:
        for item in rest.split(","):
            if not item.strip():
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise MeasureParamError(f"bad parameter {item!r} in measure spec {text!r}")
            params[key.strip()] = _coerce_param(value.strip())
    spec = MeasureSpec(kind=name, params=params)
    validate_spec(spec)
    return spec


def validate_spec(spec: MeasureSpec) -> None:
    if spec.kind not in MEASURE_KINDS:
        raise MeasureParamError(f"unknown measure kind: {spec.kind!r}")
    if spec.kind == "circles":
        t = spec.param("t")
        if t is None:
            raise MeasureParamError("circles requires parameter t")
        if not isinstance(t, (int, float)) or not 0.0 <= float(t) < 1.0:
            raise MeasureParamError(f"circles threshold t must be in [0,1), got {t!r}")
        mode = spec.param("mode", "auto")
        if mode not in ("auto", "exact", "greedy"):
            raise MeasureParamError(f"circles mode must be auto|exact|greedy, got {mode!r}")
        restarts = spec.param("restarts", 8)
        if not isinstance(restarts, int) or restarts < 1:
            raise MeasureParamError(f"circles restarts must be a positive integer, got {restarts!r}")


# ---------------------------------------------------------------------------
# Kernels over a pairwise distance submatrix (square, zero diagonal).

def _offdiag(dmatrix: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(dmatrix.shape[0], k=1)
    return dmatrix[iu]


def diversity_from_dmatrix(dmatrix: np.ndarray) -> float:
    n = dmatrix.shape[0]
    if n < 2:
        return 0.0
    total = _offdiag(dmatrix).sum(dtype=np.longdouble)
    return float(2.0 * total / (n * (n - 1)))


def sum_diversity_from_dmatrix(dmatrix: np.ndarray) -> float:
    n = dmatrix.shape[0]
    if n < 2:
        return 0.0
    total = _offdiag(dmatrix).sum(dtype=np.longdouble)
    return float(2.0 * total / (n - 1))


def diameter_from_dmatrix(dmatrix: np.ndarray) -> float:
    if dmatrix.shape[0] < 2:
        return 0.0
    return float(_offdiag(dmatrix).max())


def sum_diameter_from_dmatrix(dmatrix: np.ndarray) -> float:
    n = dmatrix.shape[0]
    if n < 2:
        return 0.0
    masked = dmatrix.copy()
    np.fill_diagonal(masked, -np.inf)
    return float(masked.max(axis=1).sum(dtype=np.longdouble))


def bottleneck_from_dmatrix(dmatrix: np.ndarray) -> float:
    if dmatrix.shape[0] < 2:
        return 0.0
    return float(_offdiag(dmatrix).min())


def sum_bottleneck_from_dmatrix(dmatrix: np.ndarray) -> float:
    n = dmatrix.shape[0]
    if n < 2:
        return 0.0
    masked = dmatrix.copy()
    np.fill_diagonal(masked, np.inf)
    return float(masked.min(axis=1).sum(dtype=np.longdouble))


def dpp_from_dmatrix(dmatrix: np.ndarray) -> tuple[float, float | None]:
    """Determinant of the similarity matrix 1 - d (unit diagonal).

    Returns (value, raw determinant). The reported value is clamped at 0 so
    the measure stays non-negative; the raw determinant (which is tiny and
    negative under roundoff, or genuinely negative for non-PSD explicit
    matrices) is preserved for diagnostics.
    """
    n = dmatrix.shape[0]
    if n < 2:
        return 0.0, None
    if n > DPP_EXACT_CAP:
        raise MeasureSizeError(
            f"dpp determinant refused for n={n} > {DPP_EXACT_CAP}: the value underflows "
            "at this size; evaluate on a smaller set"
        )
    sim = 1.0 - dmatrix
    np.fill_diagonal(sim, 1.0)
    raw = float(np.linalg.det(sim))
    value = raw
    if -DPP_NEGATIVE_CLAMP <= raw < 0.0:
        value = 0.0
    return max(value, 0.0), raw


# ---------------------------------------------------------------------------
# Public wrappers over (indices, oracle / dataset).

def _as_indices(subset) -> np.ndarray:
    idx = np.asarray(list(subset), dtype=np.int64)
    if idx.size != len(set(idx.tolist())):
        raise ValueError("molecule sets cannot repeat indices")
    return idx


def diversity(subset, oracle) -> float:
    idx = _as_indices(subset)
    return diversity_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def sum_diversity(subset, oracle) -> float:
    idx = _as_indices(subset)
    return sum_diversity_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def diameter(subset, oracle) -> float:
    idx = _as_indices(subset)
    return diameter_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def sum_diameter(subset, oracle) -> float:
    idx = _as_indices(subset)
    return sum_diameter_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def bottleneck(subset, oracle) -> float:
    idx = _as_indices(subset)
    return bottleneck_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def sum_bottleneck(subset, oracle) -> float:
    idx = _as_indices(subset)
    return sum_bottleneck_from_dmatrix(oracle.submatrix(idx)) if idx.size else 0.0


def dpp(subset, oracle) -> float:
    idx = _as_indices(subset)
    if not idx.size:
        return 0.0
    value, _ = dpp_from_dmatrix(oracle.submatrix(idx))
    return value


def richness(subset, dataset: Dataset) -> int:
    """Number of unique fingerprint bit patterns among the selected records."""
    idx = _as_indices(subset)
    return len({dataset.fingerprint_key(int(i)) for i in idx})


def gold_standard(subset, dataset: Dataset) -> int:
    """Number of unique class labels among the selected records."""
    idx = _as_indices(subset)
    labels = set()
    for i in idx:
        label = dataset.records[int(i)].label
        if label is None:
            raise MeasureParamError(f"record {dataset.records[int(i)].id!r} has no class label")
        labels.add(label)
    return len(labels)


def evaluate_measure(
    spec: MeasureSpec,
    subset,
    dataset: Dataset | None = None,
    oracle=None,
    exact_cap: int = 64,
) -> MeasureResult:
    """Evaluate one measure spec on a molecule set.

    ``oracle`` is required for distance-based kinds and circles; ``dataset``
    for richness, coverage, and the gold standard.
    """
    from .circles import circles_auto
    from .reference import ReferenceSet, coverage

    validate_spec(spec)
    idx = _as_indices(subset)
    size = int(idx.size)
    meta: dict[str, Any] = {}

    if spec.kind in DISTANCE_BASED_KINDS or spec.kind == "circles":
        if oracle is None:
            raise MeasureParamError(f"{spec.kind} requires a distance oracle")
    if spec.kind in ("richness", "coverage", "gold_standard"):
        if dataset is None:
            raise MeasureParamError(f"{spec.kind} requires a dataset")

    if size == 0:
        return MeasureResult(spec=spec, value=0.0, set_size=0, metadata={"empty": True})

    if spec.kind == "richness":
        value = float(richness(idx, dataset))
    elif spec.kind == "gold_standard":
        value = float(gold_standard(idx, dataset))
    elif spec.kind == "coverage":
        universe = spec.param("universe")
        ref = ReferenceSet(kind=str(spec.param("kind", "custom")), universe=universe)
        value = float(coverage(idx, dataset, ref))
    elif spec.kind == "circles":
        packing = circles_auto(
            idx,
            oracle,
            t=float(spec.param("t")),
            mode=str(spec.param("mode", "auto")),
            restarts=int(spec.param("restarts", 8)),
            seed=int(spec.param("seed", 0)),
            exact_cap=exact_cap,
        )
        value = float(packing.count)
        meta["mode"] = packing.mode
        meta["optimal"] = packing.optimal
    elif spec.kind == "dpp":
        value, raw = dpp_from_dmatrix(oracle.submatrix(idx)) if size else (0.0, None)
        if raw is not None:
            meta["raw_determinant"] = raw
        else:
            meta["convention"] = "size<=1"
    else:
        kernel = {
            "diversity": diversity_from_dmatrix,
            "sum_diversity": sum_diversity_from_dmatrix,
            "diameter": diameter_from_dmatrix,
            "sum_diameter": sum_diameter_from_dmatrix,
            "bottleneck": bottleneck_from_dmatrix,
            "sum_bottleneck": sum_bottleneck_from_dmatrix,
        }[spec.kind]
        value = kernel(oracle.submatrix(idx))

    return MeasureResult(spec=spec, value=value, set_size=size, metadata=meta)
