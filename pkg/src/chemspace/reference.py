"""Reference-based coverage over fragment annotations.

A molecule covers a reference fragment when the fragment id appears in the
record's annotation set; the measure counts distinct covered references.
Fragment extraction itself (functional groups, ring systems, scaffolds)
happens upstream; this module only consumes the annotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingFragmentsError
from .fingerprints import Dataset


@dataclass(frozen=True)
class ReferenceSet:
    """A reference fragment collection.

    ``kind`` is descriptive metadata (FG, RS, BM, or custom). When ``universe``
    is None, the universe is implicitly every fragment id observed in the
    dataset, so the measure reduces to "count distinct fragments present".
    """

    kind: str = "custom"
    universe: frozenset[str] | None = None


def coverage(subset, dataset: Dataset, ref: ReferenceSet | None = None) -> int:
    """Count distinct reference fragments covered by the selected records."""
    ref = ref or ReferenceSet()
    idx = np.asarray(list(subset), dtype=np.int64)
    covered: set[str] = set()
    for i in idx:
        rec = dataset.records[int(i)]
        if rec.fragments is None:
            raise MissingFragmentsError(f"record {rec.id!r} has no fragment annotations")
        covered |= rec.fragments
    if ref.universe is not None:
        covered &= ref.universe
    return len(covered)


def load_universe(path: str | Path) -> frozenset[str]:
    """Read an explicit fragment universe: one fragment id per line."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(line.strip() for line in lines if line.strip())
