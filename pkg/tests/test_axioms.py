import numpy as np
import pytest

from chemspace.axioms import (
    EXPECTED_CLASSIFICATION,
    GeodesicConfig,
    check_corollaries,
    check_dissimilarity,
    check_subadditivity,
    quadrant_table,
    random_world,
    replay_counterexample,
    world_measure,
)
from chemspace.measures import MeasureSpec

SUBADDITIVE_SPECS = [
    MeasureSpec("richness"),
    MeasureSpec("coverage"),
    MeasureSpec("circles", {"t": 0.5}),
]
NON_SUBADDITIVE_SPECS = [
    MeasureSpec("diversity"),
    MeasureSpec("sum_diversity"),
    MeasureSpec("diameter"),
    MeasureSpec("sum_diameter"),
    MeasureSpec("bottleneck"),
    MeasureSpec("sum_bottleneck"),
    MeasureSpec("dpp"),
]


@pytest.mark.parametrize("spec", SUBADDITIVE_SPECS, ids=lambda s: s.key())
def test_subadditive_measures_survive_search(spec):
    result = check_subadditivity(spec, trials=300, seed=7)
    assert result.holds
    assert result.trials == 300


@pytest.mark.parametrize("spec", NON_SUBADDITIVE_SPECS, ids=lambda s: s.key())
def test_non_subadditive_measures_fail_fast(spec):
    result = check_subadditivity(spec, trials=100, seed=7)
    assert not result.holds
    assert result.trials < 100
    assert result.counterexample is not None
    assert replay_counterexample(result.counterexample)


@pytest.mark.parametrize(
    "kind", ["diversity", "bottleneck", "sum_bottleneck", "dpp"]
)
def test_monotonicity_violations_are_single_point_insertions(kind):
    # These counterexamples insert one molecule and watch the value drop:
    # a lower-side violation with a singleton second set.
    result = check_subadditivity(MeasureSpec(kind), trials=100, seed=0)
    ce = result.counterexample
    assert ce.side == "lower"
    assert len(ce.s2) == 1
    assert ce.values["mu_union"] < ce.values["mu_s1"]


@pytest.mark.parametrize("kind", ["diameter", "sum_diameter", "sum_diversity"])
def test_cluster_pair_violations_hit_upper_side(kind):
    result = check_subadditivity(MeasureSpec(kind), trials=100, seed=0)
    ce = result.counterexample
    assert ce.side == "upper"
    assert ce.values["mu_union"] > ce.values["mu_s1"] + ce.values["mu_s2"]


def test_counterexamples_deterministic_across_calls():
    a = check_subadditivity(MeasureSpec("diversity"), trials=50, seed=3)
    b = check_subadditivity(MeasureSpec("diversity"), trials=50, seed=3)
    assert a.counterexample.to_dict() == b.counterexample.to_dict()


def test_dissimilarity_diversity_constant_two_thirds():
    result = check_dissimilarity(MeasureSpec("diversity"))
    assert result.holds
    # Equality across the grid: value is 2a/3 regardless of delta.
    for a in (0.3, 0.6, 1.0):
        for frac in (0.1, 0.5, 0.9):
            world = GeodesicConfig(a, a * frac).world()
            assert world_measure(MeasureSpec("diversity"), [0, 1, 2], world) == pytest.approx(
                2 * a / 3, abs=1e-12
            )


def test_dissimilarity_sum_diameter_violated_off_center():
    result = check_dissimilarity(MeasureSpec("sum_diameter"))
    assert not result.holds
    ce = result.counterexample
    assert ce.values["mu_candidate"] > ce.values["mu_midpoint"]
    assert replay_counterexample(ce)
    # The canonical violation: a=1, delta=0.9 scores above the midpoint.
    world = GeodesicConfig(1.0, 0.9).world()
    mid = GeodesicConfig(1.0, 0.5).world()
    assert world_measure(MeasureSpec("sum_diameter"), [0, 1, 2], world) > world_measure(
        MeasureSpec("sum_diameter"), [0, 1, 2], mid
    )


def test_dissimilarity_dpp_closed_form_and_argmax():
    # det of the geodesic similarity matrix is (2a-4)(delta^2 - a*delta),
    # maximized at delta = a/2.
    spec = MeasureSpec("dpp")
    for a in (0.4, 0.8, 1.0):
        values = {}
        for frac in np.arange(1, 20) / 20:
            delta = a * float(frac)
            world = GeodesicConfig(a, delta).world()
            got = world_measure(spec, [0, 1, 2], world)
            expected = (2 * a - 4) * (delta**2 - a * delta)
            assert got == pytest.approx(expected, abs=1e-9)
            values[frac] = got
        assert max(values, key=values.get) == 0.5
    assert check_dissimilarity(spec).holds


def test_dissimilarity_remaining_measures():
    for kind in ("sum_diversity", "diameter", "bottleneck", "sum_bottleneck", "richness"):
        assert check_dissimilarity(MeasureSpec(kind)).holds, kind
    assert check_dissimilarity(MeasureSpec("circles", {"t": 0.5})).holds


def test_dissimilarity_coverage_fails_by_construction():
    result = check_dissimilarity(MeasureSpec("coverage"))
    assert not result.holds
    assert "not applicable" in result.note
    assert result.counterexample.values["mu_candidate"] == 3.0
    assert result.counterexample.values["mu_midpoint"] == 2.0


def test_geodesic_config_validation():
    with pytest.raises(ValueError):
        GeodesicConfig(0.5, 0.5)
    with pytest.raises(ValueError):
        GeodesicConfig(1.5, 0.2)


@pytest.mark.parametrize("spec", SUBADDITIVE_SPECS, ids=lambda s: s.key())
def test_corollaries_hold_for_subadditive_measures(spec):
    report = check_corollaries(spec, trials=200, seed=5)
    assert report["all_hold"]
    assert report["subtraction"] == "holds"
    assert report["monotonicity"] == "holds"
    assert report["dominance"] == "holds"


def test_quadrant_table_matches_expected():
    table = quadrant_table(trials=200, seed=11)
    assert table["matches_expected"]
    by_measure = {row["measure"].split(":")[0]: row for row in table["reports"]}
    for kind, (sub, dis) in EXPECTED_CLASSIFICATION.items():
        assert by_measure[kind]["subadditive"] == sub, kind
        assert by_measure[kind]["dissimilar"] == dis, kind


def test_random_world_matrices_are_valid_metrics():
    rng = np.random.default_rng(0)
    for _ in range(10):
        world = random_world(rng, size=int(rng.integers(2, 13)))
        m = world.matrix
        assert (m >= 0).all() and (m <= 1).all()
        assert np.allclose(m, m.T)
        n = m.shape[0]
        for via in range(n):
            assert (m <= m[:, via][:, None] + m[via][None, :] + 1e-12).all()
