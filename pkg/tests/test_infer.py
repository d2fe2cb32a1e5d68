import math

import numpy as np
import pytest
from scipy import stats

from equidep.copula_core import Sample
from equidep.errors import InvalidInputError
from equidep.infer import (
    DEFAULT_NOISE_GRID,
    DatasetValue,
    StatisticEngine,
    equitability_experiment,
    log_log_slope,
    normal_tolerance,
    permutation_index,
    permutation_test,
    permutation_tests,
    power_curve,
    power_curves,
    rejection_rates,
    separation_auc,
)
from equidep.measures import ALL_KINDS, SIGNED_KINDS, compute_measures
from equidep.synth import gen_gaussian_copula, gen_regression


def test_default_noise_grid():
    assert len(DEFAULT_NOISE_GRID) == 30
    assert DEFAULT_NOISE_GRID[0] == pytest.approx(0.05)
    assert DEFAULT_NOISE_GRID[-1] == pytest.approx(1.5)


@pytest.mark.parametrize("kinds", [("dcor", "mic", "pearson", "ccor", "mi_ksg"), ALL_KINDS])
def test_engine_permutation_matches_recomputation(kinds):
    s = gen_regression("parabolic", 0.3, 150, 4)
    engine = StatisticEngine(s, kinds)
    perm = permutation_index(9, 3, s.n)
    direct = compute_measures(Sample(s.xs, s.ys[perm]), kinds)
    fast = engine.evaluate(perm)
    for k in kinds:
        assert fast[k] == pytest.approx(direct[k], abs=1e-12), k


def test_engine_large_n_dcor_path():
    from equidep import infer

    s = gen_gaussian_copula(0.3, 120, 1)
    perm = permutation_index(1, 0, s.n)
    fast = StatisticEngine(s, ["dcor"]).evaluate(perm)["dcor"]
    old = infer.DCOR_MATRIX_MAX_N
    infer.DCOR_MATRIX_MAX_N = 10
    try:
        slow = StatisticEngine(s, ["dcor"]).evaluate(perm)["dcor"]
    finally:
        infer.DCOR_MATRIX_MAX_N = old
    assert fast == pytest.approx(slow, abs=1e-12)


def test_result_matches_manual_null():
    s = gen_regression("linear", 1.0, 80, 2)
    n_perm = 59
    res = permutation_test("spearman", s, n_perm=n_perm, seed=13)
    null = np.array(
        [
            abs(compute_measures(Sample(s.xs, s.ys[permutation_index(13, i, s.n)]), ["spearman"])["spearman"])
            for i in range(n_perm)
        ]
    )
    stat = abs(compute_measures(s, ["spearman"])["spearman"])
    assert res.statistic == pytest.approx(stat)
    assert res.cutoff == pytest.approx(np.quantile(null, 0.95))
    assert res.p_value == pytest.approx((1 + np.sum(null >= stat)) / (n_perm + 1))
    assert res.rejected == (res.statistic > res.cutoff)
    assert res.n_perm == n_perm and res.seed == 13


def test_comonotone_rejected_for_every_kind():
    x = np.linspace(0, 1, 320)
    res = permutation_tests(ALL_KINDS, Sample(x, x), n_perm=199, seed=1)
    for kind, r in res.items():
        assert r.rejected, kind
        assert r.p_value == pytest.approx(1 / 200), kind


def test_joint_and_single_tests_agree():
    s = gen_regression("cross", 0.4, 100, 0)
    joint = permutation_tests(["ccor", "dcor", "mic"], s, n_perm=49, seed=5)
    for kind in ("ccor", "dcor", "mic"):
        assert permutation_test(kind, s, n_perm=49, seed=5) == joint[kind]


def test_increasing_transform_changes_no_field():
    s = gen_regression("circle", 0.1, 120, 3)
    moved = Sample(np.exp(s.xs), s.ys**3)
    kinds = [k for k in ALL_KINDS if k != "pearson"]
    assert permutation_tests(kinds, s, n_perm=39, seed=2) == permutation_tests(kinds, moved, n_perm=39, seed=2)


def test_null_p_values_uniform():
    pvals = [
        permutation_test("spearman", gen_regression("four_clouds", 0.0, 40, s), n_perm=999, seed=s).p_value
        for s in range(200)
    ]
    assert min(pvals) >= 1 / 1000 and max(pvals) <= 1
    assert stats.kstest(pvals, "uniform").pvalue > 0.01


@pytest.mark.parametrize("n_perm", [0, 18, 20.5])
def test_n_perm_minimum(n_perm):
    with pytest.raises(InvalidInputError):
        permutation_test("ccor", gen_regression("linear", 0.1, 30, 0), n_perm=n_perm)


@pytest.mark.parametrize("level", [0.0, 1.0, -0.1])
def test_level_range(level):
    with pytest.raises(InvalidInputError):
        permutation_test("ccor", gen_regression("linear", 0.1, 30, 0), n_perm=19, level=level)


def test_unknown_kind():
    with pytest.raises(InvalidInputError):
        permutation_test("hhg", gen_regression("linear", 0.1, 30, 0), n_perm=19)


def test_rejection_rates_independent_of_workers():
    args = dict(kinds=["ccor", "spearman"], rel="four_clouds", n=60, n_sims=6, n_perm=19, seed=3)
    serial = rejection_rates(**args, workers=1)
    parallel = rejection_rates(**args, workers=2)
    assert serial[0] == parallel[0]
    for k in serial[1]:
        np.testing.assert_array_equal(serial[1][k], parallel[1][k])


def test_power_noiseless_line():
    assert power_curve("pearson", "linear", [0.0], n=320, n_sims=50, n_perm=50, seed=1) == [(0.0, 1.0)]


def test_power_pearson_blind_to_circle():
    curve = power_curve("pearson", "circle", [0.0, 0.2, 0.5], n=320, n_sims=100, n_perm=100, seed=2)
    assert all(power <= 0.1 for _, power in curve)


def test_power_pearson_beats_ccor_on_noisy_line():
    curves = power_curves(["pearson", "ccor"], "linear", [0.5, 0.8], n=320, n_sims=100, n_perm=100, seed=3)
    for a, b in zip(curves["pearson"], curves["ccor"]):
        assert a.power >= b.power


def test_power_independent_of_workers():
    a = power_curves(["ccor"], "cross", [0.3], n=50, n_sims=4, n_perm=19, seed=1, workers=1)
    b = power_curves(["ccor"], "cross", [0.3], n=50, n_sims=4, n_perm=19, seed=1, workers=2)
    assert a == b


def test_power_rejects_bad_sims():
    with pytest.raises(InvalidInputError):
        power_curves(["ccor"], "linear", [0.1], n_sims=0)


def dv(noise, value):
    return DatasetValue("linear", noise, 100, 0, value)


def test_separation_auc_perfect_and_reversed():
    good = [dv(0.3, 0.9), dv(0.3, 0.8), dv(0.6, 0.2), dv(0.6, 0.1)]
    bad = [dv(0.3, 0.1), dv(0.6, 0.9)]
    assert separation_auc(good) == 1.0
    assert separation_auc(bad) == 0.0


def test_separation_auc_ties_half():
    assert separation_auc([dv(0.3, 0.5), dv(0.6, 0.5)]) == 0.5
    assert separation_auc([dv(0.3, 0.5), dv(0.3, 0.7), dv(0.6, 0.5)]) == 0.75


def test_separation_auc_needs_two_levels():
    with pytest.raises(InvalidInputError):
        separation_auc([dv(0.3, 0.5), dv(0.3, 0.7)])


def test_equitability_defaults():
    reports = {r.kind: r for r in equitability_experiment(["ccor", "pearson"], seed=0)}
    assert len(reports["ccor"].values) == 6 * 2 * 2
    assert reports["ccor"].separation_auc >= 0.95
    assert reports["pearson"].separation_auc <= 0.85


def test_equitability_mi_ksg_degrades_with_size_gap():
    near = equitability_experiment(["mi_ksg"], sizes=(200, 2000), seed=0)[0].separation_auc
    far = equitability_experiment(["mi_ksg"], sizes=(200, 20_000), seed=0)[0].separation_auc
    assert far < near


def test_equitability_workers_agree():
    a = equitability_experiment(["ccor"], sizes=(100,), relationships=("linear", "circle"), workers=1)
    b = equitability_experiment(["ccor"], sizes=(100,), relationships=("linear", "circle"), workers=2)
    assert a == b


@pytest.mark.parametrize("props", [(0.3, 0.3), (0.0, 0.5), (0.5, 1.0)])
def test_equitability_rejects_bad_props(props):
    with pytest.raises(InvalidInputError):
        equitability_experiment(["ccor"], noise_props=props)


def test_signed_kinds_scored_by_magnitude():
    s = gen_regression("linear", 0.0, 50, 0)
    flipped = Sample(s.xs, -s.ys)
    for kind in SIGNED_KINDS:
        assert permutation_test(kind, s, n_perm=19, seed=0).statistic == pytest.approx(
            permutation_test(kind, flipped, n_perm=19, seed=0).statistic
        )


def test_log_log_slope_exact():
    sizes = [10.0, 100.0, 1000.0]
    assert log_log_slope(sizes, [s**-0.5 for s in sizes]) == pytest.approx(-0.5)
    with pytest.raises(InvalidInputError):
        log_log_slope(sizes, [1.0, 0.0, 1.0])


def test_normal_tolerance():
    assert normal_tolerance(0.05, 500) == pytest.approx(3 * math.sqrt(0.05 * 0.95 / 500))
