"""Permutation independence tests, power curves and the equitability experiment.

Every random draw comes from a seed derived from ``(base_seed, task
indices)``, so results do not depend on the number of worker processes or
on the order in which tasks finish.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np

from .copula_core import PseudoSample, Sample, pseudo_observations
from .errors import InvalidInputError
from .measures import (
    SIGNED_KINDS,
    _double_centered,
    _dvar2,
    _dcor_from_parts,
    MicPlan,
    check_kinds,
    distance_correlation_arrays,
    measures_from_pseudo,
)
from .synth import SIX_CURVES, MixtureSpec, gen_mixture, gen_regression, task_seed

DEFAULT_LEVEL = 0.05
DEFAULT_NOISE_GRID = tuple(float(x) for x in np.linspace(0.05, 1.5, 30))
# O(n^2) matrices for the permutation fast path stay below ~70 MB
DCOR_MATRIX_MAX_N = 2000


@dataclass(frozen=True)
class TestResult:
    statistic: float
    cutoff: float
    p_value: float
    n_perm: int
    seed: int
    rejected: bool

    __test__ = False


@dataclass(frozen=True)
class PowerPoint:
    noise_sd: float
    power: float
    cutoff: float


@dataclass(frozen=True)
class DatasetValue:
    relationship: str
    noise_prop: float
    n: int
    rep: int
    value: float


@dataclass(frozen=True)
class EquitabilityReport:
    kind: str
    values: tuple[DatasetValue, ...]
    separation_auc: float
    params: dict = field(default_factory=dict)


def test_statistic(kind: str, value: float) -> float:
    """Signed kinds are tested two-sided through their absolute value."""
    return abs(value) if kind in SIGNED_KINDS else value


def _check_level(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise InvalidInputError(f"level must lie in (0, 1), got {level}")
    return float(level)


def _check_n_perm(n_perm: int) -> int:
    if int(n_perm) != n_perm or n_perm < 19:
        raise InvalidInputError(f"n_perm must be an integer >= 19, got {n_perm}")
    return int(n_perm)


def permutation_index(seed: int, index: int, n: int) -> np.ndarray:
    """The ``index``-th permutation of ``range(n)`` for base ``seed``."""
    return np.random.default_rng(task_seed(seed, index)).permutation(n)


class StatisticEngine:
    """Evaluate several statistics on a sample and on permutations of its ``y``.

    Ranks are permutation-equivariant, so the pseudo-observations of a
    permuted sample are the permuted pseudo-observations. Distance
    correlation and grid MIC reuse matrices and bin labels computed once.
    """

    def __init__(self, sample: Sample, kinds: Iterable[str], **params):
        self.kinds = check_kinds(kinds)
        self.params = params
        self.xs = np.asarray(sample.xs)
        self.ys = np.asarray(sample.ys)
        pseudo = pseudo_observations(sample)
        self.us = np.asarray(pseudo.us)
        self.vs = np.asarray(pseudo.vs)
        self.n = sample.n
        self._generic = [k for k in self.kinds if k not in ("dcor", "mic")]
        self._dcor = None
        if "dcor" in self.kinds and self.n <= DCOR_MATRIX_MAX_N:
            a = _double_centered(self.us)
            b = _double_centered(self.vs)
            self._dcor = (a, b, _dvar2(self.us), _dvar2(self.vs))
        self._mic = None
        if "mic" in self.kinds:
            self._mic = MicPlan(self.us, self.vs, params.get("exponent", 0.6))

    def evaluate(self, perm: np.ndarray | None = None) -> dict[str, float]:
        """Raw measure values, with ``y`` reordered by ``perm`` when given."""
        vs = self.vs if perm is None else self.vs[perm]
        ys = self.ys if perm is None else self.ys[perm]
        out: dict[str, float] = {}
        if self._generic:
            gen_params = {k: v for k, v in self.params.items() if k != "exponent"}
            out.update(
                measures_from_pseudo(PseudoSample(self.us, vs), self._generic, (self.xs, ys), **gen_params)
            )
        if "dcor" in self.kinds:
            if self._dcor is None:
                out["dcor"] = min(distance_correlation_arrays(self.us, vs), 1.0)
            else:
                a, b, va, vb = self._dcor
                bp = b if perm is None else b[np.ix_(perm, perm)]
                dcov2 = float(np.einsum("ij,ij->", a, bp)) / self.n**2
                out["dcor"] = min(_dcor_from_parts(dcov2, va, vb), 1.0)
        if self._mic is not None:
            out["mic"] = self._mic.value(perm)
        return {k: out[k] for k in self.kinds}

    def statistics(self, perm: np.ndarray | None = None) -> dict[str, float]:
        return {k: test_statistic(k, v) for k, v in self.evaluate(perm).items()}


def _result(stat: float, null: np.ndarray, level: float, n_perm: int, seed: int) -> TestResult:
    cutoff = float(np.quantile(null, 1.0 - level))
    p_value = (1.0 + float(np.count_nonzero(null >= stat))) / (n_perm + 1.0)
    return TestResult(float(stat), cutoff, p_value, n_perm, int(seed), bool(stat > cutoff))


def permutation_tests(
    kinds: Sequence[str],
    sample: Sample,
    n_perm: int = 1000,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
    **params,
) -> dict[str, TestResult]:
    """Permutation tests for several kinds sharing the same permutations.

    The result for each kind equals what :func:`permutation_test` returns
    for that kind alone with the same seed.
    """
    n_perm = _check_n_perm(n_perm)
    level = _check_level(level)
    engine = StatisticEngine(sample, kinds, **params)
    observed = engine.statistics()
    null = {k: np.empty(n_perm) for k in engine.kinds}
    for i in range(n_perm):
        stats = engine.statistics(permutation_index(seed, i, sample.n))
        for k, v in stats.items():
            null[k][i] = v
    return {k: _result(observed[k], null[k], level, n_perm, seed) for k in engine.kinds}


def permutation_test(
    kind: str,
    sample: Sample,
    n_perm: int = 1000,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
    **params,
) -> TestResult:
    """Test independence of ``x`` and ``y`` by permuting ``y``.

    The cutoff is the empirical ``1 - level`` quantile of the permutation
    statistics and the test rejects when the observed statistic exceeds
    it. The p-value is ``(1 + #{null >= observed}) / (n_perm + 1)``.
    Signed measures use their absolute value.

    Examples
    --------
    >>> x = np.arange(50.0)
    >>> permutation_test("spearman", Sample(x, x), n_perm=99, seed=1).rejected
    True
    """
    return permutation_tests([kind], sample, n_perm, level, seed, **params)[kind]


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _map(fn: Callable, tasks: Sequence, workers: int | None) -> list:
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


# -- type I error ------------------------------------------------------------------


def _null_sim(index: int, kinds, rel, noise_sd, n, n_perm, level, seed, params):
    sample = gen_regression(rel, noise_sd, n, task_seed(seed, 0, index))
    perm_seed = int(task_seed(seed, 1, index).generate_state(1)[0])
    res = permutation_tests(kinds, sample, n_perm, level, perm_seed, **params)
    return {k: (r.rejected, r.p_value) for k, r in res.items()}


def rejection_rates(
    kinds: Sequence[str],
    rel: str = "four_clouds",
    noise_sd: float = 0.0,
    n: int = 320,
    n_sims: int = 500,
    n_perm: int = 1000,
    level: float = DEFAULT_LEVEL,
    seed: int = 0,
    workers: int | None = 1,
    **params,
) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    """Fraction of simulated datasets rejected by a full permutation test.

    Returns the rejection rate and the array of p-values for every kind.
    """
    kinds = check_kinds(kinds)
    fn = partial(
        _null_sim, kinds=kinds, rel=rel, noise_sd=noise_sd, n=n,
        n_perm=n_perm, level=level, seed=seed, params=params,
    )
    sims = _map(fn, list(range(n_sims)), workers)
    rates = {k: float(np.mean([s[k][0] for s in sims])) for k in kinds}
    pvals = {k: np.array([s[k][1] for s in sims]) for k in kinds}
    return rates, pvals


# -- power ---------------------------------------------------------------------------


def _power_task(task, kinds, rel, n, seed, params):
    level_idx, noise_sd, role, index = task
    sample = gen_regression(rel, noise_sd, n, task_seed(seed, level_idx, role, index))
    engine = StatisticEngine(sample, kinds, **params)
    if role == 0:
        return engine.statistics()
    perm = np.random.default_rng(task_seed(seed, level_idx, 2, index)).permutation(n)
    return engine.statistics(perm)


def power_curves(
    kinds: Sequence[str],
    rel: str,
    noise_grid: Sequence[float] = DEFAULT_NOISE_GRID,
    n: int = 320,
    n_sims: int = 500,
    n_perm: int = 1000,
    seed: int = 0,
    level: float = DEFAULT_LEVEL,
    workers: int | None = 1,
    **params,
) -> dict[str, list[PowerPoint]]:
    """Power of several statistics against ``Y = f(X) + noise`` at each noise level.

    For each noise level the null distribution comes from ``n_perm``
    freshly simulated datasets with ``y`` randomly permuted; the cutoff is
    its ``1 - level`` quantile. Power is the fraction of ``n_sims``
    unpermuted datasets whose statistic exceeds the cutoff.
    """
    kinds = check_kinds(kinds)
    if n_sims < 1:
        raise InvalidInputError(f"n_sims must be >= 1, got {n_sims}")
    n_perm = _check_n_perm(n_perm)
    level = _check_level(level)
    tasks = [
        (j, float(s), role, i)
        for j, s in enumerate(noise_grid)
        for role, count in ((0, n_sims), (1, n_perm))
        for i in range(count)
    ]
    stats = _map(partial(_power_task, kinds=kinds, rel=rel, n=n, seed=seed, params=params), tasks, workers)
    out: dict[str, list[PowerPoint]] = {k: [] for k in kinds}
    for j, s in enumerate(noise_grid):
        alt = [st for t, st in zip(tasks, stats) if t[0] == j and t[2] == 0]
        null = [st for t, st in zip(tasks, stats) if t[0] == j and t[2] == 1]
        for k in kinds:
            cutoff = float(np.quantile([st[k] for st in null], 1.0 - level))
            power = float(np.mean([st[k] > cutoff for st in alt]))
            out[k].append(PowerPoint(float(s), power, cutoff))
    return out


def power_curve(
    measure_kind: str,
    rel: str,
    noise_grid: Sequence[float] = DEFAULT_NOISE_GRID,
    n: int = 320,
    n_sims: int = 500,
    n_perm: int = 1000,
    seed: int = 0,
    level: float = DEFAULT_LEVEL,
    workers: int | None = 1,
    **params,
) -> list[tuple[float, float]]:
    """``(noise_sd, power)`` pairs for one statistic; see :func:`power_curves`."""
    curves = power_curves([measure_kind], rel, noise_grid, n, n_sims, n_perm, seed, level, workers, **params)
    return [(pt.noise_sd, pt.power) for pt in curves[measure_kind]]


# -- equitability ------------------------------------------------------------------


def separation_auc(values: Sequence[DatasetValue]) -> float:
    """Fraction of dataset pairs with different noise that are ordered correctly.

    A pair is correct when the less noisy dataset has the larger value;
    ties count one half.
    """
    noise = np.array([v.noise_prop for v in values])
    vals = np.array([v.value for v in values])
    levels = np.unique(noise)
    if levels.size < 2:
        raise InvalidInputError("need datasets at two or more noise levels")
    good = 0.0
    total = 0
    for i, lo in enumerate(levels):
        for hi in levels[i + 1 :]:
            a = vals[noise == lo]
            b = vals[noise == hi]
            diff = a[:, None] - b[None, :]
            good += float(np.count_nonzero(diff > 0)) + 0.5 * float(np.count_nonzero(diff == 0))
            total += diff.size
    return good / total


def _equitability_task(task, kinds, seed, params):
    r, rel, j, noise_prop, m, n, rep = task
    spec = MixtureSpec(rel, 1.0 - noise_prop)
    sample = gen_mixture(spec, n, task_seed(seed, r, j, m, rep))
    return StatisticEngine(sample, kinds, **params).statistics()


def equitability_experiment(
    measure_kinds: Sequence[str],
    noise_props: Sequence[float] = (1.0 / 3.0, 2.0 / 3.0),
    sizes: Sequence[int] = (200, 2000),
    reps: int = 1,
    seed: int = 0,
    relationships: Sequence[str] = SIX_CURVES,
    workers: int | None = 1,
    **params,
) -> list[EquitabilityReport]:
    """Score how well each measure orders mixture datasets by their noise proportion.

    Datasets are ``p = 1 - noise_prop`` mixtures of each relationship with
    uniform noise, at every size and replicate. Signed measures are
    scored by absolute value.
    """
    kinds = check_kinds(measure_kinds)
    props = [float(x) for x in noise_props]
    if len(set(props)) != len(props) or any(not 0.0 < x < 1.0 for x in props):
        raise InvalidInputError("noise_props must be distinct values in (0, 1)")
    if reps < 1:
        raise InvalidInputError(f"reps must be >= 1, got {reps}")
    tasks = [
        (r, rel, j, q, m, int(n), rep)
        for r, rel in enumerate(relationships)
        for j, q in enumerate(props)
        for m, n in enumerate(sizes)
        for rep in range(reps)
    ]
    stats = _map(partial(_equitability_task, kinds=kinds, seed=seed, params=params), tasks, workers)
    reports = []
    for k in kinds:
        vals = tuple(DatasetValue(t[1], t[3], t[5], t[6], st[k]) for t, st in zip(tasks, stats))
        reports.append(EquitabilityReport(k, vals, separation_auc(vals), dict(params)))
    return reports


def log_log_slope(sizes: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` on ``log(n)``."""
    errors = np.asarray(errors, dtype=float)
    if not np.all(errors > 0):
        raise InvalidInputError("errors must be positive")
    x = np.log(np.asarray(sizes, dtype=float))
    return float(np.polyfit(x, np.log(errors), 1)[0])


def normal_tolerance(p: float, trials: int, z: float = 3.0) -> float:
    return z * math.sqrt(p * (1.0 - p) / trials)
