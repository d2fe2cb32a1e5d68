"""Comparison dependence measures.

Every measure except Pearson's correlation consumes pseudo-observations
only, so all of them are invariant under strictly increasing transforms of
either raw coordinate.

Measure kinds understood by :func:`compute_measure`:

=============  ==========================================================
``pearson``    sample linear correlation on the raw data
``spearman``   linear correlation of the pseudo-observations
``kendall``    tau-a (tied pairs count as neither concordant nor discordant)
``gini``       mean of ``2(|U+V-1| - |U-V|)``
``blomqvist``  ``4 C_n(1/2, 1/2) - 1``
``sigma``      ``12 * int |C_n - uv|``
``phi2``       ``90 * int (C_n - uv)^2``
``kappa``      ``4 * max |C_n - uv|``
``dcor``       distance correlation of the pseudo-observations
``mi_ksg``     Kraskov-Stoegbauer-Grassberger MI (param ``k``, default 3)
``micor``      ``sqrt(1 - exp(-2 MI))`` of the KSG estimate
``ccor``       finite-sample corrected copula correlation
``ccor_raw``   uncorrected plug-in copula correlation
``cd``         ``int |c - 1|^alpha`` of the kernel density (param ``alpha``)
``phicor``     ``sqrt(CD_2 / (1 + CD_2))``
``tsallis``    ``(1 - int c^alpha) / (1 - alpha)`` (param ``alpha``)
``hellinger``  ``int (1 - sqrt(c))``
``mi_plugin``  ``int c log c`` of the kernel density
``mic``        equipartition-grid MIC approximation (param ``exponent``)
=============  ==========================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Mapping

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma
from scipy.stats import kendalltau

from .ccor import ccor_from_density, ccor_raw
from .copula_core import EmpiricalCopula, PseudoSample, Sample, pseudo_observations
from .errors import InvalidInputError
from .kde import CopulaDensityEstimate, estimate_copula_density

CONCORDANCE_KINDS = ("spearman", "kendall", "gini", "blomqvist")
CDF_KINDS = ("sigma", "phi2", "kappa")
DENSITY_KINDS = ("cd", "phicor", "tsallis", "hellinger", "mi_plugin")
SIGNED_KINDS = ("pearson",) + CONCORDANCE_KINDS
UNBOUNDED_KINDS = ("mi_ksg", "mi_plugin", "cd", "tsallis")
ALL_KINDS = (
    ("pearson",)
    + CONCORDANCE_KINDS
    + CDF_KINDS
    + ("dcor", "mi_ksg", "micor", "ccor", "ccor_raw")
    + DENSITY_KINDS
    + ("mic",)
)

KSG_JITTER = 1e-10
KSG_JITTER_SEED = 20140101
CDF_LATTICE = 256


@dataclass(frozen=True)
class MeasureResult:
    kind: str
    value: float
    params: Mapping[str, Any] = field(default_factory=dict)
    n: int = 0


def _as_pseudo(data) -> PseudoSample:
    if isinstance(data, PseudoSample):
        return data
    if isinstance(data, Sample):
        return pseudo_observations(data)
    raise InvalidInputError(f"expected Sample or PseudoSample, got {type(data).__name__}")


def _corr(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    denom = math.sqrt(float(a @ a) * float(b @ b))
    if denom == 0.0:
        return 0.0
    return float(np.clip((a @ b) / denom, -1.0, 1.0))


def pearson(sample: Sample) -> MeasureResult:
    """Pearson's sample correlation on the raw scale (0 for a constant column)."""
    return MeasureResult("pearson", _corr(sample.xs, sample.ys), {}, sample.n)


# -- concordance ------------------------------------------------------------


def kendall_tau_a(us: np.ndarray, vs: np.ndarray) -> float:
    n = us.size
    n0 = n * (n - 1) / 2.0
    _, cu = np.unique(us, return_counts=True)
    _, cv = np.unique(vs, return_counts=True)
    n1 = float((cu * (cu - 1) / 2.0).sum())
    n2 = float((cv * (cv - 1) / 2.0).sum())
    if n0 == n1 or n0 == n2:
        return 0.0
    tau_b = kendalltau(us, vs, variant="b").statistic
    # concordant minus discordant, recovered from tau-b's normaliser
    return float(tau_b * math.sqrt((n0 - n1) * (n0 - n2)) / n0)


def concordance(pseudo: PseudoSample, kind: str) -> MeasureResult:
    """Spearman, Kendall, Gini or Blomqvist concordance of a pseudo-sample."""
    us, vs = np.asarray(pseudo.us), np.asarray(pseudo.vs)
    if pseudo.n < 2:
        raise InvalidInputError("concordance needs n >= 2")
    if kind == "spearman":
        value = _corr(us, vs)
    elif kind == "kendall":
        value = kendall_tau_a(us, vs)
    elif kind == "gini":
        value = float(np.mean(2.0 * (np.abs(us + vs - 1.0) - np.abs(us - vs))))
    elif kind == "blomqvist":
        value = 4.0 * np.count_nonzero((us <= 0.5) & (vs <= 0.5)) / pseudo.n - 1.0
    else:
        raise InvalidInputError(f"unknown concordance kind {kind!r}")
    # small or tied samples can leave [-1, 1] (e.g. Blomqvist with odd n)
    return MeasureResult(kind, float(np.clip(value, -1.0, 1.0)), {}, pseudo.n)


# -- CDF distances ----------------------------------------------------------


@lru_cache(maxsize=8)
def _lattice(lattice: int) -> tuple[np.ndarray, np.ndarray]:
    mids = (np.arange(lattice) + 0.5) / lattice
    indep = np.outer(mids, mids)
    mids.flags.writeable = False
    indep.flags.writeable = False
    return mids, indep


def cdf_distances(pseudo: PseudoSample, lattice: int = CDF_LATTICE) -> dict[str, float]:
    """Wolf's sigma, Hoeffding's Phi^2 and Wolf's kappa in one pass.

    Integrals use the midpoint rule on a ``lattice x lattice`` grid; the
    supremum is taken over the same midpoints and every pseudo-observation.
    Values are clamped to ``[0, 1]``.
    """
    ec = EmpiricalCopula(pseudo)
    mids, indep = _lattice(lattice)
    diff = ec.on_lattice(mids, mids) - indep
    absdiff = np.abs(diff)
    sigma = 12.0 * float(absdiff.mean())
    phi2 = 90.0 * float(np.vdot(diff, diff)) / diff.size
    at_pts = ec.at_points() - np.asarray(pseudo.us) * np.asarray(pseudo.vs)
    kappa = 4.0 * max(float(absdiff.max()), float(np.abs(at_pts).max()))
    # the empirical copula of a small or tied sample can overshoot the
    # population range, so clamp to [0, 1]
    return {k: min(v, 1.0) for k, v in (("sigma", sigma), ("phi2", phi2), ("kappa", kappa))}


def cdf_distance(pseudo: PseudoSample, kind: str) -> MeasureResult:
    if kind not in CDF_KINDS:
        raise InvalidInputError(f"unknown CDF-distance kind {kind!r}")
    return MeasureResult(kind, cdf_distances(pseudo)[kind], {}, pseudo.n)


# -- distance correlation ---------------------------------------------------


def _abs_diff_row_sums(x: np.ndarray) -> np.ndarray:
    """``sum_j |x_i - x_j|`` for every i in O(n log n)."""
    order = np.argsort(x, kind="stable")
    xs = x[order]
    n = xs.size
    csum = np.cumsum(xs)
    idx = np.arange(n)
    below = xs * idx - (csum - xs)
    above = (csum[-1] - csum) - xs * (n - 1 - idx)
    out = np.empty(n)
    out[order] = below + above
    return out


def _double_centered(x: np.ndarray) -> np.ndarray:
    a = np.abs(x[:, None] - x[None, :])
    row = a.mean(axis=1)
    return a - row[:, None] - row[None, :] + row.mean()


def _dcor_from_parts(dcov2: float, dvar_x: float, dvar_y: float) -> float:
    if dvar_x <= 0.0 or dvar_y <= 0.0:
        return 0.0
    return float(math.sqrt(max(dcov2, 0.0) / math.sqrt(dvar_x * dvar_y)))


def _dvar2(x: np.ndarray) -> float:
    # mean of A_ij^2 over double-centred distances
    n = x.size
    rows = _abs_diff_row_sums(x)
    sq_total = 2.0 * (n * float(np.sum(x**2)) - float(np.sum(x)) ** 2)
    abar = rows / n
    grand = abar.mean()
    return sq_total / n**2 - 2.0 * float(abar @ abar) / n + grand**2


def distance_correlation_arrays(x: np.ndarray, y: np.ndarray, chunk: int = 1024) -> float:
    """Sample (V-statistic) distance correlation with O(n * chunk) memory."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    ax = _abs_diff_row_sums(x) / n
    by = _abs_diff_row_sums(y) / n
    cross = 0.0
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        cross += float(np.sum(np.abs(x[s:e, None] - x[None, :]) * np.abs(y[s:e, None] - y[None, :])))
    dcov2 = cross / n**2 - 2.0 * float(ax @ by) / n + ax.mean() * by.mean()
    return _dcor_from_parts(dcov2, _dvar2(x), _dvar2(y))


def distance_correlation(pseudo: PseudoSample) -> MeasureResult:
    """Distance correlation of the pseudo-observations, in ``[0, 1]``."""
    value = distance_correlation_arrays(np.asarray(pseudo.us), np.asarray(pseudo.vs))
    return MeasureResult("dcor", min(value, 1.0), {}, pseudo.n)


# -- mutual information -----------------------------------------------------


def _jitter(values: np.ndarray) -> np.ndarray:
    """Add a fixed-seed offset chosen by each value's ordinal rank.

    One table serves both coordinates, so swapping them swaps the
    jittered columns exactly; tied values still get distinct offsets.
    """
    table = np.random.default_rng(KSG_JITTER_SEED).uniform(-KSG_JITTER, KSG_JITTER, values.size)
    order = np.argsort(values, kind="stable")
    out = np.empty_like(values)
    out[order] = values[order] + table
    return out


def _marginal_counts(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """``#{j != i : |x_j - x_i| < eps_i}`` via binary search.

    The shifted bounds ``x -/+ eps`` are rounded, so the search result is
    nudged until the boundary elements satisfy the strict test computed
    with the same subtraction as the neighbour distances.
    """
    sx = np.sort(x)
    n = sx.size
    lo = np.searchsorted(sx, x - eps, side="left")
    hi = np.searchsorted(sx, x + eps, side="left")  # first index past the window
    while True:
        grow = (lo > 0) & (np.abs(sx[np.maximum(lo - 1, 0)] - x) < eps)
        shrink = ~grow & (lo < n) & ~(np.abs(sx[np.minimum(lo, n - 1)] - x) < eps) & (lo < hi)
        if not (grow.any() or shrink.any()):
            break
        lo = lo - grow + shrink
    while True:
        grow = (hi < n) & (np.abs(sx[np.minimum(hi, n - 1)] - x) < eps)
        shrink = ~grow & (hi > lo) & ~(np.abs(sx[np.maximum(hi - 1, 0)] - x) < eps)
        if not (grow.any() or shrink.any()):
            break
        hi = hi + grow - shrink
    return hi - lo - 1


def ksg_mi(us: np.ndarray, vs: np.ndarray, k: int = 3) -> float:
    n = us.size
    if not 1 <= k < n:
        raise InvalidInputError(f"KSG needs 1 <= k < n, got k={k}, n={n}")
    x = _jitter(np.asarray(us, dtype=float))
    y = _jitter(np.asarray(vs, dtype=float))
    pts = np.column_stack([x, y])
    _, idx = cKDTree(pts).query(pts, k=k + 1, p=np.inf)
    far = idx[:, -1]
    # recompute the k-th distance with the exact subtraction used for counting
    eps = np.maximum(np.abs(x[far] - x), np.abs(y[far] - y))
    nx = _marginal_counts(x, eps)
    ny = _marginal_counts(y, eps)
    return float(digamma(k) + digamma(n) - np.mean(digamma(nx + 1) + digamma(ny + 1)))


def mi_ksg(pseudo: PseudoSample, k: int = 3) -> MeasureResult:
    """KSG (algorithm 1) mutual information on pseudo-observations, in nats.

    A fixed-seed jitter of amplitude 1e-10 breaks exact distance ties on the
    rank lattice. Negative estimates are returned unchanged.
    """
    return MeasureResult("mi_ksg", ksg_mi(np.asarray(pseudo.us), np.asarray(pseudo.vs), k), {"k": k}, pseudo.n)


def micor(mi: float) -> float:
    """``sqrt(1 - exp(-2 MI))``; negative MI is treated as 0."""
    mi = max(float(mi), 0.0)
    return float(math.sqrt(-math.expm1(-2.0 * mi)))


# -- copula-density functionals ---------------------------------------------


def functional_value(values: np.ndarray, weights, kind: str, alpha: float | None = None) -> float:
    """Integrate a pointwise density functional given cell values and volumes.

    ``weights`` is a scalar cell volume or an array of region areas aligned
    with ``values``.
    """
    c = np.asarray(values, dtype=float)
    w = np.broadcast_to(np.asarray(weights, dtype=float), c.shape)

    def integrate(f):
        return float(np.sum(f * w))

    if kind == "ccor":
        return integrate(np.clip(1.0 - c, 0.0, None))
    if kind == "cd":
        if alpha is None or not alpha > 0:
            raise InvalidInputError(f"cd needs alpha > 0, got {alpha}")
        return integrate(np.abs(c - 1.0) ** alpha)
    if kind == "phicor":
        cd2 = integrate((c - 1.0) ** 2)
        return float(math.sqrt(cd2 / (1.0 + cd2)))
    if kind == "tsallis":
        if alpha is None or alpha in (0, 1):
            raise InvalidInputError(f"tsallis needs alpha not in {{0, 1}}, got {alpha}")
        return (1.0 - integrate(c**alpha)) / (1.0 - alpha)
    if kind == "hellinger":
        return integrate(1.0 - np.sqrt(c))
    if kind in ("mi_plugin", "mi"):
        with np.errstate(divide="ignore", invalid="ignore"):
            clog = np.where(c > 0, c * np.log(np.where(c > 0, c, 1.0)), 0.0)
        return integrate(clog)
    if kind == "micor":
        return micor(functional_value(c, w, "mi"))
    raise InvalidInputError(f"unknown density functional {kind!r}")


def density_functional(
    density: CopulaDensityEstimate, kind: str, alpha: float | None = None
) -> MeasureResult:
    """Evaluate ``cd``, ``phicor``, ``tsallis``, ``hellinger`` or ``mi_plugin`` on a density grid."""
    if kind not in DENSITY_KINDS:
        raise InvalidInputError(f"unknown density functional {kind!r}")
    value = functional_value(density.grid, density.cell_volume, kind, alpha)
    params = {"alpha": alpha} if kind in ("cd", "tsallis") else {}
    return MeasureResult(kind, value, params, density.n)


# -- grid MIC -----------------------------------------------------------------


def _equipartition_bins(u: np.ndarray, n: int, b: int) -> np.ndarray:
    r = u * (n + 1.0)
    return np.minimum(np.floor((r - 1.0) * b / n + 1e-9).astype(np.int64), b - 1)


def mic_grids(n: int, exponent: float) -> list[tuple[int, int]]:
    bound = max(float(n) ** exponent, 4.0)
    return [
        (bx, by)
        for bx in range(2, int(bound // 2) + 1)
        for by in range(2, int(bound // 2) + 1)
        if bx * by <= bound + 1e-9
    ]


class MicPlan:
    """Precomputed equipartition labels for repeated grid-MIC evaluation.

    Marginal bin counts of an equipartition depend only on ``n``, so the
    independence expectation of every cell is fixed; permuting ``V`` only
    changes the joint counts, which are gathered with a single bincount
    over all grids.
    """

    def __init__(self, us: np.ndarray, vs: np.ndarray, exponent: float = 0.6):
        n = us.size
        if n < 4:
            raise InvalidInputError(f"grid MIC needs n >= 4, got {n}")
        self.n = n
        self.grids = mic_grids(n, exponent)
        sizes = sorted({b for g in self.grids for b in g})
        ubins = {b: _equipartition_bins(us, n, b) for b in sizes}
        vbins = {b: _equipartition_bins(vs, n, b) for b in sizes}
        cells = np.array([bx * by for bx, by in self.grids])
        self.offsets = np.concatenate([[0], np.cumsum(cells)[:-1]])
        self.total = int(cells.sum())
        self.u_part = np.stack(
            [off + ubins[bx] * by for off, (bx, by) in zip(self.offsets, self.grids)]
        )
        self.v_part = np.stack([vbins[by] for _, by in self.grids])
        expected = []
        for bx, by in self.grids:
            px = np.bincount(ubins[bx], minlength=bx) / n
            py = np.bincount(vbins[by], minlength=by) / n
            expected.append(np.outer(px, py).ravel())
        self.expected = np.concatenate(expected)
        self.norm = np.log([min(bx, by) for bx, by in self.grids])

    def value(self, perm: np.ndarray | None = None) -> float:
        v = self.v_part if perm is None else self.v_part[:, perm]
        joint = np.bincount((self.u_part + v).ravel(), minlength=self.total) / self.n
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(joint > 0, joint * np.log(joint / self.expected), 0.0)
        mi = np.add.reduceat(terms, self.offsets)
        return float(min(max(float(np.max(mi / self.norm)), 0.0), 1.0))


def grid_mic(pseudo: PseudoSample, exponent: float = 0.6) -> MeasureResult:
    """MIC restricted to rank-equipartition grids with ``b_X b_Y <= n^exponent``.

    This is an approximation used as a comparison baseline; it does not
    search over arbitrary grid boundaries.
    """
    plan = MicPlan(np.asarray(pseudo.us), np.asarray(pseudo.vs), exponent)
    return MeasureResult("mic", plan.value(), {"exponent": exponent}, pseudo.n)


# -- dispatch -----------------------------------------------------------------


def check_kinds(kinds: Iterable[str]) -> list[str]:
    kinds = list(kinds)
    unknown = [k for k in kinds if k not in ALL_KINDS]
    if unknown:
        raise InvalidInputError(f"unknown measure kind(s): {', '.join(unknown)}")
    return kinds


def measures_from_pseudo(
    pseudo: PseudoSample,
    kinds: Iterable[str],
    raw: tuple[np.ndarray, np.ndarray] | None = None,
    **params,
) -> dict[str, float]:
    """Evaluate several kinds on a pseudo-sample, sharing the density and CDF work.

    ``raw`` holds the untransformed ``(xs, ys)`` needed by ``pearson``.
    Recognised params: ``k`` (KSG neighbours), ``h`` and ``g_cells``
    (kernel density), ``alpha`` (``cd``/``tsallis``), ``exponent`` (MIC).
    """
    kinds = check_kinds(kinds)
    out: dict[str, float] = {}
    density = None
    cdf = None
    mi = None
    for kind in kinds:
        if kind == "pearson":
            if raw is None:
                raise InvalidInputError("pearson needs the raw sample")
            out[kind] = _corr(np.asarray(raw[0], dtype=float), np.asarray(raw[1], dtype=float))
        elif kind in CONCORDANCE_KINDS:
            out[kind] = concordance(pseudo, kind).value
        elif kind in CDF_KINDS:
            cdf = cdf if cdf is not None else cdf_distances(pseudo)
            out[kind] = cdf[kind]
        elif kind == "dcor":
            out[kind] = distance_correlation(pseudo).value
        elif kind in ("mi_ksg", "micor"):
            mi = mi if mi is not None else mi_ksg(pseudo, params.get("k", 3)).value
            out[kind] = mi if kind == "mi_ksg" else micor(mi)
        elif kind == "mic":
            out[kind] = grid_mic(pseudo, params.get("exponent", 0.6)).value
        else:
            if density is None:
                density = estimate_copula_density(pseudo, params.get("h"), params.get("g_cells"))
            if kind == "ccor":
                out[kind] = ccor_from_density(density).corrected
            elif kind == "ccor_raw":
                out[kind] = ccor_raw(density)
            else:
                alpha = params.get("alpha")
                if alpha is None:
                    alpha = 1.0 if kind == "cd" else 0.5
                out[kind] = density_functional(density, kind, alpha).value
    return out


def compute_measures(sample: Sample, kinds: Iterable[str], **params) -> dict[str, float]:
    """Evaluate several kinds on one raw sample (see :func:`measures_from_pseudo`)."""
    kinds = check_kinds(kinds)
    return measures_from_pseudo(
        pseudo_observations(sample), kinds, (sample.xs, sample.ys), **params
    )


def compute_measure(kind: str, sample: Sample, **params) -> MeasureResult:
    value = compute_measures(sample, [kind], **params)[kind]
    keep = {k: v for k, v in params.items() if v is not None}
    return MeasureResult(kind, value, keep, sample.n)
