"""Synthetic data with known population dependence.

Curves live on ``[0, 1]``; for mixture copulas each curve's response is
pushed through its own CDF so both marginals of the singular component are
uniform, making ``p * C_s + (1 - p) * Pi`` an honest copula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .copula_core import Sample
from .errors import InvalidInputError
from .measures import functional_value

SIX_CURVES = ("linear", "parabolic", "cosine_4pi", "two_branches", "circle", "cross")
POWER_RELATIONS = (
    "linear",
    "parabolic",
    "sine_4pi",
    "sine_16pi",
    "circle",
    "cross",
    "w_shape",
    "x_parabola",
)
def _arcsine_cdf(y):
    return 0.5 + np.arcsin(np.clip(y, -1.0, 1.0)) / math.pi


def _w_cdf(y):
    s = np.sqrt(np.clip(y, 0.0, 1.0)) / 2.0
    return np.sqrt(0.5 + s) - np.sqrt(np.clip(0.5 - s, 0.0, None))


def _circle_cdf(y):
    r = np.clip(np.abs(y), 0.0, 0.5)
    return 0.5 + np.sign(y) * (1.0 - 2.0 * np.sqrt(0.25 - r**2)) / 2.0


@dataclass(frozen=True)
class Relationship:
    """A deterministic relationship ``y = f_b(x)`` with one or more branches.

    ``y_cdf`` is the CDF of ``f_B(X)`` for ``X ~ U(0, 1)`` and a uniformly
    chosen branch ``B``.
    """

    name: str
    branches: tuple[Callable[[np.ndarray], np.ndarray], ...]
    y_cdf: Callable[[np.ndarray], np.ndarray]


_TWO_PI = 2.0 * math.pi

RELATIONSHIPS: dict[str, Relationship] = {
    r.name: r
    for r in (
        Relationship("linear", (lambda x: x,), lambda y: y),
        Relationship("parabolic", (lambda x: 4.0 * (x - 0.5) ** 2,), lambda y: np.sqrt(np.clip(y, 0, None))),
        Relationship("square_root", (np.sqrt,), lambda y: y**2),
        Relationship("cubic", (lambda x: x**3,), np.cbrt),
        Relationship("centered_cubic", (lambda x: 4.0 * (x - 0.5) ** 3,), lambda y: 0.5 + np.cbrt(y / 4.0)),
        Relationship(
            "centered_parabolic",
            (lambda x: 4.0 * x * (1.0 - x),),
            lambda y: 1.0 - np.sqrt(np.clip(1.0 - y, 0, None)),
        ),
        Relationship(
            "cosine_period1",
            (lambda x: (np.cos(_TWO_PI * x) + 1.0) / 2.0,),
            lambda y: 1.0 - np.arccos(np.clip(2.0 * y - 1.0, -1, 1)) / math.pi,
        ),
        Relationship(
            "cosine_4pi",
            (lambda x: np.cos(2.0 * _TWO_PI * x),),
            lambda y: 1.0 - np.arccos(np.clip(y, -1, 1)) / math.pi,
        ),
        Relationship("sine_4pi", (lambda x: np.sin(2.0 * _TWO_PI * x),), _arcsine_cdf),
        Relationship("sine_16pi", (lambda x: np.sin(8.0 * _TWO_PI * x),), _arcsine_cdf),
        Relationship(
            "circle",
            (lambda x: np.sqrt(np.clip(x - x * x, 0, None)), lambda x: -np.sqrt(np.clip(x - x * x, 0, None))),
            _circle_cdf,
        ),
        Relationship("cross", (lambda x: x - 0.5, lambda x: 0.5 - x), lambda y: y + 0.5),
        Relationship("two_branches", (lambda x: x, lambda x: -x), lambda y: (y + 1.0) / 2.0),
        Relationship(
            "x_parabola",
            (lambda x: 4.0 * (x - 0.5) ** 2, lambda x: -4.0 * (x - 0.5) ** 2),
            lambda y: 0.5 + np.sign(y) * np.sqrt(np.abs(y)) / 2.0,
        ),
        Relationship("w_shape", (lambda x: 4.0 * ((2.0 * x - 1.0) ** 2 - 0.5) ** 2,), _w_cdf),
    )
}
RELATIONSHIP_IDS = tuple(RELATIONSHIPS) + ("four_clouds",)


def get_relationship(name: str) -> Relationship:
    try:
        return RELATIONSHIPS[name]
    except KeyError:
        if name == "four_clouds":
            raise InvalidInputError("four_clouds is a null pattern, not a deterministic curve") from None
        raise InvalidInputError(
            f"unknown relationship {name!r}; choose from {', '.join(RELATIONSHIP_IDS)}"
        ) from None


def _curve_y(rel: Relationship, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if len(rel.branches) == 1:
        return rel.branches[0](x)
    branch = rng.integers(0, len(rel.branches), size=x.size)
    y = np.empty_like(x)
    for b, f in enumerate(rel.branches):
        sel = branch == b
        y[sel] = f(x[sel])
    return y


def curve_points(name: str, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Copula-scale points ``(t, F(f_B(t)))`` on the singular component."""
    rel = get_relationship(name)
    t = np.asarray(t, dtype=float)
    v = np.clip(rel.y_cdf(_curve_y(rel, t, rng)), 0.0, 1.0)
    return np.column_stack([t, v])


def _check_n(n: int) -> int:
    if int(n) != n or n < 2:
        raise InvalidInputError(f"n must be an integer >= 2, got {n}")
    return int(n)


def task_seed(base_seed: int, *index: int) -> np.random.SeedSequence:
    """Independent, scheduling-free seed for sub-task ``index`` of ``base_seed``."""
    return np.random.SeedSequence([int(base_seed) & 0xFFFFFFFF, *(int(i) for i in index)])


# -- mixtures -------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureSpec:
    relationship: str
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidInputError(f"mixture proportion must lie in [0, 1], got {self.p}")
        get_relationship(self.relationship)


def gen_mixture(spec: MixtureSpec, n: int, seed: int, fixed_count: bool = False) -> Sample:
    """Draw ``n`` points from ``p * C_s + (1 - p) * Pi``.

    Each point independently lies on the curve with probability ``p``
    (``fixed_count=True`` uses exactly ``round(p n)`` curve points instead).
    """
    n = _check_n(n)
    rng = np.random.default_rng(seed)
    if fixed_count:
        on_curve = np.zeros(n, dtype=bool)
        on_curve[: int(round(spec.p * n))] = True
        rng.shuffle(on_curve)
    else:
        on_curve = rng.random(n) < spec.p
    pts = rng.random((n, 2))
    k = int(on_curve.sum())
    if k:
        pts[on_curve] = curve_points(spec.relationship, rng.random(k), rng)
    return Sample(pts[:, 0], pts[:, 1])


def mixture_oracle(p: float) -> float:
    """Population Ccor of any mixture ``p * C_s + (1 - p) * Pi``: exactly ``p``."""
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError(f"p must lie in [0, 1], got {p}")
    return float(p)


# -- regression and Gaussian -------------------------------------------------------


def gen_regression(rel: str, noise_sd: float, n: int, seed: int) -> Sample:
    """``X ~ U(0, 1)``, ``Y = f(X) + N(0, noise_sd^2)``.

    ``four_clouds`` yields independent coordinates, each a two-cluster
    Gaussian mixture centred at 0.25 and 0.75, with the extra noise added
    to ``Y``.
    """
    n = _check_n(n)
    if noise_sd < 0:
        raise InvalidInputError(f"noise_sd must be >= 0, got {noise_sd}")
    rng = np.random.default_rng(seed)
    if rel == "four_clouds":
        x = rng.choice([0.25, 0.75], size=n) + rng.normal(0.0, 0.1, size=n)
        y = rng.choice([0.25, 0.75], size=n) + rng.normal(0.0, 0.1, size=n)
    else:
        relationship = get_relationship(rel)
        x = rng.random(n)
        y = _curve_y(relationship, x, rng)
    y = y + rng.normal(0.0, 1.0, size=n) * noise_sd
    return Sample(x, y)


def gen_gaussian_copula(rho: float, n: int, seed: int) -> Sample:
    """Standard bivariate normal draws with correlation ``rho``."""
    n = _check_n(n)
    if not abs(rho) < 1:
        raise InvalidInputError(f"|rho| must be < 1, got {rho}")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    x = z[:, 0]
    y = rho * x + math.sqrt(1.0 - rho * rho) * z[:, 1]
    return Sample(x, y)


def gaussian_copula_density_grid(rho: float, g_cells: int = 512) -> "GridDensity":
    """Gaussian copula density averaged over each cell of a ``G x G`` lattice.

    Cell masses come from the bivariate normal CDF at the cell corners, so
    the grid is exactly normalised.
    """
    from scipy.special import ndtri
    from scipy.stats import multivariate_normal

    edges = ndtri(np.linspace(0.0, 1.0, g_cells + 1)[1:-1])
    e = np.concatenate([[-np.inf], edges, [np.inf]])
    xx, yy = np.meshgrid(np.clip(e, -40, 40), np.clip(e, -40, 40), indexing="ij")
    mvn = multivariate_normal(mean=[0, 0], cov=[[1, rho], [rho, 1]])
    cdf = mvn.cdf(np.dstack([xx, yy]))
    cdf = np.asarray(cdf).reshape(xx.shape)
    cdf[0, :] = 0.0
    cdf[:, 0] = 0.0
    mass = np.diff(np.diff(cdf, axis=0), axis=1)
    mass = np.clip(mass, 0.0, None)
    mass /= mass.sum()
    return GridDensity(mass * g_cells**2)


# -- hard pair --------------------------------------------------------------------


@dataclass(frozen=True)
class HardPairSpec:
    """Piecewise-constant copula with a tall thin strip beside the diagonal.

    Strips wrap around the unit torus, so each has area equal to its width
    and uniform marginals. ``R1 = {0 < (v - u) mod 1 < delta/m_high}``
    carries mass ``delta`` at density ``m_high``,
    ``R2 = {0 <= (u - v) mod 1 < a/m_low}`` mass ``a`` at density ``m_low``
    and the rest is uniform on ``R3``. Variant ``c2`` moves ``epsilon`` mass
    from R1 to R2 without changing the strips.
    """

    a: float
    delta: float
    m_low: float
    m_high: float
    epsilon: float
    variant: str = "c1"

    def __post_init__(self):
        if self.variant not in ("c1", "c2"):
            raise InvalidInputError(f"variant must be 'c1' or 'c2', got {self.variant!r}")
        if not (self.a > 0 and self.delta > 0 and self.a + self.delta < 1):
            raise InvalidInputError("need a > 0, delta > 0 and a + delta < 1")
        if not self.m_high > self.m_low > 1:
            raise InvalidInputError("need m_high > m_low > 1")
        if not 0 <= self.epsilon < self.delta:
            raise InvalidInputError("need 0 <= epsilon < delta")
        if self.width_r1 + self.width_r2 >= 1:
            raise InvalidInputError("strips R1 and R2 overlap: delta/m_high + a/m_low >= 1")

    @property
    def width_r1(self) -> float:
        return self.delta / self.m_high

    @property
    def width_r2(self) -> float:
        return self.a / self.m_low

    @property
    def masses(self) -> tuple[float, float, float]:
        moved = self.epsilon if self.variant == "c2" else 0.0
        m1 = self.delta - moved
        m2 = self.a + moved
        return m1, m2, 1.0 - m1 - m2

    def region_density(self) -> "PiecewiseDensity":
        areas = np.array([self.width_r1, self.width_r2, 1.0 - self.width_r1 - self.width_r2])
        return PiecewiseDensity(areas, np.array(self.masses) / areas)

    def region_of(self, u, v) -> np.ndarray:
        """Region label 0, 1 or 2 for each point."""
        up = np.mod(np.asarray(v, dtype=float) - np.asarray(u, dtype=float), 1.0)
        down = np.mod(-up, 1.0)
        out = np.full(up.shape, 2)
        out[(up > 0) & (up < self.width_r1)] = 0
        out[down < self.width_r2] = 1
        return out

    def density_at(self, u, v) -> np.ndarray:
        return self.region_density().values[self.region_of(u, v)]


def gen_hard_pair(spec: HardPairSpec, n: int, seed: int) -> Sample:
    """Sample from the piecewise-constant hard-pair copula (no continuity ramps).

    Region labels and in-region positions use separate random streams, so
    with ``epsilon = 0`` variants c1 and c2 give identical samples. Strips
    narrower than float64 resolution collapse onto their edge.
    """
    n = _check_n(n)
    label_rng, pos_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    m1, m2, _ = spec.masses
    r = label_rng.random(n)
    region = np.where(r < m1, 0, np.where(r < m1 + m2, 1, 2))
    u = pos_rng.random(n)
    t = pos_rng.random(n)
    w1, w2 = spec.width_r1, spec.width_r2
    # signed offset v - u (mod 1) inside each region
    lo = np.choose(region, [0.0, 0.0, w1])
    hi = np.choose(region, [w1, -w2, 1.0 - w2])
    v = np.mod(u + lo + t * (hi - lo), 1.0)
    return Sample(u, v)


# -- population oracles ---------------------------------------------------------------


@dataclass(frozen=True)
class GridDensity:
    """Piecewise-constant density on a ``G x G`` lattice of equal cells (U on axis 0)."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise InvalidInputError("grid density must be a square matrix")
        if (vals < 0).any():
            raise InvalidInputError("grid density must be nonnegative")
        total = vals.mean()
        if abs(total - 1.0) > 1e-6:
            raise InvalidInputError(f"grid density integrates to {total}, expected 1")
        object.__setattr__(self, "values", vals)

    @property
    def g_cells(self) -> int:
        return self.values.shape[0]

    def cdf_nodes(self) -> np.ndarray:
        """Copula ``C`` at the ``(G+1) x (G+1)`` lattice nodes."""
        g = self.g_cells
        c = np.zeros((g + 1, g + 1))
        c[1:, 1:] = (self.values / g**2).cumsum(axis=0).cumsum(axis=1)
        return c


@dataclass(frozen=True)
class PiecewiseDensity:
    """Density taking ``values[i]`` on a region of area ``areas[i]``.

    Enough for every density functional; CDF-based measures need a
    :class:`GridDensity`.
    """

    areas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        areas = np.asarray(self.areas, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if areas.shape != vals.shape or (areas < 0).any() or (vals < 0).any():
            raise InvalidInputError("areas and values must be matching nonnegative arrays")
        if abs(areas.sum() - 1.0) > 1e-9 or abs(float(areas @ vals) - 1.0) > 1e-6:
            raise InvalidInputError("piecewise density must cover unit area with unit mass")
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "values", vals)


def block_diagonal_density(blocks: int, g_cells: int) -> GridDensity:
    """``blocks`` equal squares on the diagonal, density ``blocks`` inside."""
    if g_cells % blocks:
        raise InvalidInputError("g_cells must be a multiple of blocks")
    idx = np.arange(g_cells) * blocks // g_cells
    return GridDensity(np.where(idx[:, None] == idx[None, :], float(blocks), 0.0))


def mixture_density(p: float, singular: GridDensity) -> GridDensity:
    return GridDensity(p * singular.values + (1.0 - p))


DENSITY_ORACLE_KINDS = ("ccor", "cd", "tsallis", "hellinger", "mi", "micor", "phicor")
CDF_ORACLE_KINDS = ("sigma", "phi2", "kappa")

# 2-point Gauss-Legendre on [0, 1]; exact for the bilinear C - Pi squared
_GL = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))


def _cdf_oracle(density: GridDensity, kind: str) -> float:
    g = density.g_cells
    nodes = np.arange(g + 1) / g
    diff = density.cdf_nodes() - np.outer(nodes, nodes)
    if kind == "kappa":
        # bilinear within each cell, so the extremes sit on the nodes
        return 4.0 * float(np.abs(diff).max())
    d00, d10, d01, d11 = diff[:-1, :-1], diff[1:, :-1], diff[:-1, 1:], diff[1:, 1:]
    total = 0.0
    for s in _GL:
        for t in _GL:
            f = d00 * (1 - s) * (1 - t) + d10 * s * (1 - t) + d01 * (1 - s) * t + d11 * s * t
            total += float(np.sum(np.abs(f) if kind == "sigma" else f * f))
    integral = total / 4.0 / g**2
    return 12.0 * integral if kind == "sigma" else 90.0 * integral


def population_measure(density, kind: str, alpha: float | None = None) -> float:
    """Population dependence functional of a known density, by direct quadrature.

    Parameters
    ----------
    density : GridDensity or PiecewiseDensity
    kind : str
        One of ``ccor, cd, tsallis, hellinger, mi, micor, phicor`` (any
        density) or ``sigma, phi2, kappa`` (grid only).
    alpha : float, optional
        Exponent for ``cd`` (default 1) and ``tsallis`` (default 0.5).
    """
    if kind in CDF_ORACLE_KINDS:
        if not isinstance(density, GridDensity):
            raise InvalidInputError(f"{kind} needs a GridDensity")
        return _cdf_oracle(density, kind)
    if kind not in DENSITY_ORACLE_KINDS:
        raise InvalidInputError(f"unknown population measure {kind!r}")
    if kind == "cd" and alpha is None:
        alpha = 1.0
    if kind == "tsallis" and alpha is None:
        alpha = 0.5
    if isinstance(density, GridDensity):
        return functional_value(density.values, 1.0 / density.g_cells**2, kind, alpha)
    if isinstance(density, PiecewiseDensity):
        return functional_value(density.values, density.areas, kind, alpha)
    raise InvalidInputError(f"unsupported density type {type(density).__name__}")


def table_row_density(row: str, g_cells: int = 512) -> GridDensity:
    """Reconstructed example densities: D (vanishing diagonal), E and F.

    E puts density 4 on four diagonal blocks (area 1/4) and F density 2 on
    two diagonal blocks (area 1/2). D is the block-diagonal limit with one
    block per lattice cell.
    """
    blocks = {"D": g_cells, "E": 4, "F": 2}
    if row not in blocks:
        raise InvalidInputError(f"unknown example row {row!r}")
    return block_diagonal_density(blocks[row], g_cells)


def integrate_sample_density(fn: Callable, n_points: int, seed: int) -> float:
    """Monte Carlo mean of ``fn`` over uniform points (cross-check helper)."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n_points, 2))
    return float(np.mean(fn(pts[:, 0], pts[:, 1])))


def regression_samples(
    rel: str, noise_sd: float, n: int, seeds: Sequence[int]
) -> list[Sample]:
    return [gen_regression(rel, noise_sd, n, s) for s in seeds]
