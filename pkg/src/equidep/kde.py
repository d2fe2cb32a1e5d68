"""Square-kernel copula density estimation on a uniform lattice.

The kernel is the uniform box ``K(x) = 1/2`` on ``|x| < 1``, so every
observation contributes ``1 / (n (2h)^d)`` to each lattice midpoint that
lies strictly inside its ``2h``-wide window. Windows are accumulated with a
d-dimensional difference array, which makes the fill O(n 2^d + G^d)
instead of O(n G^d).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .copula_core import PseudoSample
from .errors import InvalidInputError, UnsupportedDimensionError

MIN_GRID = 100
MAX_CELLS_ND = 2**24


def check_bandwidth(h: float) -> float:
    h = float(h)
    if not (0.0 < h <= 0.5) or math.isnan(h):
        raise InvalidInputError(f"bandwidth must lie in (0, 0.5], got {h}")
    return h


def default_bandwidth(n: int) -> float:
    """Rule-of-thumb bandwidth ``h = 0.25 n^(-1/4)``.

    >>> default_bandwidth(256)
    0.0625
    """
    if n < 2:
        raise InvalidInputError(f"default bandwidth needs n >= 2, got {n}")
    return min(0.25 * float(n) ** -0.25, 0.5)


def default_grid(h: float, d: int = 2) -> int:
    """Cells per axis: ``max(100, ceil(4/h))``, capped so ``G^d <= 2^24`` for d > 2."""
    g = max(MIN_GRID, math.ceil(4.0 / h - 1e-9))
    if d > 2:
        g = min(g, int(math.floor(MAX_CELLS_ND ** (1.0 / d) + 1e-9)))
    return g


def midpoints(g_cells: int) -> np.ndarray:
    return (np.arange(g_cells) + 0.5) / g_cells


@dataclass(frozen=True)
class CopulaDensityEstimate:
    """Copula density values at the midpoints of a regular lattice.

    ``grid`` has shape ``(G,) * d``; ``grid[i, j]`` is the estimate at
    ``((i + .5)/G, (j + .5)/G)``, first axis for U.
    """

    grid: np.ndarray
    g_cells: int
    h: float
    n: int

    @property
    def d(self) -> int:
        return self.grid.ndim

    @property
    def cell_volume(self) -> float:
        return float(self.g_cells) ** -self.d

    def integral(self) -> float:
        return float(self.grid.sum() * self.cell_volume)


def _window_index_ranges(coords: np.ndarray, h: float, mids: np.ndarray):
    """First and last midpoint index with ``|mid - coord| < h`` for each coord."""
    lo = np.searchsorted(mids, coords - h, side="right")
    hi = np.searchsorted(mids, coords + h, side="left") - 1
    return lo, hi


def window_counts(points: np.ndarray, h: float, g_cells: int) -> np.ndarray:
    """Number of points whose open ``h``-box contains each lattice midpoint.

    Parameters
    ----------
    points : ndarray, shape (n, d)
        Coordinates in the unit cube.
    h : float
        Half-width of the box window.
    g_cells : int
        Lattice cells per axis.

    Returns
    -------
    ndarray of float, shape (g_cells,) * d
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    mids = midpoints(g_cells)
    los, his = [], []
    for axis in range(d):
        lo, hi = _window_index_ranges(points[:, axis], h, mids)
        los.append(lo)
        his.append(hi)
    nonempty = np.ones(n, dtype=bool)
    for lo, hi in zip(los, his):
        nonempty &= lo <= hi
    shape = (g_cells + 1,) * d
    size = (g_cells + 1) ** d
    diff = np.zeros(size)
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(
            (his[a] + 1 if c else los[a])[nonempty] for a, c in enumerate(corner)
        )
        flat = np.ravel_multi_index(idx, shape)
        counts = np.bincount(flat, minlength=size)
        if sum(corner) % 2:
            diff -= counts
        else:
            diff += counts
    diff = diff.reshape(shape)
    for axis in range(d):
        np.cumsum(diff, axis=axis, out=diff)
    return diff[(slice(0, g_cells),) * d]


def estimate_copula_density(
    pseudo: PseudoSample, h: float | None = None, g_cells: int | None = None
) -> CopulaDensityEstimate:
    """Square-kernel density estimate of the copula on a ``G x G`` lattice.

    Each midpoint value is ``#{i : |u - U_i| < h, |v - V_i| < h} / (n (2h)^2)``.
    ``h`` defaults to :func:`default_bandwidth` and ``g_cells`` to
    :func:`default_grid`.
    """
    h = check_bandwidth(default_bandwidth(pseudo.n) if h is None else h)
    g_cells = default_grid(h) if g_cells is None else int(g_cells)
    if g_cells < 10:
        raise InvalidInputError(f"g_cells must be >= 10, got {g_cells}")
    pts = np.column_stack([pseudo.us, pseudo.vs])
    counts = window_counts(pts, h, g_cells)
    return CopulaDensityEstimate(counts / (pseudo.n * (2.0 * h) ** 2), g_cells, h, pseudo.n)


def estimate_density_nd(
    points: np.ndarray, h: float, g_cells: int | None = None
) -> CopulaDensityEstimate:
    """Product square-kernel estimate in ``d`` dimensions (2 <= d <= 4).

    ``points`` must already be on the copula scale.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = points.shape
    if not 2 <= d <= 4:
        raise UnsupportedDimensionError(f"dimension must be in [2, 4], got {d}")
    h = check_bandwidth(h)
    g_cells = default_grid(h, d) if g_cells is None else int(g_cells)
    if g_cells < 10:
        raise InvalidInputError(f"g_cells must be >= 10, got {g_cells}")
    if float(g_cells) ** d > 4 * MAX_CELLS_ND:
        raise InvalidInputError(f"lattice of {g_cells}^{d} cells is too large")
    counts = window_counts(points, h, g_cells)
    return CopulaDensityEstimate(counts / (n * (2.0 * h) ** d), g_cells, h, n)
