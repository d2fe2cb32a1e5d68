"""Rank transforms, pseudo-observations and the empirical copula."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import InvalidInputError


@dataclass(frozen=True)
class Sample:
    """Paired raw observations ``(x_i, y_i)``.

    Missing values must be removed by the caller; NaN is rejected.
    """

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float).ravel()
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape != ys.shape:
            raise InvalidInputError(
                f"xs and ys must have equal length, got {xs.size} and {ys.size}"
            )
        if xs.size < 2:
            raise InvalidInputError(f"need at least 2 observations, got {xs.size}")
        if np.isnan(xs).any() or np.isnan(ys).any():
            raise InvalidInputError("sample contains NaN; filter missing data first")
        xs.flags.writeable = False
        ys.flags.writeable = False
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return int(self.xs.size)

    def swapped(self) -> "Sample":
        return Sample(self.ys, self.xs)


@dataclass(frozen=True)
class PseudoSample:
    """Copula-scale observations ``(U_i, V_i)`` strictly inside the unit square."""

    us: np.ndarray
    vs: np.ndarray

    def __post_init__(self):
        us = np.asarray(self.us, dtype=float).ravel()
        vs = np.asarray(self.vs, dtype=float).ravel()
        if us.shape != vs.shape:
            raise InvalidInputError("us and vs must have equal length")
        if us.size == 0:
            raise InvalidInputError("empty pseudo-sample")
        if not (np.all((us > 0) & (us < 1)) and np.all((vs > 0) & (vs < 1))):
            raise InvalidInputError("pseudo-observations must lie strictly inside (0, 1)")
        us.flags.writeable = False
        vs.flags.writeable = False
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "vs", vs)

    @property
    def n(self) -> int:
        return int(self.us.size)

    def swapped(self) -> "PseudoSample":
        return PseudoSample(self.vs, self.us)


def ranks(values) -> np.ndarray:
    """Average ranks (1-based); tied values share the mean of their positions."""
    return rankdata(np.asarray(values, dtype=float), method="average")


def pseudo_observations(sample: Sample) -> PseudoSample:
    """Rank-transform a sample onto the unit square.

    ``U_i = rank(X_i) / (n + 1)`` and likewise for ``V_i``; ties get
    average ranks.

    Examples
    --------
    >>> ps = pseudo_observations(Sample([3.2, 1.1, 5.0], [10, 20, 30]))
    >>> ps.us.tolist(), ps.vs.tolist()
    ([0.5, 0.25, 0.75], [0.25, 0.5, 0.75])
    """
    if not isinstance(sample, Sample):
        raise InvalidInputError("pseudo_observations expects a Sample")
    denom = sample.n + 1.0
    return PseudoSample(ranks(sample.xs) / denom, ranks(sample.ys) / denom)


class EmpiricalCopula:
    """Empirical copula ``C_n(u, v) = #{i : U_i <= u, V_i <= v} / n``.

    Parameters
    ----------
    pseudo : PseudoSample
        Backing copula-scale observations.
    """

    def __init__(self, pseudo: PseudoSample):
        self.pseudo = pseudo
        self._us = np.asarray(pseudo.us)
        self._vs = np.asarray(pseudo.vs)

    @property
    def n(self) -> int:
        return self.pseudo.n

    def __call__(self, u, v):
        return empirical_copula_eval(self, u, v)

    def on_lattice(self, edges_u: np.ndarray, edges_v: np.ndarray) -> np.ndarray:
        """Evaluate ``C_n`` on the tensor lattice ``edges_u x edges_v``.

        Both edge arrays must be sorted ascending. Cost is
        O(n log L + L_u * L_v) through a cumulative 2-D histogram.
        """
        edges_u = np.asarray(edges_u, dtype=float)
        edges_v = np.asarray(edges_v, dtype=float)
        # point i is counted at lattice index a iff edges_u[a] >= U_i
        iu = np.searchsorted(edges_u, self._us, side="left")
        iv = np.searchsorted(edges_v, self._vs, side="left")
        lu, lv = edges_u.size, edges_v.size
        keep = (iu < lu) & (iv < lv)
        flat = np.bincount(iu[keep] * lv + iv[keep], minlength=lu * lv)
        counts = flat.reshape(lu, lv).astype(np.int32)
        counts = counts.cumsum(axis=0, dtype=np.int32).cumsum(axis=1, dtype=np.int32)
        return counts / self.n

    def at_points(self, chunk: int = 2048) -> np.ndarray:
        """``C_n(U_i, V_i)`` at every pseudo-observation (chunked O(n^2))."""
        us, vs = self._us, self._vs
        out = np.empty(us.size)
        for start in range(0, us.size, chunk):
            stop = min(start + chunk, us.size)
            dominated = (us[None, :] <= us[start:stop, None]) & (
                vs[None, :] <= vs[start:stop, None]
            )
            out[start:stop] = dominated.sum(axis=1)
        return out / self.n


def empirical_copula_eval(ec: EmpiricalCopula, u, v):
    """Evaluate the empirical copula at ``(u, v)``; scalars or broadcastable arrays."""
    u_arr = np.asarray(u, dtype=float)
    v_arr = np.asarray(v, dtype=float)
    if np.any((u_arr < 0) | (u_arr > 1)) or np.any((v_arr < 0) | (v_arr > 1)):
        raise InvalidInputError("empirical copula arguments must lie in [0, 1]")
    u_b, v_b = np.broadcast_arrays(u_arr, v_arr)
    flat_u, flat_v = u_b.ravel(), v_b.ravel()
    counts = np.empty(flat_u.size)
    for j, (uu, vv) in enumerate(zip(flat_u, flat_v)):
        counts[j] = np.count_nonzero((ec._us <= uu) & (ec._vs <= vv))
    res = (counts / ec.n).reshape(u_b.shape)
    return float(res) if res.ndim == 0 else res
