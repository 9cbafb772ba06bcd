"""Empirical cumulative distributions of scaled intervals and the
threshold trend of their collapse."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau

GRID_POINTS = 50


@dataclass(frozen=True)
class EmpiricalCdf:
    xs: np.ndarray
    survival: np.ndarray
    q: float
    n: int

    def __call__(self, x):
        """Step-function evaluation, ``#{x_i >= x} / n``."""
        x = np.asarray(x, dtype=float)
        # survival[k] counts samples >= xs[k]; x between xs[k-1] and xs[k] maps to k
        k = np.searchsorted(self.xs, x, side="left")
        padded = np.append(self.survival, 0.0)
        return padded[k]

    def to_csv(self) -> str:
        lines = ["x,survival"]
        lines += [f"{x!r},{s!r}" for x, s in zip(self.xs.tolist(), self.survival.tolist())]
        return "\n".join(lines) + "\n"


def empirical_survival(scaled, q: float = math.nan) -> EmpiricalCdf:
    x = np.sort(np.asarray(scaled, dtype=float))
    if x.size == 0:
        raise ValueError("empirical survival of an empty sample")
    xs, first = np.unique(x, return_index=True)
    surv = (x.size - first) / x.size
    return EmpiricalCdf(xs, surv, float(q), int(x.size))


@dataclass(frozen=True)
class DeviationReport:
    grid: np.ndarray
    qs: np.ndarray
    values: np.ndarray          # shape (n_cdfs, n_grid), D interpolated on the grid
    kendall: np.ndarray
    p_value: np.ndarray
    slope: np.ndarray           # OLS slope of D against q at each grid point
    trend_below_one: float
    trend_above_one: float

    @property
    def sign_below_one(self) -> int:
        return int(np.sign(self.trend_below_one))

    @property
    def sign_above_one(self) -> int:
        return int(np.sign(self.trend_above_one))

    def to_dict(self) -> dict:
        return {
            "qs": self.qs.tolist(),
            "grid": self.grid.tolist(),
            "kendall_tau": [None if not math.isfinite(t) else t for t in self.kendall.tolist()],
            "p_value": [None if not math.isfinite(p) else p for p in self.p_value.tolist()],
            "slope": self.slope.tolist(),
            "trend_below_one": self.trend_below_one,
            "trend_above_one": self.trend_above_one,
            "sign_below_one": self.sign_below_one,
            "sign_above_one": self.sign_above_one,
        }


def _interp_log(cdf: EmpiricalCdf, grid: np.ndarray) -> np.ndarray:
    if cdf.xs.size == 1:
        return np.where(grid <= cdf.xs[0], 1.0, 0.0)
    return np.interp(np.log(grid), np.log(cdf.xs), cdf.survival)


def collapse_deviation(cdfs, n_grid: int = GRID_POINTS) -> DeviationReport:
    """Quantify how the survival curves move with the threshold.

    Every curve is interpolated linearly in ``log x`` onto ``n_grid``
    log-spaced points spanning the intersection of the supports. At each
    point the Kendall tau-b between ``q`` and ``D(x)`` gives the direction of
    the trend (0 where all curves agree); the OLS slope ``dD/dq`` gives its
    size. Summaries are mean Kendall tau over grid points below and above
    ``x = 1``.
    """
    cdfs = sorted(cdfs, key=lambda c: c.q)
    if len(cdfs) < 2:
        raise ValueError("need at least two distributions")
    qs = np.array([c.q for c in cdfs])
    if np.unique(qs).size != qs.size:
        raise ValueError("thresholds must be distinct")
    lo = max(float(c.xs[0]) for c in cdfs)
    hi = min(float(c.xs[-1]) for c in cdfs)
    if not (lo > 0 and hi > lo):
        raise ValueError("supports of the distributions do not overlap")
    grid = np.geomspace(lo, hi, n_grid)
    vals = np.vstack([_interp_log(c, grid) for c in cdfs])

    tau = np.zeros(n_grid)
    pv = np.ones(n_grid)
    for j in range(n_grid):
        col = vals[:, j]
        if np.ptp(col) == 0:
            continue
        res = kendalltau(qs, col, variant="b")
        tau[j] = res.statistic
        pv[j] = res.pvalue
    qc = qs - qs.mean()
    slope = (qc @ (vals - vals.mean(axis=0))) / (qc @ qc)

    below = grid < 1
    above = grid > 1
    t_below = float(tau[below].mean()) if below.any() else 0.0
    t_above = float(tau[above].mean()) if above.any() else 0.0
    return DeviationReport(grid, qs, vals, tau, pv, slope, t_below, t_above)
