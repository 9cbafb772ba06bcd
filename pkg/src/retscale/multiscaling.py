"""Power-law fits of moments against the mean interval, and their
aggregation across instruments."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_RANGE = (10.0, 100.0)
FIT_GRID_POINTS = 12


@dataclass(frozen=True)
class MomentCurve:
    m: float
    mean_tau: np.ndarray
    mu: np.ndarray
    source: str = "original"

    def __post_init__(self):
        t = np.asarray(self.mean_tau, dtype=float)
        u = np.asarray(self.mu, dtype=float)
        if t.shape != u.shape:
            raise ValueError("mean_tau and mu must have the same length")
        if t.size and (not np.all(np.isfinite(t)) or not np.all(np.isfinite(u))
                       or np.any(t <= 0) or np.any(u <= 0)):
            raise ValueError("moment curve points must be finite and positive")
        order = np.argsort(t, kind="stable")
        object.__setattr__(self, "mean_tau", t[order])
        object.__setattr__(self, "mu", u[order])

    @classmethod
    def from_points(cls, m: float, points: Iterable[tuple[float, float]],
                    source: str = "original") -> "MomentCurve":
        pts = list(points)
        return cls(m, np.array([p[0] for p in pts], dtype=float),
                   np.array([p[1] for p in pts], dtype=float), source)


@dataclass(frozen=True)
class AlphaEstimate:
    m: float
    alpha: float
    stderr: float
    n_points: int
    fit_range: tuple[float, float]
    intercept: float = 0.0

    @property
    def significant(self) -> bool:
        """``|alpha| > 2 stderr``."""
        return abs(self.alpha) > 2 * self.stderr


def fit_grid(lo: float = DEFAULT_RANGE[0], hi: float = DEFAULT_RANGE[1],
             n: int = FIT_GRID_POINTS) -> np.ndarray:
    """``n`` log-spaced targets strictly inside ``(lo, hi)`` (bin centres)."""
    k = (np.arange(n) + 0.5) / n
    return lo * (hi / lo) ** k


def fit_alpha(curve: MomentCurve, range_low: float = DEFAULT_RANGE[0],
              range_high: float = DEFAULT_RANGE[1]) -> AlphaEstimate:
    """OLS slope of ``log mu_m`` on ``log <tau>`` for ``low < <tau> <= high``."""
    if not range_low < range_high:
        raise ValueError("fit range must satisfy low < high")
    sel = (curve.mean_tau > range_low) & (curve.mean_tau <= range_high)
    n = int(sel.sum())
    if n < 3:
        raise ValueError(f"m={curve.m:g}: only {n} points in ({range_low:g}, {range_high:g}]; need 3")
    x = np.log(curve.mean_tau[sel])
    y = np.log(curve.mu[sel])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("all in-range points share the same mean interval")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    se = math.sqrt(float(resid @ resid) / (n - 2) / sxx) if n > 2 else math.inf
    return AlphaEstimate(float(curve.m), slope, se, n, (float(range_low), float(range_high)),
                         intercept)


@dataclass(frozen=True)
class AlphaHistogram:
    m: float
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    std: float

    def to_csv(self) -> str:
        lines = ["bin_left,bin_right,count"]
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            lines.append(f"{lo!r},{hi!r},{int(c)}")
        return "\n".join(lines) + "\n"


def alpha_histogram(estimates: Sequence[AlphaEstimate], bin_width: float = 0.02) -> AlphaHistogram:
    """Counts on bins aligned to integer multiples of ``bin_width``."""
    if not estimates:
        raise ValueError("no estimates")
    ms = {e.m for e in estimates}
    if len(ms) != 1:
        raise ValueError(f"estimates mix several orders: {sorted(ms)}")
    a = np.array([e.alpha for e in estimates])
    lo = math.floor(a.min() / bin_width)
    hi = math.floor(a.max() / bin_width) + 1
    edges = np.arange(lo, hi + 1) * bin_width
    idx = np.clip(np.floor(a / bin_width).astype(int) - lo, 0, hi - lo - 1)
    counts = np.bincount(idx, minlength=hi - lo)
    std = float(a.std(ddof=1)) if a.size > 1 else 0.0
    return AlphaHistogram(ms.pop(), edges, counts, float(a.mean()), std)


@dataclass(frozen=True)
class AlphaEnsemble:
    m: float
    members: tuple[AlphaEstimate, ...]
    mean_alpha: float
    std_alpha: float

    @classmethod
    def from_estimates(cls, estimates: Sequence[AlphaEstimate]) -> "AlphaEnsemble":
        if not estimates:
            raise ValueError("empty ensemble")
        ms = {e.m for e in estimates}
        if len(ms) != 1:
            raise ValueError("ensemble members must share the same order")
        a = np.array([e.alpha for e in estimates])
        std = float(a.std(ddof=1)) if a.size > 1 else 0.0
        return cls(ms.pop(), tuple(estimates), float(a.mean()), std)


def alpha_vs_m(curves_by_m: Mapping[float, Sequence[MomentCurve]],
               range_low: float = DEFAULT_RANGE[0],
               range_high: float = DEFAULT_RANGE[1]) -> list[tuple[float, float, float]]:
    """Per-order ensemble mean and standard deviation of alpha."""
    out = []
    for m in sorted(curves_by_m):
        curves = curves_by_m[m]
        if not curves:
            raise ValueError(f"no curves for m={m:g}")
        ens = AlphaEnsemble.from_estimates([fit_alpha(c, range_low, range_high) for c in curves])
        out.append((float(m), ens.mean_alpha, ens.std_alpha))
    return out
