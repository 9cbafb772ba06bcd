"""Return intervals between threshold exceedances, and their moments."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

log = logging.getLogger(__name__)

MIN_EXCEEDANCES = 50


class MomentOverflowError(FloatingPointError):
    pass


@dataclass(frozen=True)
class IntervalSeries:
    q: float
    taus: np.ndarray
    n_exceedances: int
    first_index: int = -1

    @property
    def mean_tau(self) -> float:
        return float(self.taus.mean()) if self.taus.size else math.nan

    @property
    def n(self) -> int:
        return int(self.taus.size)

    @property
    def empty(self) -> bool:
        return self.taus.size == 0

    def to_dict(self) -> dict:
        return {"q": self.q, "mean_tau": self.mean_tau, "n": self.n,
                "taus": self.taus.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv_row(self) -> str:
        return ",".join([repr(float(self.q)), repr(self.mean_tau), str(self.n)]
                        + [str(int(t)) for t in self.taus])

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalSeries":
        taus = np.asarray(d["taus"], dtype=np.int64)
        return cls(float(d["q"]), taus, taus.size + 1 if taus.size else 0)


def _values(v) -> np.ndarray:
    return np.asarray(getattr(v, "values", v), dtype=float)


def extract_intervals(v, q: float) -> IntervalSeries:
    """Intervals between successive indices with ``v > q`` (strict).

    Days are treated as one concatenated sequence. The stretches before the
    first and after the last exceedance are discarded. Fewer than two
    exceedances yields an empty series rather than an error.
    """
    x = _values(v)
    if x.size == 0:
        raise ValueError("empty volatility series")
    if not q > 0:
        raise ValueError(f"threshold must be positive, got {q}")
    idx = np.flatnonzero(x > q)
    first = int(idx[0]) if idx.size else -1
    return IntervalSeries(float(q), np.diff(idx), int(idx.size), first)


def _mean_tau_at(x: np.ndarray, q: float) -> tuple[float, int]:
    idx = np.flatnonzero(x > q) if q > 0 else np.flatnonzero(x > 0)
    k = idx.size
    if k < 2:
        return math.inf, k
    return (idx[-1] - idx[0]) / (k - 1), k


@dataclass(frozen=True)
class SweepEntry:
    target: float
    q: float
    series: IntervalSeries

    @property
    def mean_tau(self) -> float:
        return self.series.mean_tau


@dataclass(frozen=True)
class ThresholdSweep:
    entries: tuple[SweepEntry, ...]
    warnings: tuple[str, ...] = field(default=())
    min_exceedances: int = MIN_EXCEEDANCES


def _find_threshold(x: np.ndarray, target: float, vmax: float, rel_tol: float,
                    max_iter: int, min_exc: int) -> tuple[float, float, int] | None:
    # mean interval grows (up to small-sample jitter) with q, so bisect on q
    best: tuple[float, float, int] | None = None

    def consider(q: float) -> tuple[float, int]:
        nonlocal best
        mt, k = _mean_tau_at(x, q)
        if k >= min_exc and math.isfinite(mt):
            if best is None or abs(mt - target) < abs(best[1] - target):
                best = (q, mt, k)
        return mt, k

    mt0, _ = consider(0.0)
    if best is not None and abs(mt0 - target) <= rel_tol * target:
        return best
    lo, hi = 0.0, vmax
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        mt, k = consider(mid)
        if best is not None and abs(best[1] - target) <= rel_tol * target:
            break
        if k < min_exc or mt > target:
            hi = mid
        else:
            lo = mid
    return best


def sweep_thresholds(v, targets, *, min_exceedances: int = MIN_EXCEEDANCES,
                     rel_tol: float = 0.02, max_iter: int = 60) -> ThresholdSweep:
    """Find, for each target mean interval, the threshold that reaches it.

    Bisection on ``q`` over ``[0, max(v)]`` stops once the achieved mean
    interval is within ``rel_tol`` of the target or after ``max_iter`` steps;
    the closest evaluated threshold wins. Targets that cannot be reached
    with at least ``min_exceedances`` exceedances are dropped and recorded in
    ``warnings``. The reported mean interval is always the achieved one.
    """
    x = _values(v)
    targets = [float(t) for t in targets]
    if any(t <= 0 for t in targets):
        raise ValueError("targets must be positive")
    if targets != sorted(targets):
        raise ValueError("targets must be sorted ascending")
    if x.size == 0:
        raise ValueError("empty volatility series")
    vmax = float(x.max())
    entries, notes = [], []
    for t in targets:
        if t < 1:
            notes.append(f"target {t:g} < 1 is unreachable")
            continue
        found = _find_threshold(x, t, vmax, rel_tol, max_iter, min_exceedances)
        if found is None:
            notes.append(f"target {t:g}: fewer than {min_exceedances} exceedances")
            continue
        q, mt, _ = found
        if abs(mt - t) > max(0.5, 0.5 * t):
            notes.append(f"target {t:g} not reachable (closest mean interval {mt:.4g})")
            continue
        series = extract_intervals(x, q) if q > 0 else _intervals_at_zero(x)
        entries.append(SweepEntry(t, q, series))
    for n in notes:
        log.debug(n)
    return ThresholdSweep(tuple(entries), tuple(notes), min_exceedances)


def _intervals_at_zero(x: np.ndarray) -> IntervalSeries:
    idx = np.flatnonzero(x > 0)
    return IntervalSeries(0.0, np.diff(idx), int(idx.size), int(idx[0]) if idx.size else -1)


def moment(s, m: float) -> float:
    """``mu_m = mean((tau/<tau>)**m) ** (1/m)``, computed in log space.

    ``s`` may be an :class:`IntervalSeries` or any array of positive
    intervals (simulated intervals need not be integers).
    """
    taus = np.asarray(getattr(s, "taus", s), dtype=float)
    if taus.size == 0:
        raise ValueError("moment of an empty interval series")
    m = float(m)
    if m == 0:
        raise ValueError("moment order 0 is undefined")
    lx = np.log(taus / taus.mean())
    val = math.exp((float(logsumexp(m * lx)) - math.log(taus.size)) / m)
    if not math.isfinite(val) or val <= 0:
        raise MomentOverflowError(f"mu_{m:g} is not representable ({val})")
    return val


def moments(s, ms) -> dict[float, float]:
    """Moments for several orders; orders that overflow are left out."""
    out = {}
    for m in ms:
        try:
            out[float(m)] = moment(s, m)
        except MomentOverflowError as exc:
            log.warning("excluding m=%g: %s", m, exc)
    return out


def scaled_intervals(s) -> np.ndarray:
    taus = np.asarray(getattr(s, "taus", s), dtype=float)
    if taus.size == 0:
        raise ValueError("empty interval series")
    return taus / taus.mean()
