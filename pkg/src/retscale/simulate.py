"""Monte-Carlo experiments on i.i.d. stretched-exponential intervals.

Two experiments: the effect of a coarse time grid on the moments at short
mean intervals (discreteness), and the downward bias of high-order moment
scaling in short records (finite size).

Seed splitting: every draw uses
``SeedSequence(master_seed, spawn_key=(crc32(experiment), size, realization, target_index))``.
Resolutions share draws within a realization, so resolutions are compared on
common random numbers.
"""
from __future__ import annotations

import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict, fields
from typing import Sequence

import numpy as np

from .intervals import moment
from .multiscaling import DEFAULT_RANGE, MomentCurve, fit_alpha, fit_grid
from .stretchedexp import params_from_gamma, sample

CONTINUOUS = 0.0


class PlanError(ValueError):
    """Invalid simulation plan; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


@dataclass(frozen=True)
class SimulationPlan:
    """Configuration of one experiment.

    ``sizes`` means intervals per trial for the discreteness experiment and
    record length in time units for the finite-size experiment (a record of
    length L holds about ``L / <tau>`` intervals).
    """
    gamma: float = 0.3
    sizes: tuple[int, ...] = (200_000,)
    resolutions: tuple[float, ...] = (CONTINUOUS, 1.0, 5.0, 10.0)
    n_realizations: int = 100
    target_mean_taus: tuple[float, ...] = tuple(np.geomspace(3, 1000, 19).tolist())
    m_values: tuple[float, ...] = (0.5, 2.0)
    rng_seed: int = 0
    fit_range: tuple[float, float] = DEFAULT_RANGE
    discretization: str = "ceil"

    def __post_init__(self):
        for name in ("sizes", "resolutions", "target_mean_taus", "m_values", "fit_range"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if not (isinstance(self.gamma, (int, float)) and 0 < self.gamma <= 2):
            raise PlanError("gamma", f"must be in (0, 2], got {self.gamma!r}")
        if not self.sizes:
            raise PlanError("sizes", "must be nonempty")
        if any(int(s) != s or s < 1 for s in self.sizes):
            raise PlanError("sizes", "entries must be positive integers")
        if not self.resolutions:
            raise PlanError("resolutions", "must be nonempty")
        if any(r < 0 for r in self.resolutions):
            raise PlanError("resolutions", "entries must be >= 0 (0 = continuous)")
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise PlanError("n_realizations", "must be a positive integer")
        if not self.target_mean_taus:
            raise PlanError("target_mean_taus", "must be nonempty")
        if any(t <= 0 for t in self.target_mean_taus):
            raise PlanError("target_mean_taus", "entries must be positive")
        if not self.m_values:
            raise PlanError("m_values", "must be nonempty")
        if any(m == 0 or m <= -1 for m in self.m_values):
            raise PlanError("m_values", "orders must be > -1 and nonzero")
        if len(self.fit_range) != 2 or not self.fit_range[0] < self.fit_range[1]:
            raise PlanError("fit_range", "must be [low, high] with low < high")
        if self.discretization not in ("ceil", "round"):
            raise PlanError("discretization", "must be 'ceil' or 'round'")

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationPlan":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise PlanError(sorted(extra)[0], "unknown field")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def load_plans(path_or_dict) -> dict[str, SimulationPlan]:
    """Read ``{"discreteness": {...}, "finite_size": {...}}`` (either optional)."""
    if isinstance(path_or_dict, (str, os.PathLike)):
        with open(path_or_dict, encoding="utf-8") as fh:
            d = json.load(fh)
    else:
        d = dict(path_or_dict)
    shared = {k: v for k, v in d.items() if k not in ("discreteness", "finite_size")}
    plans = {}
    for name in ("discreteness", "finite_size"):
        if name in d:
            try:
                plans[name] = SimulationPlan.from_dict({**shared, **d[name]})
            except PlanError as exc:
                raise PlanError(f"{name}.{exc.field}", str(exc).split(": ", 1)[1]) from None
            except TypeError as exc:
                raise PlanError(name, str(exc)) from None
    if not plans:
        raise PlanError("plan", "needs a 'discreteness' or 'finite_size' section")
    return plans


def derive_seed(master: int, experiment: str, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master),
                                  spawn_key=(zlib.crc32(experiment.encode()),) + tuple(int(k) for k in keys))


def simulate_intervals(gamma: float, mean_tau: float, n: int, seed) -> np.ndarray:
    """i.i.d. stretched-exponential intervals with population mean ``mean_tau``."""
    if not mean_tau > 0:
        raise ValueError("mean_tau must be positive")
    return mean_tau * sample(params_from_gamma(gamma), n, seed)


def discretize(taus, resolution: float, rule: str = "ceil") -> np.ndarray:
    """Snap intervals onto a grid of spacing ``resolution``.

    ``ceil`` (default) reports an event at the end of its sampling window,
    so no interval shrinks and the smallest output is one resolution unit.
    ``round`` snaps to the nearest grid point, again with a floor of one unit.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    t = np.asarray(taus, dtype=float)
    r = float(resolution)
    if rule == "ceil":
        k = np.ceil(t / r)
        # guard against division rounding in either direction
        k = np.where((k - 1) * r >= t, k - 1, k)
        k = np.where(k * r < t, k + 1, k)
    elif rule == "round":
        k = np.rint(t / r)
    else:
        raise ValueError(f"unknown discretization rule {rule!r}")
    return np.maximum(k, 1.0) * r


@dataclass(frozen=True)
class DiscretenessResult:
    plan: SimulationPlan
    curves: dict[tuple[float, float], MomentCurve]   # (resolution, m) -> curve
    size: int

    def rows(self):
        for (res, m), c in sorted(self.curves.items()):
            for t, u in zip(c.mean_tau, c.mu):
                yield res, m, float(t), float(u)

    def value_at(self, resolution: float, m: float, mean_tau: float) -> float:
        """Log-log interpolation of a curve at a given achieved mean interval."""
        c = self.curves[(float(resolution), float(m))]
        return float(np.exp(np.interp(np.log(mean_tau), np.log(c.mean_tau), np.log(c.mu))))


def _pmap(fn, items, workers: int | None):
    if workers is None:
        workers = int(os.environ.get("RETSCALE_THREADS", "1") or 1)
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_discreteness_experiment(plan: SimulationPlan, *, workers: int | None = None) -> DiscretenessResult:
    """Average moment curves per resolution over independent trials.

    Each trial draws ``plan.sizes[0]`` intervals per target mean interval,
    snaps them to every resolution (``0`` keeps them continuous) and computes
    ``mu_m`` from the achieved mean. Curves report trial-averaged achieved
    mean intervals against trial-averaged moments.
    """
    n = int(plan.sizes[0])
    res = [float(r) for r in plan.resolutions]
    ms = [float(m) for m in plan.m_values]
    targets = [float(t) for t in plan.target_mean_taus]

    def trial(k: int) -> np.ndarray:
        out = np.empty((len(res), len(targets), 1 + len(ms)))
        for j, t in enumerate(targets):
            cont = simulate_intervals(plan.gamma, t, n, derive_seed(plan.rng_seed, "discreteness", n, k, j))
            for i, r in enumerate(res):
                x = cont if r == CONTINUOUS else discretize(cont, r, plan.discretization)
                out[i, j, 0] = x.mean()
                for l, m in enumerate(ms):
                    out[i, j, 1 + l] = moment(x, m)
        return out

    acc = np.mean(_pmap(trial, range(int(plan.n_realizations)), workers), axis=0)
    curves = {}
    for i, r in enumerate(res):
        for l, m in enumerate(ms):
            src = "simulation" if r == CONTINUOUS else f"simulation-res{r:g}"
            curves[(r, m)] = MomentCurve(m, acc[i, :, 0], acc[i, :, 1 + l], src)
    return DiscretenessResult(plan, curves, n)


@dataclass(frozen=True)
class FiniteSizeRow:
    size: int
    m: float
    mean_alpha: float
    std_alpha: float
    mean_alpha_full: float
    n_realizations: int


def _fit_or_nan(curve: MomentCurve, lo: float, hi: float) -> float:
    try:
        return fit_alpha(curve, lo, hi).alpha
    except ValueError:
        return math.nan


def run_finite_size_experiment(plan: SimulationPlan, *, workers: int | None = None) -> list[FiniteSizeRow]:
    """Mean alpha per (record length, order) over realizations.

    For a record of length ``L`` and target ``<tau>``, a realization holds
    ``floor(L / <tau>)`` continuous intervals. ``mean_alpha`` is fitted in
    ``plan.fit_range``; ``mean_alpha_full`` over every target as the
    large-range diagnostic.
    """
    ms = [float(m) for m in plan.m_values]
    targets = sorted(float(t) for t in plan.target_mean_taus)
    lo, hi = plan.fit_range
    full_lo = min(targets) * (1 - 1e-9)
    full_hi = max(targets) * 2.0
    rows = []
    for size in plan.sizes:
        size = int(size)

        def realization(k: int) -> np.ndarray:
            pts = np.full((len(targets), 1 + len(ms)), np.nan)
            for j, t in enumerate(targets):
                n = int(size // t)
                if n < 2:
                    continue
                x = simulate_intervals(plan.gamma, t, n, derive_seed(plan.rng_seed, "finite_size", size, k, j))
                pts[j, 0] = x.mean()
                for l, m in enumerate(ms):
                    pts[j, 1 + l] = moment(x, m)
            ok = ~np.isnan(pts[:, 0])
            alphas = np.empty((len(ms), 2))
            for l, m in enumerate(ms):
                c = MomentCurve(m, pts[ok, 0], pts[ok, 1 + l], "simulation")
                alphas[l, 0] = _fit_or_nan(c, lo, hi)
                alphas[l, 1] = _fit_or_nan(c, full_lo, full_hi)
            return alphas

        al = np.array(_pmap(realization, range(int(plan.n_realizations)), workers))
        for l, m in enumerate(ms):
            a = al[:, l, 0]
            std = float(np.nanstd(a, ddof=1)) if a.size > 1 else 0.0
            rows.append(FiniteSizeRow(size, m, float(np.nanmean(a)), std,
                                      float(np.nanmean(al[:, l, 1])), int(a.size)))
    return rows


def default_discreteness_plan(**kw) -> SimulationPlan:
    base = dict(gamma=0.3, sizes=(200_000,), resolutions=(CONTINUOUS, 1.0, 5.0, 10.0),
                n_realizations=100, m_values=(0.5, 2.0),
                target_mean_taus=tuple(sorted(set(np.round(np.geomspace(3, 1000, 19), 6).tolist())
                                              | set(fit_grid().tolist()) | {30.0})))
    base.update(kw)
    return SimulationPlan(**base)


def default_finite_size_plan(**kw) -> SimulationPlan:
    base = dict(gamma=0.3, sizes=(20_000, 200_000, 2_000_000), resolutions=(CONTINUOUS,),
                n_realizations=500, m_values=(0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0),
                target_mean_taus=tuple(fit_grid().tolist()) + (150.0, 250.0, 400.0))
    base.update(kw)
    return SimulationPlan(**base)
