"""Per-instrument analysis: threshold sweep, moment curves, survival
curves, collapse trend and alpha fits."""
from __future__ import annotations

import logging
import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .dist import DeviationReport, EmpiricalCdf, collapse_deviation, empirical_survival
from .intervals import (MIN_EXCEEDANCES, IntervalSeries, ThresholdSweep, extract_intervals,
                        moments, scaled_intervals, sweep_thresholds)
from .multiscaling import DEFAULT_RANGE, AlphaEstimate, MomentCurve, fit_alpha, fit_grid
from .stretchedexp import GammaFit, fit_gamma
from .surrogate import SurrogateConfig, make_surrogate, spectrum_distance

log = logging.getLogger(__name__)

DEFAULT_M_VALUES = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0)
DEFAULT_Q_VALUES = (2.0, 4.0, 6.0)


def default_targets(fit_range=DEFAULT_RANGE, n_fit: int = 12) -> list[float]:
    """Sweep targets: 12 log-spaced points inside the fit range plus a
    coarser grid from 3 up to 3000 outside it."""
    lo, hi = fit_range
    outside = [t for t in np.geomspace(3, 3000, 16) if t <= lo or t > hi]
    return sorted(set(np.round(outside, 6).tolist()) | set(fit_grid(lo, hi, n_fit).tolist()))


@dataclass
class AnalysisConfig:
    targets: list[float] = field(default_factory=default_targets)
    m_values: tuple[float, ...] = DEFAULT_M_VALUES
    q_values: tuple[float, ...] = DEFAULT_Q_VALUES
    fit_range: tuple[float, float] = DEFAULT_RANGE
    min_exceedances: int = MIN_EXCEEDANCES


@dataclass
class InstrumentAnalysis:
    instrument_id: str
    source: str
    sweep: ThresholdSweep
    curves: dict[float, MomentCurve]
    cdfs: list[EmpiricalCdf]
    threshold_series: list[IntervalSeries]
    alphas: dict[float, AlphaEstimate]
    gamma_fits: dict[float, GammaFit]
    deviation: DeviationReport | None
    notes: list[str] = field(default_factory=list)
    spectrum_residual: float | None = None


class InsufficientData(ValueError):
    pass


def analyze_series(instrument_id: str, values, cfg: AnalysisConfig, source: str = "original") -> InstrumentAnalysis:
    x = np.asarray(getattr(values, "values", values), dtype=float)
    sweep = sweep_thresholds(x, cfg.targets, min_exceedances=cfg.min_exceedances)
    notes = list(sweep.warnings)
    if not sweep.entries:
        raise InsufficientData(f"{instrument_id}: no threshold reaches {cfg.min_exceedances} exceedances")

    pts: dict[float, list[tuple[float, float]]] = {float(m): [] for m in cfg.m_values}
    for e in sweep.entries:
        for m, mu in moments(e.series, cfg.m_values).items():
            pts[m].append((e.mean_tau, mu))
    curves = {m: MomentCurve.from_points(m, p, source) for m, p in pts.items() if p}

    alphas = {}
    for m, c in curves.items():
        try:
            alphas[m] = fit_alpha(c, *cfg.fit_range)
        except ValueError as exc:
            notes.append(f"alpha m={m:g}: {exc}")

    cdfs, series, fits = [], [], {}
    for q in cfg.q_values:
        s = extract_intervals(x, q)
        if s.n_exceedances < cfg.min_exceedances:
            notes.append(f"q={q:g}: only {s.n_exceedances} exceedances")
            continue
        series.append(s)
        sc = scaled_intervals(s)
        cdfs.append(empirical_survival(sc, q))
        if sc.size >= 100 and np.ptp(sc) > 0:
            fits[float(q)] = fit_gamma(sc)
    deviation = None
    if len(cdfs) >= 2:
        try:
            deviation = collapse_deviation(cdfs)
        except ValueError as exc:
            notes.append(f"collapse: {exc}")
    return InstrumentAnalysis(instrument_id, source, sweep, curves, cdfs, series,
                              alphas, fits, deviation, notes)


def surrogate_seed(master: int, instrument_id: str) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(zlib.crc32(b"surrogate"),
                                                        zlib.crc32(instrument_id.encode())))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def surrogate_values(instrument_id: str, values, scfg: SurrogateConfig, master_seed: int):
    x = np.asarray(getattr(values, "values", values), dtype=float)
    cfg = SurrogateConfig(scfg.iterations, surrogate_seed(master_seed, instrument_id),
                          scfg.spectrum_tolerance)
    s = make_surrogate(x, cfg)
    return s, spectrum_distance(x, s)
