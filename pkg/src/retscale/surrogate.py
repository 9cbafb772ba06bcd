"""Iterative amplitude-adjusted Fourier transform (IAAFT) surrogates.

A surrogate keeps the exact value distribution of the input and, up to a
residual that shrinks with iterations, its power spectrum, while any
nonlinear structure is randomized.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SurrogateConfig:
    iterations: int = 30
    rng_seed: int = 0
    spectrum_tolerance: float | None = None

    def __post_init__(self):
        if int(self.iterations) < 1:
            raise ValueError("iterations must be >= 1")
        if self.spectrum_tolerance is not None and self.spectrum_tolerance < 0:
            raise ValueError("spectrum_tolerance must be nonnegative")


def _rank_remap(y: np.ndarray, sorted_values: np.ndarray) -> np.ndarray:
    # ties in y resolved by position (stable sort)
    order = np.argsort(y, kind="stable")
    out = np.empty_like(sorted_values)
    out[order] = sorted_values
    return out


def spectrum_distance(a, b) -> float:
    """Relative L2 distance between DFT magnitudes, zero frequency excluded.

    ``|| |A| - |B| || / || |A| ||`` over frequencies 1..N-1.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    ma = np.abs(np.fft.fft(a))[1:]
    mb = np.abs(np.fft.fft(b))[1:]
    num = float(np.linalg.norm(ma - mb))
    den = float(np.linalg.norm(ma))
    if den == 0:
        return 0.0 if num == 0 else float("inf")
    return num / den


def make_surrogate(v, cfg: SurrogateConfig = SurrogateConfig(), *,
                   return_history: bool = False):
    """Schreiber-Schmitz surrogate of ``v``.

    Starts from a seeded random permutation; each iteration imposes the
    original Fourier magnitudes (keeping the current phases and the original
    zero-frequency term) and then rank-remaps the result onto the original
    values. The output is always an exact permutation of the input.

    With ``return_history=True`` also returns the spectrum distance after
    every iteration.
    """
    x = np.asarray(getattr(v, "values", v), dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("surrogate input must be a 1-d series of length >= 2")
    if not np.all(np.isfinite(x)):
        raise ValueError("surrogate input contains non-finite values")

    n = x.size
    rng = np.random.default_rng(cfg.rng_seed)
    sorted_x = np.sort(x, kind="stable")
    spec = np.fft.rfft(x)
    amp = np.abs(spec)

    s = x[rng.permutation(n)]
    history = []
    for _ in range(int(cfg.iterations)):
        cur = np.fft.rfft(s)
        mag = np.abs(cur)
        phase = np.divide(cur, mag, out=np.ones_like(cur), where=mag > 0)
        new = amp * phase
        new[0] = spec[0]
        y = np.fft.irfft(new, n=n)
        s = _rank_remap(y, sorted_x)
        if return_history or cfg.spectrum_tolerance is not None:
            d = spectrum_distance(x, s)
            history.append(d)
            if cfg.spectrum_tolerance is not None and d <= cfg.spectrum_tolerance:
                break
    if return_history:
        return s, history
    return s
