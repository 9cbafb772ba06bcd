"""Synthetic series used by tests, scripts and the CLI demo corpus."""
from __future__ import annotations

import datetime as dt

import numpy as np

from .volatility import MINUTES_PER_DAY


def fgn(n: int, hurst: float, seed) -> np.ndarray:
    """Unit-variance fractional Gaussian noise (Davies-Harte embedding)."""
    if not 0 < hurst < 1:
        raise ValueError("hurst must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    k = np.arange(n + 1, dtype=float)
    acov = 0.5 * (np.abs(k + 1) ** (2 * hurst) - 2 * k ** (2 * hurst) + np.abs(k - 1) ** (2 * hurst))
    row = np.concatenate([acov, acov[-2:0:-1]])
    lam = np.fft.fft(row).real
    lam[lam < 0] = 0.0  # round-off only; the embedding is nonnegative for fGn
    m = row.size
    w = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    z = np.fft.fft(np.sqrt(lam / m) * w)
    return z.real[:n]


def cascade_volatility(n: int, hurst: float = 0.9, intermittency: float = 0.6, seed=0) -> np.ndarray:
    """Volatility-like series with nonlinear (magnitude) correlations.

    ``|eps_t| * exp(s * omega_t)`` with i.i.d. Gaussian ``eps`` and
    long-memory Gaussian ``omega``; sign-free correlations live only in the
    magnitudes, which an amplitude-adjusted surrogate cannot reproduce.
    """
    ss = np.random.SeedSequence(seed)
    a, b = ss.spawn(2)
    omega = fgn(n, hurst, a)
    eps = np.random.default_rng(b).standard_normal(n)
    v = np.abs(eps) * np.exp(intermittency * omega)
    return v / v.std(ddof=1)


def u_shape(minutes: np.ndarray, depth: float = 2.0) -> np.ndarray:
    """Intraday multiplier, highest at the open and close."""
    x = (np.asarray(minutes, dtype=float) - 195.0) / 195.0
    return 1.0 + depth * x ** 2


def price_csv(n_days: int, seed=0, *, start: dt.date = dt.date(2001, 1, 2), base_price: float = 50.0,
              sigma: float = 5e-4, depth: float = 2.0, hurst: float | None = None) -> str:
    """A ``date,minute,price`` CSV of 391-point days with a U-shaped volatility profile.

    With ``hurst`` set, log-volatility carries long-memory fluctuations.
    """
    rng = np.random.default_rng(seed)
    n_ret = n_days * (MINUTES_PER_DAY - 1)
    minutes = np.tile(np.arange(MINUTES_PER_DAY - 1), n_days)
    scale = sigma * u_shape(minutes, depth)
    if hurst is not None:
        scale = scale * np.exp(0.5 * fgn(n_ret, hurst, rng.integers(2**63)))
    rets = scale * rng.standard_normal(n_ret)
    lines = ["date,minute,price"]
    day = start
    p = base_price
    for d in range(n_days):
        while day.weekday() >= 5:
            day += dt.timedelta(days=1)
        r = rets[d * (MINUTES_PER_DAY - 1):(d + 1) * (MINUTES_PER_DAY - 1)]
        lp = np.log(p) + np.concatenate([[0.0], np.cumsum(r)])
        prices = np.exp(lp)
        iso = day.isoformat()
        lines.extend(f"{iso},{k},{prices[k]:.6f}" for k in range(MINUTES_PER_DAY))
        p = float(prices[-1])
        day += dt.timedelta(days=1)
    return "\n".join(lines) + "\n"
