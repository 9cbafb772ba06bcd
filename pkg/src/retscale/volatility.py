"""Minute-bar price ingestion and the normalized volatility series.

Volatility is the absolute log price change between consecutive recorded
minutes of the same trading day, divided by the cross-day mean at that
minute of day, then scaled to unit sample standard deviation.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

MINUTES_PER_DAY = 391
RETURNS_PER_DAY = MINUTES_PER_DAY - 1


class PriceFormatError(ValueError):
    """Malformed or inconsistent price CSV content."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class VolatilityError(ValueError):
    pass


@dataclass(frozen=True)
class TradingDay:
    date: dt.date
    minutes: np.ndarray
    prices: np.ndarray

    def __len__(self) -> int:
        return int(self.minutes.size)


@dataclass(frozen=True)
class PriceSeries:
    instrument_id: str
    days: tuple[TradingDay, ...]

    @property
    def n_prices(self) -> int:
        return sum(len(d) for d in self.days)


@dataclass(frozen=True)
class VolatilitySeries:
    instrument_id: str
    day: np.ndarray
    minute: np.ndarray
    values: np.ndarray
    seasonal_profile: np.ndarray = field(repr=False)
    normalization_sd: float = 1.0

    def __len__(self) -> int:
        return int(self.values.size)

    def with_values(self, values: np.ndarray, instrument_id: str | None = None) -> "VolatilitySeries":
        """Same clock and profile, different values (used for surrogates)."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise ValueError("replacement values must match the series length")
        return VolatilitySeries(instrument_id or self.instrument_id, self.day, self.minute,
                                values, self.seasonal_profile, self.normalization_sd)


def load_prices(source: IO | str | bytes | Iterable[str], instrument_id: str,
                name: str | None = None) -> PriceSeries:
    """Parse a ``date,minute,price`` CSV into a :class:`PriceSeries`.

    ``source`` may be a text or binary stream, raw bytes/str content, or any
    iterable of lines. Errors carry the 1-based line number.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    elif hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise PriceFormatError("empty input", source=name) from None
    if [h.strip().lower() for h in header] != ["date", "minute", "price"]:
        raise PriceFormatError(f"expected header 'date,minute,price', got {','.join(header)!r}",
                               line=1, source=name)

    by_date: dict[dt.date, dict[int, float]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise PriceFormatError(f"expected 3 fields, got {len(row)}", lineno, name)
        d_s, m_s, p_s = (c.strip() for c in row)
        try:
            date = dt.date.fromisoformat(d_s)
        except ValueError:
            raise PriceFormatError(f"bad date {d_s!r}", lineno, name) from None
        try:
            minute = int(m_s)
        except ValueError:
            raise PriceFormatError(f"bad minute {m_s!r}", lineno, name) from None
        if not 0 <= minute < MINUTES_PER_DAY:
            raise PriceFormatError(f"minute {minute} outside 0..{MINUTES_PER_DAY - 1}", lineno, name)
        try:
            price = float(p_s)
        except ValueError:
            raise PriceFormatError(f"bad price {p_s!r}", lineno, name) from None
        if not math.isfinite(price) or price <= 0:
            raise PriceFormatError(f"price must be positive, got {p_s!r}", lineno, name)
        day = by_date.setdefault(date, {})
        if minute in day:
            raise PriceFormatError(f"duplicate entry for {date} minute {minute}", lineno, name)
        day[minute] = price

    days = []
    for date in sorted(by_date):
        items = sorted(by_date[date].items())
        days.append(TradingDay(date,
                               np.array([k for k, _ in items], dtype=np.int64),
                               np.array([p for _, p in items], dtype=float)))
    return PriceSeries(instrument_id, tuple(days))


def raw_volatility(p: PriceSeries) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Absolute log returns within each day, with (day ordinal, start minute)."""
    days, minutes, r = [], [], []
    for k, day in enumerate(p.days):
        if len(day) < 2:
            raise VolatilityError(f"{p.instrument_id}: day {day.date} has fewer than 2 prices")
        lp = np.log(day.prices)
        r.append(np.abs(np.diff(lp)))
        minutes.append(day.minutes[:-1])
        days.append(np.full(len(day) - 1, k, dtype=np.int64))
    if not r:
        raise VolatilityError(f"{p.instrument_id}: no trading days")
    return np.concatenate(days), np.concatenate(minutes), np.concatenate(r)


def deseasonalize(minute: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Divide by the mean volatility at each minute of day.

    Minute slots never observed get the mean of the observed slots so the
    profile stays positive; they are never applied to any value.
    """
    sums = np.bincount(minute, weights=r, minlength=RETURNS_PER_DAY)[:RETURNS_PER_DAY]
    counts = np.bincount(minute, minlength=RETURNS_PER_DAY)[:RETURNS_PER_DAY]
    seen = counts > 0
    profile = np.empty(RETURNS_PER_DAY)
    profile[seen] = sums[seen] / counts[seen]
    zero = seen & (profile == 0)
    if np.any(zero):
        bad = np.flatnonzero(zero)
        raise VolatilityError(f"zero seasonal profile at minute(s) {bad[:10].tolist()}: "
                              "price constant across all days")
    profile[~seen] = profile[seen].mean()
    return r / profile[minute], profile


def compute_volatility(p: PriceSeries) -> VolatilitySeries:
    day, minute, r = raw_volatility(p)
    u, profile = deseasonalize(minute, r)
    if u.size < 2:
        raise VolatilityError(f"{p.instrument_id}: need at least 2 returns to normalize")
    sd = float(np.std(u, ddof=1))
    if sd == 0 or not math.isfinite(sd):
        raise VolatilityError(f"{p.instrument_id}: deseasonalized volatility has zero variance")
    return VolatilitySeries(p.instrument_id, day, minute, u / sd, profile, sd)
