"""Synthetic price data shared by the test modules."""

from datetime import date, timedelta

import numpy as np

from stockcast.data import PriceSeries


def weekdays(start: date, end: date) -> list[date]:
    out, d = [], start
    while d <= end:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return out


def synthetic_series(symbol: str, seed: int, start=date(2012, 1, 1), end=date(2016, 9, 14), level=10.0) -> PriceSeries:
    """Mean-reverting random walk with a slow cycle, rounded to cents like exchange data."""
    rng = np.random.default_rng(seed)
    days = weekdays(start, end)
    n = len(days)
    t = np.arange(n)
    drift = 0.15 * level * np.sin(2 * np.pi * t / (120 + 40 * (seed % 3)))
    noise = np.cumsum(rng.normal(0, 0.004 * level, n))
    noise -= np.linspace(0, noise[-1], n)
    prices = np.round(level + drift + noise, 2)
    return PriceSeries(symbol, tuple(days), np.maximum(prices, 0.05))


def sine_series(n: int, period: float = 20.0, symbol: str = "SINE") -> PriceSeries:
    days = weekdays(date(2012, 1, 2), date(2030, 1, 1))[:n]
    return PriceSeries(symbol, tuple(days), 10 + 5 * np.sin(2 * np.pi * np.arange(n) / period))


def write_csv(path, series: PriceSeries, descending: bool = True) -> None:
    rows = [f"{d.isoformat()},{p:.2f},{p:.2f},{p:.2f},{p:.2f},{p:.2f},1000" for d, p in zip(series.dates, series.prices)]
    if descending:
        rows.reverse()
    path.write_text("Date,Open,High,Low,Close,Adj Close,Volume\n" + "\n".join(rows) + "\n")
