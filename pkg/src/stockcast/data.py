"""Daily price files, train/holdout splits, price scaling and sliding windows."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date
import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateRangeError,
    EmptyInputError,
    IntegrityError,
    RowParseError,
    SchemaError,
)
from .mlp import TrainSample

DEFAULT_WINDOW = 5
# markers data vendors use for non-trading rows; such rows are dropped, not errors
_MISSING = {"", "null", "nan", "na", "n/a", "-"}


@dataclass(frozen=True, eq=False)
class PriceSeries:
    symbol: str
    dates: tuple[date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.array(self.prices, dtype=np.float64).reshape(-1)
        dates = tuple(self.dates)
        if len(dates) != prices.shape[0]:
            raise IntegrityError(f"{self.symbol}: {len(dates)} dates for {prices.shape[0]} prices")
        for a, b in zip(dates, dates[1:]):
            if not a < b:
                raise IntegrityError(f"{self.symbol}: dates not strictly increasing at {b}")
        if prices.size and not (np.isfinite(prices).all() and (prices > 0).all()):
            raise IntegrityError(f"{self.symbol}: prices must be positive and finite")
        prices.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "prices", prices)

    def __len__(self) -> int:
        return len(self.dates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.symbol == other.symbol and self.dates == other.dates and np.array_equal(self.prices, other.prices)

    def select(self, mask) -> "PriceSeries":
        mask = np.asarray(mask, dtype=bool)
        return PriceSeries(self.symbol, tuple(d for d, m in zip(self.dates, mask) if m), self.prices[mask])

    def before(self, day: date) -> "PriceSeries":
        """Observations dated strictly before ``day``."""
        return self.select([d < day for d in self.dates])

    def tail(self, n: int) -> "PriceSeries":
        n = min(n, len(self))
        return PriceSeries(self.symbol, self.dates[len(self) - n:], self.prices[len(self) - n:])

    @property
    def last_date(self) -> date:
        if not self.dates:
            raise EmptyInputError(f"{self.symbol}: empty series")
        return self.dates[-1]


def _parse_date(text: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError:
        raise RowParseError(lineno, f"bad date {text!r}, expected YYYY-MM-DD") from None


def parse_price_csv(text: str, symbol: str, price_column: str = "Close") -> PriceSeries:
    """Read a vendor-style daily CSV (``Date`` plus a price column) into an ascending series.

    Rows whose price is blank, a missing-value marker or zero are dropped.
    Files may be in ascending or descending date order.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyInputError(f"{symbol}: empty file") from None
    for col in ("Date", price_column):
        if col not in header:
            raise SchemaError(f"{symbol}: header lacks column {col!r} (have {header})")
    di, pi = header.index("Date"), header.index(price_column)

    rows: list[tuple[date, float]] = []
    seen: dict[date, int] = {}
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) <= max(di, pi):
            raise RowParseError(lineno, f"expected at least {max(di, pi) + 1} fields, got {len(row)}")
        day = _parse_date(row[di], lineno)
        if day in seen:
            raise IntegrityError(f"{symbol}: date {day} repeated on lines {seen[day]} and {lineno}")
        seen[day] = lineno
        raw = row[pi].strip()
        if raw.lower() in _MISSING:
            continue
        try:
            price = float(raw)
        except ValueError:
            raise RowParseError(lineno, f"bad {price_column} value {raw!r}") from None
        if price == 0.0:
            continue
        if not math.isfinite(price) or price < 0:
            raise RowParseError(lineno, f"invalid {price_column} value {raw!r}")
        rows.append((day, price))

    if not rows:
        raise EmptyInputError(f"{symbol}: no usable price rows")
    days = [d for d, _ in rows]
    if any(a > b for a, b in zip(days, days[1:])):
        if any(a < b for a, b in zip(days, days[1:])):
            raise IntegrityError(f"{symbol}: rows are neither ascending nor descending by date")
        rows.reverse()
    return PriceSeries(symbol, tuple(d for d, _ in rows), np.array([p for _, p in rows]))


def read_price_csv(path, symbol: str | None = None, price_column: str = "Close") -> PriceSeries:
    from pathlib import Path

    path = Path(path)
    return parse_price_csv(path.read_text(encoding="utf-8-sig"), symbol or path.stem, price_column)


def format_price_csv(series: PriceSeries, price_column: str = "Close") -> str:
    lines = [f"Date,{price_column}"]
    lines += [f"{d.isoformat()},{p!r}" for d, p in zip(series.dates, series.prices.tolist())]
    return "\n".join(lines) + "\n"


def split_by_date(series: PriceSeries, train_start: date, train_end: date) -> tuple[PriceSeries, PriceSeries]:
    """Train on [train_start, train_end]; hold out everything after train_end."""
    if train_start > train_end:
        raise ConfigurationError(f"train_start {train_start} is after train_end {train_end}")
    train = series.select([train_start <= d <= train_end for d in series.dates])
    if len(train) == 0:
        raise ConfigurationError(f"{series.symbol}: no observations between {train_start} and {train_end}")
    return train, series.select([d > train_end for d in series.dates])


def split_by_ratio(series: PriceSeries, train_fraction: float, window: int = DEFAULT_WINDOW) -> tuple[PriceSeries, PriceSeries]:
    if not 0.0 < train_fraction < 1.0:
        raise ConfigurationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    k = math.floor(len(series) * train_fraction)
    if k < window + 1:
        raise ConfigurationError(f"{series.symbol}: {k} training rows, need at least {window + 1} for window {window}")
    n = len(series)
    return series.select(np.arange(n) < k), series.select(np.arange(n) >= k)


@dataclass(frozen=True)
class Scaler:
    """Affine map sending [price_min, price_max] onto [unit_low, unit_high]."""

    price_min: float
    price_max: float
    unit_low: float = 0.1
    unit_high: float = 0.9

    def __post_init__(self):
        if not self.price_max > self.price_min:
            raise DegenerateRangeError(f"price_max {self.price_max} must exceed price_min {self.price_min}")
        if not self.unit_high > self.unit_low:
            raise DegenerateRangeError(f"unit_high {self.unit_high} must exceed unit_low {self.unit_low}")

    def scale(self, price):
        return scale(self, price)

    def unscale(self, u):
        return unscale(self, u)


def scale(scaler: Scaler, price):
    """No clamping: prices outside the fitted range extrapolate linearly."""
    return scaler.unit_low + (price - scaler.price_min) * (scaler.unit_high - scaler.unit_low) / (
        scaler.price_max - scaler.price_min
    )


def unscale(scaler: Scaler, u):
    return scaler.price_min + (u - scaler.unit_low) * (scaler.price_max - scaler.price_min) / (
        scaler.unit_high - scaler.unit_low
    )


def fit_scaler(train: PriceSeries, unit_low: float = 0.1, unit_high: float = 0.9) -> Scaler:
    if len(train) < 2:
        raise DegenerateRangeError(f"{train.symbol}: need at least 2 observations to fit a scaler")
    lo, hi = float(train.prices.min()), float(train.prices.max())
    if hi == lo:
        raise DegenerateRangeError(f"{train.symbol}: constant price {lo}, cannot scale")
    return Scaler(lo, hi, unit_low, unit_high)


@dataclass(frozen=True, eq=False)
class WindowDataset:
    window: int
    samples: tuple[TrainSample, ...]
    scaler: Scaler
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.samples)


def build_windows(series: PriceSeries, window: int, scaler: Scaler) -> WindowDataset:
    """Each sample's input is the scaled prices at [i-window, i); target is the scaled price at i."""
    if window < 1:
        raise ConfigurationError("window must be at least 1")
    scaled = scale(scaler, series.prices)
    n = len(series) - window
    if n <= 0:
        X = np.empty((0, window))
        Y = np.empty((0, 1))
    else:
        X = np.lib.stride_tricks.sliding_window_view(scaled, window)[:n].copy()
        Y = scaled[window:].reshape(-1, 1).copy()
    samples = tuple(TrainSample(X[i], float(Y[i, 0])) for i in range(X.shape[0]))
    return WindowDataset(window, samples, scaler, X, Y)

