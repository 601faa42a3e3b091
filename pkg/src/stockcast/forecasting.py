"""Next-day prediction and recursive predict-populate forecasting."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import mlp
from .data import PriceSeries, scale, unscale
from .errors import CoverageError, ShapeError

if TYPE_CHECKING:
    from .training import TrainedModel

SATURATION_TOLERANCE = 0.005


def predict_next(model: "TrainedModel", last_window_prices: Sequence[float]) -> float:
    prices = [float(p) for p in last_window_prices]
    if len(prices) != model.window:
        raise ShapeError(f"expected {model.window} prices, got {len(prices)}")
    # positivity is not enforced: recursive predictions may dip below zero for wide scalers
    if not all(math.isfinite(p) for p in prices):
        raise ValueError(f"prices must be finite: {prices}")
    scaled = np.array([scale(model.scaler, p) for p in prices])
    out, _ = mlp.forward(model.network, scaled)
    return float(unscale(model.scaler, out))


@dataclass(frozen=True)
class ForecastRequest:
    model: "TrainedModel"
    seed_history: PriceSeries
    horizon_dates: tuple[date, ...]

    def __post_init__(self):
        object.__setattr__(self, "horizon_dates", tuple(self.horizon_dates))
        if len(self.seed_history) != self.model.window:
            raise ShapeError(f"seed history has {len(self.seed_history)} prices, model window is {self.model.window}")
        last = self.seed_history.last_date
        for a, b in zip((last, *self.horizon_dates), self.horizon_dates):
            if not a < b:
                raise ValueError(f"horizon dates must be increasing and after {last}; got {b} after {a}")

    @classmethod
    def from_series(cls, model: "TrainedModel", series: PriceSeries, horizon_dates) -> "ForecastRequest":
        """Seed with the last ``window`` observations of ``series``."""
        if len(series) < model.window:
            raise CoverageError(f"{series.symbol}: {len(series)} prices available, {model.window} needed to seed a forecast")
        return cls(model, series.tail(model.window), tuple(horizon_dates))


@dataclass(frozen=True)
class ForecastResult:
    symbol: str
    predictions: tuple[tuple[date, float], ...]
    # per step, how many of the window inputs were earlier predictions
    predicted_inputs: tuple[int, ...]

    @property
    def dates(self) -> list[date]:
        return [d for d, _ in self.predictions]

    @property
    def prices(self) -> list[float]:
        return [p for _, p in self.predictions]


def forecast_recursive(request: ForecastRequest) -> ForecastResult:
    """Predict each horizon date from the previous ``window`` prices, feeding predictions back in."""
    window = request.model.window
    buffer = [float(p) for p in request.seed_history.prices]
    preds, used = [], []
    for k, day in enumerate(request.horizon_dates):
        value = predict_next(request.model, buffer[-window:])
        used.append(min(k, window))
        buffer.append(value)
        preds.append((day, value))
    return ForecastResult(request.seed_history.symbol, tuple(preds), tuple(used))


@dataclass(frozen=True)
class SaturationDiagnostic:
    symbol: str
    flagged: bool
    level: float
    spread: float

    def message(self) -> str:
        if self.flagged:
            return f"{self.symbol}: forecast is constant at {self.level:.2f} (spread {self.spread:.4g})"
        return f"{self.symbol}: forecast varies (spread {self.spread:.4g})"


def detect_saturation(result: ForecastResult, tolerance: float = SATURATION_TOLERANCE) -> SaturationDiagnostic:
    prices = result.prices
    if len(prices) < 2:
        raise ValueError("saturation check needs at least two predictions")
    lo, hi = min(prices), max(prices)
    return SaturationDiagnostic(result.symbol, hi - lo <= tolerance, (lo + hi) / 2, hi - lo)


def output_bounds(model: "TrainedModel") -> tuple[float, float]:
    """Open interval of prices the model can emit (sigmoid 0 and 1, unscaled)."""
    return float(unscale(model.scaler, 0.0)), float(unscale(model.scaler, 1.0))


def format_forecast_csv(results: Sequence[ForecastResult]) -> str:
    lines = ["date,symbol,predicted_close,predicted_inputs_used"]
    for res in results:
        for (day, price), used in zip(res.predictions, res.predicted_inputs):
            lines.append(f"{day.isoformat()},{res.symbol},{price!r},{used}")
    return "\n".join(lines) + "\n"
