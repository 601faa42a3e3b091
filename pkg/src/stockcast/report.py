"""Accuracy metrics and tab-separated prediction tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .errors import MetricError, ShapeError

_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


def _pairs(pairs) -> list[tuple[float, float]]:
    pairs = [(float(p), float(a)) for p, a in pairs]
    if not pairs:
        raise MetricError("metrics need at least one (predicted, actual) pair")
    return pairs


def mape(pairs: Iterable[tuple[float, float]]) -> float:
    """Mean absolute percentage error, in percent."""
    pairs = _pairs(pairs)
    if any(a == 0 for _, a in pairs):
        raise MetricError("MAPE is undefined when an actual price is zero")
    return 100.0 * math.fsum(abs(p - a) / abs(a) for p, a in pairs) / len(pairs)


def rmse(pairs: Iterable[tuple[float, float]]) -> float:
    pairs = _pairs(pairs)
    return math.sqrt(math.fsum((p - a) ** 2 for p, a in pairs) / len(pairs))


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def directional_accuracy(records: Iterable[tuple[float, float, float]]) -> float:
    """Share of (previous_actual, predicted, actual) records whose predicted move has the actual move's sign.

    A flat day only matches a flat prediction.
    """
    records = list(records)
    if not records:
        raise MetricError("directional accuracy needs at least one record")
    hits = sum(_sign(p - prev) == _sign(a - prev) for prev, p, a in records)
    return hits / len(records)


@dataclass(frozen=True)
class MetricSet:
    mape: float
    rmse: float
    directional_accuracy: float
    n: int

    def to_text(self, prefix: str = "") -> str:
        return "".join(
            f"{prefix}{k} = {v!r}\n"
            for k, v in (("n", self.n), ("mape", self.mape), ("rmse", self.rmse), ("directional_accuracy", self.directional_accuracy))
        )


def compute_metrics(predictions) -> MetricSet:
    """``predictions`` are objects with ``predicted``, ``actual`` and ``previous_actual``."""
    predictions = list(predictions)
    pairs = [(r.predicted, r.actual) for r in predictions]
    return MetricSet(
        mape=mape(pairs),
        rmse=rmse(pairs),
        directional_accuracy=directional_accuracy((r.previous_actual, r.predicted, r.actual) for r in predictions),
        n=len(pairs),
    )


def metrics_csv(rows: Sequence[tuple[str, MetricSet]]) -> str:
    lines = ["symbol,n,mape,rmse,directional_accuracy"]
    lines += [f"{sym},{m.n},{m.mape!r},{m.rmse!r},{m.directional_accuracy!r}" for sym, m in rows]
    return "\n".join(lines) + "\n"


def round_half_up(value: float, places: int = 2) -> str:
    """Decimal rounding of the shortest repr, so 4.925 renders as 4.93."""
    quantum = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP))


def format_table_date(day: date) -> str:
    return f"{day.day:02d}-{_MONTHS[day.month - 1]}-{day.year % 100:02d}"


@dataclass(frozen=True)
class StockColumn:
    symbol: str
    run_label: str
    run_id: str
    prices: tuple[float, ...] = field(default=())


@dataclass(frozen=True)
class PredictionTable:
    dates: tuple[date, ...]
    columns: tuple[StockColumn, ...]


def render_table(table: PredictionTable) -> str:
    if not table.dates:
        raise ShapeError("prediction table has no dates")
    if not table.columns:
        raise ShapeError("prediction table has no stocks")
    for col in table.columns:
        if len(col.prices) != len(table.dates):
            raise ShapeError(f"{col.symbol}: {len(col.prices)} prices for {len(table.dates)} dates")
    rows = [
        ["Stock", *(c.symbol for c in table.columns)],
        ["ANN-model", *(c.run_label for c in table.columns)],
        ["Test-ID", *(c.run_id for c in table.columns)],
    ]
    for i, day in enumerate(table.dates):
        rows.append([format_table_date(day), *(round_half_up(c.prices[i]) for c in table.columns)])
    return "\n".join("\t".join(r) for r in rows) + "\n"


def table_from_results(results, models) -> PredictionTable:
    """Assemble a table from forecast results and the models that produced them, column order preserved."""
    results = list(results)
    if not results:
        raise ShapeError("no forecasts to tabulate")
    dates = tuple(results[0].dates)
    cols = []
    for res, model in zip(results, models):
        if tuple(res.dates) != dates:
            raise ShapeError(f"{res.symbol}: forecast dates differ from {results[0].symbol}")
        cols.append(StockColumn(res.symbol, model.run_label, model.run_id, tuple(res.prices)))
    return PredictionTable(dates, tuple(cols))
