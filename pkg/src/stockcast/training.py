"""Best-of-N training: several independently seeded networks, keep the lowest training error."""

from __future__ import annotations

import bisect
import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import date

from . import mlp
from .config import DateSplit, TrainConfig
from .data import PriceSeries, Scaler, WindowDataset, build_windows, fit_scaler, split_by_date, split_by_ratio
from .errors import CoverageError, TrainingDivergedError, TrainingFailedError
from .forecasting import predict_next

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    network: mlp.Network
    scaler: Scaler
    training_mse: float
    run_index: int
    run_id: str
    symbol: str = ""
    window: int = 5
    run_errors: tuple[float, ...] = field(default=())

    @property
    def run_label(self) -> str:
        return f"T{self.run_index}"


def run_id_for(config: TrainConfig, symbol: str, run_index: int) -> str:
    text = f"symbol = {symbol}\n{config.to_text()}run_index = {run_index}\nrun_seed = {config.run_seed(run_index)}\n"
    return "T" + hashlib.sha256(text.encode()).hexdigest()[:12]


def split_series(series: PriceSeries, config: TrainConfig) -> tuple[PriceSeries, PriceSeries]:
    if isinstance(config.split, DateSplit):
        return split_by_date(series, config.split.train_start, config.split.train_end)
    return split_by_ratio(series, config.split.train_fraction, config.window)


def prepare_dataset(series: PriceSeries, config: TrainConfig) -> tuple[WindowDataset, PriceSeries]:
    """Split, fit the scaler on the training rows only, and window them."""
    train, holdout = split_series(series, config)
    return build_windows(train, config.window, fit_scaler(train)), holdout


def train_once(dataset: WindowDataset, config: TrainConfig, run_index: int, symbol: str = "") -> TrainedModel:
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")
    net = mlp.init_network(config.topology, config.run_seed(run_index))
    net, history = mlp.train_epochs(net, dataset.X, dataset.Y, config.learning_rate, config.epochs)
    return TrainedModel(
        network=net,
        scaler=dataset.scaler,
        training_mse=float(history[-1]),
        run_index=run_index,
        run_id=run_id_for(config, symbol, run_index),
        symbol=symbol,
        window=dataset.window,
    )


def pick_best(errors) -> int:
    """Index (0-based) of the smallest finite error; ties go to the earliest."""
    best = None
    for i, e in enumerate(errors):
        if math.isfinite(e) and (best is None or e < errors[best]):
            best = i
    if best is None:
        raise TrainingFailedError("every training run diverged")
    return best


def train_best_of_n(
    dataset: WindowDataset, config: TrainConfig, symbol: str = "", workers: int = 1
) -> tuple[TrainedModel, list[float]]:
    """Train ``config.repetitions`` networks and keep the one with the lowest final-epoch MSE.

    Diverged runs are logged and recorded as ``inf``. Runs are independent, so
    ``workers > 1`` trains them on threads (the compiled kernel releases the
    GIL); the result does not depend on completion order.
    """
    if len(dataset) == 0:
        raise ValueError("cannot train on an empty dataset")

    def run(k: int):
        try:
            return train_once(dataset, config, k, symbol)
        except TrainingDivergedError as exc:
            log.warning("%s run T%d diverged at epoch %d", symbol, k, exc.epoch)
            return None

    indices = range(1, config.repetitions + 1)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            models = list(pool.map(run, indices))
    else:
        models = [run(k) for k in indices]
    errors = [m.training_mse if m is not None else math.inf for m in models]
    best = models[pick_best(errors)]
    return replace(best, run_errors=tuple(errors)), errors


@dataclass(frozen=True)
class NextDayPrediction:
    date: date
    predicted: float
    actual: float
    previous_actual: float


def evaluate_next_day(model: TrainedModel, holdout: PriceSeries, history: PriceSeries) -> list[NextDayPrediction]:
    """Teacher-forced one-step predictions for every holdout date.

    Inputs are the ``window`` actual prices in ``history`` dated strictly before
    each holdout date.
    """
    dates = history.dates
    prices = history.prices.tolist()
    out = []
    for day, actual in zip(holdout.dates, holdout.prices.tolist()):
        k = bisect.bisect_left(dates, day)
        if k < model.window:
            raise CoverageError(f"{holdout.symbol}: only {k} prices before {day}, need {model.window}")
        window = prices[k - model.window:k]
        out.append(NextDayPrediction(day, predict_next(model, window), actual, window[-1]))
    return out
