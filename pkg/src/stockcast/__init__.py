"""Sigmoid MLP stock-price forecasting: best-of-N training and recursive multi-day prediction."""

from .backend import name as backend_name
from .config import TrainConfig
from .data import PriceSeries, Scaler, parse_price_csv, read_price_csv
from .forecasting import ForecastRequest, ForecastResult, detect_saturation, forecast_recursive, predict_next
from .mlp import Network, Topology, forward, init_network
from .training import TrainedModel, evaluate_next_day, train_best_of_n, train_once

__version__ = "0.1.0"

__all__ = [
    "ForecastRequest",
    "ForecastResult",
    "Network",
    "PriceSeries",
    "Scaler",
    "Topology",
    "TrainConfig",
    "TrainedModel",
    "backend_name",
    "detect_saturation",
    "evaluate_next_day",
    "forecast_recursive",
    "forward",
    "init_network",
    "parse_price_csv",
    "predict_next",
    "read_price_csv",
    "train_best_of_n",
    "train_once",
]
