"""Training configuration and the flat ``key = value`` config file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path

from .errors import ConfigurationError
from .mlp import Topology


@dataclass(frozen=True)
class DateSplit:
    train_start: date
    train_end: date

    def __str__(self) -> str:
        return f"{self.train_start.isoformat()}..{self.train_end.isoformat()}"


@dataclass(frozen=True)
class RatioSplit:
    train_fraction: float

    def __str__(self) -> str:
        return repr(self.train_fraction)


def parse_split(text: str) -> DateSplit | RatioSplit:
    """``YYYY-MM-DD..YYYY-MM-DD`` for a date range, or a fraction such as ``0.8``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        try:
            split = DateSplit(date.fromisoformat(a.strip()), date.fromisoformat(b.strip()))
        except ValueError:
            raise ConfigurationError(f"bad date split {text!r}") from None
        if split.train_start > split.train_end:
            raise ConfigurationError(f"split start after end: {text!r}")
        return split
    try:
        frac = float(text)
    except ValueError:
        raise ConfigurationError(f"split must be a date range or a fraction, got {text!r}") from None
    if not 0.0 < frac < 1.0:
        raise ConfigurationError(f"split fraction must lie in (0, 1), got {frac}")
    return RatioSplit(frac)


DEFAULT_SPLIT = DateSplit(date(2012, 1, 1), date(2015, 12, 31))


@dataclass(frozen=True)
class TrainConfig:
    topology: Topology = field(default_factory=Topology)
    learning_rate: float = 0.1
    epochs: int = 5000
    repetitions: int = 5
    base_seed: int = 0
    split: DateSplit | RatioSplit = DEFAULT_SPLIT
    window: int = 5
    price_column: str = "Close"
    holidays: str | None = None

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ConfigurationError("rate must be positive and finite")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be at least 1")
        if self.repetitions < 1:
            raise ConfigurationError("repetitions must be at least 1")
        if self.base_seed < 0:
            raise ConfigurationError("seed must be non-negative")
        if self.window < 1:
            raise ConfigurationError("window must be at least 1")
        if self.topology.n_inputs != self.window:
            raise ConfigurationError(f"topology {self.topology} takes {self.topology.n_inputs} inputs but window is {self.window}")
        if self.topology.n_outputs != 1:
            raise ConfigurationError("the forecasting network must have a single output unit")

    def run_seed(self, run_index: int) -> int:
        return self.base_seed * 1000 + run_index

    def to_text(self) -> str:
        """Canonical rendering; also the input of run-id digests."""
        lines = [
            f"topology = {self.topology}",
            f"rate = {self.learning_rate!r}",
            f"epochs = {self.epochs}",
            f"repetitions = {self.repetitions}",
            f"seed = {self.base_seed}",
            f"window = {self.window}",
            f"split = {self.split}",
            f"price_column = {self.price_column}",
        ]
        if self.holidays:
            lines.append(f"holidays = {self.holidays}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **changes) -> "TrainConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        if "window" in changes and "topology" not in changes:
            sizes = self.topology.layer_sizes
            changes["topology"] = Topology((changes["window"], *sizes[1:]))
        return replace(self, **changes)


_KEYS = {
    "topology": ("topology", Topology.parse),
    "rate": ("learning_rate", float),
    "learning_rate": ("learning_rate", float),
    "epochs": ("epochs", int),
    "repetitions": ("repetitions", int),
    "reps": ("repetitions", int),
    "seed": ("base_seed", int),
    "window": ("window", int),
    "split": ("split", parse_split),
    "price_column": ("price_column", str),
    "holidays": ("holidays", str),
}


def parse_key_values(text: str, source: str = "<text>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def parse_config(text: str, source: str = "<text>", base: TrainConfig | None = None) -> TrainConfig:
    values = parse_key_values(text, source)
    changes = {}
    for key, value in values.items():
        if key not in _KEYS:
            raise ConfigurationError(f"{source}: unknown key {key!r}")
        attr, conv = _KEYS[key]
        try:
            changes[attr] = conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(f"{source}: bad value for {key}: {exc}") from None
    cfg = base or TrainConfig()
    if "window" in changes and "topology" not in changes:
        return cfg.with_overrides(**changes)
    try:
        return replace(cfg, **changes)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None


def load_config(path) -> TrainConfig:
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), str(path))
