"""On-disk model bundles: ``<symbol>.model`` (network) plus ``<symbol>.scaler`` (sidecar)."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

from . import mlp
from .config import parse_key_values
from .data import Scaler
from .errors import ConfigurationError
from .training import TrainedModel


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_sidecar(model: TrainedModel, config_text: str = "") -> str:
    sc = model.scaler
    lines = [
        f"symbol = {model.symbol}",
        f"window = {model.window}",
        f"price_min = {sc.price_min!r}",
        f"price_max = {sc.price_max!r}",
        f"unit_low = {sc.unit_low!r}",
        f"unit_high = {sc.unit_high!r}",
        f"run_index = {model.run_index}",
        f"run_label = {model.run_label}",
        f"run_id = {model.run_id}",
        f"training_mse = {model.training_mse!r}",
        "run_errors = " + " ".join(repr(e) for e in model.run_errors),
    ]
    for line in config_text.splitlines():
        key, value = line.split("=", 1)
        lines.append(f"config.{key.strip()} = {value.strip()}")
    return "\n".join(lines) + "\n"


def parse_sidecar(text: str, source: str = "<sidecar>") -> dict:
    kv = parse_key_values(text, source)
    try:
        scaler = Scaler(float(kv["price_min"]), float(kv["price_max"]), float(kv["unit_low"]), float(kv["unit_high"]))
        fields = dict(
            symbol=kv["symbol"],
            window=int(kv["window"]),
            scaler=scaler,
            run_index=int(kv["run_index"]),
            run_id=kv["run_id"],
            training_mse=float(kv["training_mse"]),
            run_errors=tuple(float(v) for v in kv.get("run_errors", "").split()),
        )
    except KeyError as exc:
        raise ConfigurationError(f"{source}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None
    if kv.get("run_label", f"T{fields['run_index']}") != f"T{fields['run_index']}":
        raise ConfigurationError(f"{source}: run_label does not match run_index")
    if not math.isfinite(fields["training_mse"]):
        raise ConfigurationError(f"{source}: training_mse must be finite")
    return fields


def save_bundle(model: TrainedModel, directory, config_text: str = "") -> tuple[Path, Path]:
    directory = Path(directory)
    model_path = directory / f"{model.symbol}.model"
    scaler_path = directory / f"{model.symbol}.scaler"
    write_atomic(model_path, mlp.serialize(model.network))
    write_atomic(scaler_path, format_sidecar(model, config_text))
    return model_path, scaler_path


def load_bundle(model_path) -> TrainedModel:
    """Load ``X.model`` together with the ``X.scaler`` next to it."""
    model_path = Path(model_path)
    scaler_path = model_path.with_suffix(".scaler")
    net = mlp.deserialize(model_path.read_text(encoding="utf-8"))
    fields = parse_sidecar(scaler_path.read_text(encoding="utf-8"), str(scaler_path))
    if net.topology.n_inputs != fields["window"]:
        raise ConfigurationError(f"{model_path}: network takes {net.topology.n_inputs} inputs, sidecar window is {fields['window']}")
    return TrainedModel(network=net, **fields)


def find_bundles(paths) -> list[Path]:
    """Expand directories into their ``*.model`` files, sorted by name."""
    out = []
    for p in map(Path, paths):
        out.extend(sorted(p.glob("*.model")) if p.is_dir() else [p])
    return out
