"""Command-line entry point: ``stockcast {train,test,forecast,pipeline}``."""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import replace
from datetime import date, datetime, timezone
from pathlib import Path

from . import backend, bundle, report
from .config import TrainConfig, load_config, parse_key_values, parse_split
from .data import read_price_csv
from .errors import ConfigurationError, CoverageError, StockcastError
from .forecasting import ForecastRequest, detect_saturation, forecast_recursive, format_forecast_csv
from .trading_calendar import TradingCalendar, load_holidays, next_trade_dates, trade_dates_between
from .training import evaluate_next_day, prepare_dataset, split_series, train_best_of_n

SEED_ENV = "STOCKCAST_SEED"


class Manifest:
    def __init__(self, command: str):
        self.lines = [f"command = {command}"]
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def add(self, key: str, value) -> None:
        line = f"{key} = {value}"
        if line not in self.lines:
            self.lines.append(line)

    def add_input(self, symbol: str, path: Path) -> None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.add(f"input.{symbol}", f"sha256:{digest} {path}")

    def write(self, out: Path) -> Path:
        path = out / "manifest.txt"
        bundle.write_atomic(path, "\n".join([*self.lines, f"timestamp = {self.timestamp}"]) + "\n")
        return path


def _err(symbol: str, msg) -> None:
    print(f"error: {symbol}: {msg}", file=sys.stderr, flush=True)


def resolve_config(args) -> TrainConfig:
    cfg = TrainConfig()
    seed_in_file = False
    if args.config:
        cfg = load_config(args.config)
        seed_in_file = "seed" in parse_key_values(Path(args.config).read_text(encoding="utf-8"))
    seed = args.seed
    if seed is None and not seed_in_file and os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV} must be an integer") from None
    return cfg.with_overrides(
        base_seed=seed,
        repetitions=args.reps,
        epochs=args.epochs,
        learning_rate=args.rate,
        window=args.window,
        price_column=args.price_column,
        holidays=args.holidays,
        split=parse_split(args.split) if args.split else None,
    )


def _symbol(path) -> str:
    return Path(path).stem


def run_train(args, cfg: TrainConfig, out: Path, manifest: Manifest) -> int:
    failures = 0
    manifest.add("backend", backend.name)
    for line in cfg.to_text().splitlines():
        manifest.add(f"config.{line.split(' = ', 1)[0]}", line.split(" = ", 1)[1])
    for path in map(Path, args.csv):
        symbol = _symbol(path)
        try:
            series = read_price_csv(path, symbol, cfg.price_column)
            dataset, _ = prepare_dataset(series, cfg)
            best, errors = train_best_of_n(dataset, cfg, symbol, workers=args.workers)
            for k, e in enumerate(errors, start=1):
                print(f"{symbol}: run T{k} training_mse = {e!r}", flush=True)
            model_path, scaler_path = bundle.save_bundle(best, out, cfg.to_text())
            manifest.add_input(symbol, path)
            manifest.add(f"run_id.{symbol}", f"{best.run_label} {best.run_id}")
            manifest.add(f"output.{symbol}", f"{model_path.name} {scaler_path.name}")
            print(f"{symbol}: retained {best.run_label} ({best.run_id}) training_mse = {best.training_mse!r}", flush=True)
        except (StockcastError, OSError) as exc:
            _err(symbol, exc)
            failures += 1
            if args.strict:
                break
    return failures


def _pair_bundles(args, out: Path) -> dict[str, Path]:
    paths = bundle.find_bundles(args.models or [out])
    if len(paths) == 1 and len(args.csv) == 1 and args.models and not Path(args.models[0]).is_dir():
        return {_symbol(args.csv[0]): paths[0]}
    return {p.stem: p for p in paths}


def _load_for(symbol: str, pairs: dict[str, Path]):
    if symbol not in pairs:
        raise ConfigurationError(f"no model bundle for symbol {symbol}")
    model = bundle.load_bundle(pairs[symbol])
    if model.symbol != symbol:
        raise ConfigurationError(f"bundle {pairs[symbol]} is for {model.symbol}, data is for {symbol}")
    return model


def run_test(args, cfg: TrainConfig, out: Path, manifest: Manifest) -> int:
    failures = 0
    rows = []
    pairs = _pair_bundles(args, out)
    for path in map(Path, args.csv):
        symbol = _symbol(path)
        try:
            model = _load_for(symbol, pairs)
            series = read_price_csv(path, symbol, cfg.price_column)
            _, holdout = split_series(series, cfg)
            if len(holdout) == 0:
                raise ConfigurationError(f"holdout after split {cfg.split} is empty")
            metrics = report.compute_metrics(evaluate_next_day(model, holdout, series))
            rows.append((symbol, metrics))
            sys.stdout.write(metrics.to_text(prefix=f"{symbol}."))
            sys.stdout.flush()
        except (StockcastError, OSError) as exc:
            _err(symbol, exc)
            failures += 1
            if args.strict:
                break
    if rows:
        bundle.write_atomic(out / "metrics.txt", "".join(m.to_text(prefix=f"{s}.") for s, m in rows))
        bundle.write_atomic(out / "metrics.csv", report.metrics_csv(rows))
        manifest.add("output.metrics", "metrics.txt metrics.csv")
    return failures


def _holidays(cfg: TrainConfig):
    return load_holidays(cfg.holidays) if cfg.holidays else frozenset()


def run_forecast(args, cfg: TrainConfig, out: Path, manifest: Manifest) -> int:
    failures = 0
    if args.end is None and args.count is None:
        raise ConfigurationError("forecast needs --end or --count")
    pairs = _pair_bundles(args, out)
    loaded = []
    for path in map(Path, args.csv):
        symbol = _symbol(path)
        try:
            model = _load_for(symbol, pairs)
            series = read_price_csv(path, symbol, cfg.price_column)
            seed = series.before(args.start) if args.start else series
            if len(seed) < model.window:
                raise CoverageError(f"{len(seed)} prices before the horizon, {model.window} needed")
            loaded.append((symbol, model, series, seed))
        except (StockcastError, OSError) as exc:
            _err(symbol, exc)
            failures += 1
            if args.strict:
                return failures
    if not loaded:
        return failures

    calendar = TradingCalendar.from_series(*(s for _, _, s, _ in loaded), holidays=_holidays(cfg))
    after = max(seed.last_date for _, _, _, seed in loaded)
    if args.count is not None:
        shared = next_trade_dates(calendar, after, args.count)
    else:
        shared = trade_dates_between(calendar, after, args.end)
    if not shared:
        print("warning: forecast horizon is empty; nothing to predict", file=sys.stderr)
        bundle.write_atomic(out / "forecast.csv", format_forecast_csv([]))
        manifest.add("output.forecast", "forecast.csv")
        return failures

    results, models = [], []
    for symbol, model, _, seed in loaded:
        try:
            horizon = trade_dates_between(calendar, seed.last_date, shared[-1])
            res = forecast_recursive(ForecastRequest.from_series(model, seed, horizon))
        except StockcastError as exc:
            _err(symbol, exc)
            failures += 1
            if args.strict:
                return failures
            continue
        results.append(res)
        models.append(model)
        manifest.add(f"run_id.{symbol}", f"{model.run_label} {model.run_id}")
        if len(res.predictions) >= 2:
            diag = detect_saturation(res)
            if diag.flagged:
                print(f"diagnostic: {diag.message()}", flush=True)

    bundle.write_atomic(out / "forecast.csv", format_forecast_csv(results))
    manifest.add("output.forecast", "forecast.csv")
    if results:
        keep = set(shared)
        trimmed = [replace(r, predictions=tuple(p for p in r.predictions if p[0] in keep),
                           predicted_inputs=tuple(u for p, u in zip(r.predictions, r.predicted_inputs) if p[0] in keep))
                   for r in results]
        text = report.render_table(report.table_from_results(trimmed, models))
        bundle.write_atomic(out / "table.txt", text)
        manifest.add("output.table", "table.txt")
        sys.stdout.write(text)
    print(f"forecast: {len(results)} stocks x {len(shared)} dates ({shared[0]} .. {shared[-1]})", flush=True)
    return failures


def _iso(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("csv", nargs="+", help="daily price CSV files; the file stem is the stock symbol")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--seed", type=int, help=f"base seed (falls back to ${SEED_ENV})")
    common.add_argument("--reps", type=int, help="training repetitions per stock")
    common.add_argument("--epochs", type=int)
    common.add_argument("--rate", type=float, help="learning rate")
    common.add_argument("--window", type=int, help="number of prior prices fed to the network")
    common.add_argument("--price-column", help="CSV price column (default Close)")
    common.add_argument("--split", help="train split: YYYY-MM-DD..YYYY-MM-DD or a fraction like 0.8")
    common.add_argument("--holidays", help="file of YYYY-MM-DD holidays excluded from future trade dates")
    common.add_argument("--models", nargs="+", help="model bundle files or directories (default: --out)")
    common.add_argument("--start", type=_iso, help="first forecast date; only prices before it seed the forecast")
    common.add_argument("--end", type=_iso, help="last forecast date")
    common.add_argument("--count", type=int, help="number of future trade dates to forecast")
    common.add_argument("--workers", type=int, default=1, help="threads for the repetitions of one stock")
    common.add_argument("--strict", action="store_true", help="stop at the first failing stock")

    parser = argparse.ArgumentParser(prog="stockcast", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train best-of-N networks per stock")
    sub.add_parser("test", parents=[common], help="next-day accuracy on the holdout rows")
    sub.add_parser("forecast", parents=[common], help="recursive multi-day forecast and table")
    sub.add_parser("pipeline", parents=[common], help="train, test and forecast in one run")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.count is not None and args.count < 0:
        print("error: --count must be non-negative", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        cfg = resolve_config(args)
    except (StockcastError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(args.command)
    failures = 0
    try:
        if args.command in ("train", "pipeline"):
            failures += run_train(args, cfg, out, manifest)
        if args.command == "test" or (args.command == "pipeline" and not (failures and args.strict)):
            failures += run_test(args, cfg, out, manifest)
        if args.command == "forecast" or (args.command == "pipeline" and (args.end or args.count is not None)
                                           and not (failures and args.strict)):
            failures += run_forecast(args, cfg, out, manifest)
    except (StockcastError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        failures += 1
    manifest.write(out)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
