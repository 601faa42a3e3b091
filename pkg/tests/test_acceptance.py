"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is printed in the pytest terminal summary.
"""

import contextlib
import math
import time
from datetime import date
from pathlib import Path

import numpy as np
import pytest

from stockcast import bundle, cli, data, mlp, report, training
from stockcast.config import RatioSplit, TrainConfig
from stockcast.data import PriceSeries, Scaler
from stockcast.forecasting import ForecastRequest, detect_saturation, forecast_recursive, output_bounds, predict_next
from stockcast.mlp import Network, Topology, TrainSample
from stockcast.trading_calendar import TradingCalendar, next_trade_dates

from conftest import ACCEPTANCE_LINES
from finite_diff import numeric_gradient, relative_error
from helpers import sine_series, synthetic_series, weekdays, write_csv

CODES = ["600010", "600015", "600016", "600028", "600031", "600064", "600089"]
LEVELS = [2.7, 10.3, 9.0, 4.9, 5.3, 16.5, 8.9]


@contextlib.contextmanager
def criterion(number: int, title: str):
    t0 = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"[{number}] FAIL  {title} ({time.perf_counter() - t0:.1f}s): {exc}".splitlines()[0])
        raise
    note = detail.get("note", f"{time.perf_counter() - t0:.1f}s")
    ACCEPTANCE_LINES.append(f"[{number}] PASS  {title} [{note}]")


def write_reference_csvs(directory: Path) -> list[str]:
    paths = []
    for i, (code, level) in enumerate(zip(CODES, LEVELS)):
        p = directory / f"{code}.csv"
        write_csv(p, synthetic_series(code, 100 + i, start=date(2012, 1, 1), end=date(2016, 9, 14), level=level))
        paths.append(str(p))
    return paths


def test_1_gradient_oracle():
    with criterion(1, "backprop matches central differences (h=1e-5, rel 1e-5) on 50 random networks, < 10 s") as info:
        rng = np.random.default_rng(1)
        t0 = time.perf_counter()
        worst = 0.0
        checked = 0
        for k in range(50):
            sizes = (int(rng.integers(1, 6)), int(rng.integers(1, 9)), int(rng.integers(1, 9)), 1)
            if k % 5 == 0:
                sizes = (5, 8, 8, 1)
            net = mlp.init_network(Topology(sizes), seed=k)
            sample = TrainSample(rng.uniform(0.0, 1.0, sizes[0]), float(rng.uniform(0.1, 0.9)))
            gw, gb, _ = mlp.gradients(net, sample)
            analytic = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(gw, gb)])
            numeric = numeric_gradient(sizes, net.flat(), sample.input, sample.target, h=1e-5)
            err = relative_error(analytic, numeric).max()
            worst = max(worst, err)
            checked += analytic.size
        elapsed = time.perf_counter() - t0
        info["note"] = f"{checked} partials, worst rel err {worst:.1e}, {elapsed:.2f}s"
        assert worst < 1e-5
        assert elapsed < 10


def test_2_recursion_oracle():
    with criterion(2, "recursive forecast bit-equal to manual predict-populate loop, 20 models x horizons 1..25, < 5 s") as info:
        rng = np.random.default_rng(2)
        cal = TradingCalendar.weekdays()
        models = []
        for k in range(20):
            s = synthetic_series(f"M{k}", k, end=date(2012, 6, 30), level=float(rng.uniform(2, 20)))
            ds = data.build_windows(s, 5, data.fit_scaler(s))
            models.append((training.train_once(ds, TrainConfig(epochs=5, split=RatioSplit(0.8)), 1, s.symbol), s))
        t0 = time.perf_counter()
        for model, s in models:
            seed = s.tail(5)
            for h in range(1, 26):
                res = forecast_recursive(ForecastRequest(model, seed, tuple(next_trade_dates(cal, seed.last_date, h))))
                buf = seed.prices.tolist()
                manual = []
                for _ in range(h):
                    manual.append(predict_next(model, buf[len(buf) - 5:]))
                    buf = buf + [manual[-1]]
                assert res.prices == manual
        elapsed = time.perf_counter() - t0
        info["note"] = f"{elapsed:.2f}s"
        assert elapsed < 5


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    """Seven stocks, default epochs, five repetitions, forecast 2016-09-15..2016-10-11."""
    root = tmp_path_factory.mktemp("default")
    csvs = write_reference_csvs(root)
    out = root / "out"
    t0 = time.perf_counter()
    train_code = cli.main(["train", *csvs, "--out", str(out), "--reps", "5"])
    fc_code = cli.main(["forecast", *csvs, "--out", str(out), "--start", "2016-09-15", "--end", "2016-10-11"])
    return dict(out=out, csvs=csvs, codes=(train_code, fc_code), elapsed=time.perf_counter() - t0)


def test_3_pipeline_shape(default_run, capsys):
    with criterion(3, "7-stock train (reps 5, default epochs) + forecast yields 19 rows/stock and a 22-line table, < 5 min") as info:
        out = default_run["out"]
        assert default_run["codes"] == (0, 0)
        rows = [l.split(",") for l in (out / "forecast.csv").read_text().splitlines()[1:]]
        for code in CODES:
            mine = [r for r in rows if r[1] == code]
            assert len(mine) == 19
            assert mine[0][0] == "2016-09-15" and mine[-1][0] == "2016-10-11"
        table = (out / "table.txt").read_text().splitlines()
        assert len(table) == 3 + 19
        assert table[0].split("\t") == ["Stock", *CODES]
        assert [l.split("\t")[0] for l in table[1:3]] == ["ANN-model", "Test-ID"]
        assert all(len(l.split("\t")) == 1 + 7 for l in table)
        assert table[3].startswith("15-Sep-16\t") and table[-1].startswith("11-Oct-16\t")
        info["note"] = f"train+forecast {default_run['elapsed']:.1f}s"
        assert default_run["elapsed"] < 300


def test_4_constant_forecast():
    with criterion(4, "saturated output gives a constant forecast (< 0.005) and is flagged") as info:
        net = mlp.init_network(Topology(), 4)
        biases = list(net.biases)
        biases[-1] = np.array([30.0])
        net = Network(net.topology, net.weights, tuple(biases))
        model = training.TrainedModel(net, Scaler(4.5, 5.4), 0.0, 1, "Tsat", "600028")
        s = synthetic_series("600028", 7, start=date(2016, 1, 1), end=date(2016, 9, 14), level=4.9)
        res = forecast_recursive(ForecastRequest.from_series(model, s, next_trade_dates(TradingCalendar.weekdays(), s.last_date, 19)))
        spread = max(res.prices) - min(res.prices)
        lo, hi = output_bounds(model)
        info["note"] = f"spread {spread:.2g} at level {res.prices[0]:.4f}"
        assert spread < 0.005
        assert all(lo < p < hi for p in res.prices)
        diag = detect_saturation(res)
        assert diag.flagged and abs(diag.level - res.prices[0]) < 0.005


def test_5_learnability():
    with criterion(5, "noiseless sine (200 pts, window 5, defaults): retained model holdout MAPE < 2%, < 2 min") as info:
        t0 = time.perf_counter()
        s = sine_series(200)
        cfg = TrainConfig(split=RatioSplit(0.8))
        ds, holdout = training.prepare_dataset(s, cfg)
        best, errors = training.train_best_of_n(ds, cfg, s.symbol)
        m = report.compute_metrics(training.evaluate_next_day(best, holdout, s))
        elapsed = time.perf_counter() - t0
        info["note"] = f"retained {best.run_label}, holdout MAPE {m.mape:.3f}%, {elapsed:.1f}s"
        assert m.mape < 2.0
        assert elapsed < 120


def test_6_determinism(tmp_path):
    with criterion(6, "two pipeline runs produce byte-identical models, forecast CSV and table") as info:
        csvs = write_reference_csvs(tmp_path)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            args = ["pipeline", *csvs, "--out", str(out), "--epochs", "300", "--end", "2016-10-11"]
            assert cli.main(args) == 0
            outs.append(out)
        a, b = outs
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            if name == "manifest.txt":
                strip = lambda t: [l for l in t.splitlines() if not l.startswith("timestamp = ")]
                assert strip((a / name).read_text()) == strip((b / name).read_text())
            else:
                assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_7_best_of_five_retention(default_run, monkeypatch):
    with criterion(7, "retained run label is the argmin of logged errors, ties to lowest index") as info:
        for model_path in bundle.find_bundles([default_run["out"]]):
            model = bundle.load_bundle(model_path)
            errors = list(model.run_errors)
            assert len(errors) == 5
            assert model.run_index == errors.index(min(errors)) + 1
            assert model.training_mse == min(errors)
        cases = [[0.01, 0.02, 0.005, 0.03, 0.02], [0.02, 0.01, 0.03, 0.01, 0.04], [0.5] * 5]
        for errors in cases:
            fake = lambda ds, cfg, k, sym="", e=errors: training.TrainedModel(mlp.init_network(Topology(), k), Scaler(1, 2), e[k - 1], k, f"id{k}")
            monkeypatch.setattr(training, "train_once", fake)
            s = sine_series(30)
            best, logged = training.train_best_of_n(data.build_windows(s, 5, data.fit_scaler(s)), TrainConfig())
            assert best.run_label == f"T{errors.index(min(errors)) + 1}"


def test_8_data_hygiene():
    with criterion(8, "100 random holdout / post-seed mutations change neither scaler nor forecast") as info:
        rng = np.random.default_rng(8)
        s = synthetic_series("600016", 8, start=date(2012, 1, 1), end=date(2016, 9, 14), level=9.0)
        cfg = TrainConfig(epochs=30, repetitions=2)
        ds, holdout = training.prepare_dataset(s, cfg)
        model, _ = training.train_best_of_n(ds, cfg, s.symbol)
        # seed at the end of the training rows, so holdout rows are exactly the post-seed rows
        cutoff = holdout.dates[0]
        horizon = next_trade_dates(TradingCalendar.weekdays(), s.before(cutoff).last_date, 19)
        base = forecast_recursive(ForecastRequest.from_series(model, s.before(cutoff), horizon))
        n_train = len(s) - len(holdout)
        for _ in range(100):
            prices = s.prices.copy()
            idx = rng.integers(n_train, len(s), int(rng.integers(1, 40)))
            prices[idx] = rng.uniform(0.01, 1000.0, idx.size)
            mutated = PriceSeries(s.symbol, s.dates, prices)
            ds2, _ = training.prepare_dataset(mutated, cfg)
            assert ds2.scaler == ds.scaler
            assert np.array_equal(ds2.X, ds.X) and np.array_equal(ds2.Y, ds.Y)
            again = forecast_recursive(ForecastRequest.from_series(model, mutated.before(cutoff), horizon))
            assert again.predictions == base.predictions
