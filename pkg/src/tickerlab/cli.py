"""``tickerlab`` command line.

Exit codes: 0 success, 1 data error, 2 configuration error, 3 training
divergence.  ``--config FILE`` reads ``key = value`` lines whose keys are the
long option names (``epochs = 50``, ``kalman-r = 0.5``); explicit flags win.
"""
from __future__ import annotations

import argparse
import configparser
import datetime as dt
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, TickerlabError
from .kalman import KalmanConfig
from .market_data import fetch_daily, resolve_endpoint, serialize_csv
from .models import ModelSpec, TrainConfig, save
from .preprocess import SplitSpec

log = logging.getLogger("tickerlab")


def _date(text):
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_global(p):
    p.add_argument("--seed", type=int, default=0, help="RNG seed for weights and shuffling")
    p.add_argument("--config", type=Path, help="key = value file mirroring the long options")
    p.add_argument("--offline", action="store_true", help="use bundled fixture recordings only")
    p.add_argument("--endpoint", help="chart endpoint base URL (env TICKERLAB_ENDPOINT)")
    p.add_argument("--adjusted", action="store_true", help="model Adj Close instead of Close")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_range(p):
    p.add_argument("--start", type=_date, default=dt.date(2011, 1, 1))
    p.add_argument("--end", type=_date, default=dt.date(2021, 1, 1))
    p.add_argument("--train-fraction", type=float, default=0.75)


def _add_model(p):
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--units", type=int, default=64)
    p.add_argument("--units2", type=int, default=64, help="second layer of DualLstm")
    p.add_argument("--filters", type=int, default=64)
    p.add_argument("--kernel-width", type=int, default=2)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--validation-fraction", type=float, default=0.1)
    p.add_argument("--clip-norm", type=float, default=1.0)


def _add_kalman(p):
    p.add_argument("--kalman-r", type=float, default=None,
                   help="measurement variance (default 1e-4 * mean training price^2)")
    p.add_argument("--kalman-alpha", type=float, default=1.0, help="process variance scale")
    p.add_argument("--kalman-window", type=int, default=3, help="local variance window")
    p.add_argument("--kalman-p0", type=float, default=0.0, help="initial state variance")


def build_parser():
    parser = argparse.ArgumentParser(prog="tickerlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="download (or replay) daily bars as CSV")
    _add_global(p)
    p.add_argument("--symbol", required=True)
    p.add_argument("--start", type=_date, default=dt.date(2011, 1, 1))
    p.add_argument("--end", type=_date, default=dt.date(2021, 1, 1))
    p.add_argument("--out", type=Path, help="output CSV (default: standard output)")

    p = sub.add_parser("compare", help="evaluate Kalman and LSTM models per symbol")
    _add_global(p)
    _add_range(p)
    _add_model(p)
    _add_kalman(p)
    p.add_argument("--symbols", nargs="+", default=["MSFT", "TSLA"])
    p.add_argument("--models", nargs="*", default=list(ex.DEFAULT_MODELS),
                   help="architectures (SingleLstm DualLstm BiLstm CnnLstm or single/dual/bi/cnn)")
    p.add_argument("--kalman", type=_bool, default=True, help="include the Kalman filter")
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--plots", action="store_true", help="also write SVG/CSV plots per row")
    p.add_argument("--save-models", action="store_true", help="save every trained model")

    p = sub.add_parser("train", help="train one architecture and save it")
    _add_global(p)
    _add_range(p)
    _add_model(p)
    p.add_argument("--symbol", required=True)
    p.add_argument("--model", default="BiLstm", help="architecture")
    p.add_argument("--out", type=Path, required=True, help="model file (.tklb)")

    p = sub.add_parser("transfer", help="evaluate a saved model on another symbol")
    _add_global(p)
    _add_range(p)
    p.add_argument("--model", type=Path, required=True, help="saved model file")
    p.add_argument("--symbol", required=True, help="target symbol")
    p.add_argument("--out-dir", type=Path, help="write the prediction plot here")

    p = sub.add_parser("plot", help="train/test/prediction overlay for one algorithm")
    _add_global(p)
    _add_range(p)
    _add_model(p)
    _add_kalman(p)
    p.add_argument("--symbol", required=True)
    p.add_argument("--algorithm", default="CnnLstm", help="Kalman or an architecture")
    p.add_argument("--model", type=Path, help="use a saved model instead of training")
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return parser


def _apply_config_file(parser, argv):
    """Re-parse with defaults taken from ``--config``."""
    args = parser.parse_args(argv)
    if not args.config:
        return args
    cp = configparser.ConfigParser()
    try:
        cp.read_string("[tickerlab]\n" + args.config.read_text(encoding="utf-8"))
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in cp["tickerlab"].items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
        try:
            if action.nargs in ("+", "*"):
                value = [action.type(v) if action.type else v for v in raw.split()]
            elif action.const is True and action.nargs == 0:
                value = _bool(raw)
            else:
                value = action.type(raw) if action.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from None
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _experiment_config(args, models=(), include_kalman=False, symbols=None):
    try:
        spec = ModelSpec(window=getattr(args, "window", 3), units=getattr(args, "units", 64),
                         units2=getattr(args, "units2", 64),
                         filters=getattr(args, "filters", 64),
                         kernel_width=getattr(args, "kernel_width", 2))
        train = TrainConfig(getattr(args, "epochs", 100), getattr(args, "lr", 1e-3),
                            getattr(args, "batch_size", 32), args.seed,
                            getattr(args, "patience", 10),
                            getattr(args, "validation_fraction", 0.1),
                            getattr(args, "clip_norm", 1.0))
        kalman = KalmanConfig(getattr(args, "kalman_r", None), getattr(args, "kalman_alpha", 1.0),
                              getattr(args, "kalman_window", 3), getattr(args, "kalman_p0", 0.0))
        return ex.ExperimentConfig(
            symbols=tuple(symbols or [args.symbol]), start=args.start, end=args.end,
            split=SplitSpec(args.train_fraction), models=tuple(models), model_template=spec,
            train=train, kalman=kalman, include_kalman=include_kalman,
            endpoint=args.endpoint, offline=args.offline, adjusted=args.adjusted)
    except ValueError as exc:
        if isinstance(exc, TickerlabError):
            raise
        raise ConfigError(str(exc)) from None


def _safe(name):
    return name.replace("^", "").replace("/", "_")


def cmd_fetch(args):
    series = fetch_daily(args.symbol, args.start, args.end,
                         endpoint=resolve_endpoint(args.endpoint, args.offline))
    text = serialize_csv(series)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
        print(f"{args.symbol}: {len(series)} bars -> {args.out}")
    else:
        sys.stdout.write(text)


def cmd_compare(args):
    config = _experiment_config(args, args.models, args.kalman, args.symbols)
    report = ex.run_comparison(config)
    paths = ex.write_report(report, args.out_dir)
    print(ex.format_table(report))
    print(f"\nreport: {paths['csv']}  {paths['json']}")
    for (symbol, algorithm), pred in report.predictions.items():
        data = report.data[symbol]
        if args.plots:
            ex.emit_plot(data.dates, data.prices, pred, data.n_train,
                         args.out_dir / f"{_safe(symbol)}_{algorithm}", f"{algorithm} / {symbol}")
        if args.save_models and algorithm != ex.KALMAN:
            save(report.models[(symbol, algorithm)],
                 args.out_dir / f"{_safe(symbol)}_{algorithm}.tklb")


def cmd_train(args):
    config = _experiment_config(args, [args.model])
    report = ex.run_comparison(config)
    row = report.rows[0]
    save(report.models[(row.symbol, row.algorithm)], args.out)
    m = row.metrics
    print(f"{row.algorithm} on {row.symbol}: RMSE {m.rmse:.4f}  MAE {m.mae:.4f}  "
          f"R² {m.r_squared:.4f}  -> {args.out}")


def cmd_transfer(args):
    config = _experiment_config(args, [], include_kalman=True)
    result = ex.run_transfer(args.model, args.symbol, config)
    m = result.metrics
    print(f"{result.model.spec.architecture} -> {args.symbol}: RMSE {m.rmse:.4f}  "
          f"MAE {m.mae:.4f}  R² {m.r_squared:.4f}  n {m.n}")
    if args.out_dir:
        d = result.data
        ex.emit_plot(d.dates, d.prices, result.predictions, d.n_train,
                     args.out_dir / f"transfer_{_safe(args.symbol)}_{result.model.spec.architecture}",
                     f"{result.model.spec.architecture} transferred to {args.symbol}")


def cmd_plot(args):
    if args.model:
        config = _experiment_config(args, [], include_kalman=True)
        result = ex.run_transfer(args.model, args.symbol, config)
        data, pred, name = result.data, result.predictions, result.model.spec.architecture
    else:
        is_kalman = args.algorithm.lower() == "kalman"
        config = _experiment_config(args, [] if is_kalman else [args.algorithm], is_kalman)
        report = ex.run_comparison(config)
        row = report.rows[0]
        data, pred, name = report.data[row.symbol], report.predictions[(row.symbol,
                                                                        row.algorithm)], row.algorithm
    svg, csv_path = ex.emit_plot(data.dates, data.prices, pred, data.n_train,
                                 args.out_dir / f"{_safe(args.symbol)}_{name}", f"{name} / {args.symbol}")
    print(f"{svg}\n{csv_path}")


COMMANDS = {"fetch": cmd_fetch, "compare": cmd_compare, "train": cmd_train,
            "transfer": cmd_transfer, "plot": cmd_plot}


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except TickerlabError as exc:
        print(f"tickerlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
