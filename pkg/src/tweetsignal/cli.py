"""Command-line entry point: ``tweetsignal <command> [--config run.toml] [flags]``.

Every key of the TOML config (sections are flattened, so ``[model] k = 1000``
and top-level ``k = 1000`` are the same) can be overridden by the matching
flag.  Each output file carries the config hash and seed: CSV files in a
leading ``#`` comment, JSON files in a ``provenance`` field, SVG files in an
XML comment and JSON Lines files in a ``.meta.json`` sidecar.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import backtest as B
from . import stats
from .ingest import IngestError, read_bars, read_tweets, select_for_stock, spam_filter
from .labeler import PriceLookupError, as_index, label_all, read_jsonl, split, write_jsonl
from .lexicon import LexiconError, classify_lexicon, load_lexicon, skew_report
from .models import ConvergenceError
from .pipeline import TextClassifier
from .select import RANKERS
from .sweeps import DEFAULT_SIZES, feature_sweep, peak_window, window_csv, window_sweep
from .synth import SynthSpec, generate, spec_to_dict
from .vectorizer import STOCK_FEATURES

logger = logging.getLogger("tweetsignal")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
BUY_SKEW_FLAG = 0.9  # share of Buy orders above which a report is flagged as one-sided


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass
class RunConfig:
    ticker: str = ""
    tweets: str = ""
    bars: str = ""
    benchmark_bars: str = ""
    labeled: str = ""
    model_file: str = ""
    lexicon: str = ""
    lexicon_positive: str = ""
    lexicon_negative: str = ""
    model: str = "mnb"
    ranker: str = "cs"
    k: int = 5000
    alpha: float = 1.0
    lam: float = 1.0
    threshold: float = 0.5
    stock_features: list = field(default_factory=list)
    train_frac: float = 0.8
    window_months: int = 12
    validation_month: str = ""
    test_start: str = ""
    test_end: str = ""
    seed: int = 0
    fee_rate: float = 0.0096
    margin: float = 0.10
    out: str = "out"

    def validate(self) -> None:
        if self.model not in ("mnb", "lr"):
            raise ConfigError(f"model must be 'mnb' or 'lr', got {self.model!r}")
        if self.ranker not in RANKERS:
            raise ConfigError(f"ranker must be one of {RANKERS}, got {self.ranker!r}")
        bad = [f for f in self.stock_features if f not in STOCK_FEATURES]
        if bad:
            raise ConfigError(f"unknown stock feature(s) {bad}; choose from {STOCK_FEATURES}")
        if self.k <= 0:
            raise ConfigError("k must be positive")
        if self.alpha <= 0 or self.lam <= 0:
            raise ConfigError("alpha and lambda must be positive")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        if not 0.0 < self.train_frac < 1.0:
            raise ConfigError("train_frac must lie in (0, 1)")
        if not 1 <= self.window_months <= 12:
            raise ConfigError("window_months must lie in 1..12")
        if bool(self.test_start) != bool(self.test_end):
            raise ConfigError("give both test_start and test_end, or neither")
        if self.test_start:
            lo, hi = self.test_period()
            if hi < lo:
                raise ConfigError("test_end precedes test_start")
        if self.validation_month:
            self.month()

    def test_period(self) -> tuple[date, date] | None:
        if not self.test_start:
            return None
        try:
            return date.fromisoformat(self.test_start), date.fromisoformat(self.test_end)
        except ValueError as exc:
            raise ConfigError(f"bad test period: {exc}") from exc

    def month(self) -> tuple[int, int]:
        try:
            y, m = self.validation_month.split("-")
            ym = (int(y), int(m))
        except ValueError as exc:
            raise ConfigError(f"validation_month must look like 2017-01, got {self.validation_month!r}") from exc
        if not 1 <= ym[1] <= 12:
            raise ConfigError(f"bad month in {self.validation_month!r}")
        return ym

    def hash(self) -> str:
        d = dataclasses.asdict(self)
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def provenance(self) -> dict:
        return {"config_hash": self.hash(), "seed": self.seed}

    def require(self, *names: str) -> None:
        for name in names:
            path = getattr(self, name)
            if not path:
                raise ConfigError(f"missing required setting '{name}'")
            if not os.path.exists(path):
                raise ConfigError(f"{name}: no such file {path!r}")


_ALIASES = {"lambda": "lam", "benchmark": "benchmark_bars", "output_dir": "out", "window": "window_months"}
_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _flatten(d: dict, out: dict) -> dict:
    for key, value in d.items():
        if isinstance(value, dict):
            _flatten(value, out)
        else:
            out[_ALIASES.get(key, key).replace("-", "_")] = value
    return out


def load_config(path: str | None, overrides: dict) -> RunConfig:
    values: dict = {}
    if path:
        try:
            with open(path, "rb") as fh:
                values = _flatten(tomllib.load(fh), {})
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {unknown}")
    if isinstance(values.get("stock_features"), str):
        values["stock_features"] = [s for s in values["stock_features"].split(",") if s]
    try:
        cfg = RunConfig(**values)
        for name, f in _FIELDS.items():
            typ = {"int": int, "float": float, "str": str}.get(f.type)
            if typ is not None:
                setattr(cfg, name, typ(getattr(cfg, name)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


# --- output helpers ----------------------------------------------------------

def _path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    return os.path.join(cfg.out, name)


def _write(path: str, text: str) -> str:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    logger.info("wrote %s", path)
    return path


def _write_json(path: str, obj: dict, cfg: RunConfig) -> str:
    return _write(path, json.dumps({**obj, "provenance": cfg.provenance()}, indent=2, sort_keys=True) + "\n")


def _csv_comment(cfg: RunConfig) -> str:
    p = cfg.provenance()
    return f"config_hash={p['config_hash']} seed={p['seed']}"


def _write_csv(path: str, text: str, cfg: RunConfig) -> str:
    return _write(path, f"# {_csv_comment(cfg)}\n{text}")


def _write_jsonl(path: str, docs, cfg: RunConfig, **meta) -> str:
    write_jsonl(docs, path)
    _write_json(path + ".meta.json", meta, cfg)
    return path


# --- data loading ------------------------------------------------------------

def _load_tweets(cfg: RunConfig):
    cfg.require("tweets")
    tweets, errors = read_tweets(cfg.tweets)
    kept, spam_frac = spam_filter(tweets)
    if cfg.ticker:
        kept = select_for_stock(kept, cfg.ticker)
    return kept, {"read": len(tweets), "bad_lines": len(errors), "spam_fraction": spam_frac, "kept": len(kept)}


def _load_bars(cfg: RunConfig, key: str = "bars"):
    cfg.require(key)
    bars = read_bars(getattr(cfg, key))
    if not bars:
        raise DataError(f"{key}: no bars in {getattr(cfg, key)}")
    return as_index(bars)


def _check_covers(index, period, what: str) -> None:
    if period is None:
        return
    days = [d for d in index.days if period[0] <= d <= period[1]]
    if not days:
        raise DataError(f"{what} has no trading days between {period[0]} and {period[1]}; "
                        f"bar data covers {index.days[0]} to {index.days[-1]}")


def _labeled(cfg: RunConfig):
    path = cfg.labeled or os.path.join(cfg.out, "labeled.jsonl")
    if not os.path.exists(path):
        raise ConfigError(f"labeled dataset not found at {path!r}; run 'label' first or set 'labeled'")
    docs = read_jsonl(path)
    if not docs:
        raise DataError(f"{path}: no labeled documents")
    return docs


def _split(cfg: RunConfig, docs):
    return split(docs, cfg.train_frac, cfg.seed, cfg.test_period())


def _fit(cfg: RunConfig, docs) -> TextClassifier:
    return TextClassifier.fit(docs, model=cfg.model, ranker=cfg.ranker, k=cfg.k, alpha=cfg.alpha,
                              lam=cfg.lam, stock_features=cfg.stock_features)


# --- commands ----------------------------------------------------------------

def cmd_label(cfg: RunConfig, args) -> dict:
    tweets, info = _load_tweets(cfg)
    index = _load_bars(cfg)
    _check_covers(index, cfg.test_period(), "bars")
    docs, skipped = label_all(tweets, index, cfg.ticker)
    path = _write_jsonl(_path(cfg, "labeled.jsonl"), docs, cfg, ticker=cfg.ticker, documents=len(docs),
                        skipped=dict(sorted(skipped.items())), **info)
    return {"labeled": path, "documents": len(docs), "skipped": dict(sorted(skipped.items()))}


def cmd_train(cfg: RunConfig, args) -> dict:
    sp = _split(cfg, _labeled(cfg))
    clf = _fit(cfg, sp.train)
    model_path = _write(_path(cfg, "model.json"), clf.dumps(**cfg.provenance(), ticker=cfg.ticker) + "\n")
    _write_csv(_path(cfg, "dictionary.csv"), clf.dictionary_csv(), cfg)
    report = clf.evaluate(sp.validation).to_dict() if sp.validation else None
    _write_json(_path(cfg, "evaluation.json"), {"split": "validation", "report": report, "notes": clf.notes}, cfg)
    return {"model": model_path, "validation": report}


def cmd_evaluate(cfg: RunConfig, args) -> dict:
    model_file = cfg.model_file or os.path.join(cfg.out, "model.json")
    if not os.path.exists(model_file):
        raise ConfigError(f"model file not found: {model_file!r}")
    with open(model_file, encoding="utf-8") as fh:
        clf = TextClassifier.loads(fh.read())
    sp = _split(cfg, _labeled(cfg))
    docs = getattr(sp, args.on)
    if not docs:
        raise DataError(f"the {args.on} set is empty")
    report = clf.evaluate(docs).to_dict()
    _write_json(_path(cfg, f"evaluation_{args.on}.json"), {"split": args.on, "report": report}, cfg)
    return report


def cmd_sweep_features(cfg: RunConfig, args) -> dict:
    sp = _split(cfg, _labeled(cfg))
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else list(DEFAULT_SIZES)
    res = feature_sweep(sp.train, sp.validation, sizes=sizes, alpha=cfg.alpha, lam=cfg.lam,
                        stock_features=cfg.stock_features)
    path = _write_csv(_path(cfg, "feature_sweep.csv"), res.to_csv(), cfg)
    notes = sorted({c.note for c in res.cells if c.note})
    best = res.best()
    return {"csv": path, "cells": len(res.cells), "skipped": res.skipped, "notes": notes,
            "best": {"model": best.model, "ranker": best.ranker, "size": best.size, "accuracy": best.accuracy}}


def cmd_sweep_window(cfg: RunConfig, args) -> dict:
    if not cfg.validation_month:
        raise ConfigError("sweep-window needs validation_month (e.g. 2017-01)")
    docs = _labeled(cfg)
    cells = window_sweep(docs, cfg.month(), windows=range(1, cfg.window_months + 1), model=cfg.model,
                         ranker=cfg.ranker, k=cfg.k, alpha=cfg.alpha, lam=cfg.lam,
                         stock_features=cfg.stock_features)
    path = _write_csv(_path(cfg, "window_sweep.csv"), window_csv(cells), cfg)
    return {"csv": path, "peak_months": peak_window(cells),
            "accuracy": {c.months: c.accuracy for c in cells}}


def _classifier_for(cfg: RunConfig, method: str, index):
    if method == "a":
        model_file = cfg.model_file or os.path.join(cfg.out, "model.json")
        if not os.path.exists(model_file):
            raise ConfigError(f"method a needs a trained model; {model_file!r} not found")
        with open(model_file, encoding="utf-8") as fh:
            clf = TextClassifier.loads(fh.read())
        return lambda posts: clf.classify_posts(posts, index)
    if method == "b":
        cfg.require("lexicon")
        lex = load_lexicon(cfg.lexicon, "scored")
    else:
        cfg.require("lexicon_positive", "lexicon_negative")
        lex = load_lexicon(cfg.lexicon_positive, "wordlists", cfg.lexicon_negative)
    return lambda posts: [classify_lexicon(p.tokens, lex) for p in posts]


def cmd_backtest(cfg: RunConfig, args) -> dict:
    method = args.method
    tweets, info = _load_tweets(cfg)
    index = _load_bars(cfg)
    period = cfg.test_period()
    _check_covers(index, period, "bars")
    classify = _classifier_for(cfg, method, index)
    labels_seen: list = []

    def recording(posts):
        out = classify(posts)
        labels_seen.extend(out)
        return out

    account = dataclasses.replace(
        B.size_account(index, margin=Decimal(str(cfg.margin)), period=period, ticker=cfg.ticker),
        monthly_fee_rate=Decimal(str(cfg.fee_rate)))
    if period is not None:  # signal windows never cross midnight, so other days are never read
        tweets = [t for t in tweets if period[0] <= t.local_time.date() <= period[1]]
    report = B.run_backtest(B.posts_from_tweets(tweets), index, recording, ticker=cfg.ticker,
                            threshold=cfg.threshold, period=period, method=method, account=account)
    n = len(report.trades)
    buy_share = report.breakdown["Buy"]["placed"] / n if n else None
    extra = {
        "tweets": info,
        "classification_skew": skew_report(labels_seen) if labels_seen else None,
        "buy_order_share": buy_share,
        "buy_skew_flag": bool(buy_share is not None and buy_share >= BUY_SKEW_FLAG),
        "lookahead_violations": len(B.lookahead_violations(report)),
    }
    if n:
        tested = len({d for d in index.days if period is None or period[0] <= d <= period[1]})
        frames = B.frames_for_period(len(index.days), tested)
        extra["significance"] = stats.significance(n, report.breakdown["total"]["correct"], 0.5, frames)
    if cfg.benchmark_bars:
        bench = _load_bars(cfg, "benchmark_bars")
        try:
            extra["sharpe"] = B.sharpe_vs_benchmark(report, bench, period or (index.days[0], index.days[-1]))
        except (stats.UndefinedRiskError, ValueError) as exc:
            extra["sharpe"] = {"sharpe": None, "error": str(exc)}
    _write_csv(_path(cfg, f"trades_{method}.csv"), B.trade_log_csv(report.trades), cfg)
    body = json.loads(B.report_json(report, **extra))
    path = _write_json(_path(cfg, f"backtest_{method}.json"), body, cfg)
    svg = B.equity_svg([report], title=f"{cfg.ticker} method {method}")
    _write(_path(cfg, f"equity_{method}.svg"), svg.replace("\n", f"\n<!-- {_csv_comment(cfg)} -->\n", 1))
    return {"report": path, "trades": n, "gross_pnl": str(report.gross_pnl),
            "return_rate": None if report.return_rate is None else str(report.return_rate),
            "buy_skew_flag": extra["buy_skew_flag"]}


def cmd_significance(cfg: RunConfig, args) -> dict:
    try:
        return stats.significance(args.n, args.k, args.p, args.frames)
    except ValueError as exc:
        raise ArithmeticError(f"domain error: {exc}") from exc


def _series(text: str | None, path: str | None, column: str) -> list[float]:
    if text:
        return [float(x) for x in text.split(",") if x.strip()]
    if path:
        with open(path, encoding="utf-8") as fh:
            rows = csv.DictReader(line for line in fh if not line.startswith("#"))
            return [float(r[column]) for r in rows]
    raise ConfigError(f"give --{column} values or --returns-csv")


def cmd_sharpe(cfg: RunConfig, args) -> dict:
    r_i = _series(args.strategy, args.returns_csv, "strategy")
    r_b = _series(args.benchmark, args.returns_csv, "benchmark")
    return {"sharpe": stats.sharpe(r_i, r_b), "periods": len(r_i)}


def cmd_synth(cfg: RunConfig, args) -> dict:
    kw = {"seed": cfg.seed}
    for name in ("n_tweets", "signal_strength", "n_noise_words", "spam_fraction"):
        v = getattr(args, name)
        if v is not None:
            kw[name] = v
    if args.flip_before:
        kw["flip_before"] = date.fromisoformat(args.flip_before)
    if cfg.ticker:
        kw["ticker"] = cfg.ticker
    try:
        spec = SynthSpec(**kw)
        spec.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    corpus = generate(spec)
    os.makedirs(cfg.out, exist_ok=True)
    paths = corpus.write(cfg.out)
    _write_json(paths["tweets"] + ".meta.json", {"synth": spec_to_dict(spec)}, cfg)
    return {"paths": paths, "tweets": len(corpus.tweets), "bars": len(corpus.bars)}


def cmd_report(cfg: RunConfig, args) -> dict:
    reports = []
    for path in args.reports:
        try:
            with open(path, encoding="utf-8") as fh:
                reports.append(json.load(fh))
        except FileNotFoundError as exc:
            raise ConfigError(f"report not found: {path}") from exc
    if not reports:
        raise ConfigError("report needs at least one backtest report")
    summary = B.aggregate_dicts(reports)
    _write_json(_path(cfg, "aggregate.json"), summary, cfg)
    return summary


COMMANDS = {
    "label": cmd_label, "train": cmd_train, "evaluate": cmd_evaluate,
    "sweep-features": cmd_sweep_features, "sweep-window": cmd_sweep_window, "backtest": cmd_backtest,
    "significance": cmd_significance, "sharpe": cmd_sharpe, "synth": cmd_synth, "report": cmd_report,
}


def _add_common(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("-v", "--verbose", action="store_true")
    for name, f in _FIELDS.items():
        if name in skip:
            continue
        flag = "--" + ("lambda" if name == "lam" else name.replace("_", "-"))
        typ = {"int": int, "float": float}.get(f.type, str)
        p.add_argument(flag, dest=name, type=typ, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tweetsignal", description="Price-labelled tweet classification and hourly backtesting.",
        epilog="Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric error.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, allow_abbrev=False)
        if name == "evaluate":
            p.add_argument("--on", choices=("validation", "test"), default="validation")
        elif name == "sweep-features":
            p.add_argument("--sizes", help="comma-separated subset sizes (default 1000..10000)")
        elif name == "backtest":
            p.add_argument("--method", choices=("a", "b", "c"), default="a")
        elif name == "significance":
            p.add_argument("--n", type=int, required=True, help="trades placed")
            p.add_argument("--k", type=int, required=True, help="trades correct")
            p.add_argument("--p", type=float, default=0.5)
            p.add_argument("--frames", type=float, default=1.0)
        elif name == "sharpe":
            p.add_argument("--strategy", help="comma-separated strategy returns")
            p.add_argument("--benchmark", help="comma-separated benchmark returns")
            p.add_argument("--returns-csv", help="CSV with 'strategy' and 'benchmark' columns")
        elif name == "synth":
            p.add_argument("--n-tweets", type=int)
            p.add_argument("--signal-strength", type=float)
            p.add_argument("--n-noise-words", type=int)
            p.add_argument("--spam-fraction", type=float)
            p.add_argument("--flip-before", help="ISO date before which planted words swap roles")
        elif name == "report":
            p.add_argument("reports", nargs="*", help="backtest JSON reports to pool")
        _add_common(p, skip={"k"} if name == "significance" else ())
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    # significance --k is a hit count, not the feature-subset size
    overrides = {name: getattr(args, name) for name in _FIELDS if name != "k" or args.command != "significance"}
    try:
        cfg = load_config(args.config, overrides)
        result = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, IngestError, LexiconError, PriceLookupError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
