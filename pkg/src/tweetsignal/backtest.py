"""Hourly tweet-signal backtester.

Every trading day at 10:00, 11:00, ..., 15:00 the tweets posted in the
preceding hour are classified; if at least ``threshold`` of the classified
ones say Buy the strategy buys 100 shares, otherwise it sells 100, and the
position is closed an hour later.  Prices are minute-bar closes and all money
is handled as :class:`~decimal.Decimal`.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, time
from decimal import Decimal
from typing import Callable, Iterable, Sequence

from .ingest import SESSION_CLOSE, Tweet
from .labeler import BUY, HOUR, SELL, BarIndex, PriceLookupError, as_index
from .lexicon import UNCLASSIFIED
from .stats import benchmark_buy_and_hold, sharpe
from .tokenizer import tokenize

DEFAULT_HOURS = (10, 11, 12, 13, 14, 15)
MONTHLY_FEE_RATE = Decimal("0.0096")  # 2 x 0.48% per-unit cost, full turnover
SHARES = 100
MARGIN = Decimal("0.10")

TRADE_LOG_HEADER = ["ticker", "decision_time", "direction", "shares", "entry", "exit", "pnl",
                    "tweet_count", "buy_fraction"]


@dataclass(frozen=True)
class Post:
    """A tweet as the trading loop sees it: exchange-local time plus tokens."""

    id: str
    timestamp: datetime
    tokens: tuple


def posts_from_tweets(tweets: Iterable[Tweet]) -> list[Post]:
    posts = [Post(t.id, t.local_time, tuple(tokenize(t.text))) for t in tweets]
    posts.sort(key=lambda p: (p.timestamp, p.id))
    return posts


@dataclass(frozen=True)
class Trade:
    ticker: str
    decision_time: datetime
    direction: str
    shares: int
    entry_price: Decimal
    exit_price: Decimal
    pnl: Decimal
    tweet_count: int
    buy_fraction: float
    latest_post: datetime | None = None

    @property
    def exit_time(self) -> datetime:
        return self.decision_time + HOUR

    @property
    def correct(self) -> bool:
        return self.pnl > 0


def trade_pnl(direction: str, entry: Decimal, exit: Decimal, shares: int = SHARES) -> Decimal:
    diff = (exit - entry) if direction == BUY else (entry - exit)
    return diff * shares


@dataclass(frozen=True)
class Account:
    ticker: str
    size: Decimal
    max_price: Decimal
    shares: int = SHARES
    margin: Decimal = MARGIN
    monthly_fee_rate: Decimal = MONTHLY_FEE_RATE


def size_account(bars, shares: int = SHARES, margin: Decimal | float | str = MARGIN,
                 period: tuple[date, date] | None = None, ticker: str = "") -> Account:
    """Account = (1 + margin) x highest price in the period x shares."""
    index = as_index(bars)
    days = index.days if period is None else [d for d in index.days if period[0] <= d <= period[1]]
    if not days:
        raise ValueError("no bars to size the account from")
    top = index.max_high(days)
    margin = Decimal(str(margin))
    size = (1 + margin) * top * shares
    if size <= 0:
        raise ValueError("account size must be positive")
    return Account(ticker, size, top, shares, margin)


@dataclass
class BacktestReport:
    ticker: str
    method: str
    trades: list
    skipped: list  # (decision_time, reason)
    account: Account | None = None
    gross_pnl: Decimal = Decimal(0)
    return_rate: Decimal | None = None
    net_return_rate: Decimal | None = None
    annualized: float | None = None
    breakdown: dict = field(default_factory=dict)
    equity_curve: list = field(default_factory=list)

    def to_dict(self) -> dict:
        acc = self.account
        return {
            "ticker": self.ticker,
            "method": self.method,
            "n_trades": len(self.trades),
            "gross_pnl": str(self.gross_pnl),
            "account": None if acc is None else {
                "size": str(acc.size), "max_price": str(acc.max_price), "shares": acc.shares,
                "margin": str(acc.margin), "monthly_fee_rate": str(acc.monthly_fee_rate)},
            "return_rate": None if self.return_rate is None else str(self.return_rate),
            "net_return_rate": None if self.net_return_rate is None else str(self.net_return_rate),
            "annualized": self.annualized,
            "breakdown": self.breakdown,
            "equity_curve": [str(v) for v in self.equity_curve],
            "skipped": [[t.isoformat(), r] for t, r in self.skipped],
        }


def _decision_times(index: BarIndex, hours: Sequence[int], period):
    for d in index.days:
        if period is not None and not period[0] <= d <= period[1]:
            continue
        for h in hours:
            yield datetime.combine(d, time(h))


def run_backtest(posts: Sequence[Post], bars, classify: Callable[[Sequence[Post]], Sequence[str]],
                 ticker: str = "", threshold: float = 0.5, hours: Sequence[int] = DEFAULT_HOURS,
                 period: tuple[date, date] | None = None, method: str = "a",
                 account: Account | None = None) -> BacktestReport:
    """Run the hourly strategy.

    ``classify`` maps posts to Buy/Sell/Unclassified labels; it is called once
    on all posts (each post is classified on its own content).  Unclassified
    posts count toward neither side of the Buy fraction; a window with no
    classified posts places no trade.
    """
    index = as_index(bars)
    posts = sorted(posts, key=lambda p: (p.timestamp, p.id))
    labels = list(classify(posts)) if posts else []
    if len(labels) != len(posts):
        raise ValueError("classifier returned the wrong number of labels")
    stamps = [p.timestamp for p in posts]
    trades, skipped = [], []
    for t in _decision_times(index, hours, period):
        if (t + HOUR).time() > SESSION_CLOSE:
            skipped.append((t, "exit-after-close"))
            continue
        lo = bisect.bisect_left(stamps, t - HOUR)
        hi = bisect.bisect_left(stamps, t)
        window = labels[lo:hi]
        n_buy, n_sell = window.count(BUY), window.count(SELL)
        if n_buy + n_sell == 0:
            skipped.append((t, "no-signal"))
            continue
        frac = n_buy / (n_buy + n_sell)
        direction = BUY if frac >= threshold else SELL
        try:
            entry = index.price_at(t)
            exit_ = index.price_at(t + HOUR)
        except PriceLookupError:
            skipped.append((t, "missing-price"))
            continue
        trades.append(Trade(ticker, t, direction, SHARES, entry, exit_, trade_pnl(direction, entry, exit_),
                            n_buy + n_sell + window.count(UNCLASSIFIED), frac,
                            stamps[hi - 1] if hi > lo else None))
    report = BacktestReport(ticker, method, trades, skipped)
    report.gross_pnl = sum((tr.pnl for tr in trades), Decimal(0))
    report.breakdown = breakdown(trades)
    report.equity_curve = equity_curve(trades)
    if account is not None:
        compute_returns(report, account)
    return report


def compute_returns(report: BacktestReport, account: Account) -> tuple[Decimal, Decimal, float]:
    """Monthly return on the account, the same net of the monthly fee, and its 12-month compounding."""
    if account.size <= 0:
        raise ValueError("account size must be positive")
    r = report.gross_pnl / account.size
    report.account = account
    report.return_rate = r
    report.net_return_rate = r - account.monthly_fee_rate
    report.annualized = float((1 + r) ** 12 - 1)
    return report.return_rate, report.net_return_rate, report.annualized


def net_of_fees(gross_rate: Decimal, fee_rate: Decimal = MONTHLY_FEE_RATE) -> Decimal:
    return Decimal(gross_rate) - fee_rate


def annualize(monthly_rate) -> float:
    return float((1 + Decimal(str(monthly_rate))) ** 12 - 1)


def breakdown(trades: Sequence[Trade]) -> dict:
    """Orders placed and orders correct (pnl > 0) per direction, with percentages."""
    n = len(trades)
    out = {}
    for side in (BUY, SELL):
        mine = [t for t in trades if t.direction == side]
        correct = sum(t.correct for t in mine)
        out[side] = {
            "placed": len(mine),
            "placed_pct": 100.0 * len(mine) / n if n else 0.0,
            "correct": correct,
            "correct_pct": 100.0 * correct / len(mine) if mine else 0.0,
        }
    total_correct = sum(t.correct for t in trades)
    out["total"] = {"placed": n, "correct": total_correct,
                    "correct_pct": 100.0 * total_correct / n if n else 0.0}
    return out


def equity_curve(trades: Sequence[Trade]) -> list[Decimal]:
    curve, total = [], Decimal(0)
    for t in trades:
        total += t.pnl
        curve.append(total)
    return curve


def lookahead_violations(report: BacktestReport) -> list[Trade]:
    """Trades that used a post timestamped at or after their decision time (should be none)."""
    return [t for t in report.trades if t.latest_post is not None and t.latest_post >= t.decision_time]


# --- returns series & aggregation ------------------------------------------

def daily_strategy_returns(report: BacktestReport, days: Iterable[date]) -> list[tuple[date, float]]:
    if report.account is None:
        raise ValueError("report has no account; call compute_returns first")
    per_day: dict[date, Decimal] = defaultdict(Decimal)
    for t in report.trades:
        per_day[t.decision_time.date()] += t.pnl
    return [(d, float(per_day[d] / report.account.size)) for d in sorted(days)]


def sharpe_vs_benchmark(report: BacktestReport, benchmark_bars, period: tuple[date, date]) -> dict:
    """Ex-ante Sharpe of daily strategy returns against buy-and-hold of the benchmark.

    The benchmark yields close-to-close returns from the second trading day of
    the period onwards; the strategy's daily returns are aligned on those days.
    """
    bench = benchmark_buy_and_hold(benchmark_bars, period)
    strat = dict(daily_strategy_returns(report, [d for d, _ in bench]))
    r_i = [strat[d] for d, _ in bench]
    r_b = [r for _, r in bench]
    return {"sharpe": sharpe(r_i, r_b), "periods": len(bench),
            "days": [d.isoformat() for d, _ in bench], "strategy": r_i, "benchmark": r_b}


def aggregate(reports: Sequence[BacktestReport]) -> dict:
    """Pooled figures over several tickers: equal-weight and account-weighted return rates."""
    return aggregate_dicts([r.to_dict() for r in reports])


def aggregate_dicts(reports: Sequence[dict]) -> dict:
    """Same as :func:`aggregate`, from report dicts (e.g. reloaded JSON reports)."""
    n = sum(r["n_trades"] for r in reports)
    correct = sum(r["breakdown"]["total"]["correct"] for r in reports)
    out = {"tickers": [r["ticker"] for r in reports], "trades": n, "correct": correct,
           "correct_pct": 100.0 * correct / n if n else None}
    with_acc = [r for r in reports if r.get("account") and r.get("return_rate") is not None]
    if with_acc:
        eq = sum((Decimal(r["return_rate"]) for r in with_acc), Decimal(0)) / len(with_acc)
        total_size = sum((Decimal(r["account"]["size"]) for r in with_acc), Decimal(0))
        weighted = sum((Decimal(r["gross_pnl"]) for r in with_acc), Decimal(0)) / total_size
        out["equal_weight_return"] = str(eq)
        out["account_weighted_return"] = str(weighted)
    return out


# --- output ------------------------------------------------------------------

def trade_log_csv(trades: Sequence[Trade]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRADE_LOG_HEADER)
    for t in trades:
        w.writerow([t.ticker, t.decision_time.isoformat(timespec="minutes"), t.direction, t.shares,
                    t.entry_price, t.exit_price, t.pnl, t.tweet_count, f"{t.buy_fraction:.6f}"])
    return out.getvalue()


def report_json(report: BacktestReport, **extra) -> str:
    return json.dumps({**report.to_dict(), **extra}, indent=2, sort_keys=True)


def equity_csv(reports: Sequence[BacktestReport]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["method", "decision_time", "cumulative_pnl"])
    for r in reports:
        for t, v in zip(r.trades, r.equity_curve):
            w.writerow([r.method, t.decision_time.isoformat(timespec="minutes"), v])
    return out.getvalue()


_COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def equity_svg(reports: Sequence[BacktestReport], width: int = 720, height: int = 360, title: str = "") -> str:
    """Cumulative-pnl line chart, one series per report, x = shared decision times."""
    times = sorted({t.decision_time for r in reports for t in r.trades})
    pos = {t: i for i, t in enumerate(times)}
    values = [float(v) for r in reports for v in r.equity_curve] + [0.0]
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    pad = 40
    nx = max(len(times) - 1, 1)

    def xy(t, v):
        x = pad + (width - 2 * pad) * pos[t] / nx
        y = height - pad - (height - 2 * pad) * (float(v) - lo) / span
        return f"{x:.1f},{y:.1f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        parts.append(f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    zero_y = height - pad - (height - 2 * pad) * (0.0 - lo) / span
    parts.append(f'<line x1="{pad}" y1="{zero_y:.1f}" x2="{width - pad}" y2="{zero_y:.1f}" stroke="#999"/>')
    for i, r in enumerate(reports):
        colour = _COLOURS[i % len(_COLOURS)]
        pts = " ".join(xy(t.decision_time, v) for t, v in zip(r.trades, r.equity_curve))
        if pts:
            parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        parts.append(f'<text x="{pad + 5}" y="{pad + 15 * i}" font-size="12" fill="{colour}">'
                     f'method {r.method}: {r.gross_pnl}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def frames_for_period(total_days: int, tested_days: int) -> float:
    if tested_days <= 0:
        raise ValueError("tested_days must be positive")
    return max(1.0, total_days / tested_days)
