"""Price-based ground truth for tweets.

A tweet at exchange time ``t`` is labelled Buy when the close at ``t + 60m``
is above the close at ``t`` and Sell when below.  Tweets whose one-hour
look-back or look-ahead would leave the trading session are skipped instead of
extrapolated, as are unchanged prices.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import random
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, replace
from datetime import date, datetime, timedelta
from decimal import Decimal
from typing import Iterable, Sequence

import numpy as np

from .ingest import SESSION_CLOSE, SESSION_OPEN, MinuteBar, Tweet
from .tokenizer import tokenize

BUY = "Buy"
SELL = "Sell"
HOUR = timedelta(minutes=60)


class PriceLookupError(LookupError):
    pass


def encode_labels(labels) -> np.ndarray:
    """Buy -> 1, Sell -> 0.  Integer/bool arrays pass through."""
    arr = np.asarray(labels)
    if arr.dtype.kind in "biuf":
        return arr.astype(np.int64)
    bad = set(arr.tolist()) - {BUY, SELL}
    if bad:
        raise ValueError(f"unknown label(s) {sorted(bad)}")
    return (arr == BUY).astype(np.int64)


def decode_labels(y) -> list[str]:
    return [BUY if v else SELL for v in np.asarray(y).tolist()]


@dataclass(frozen=True)
class Skip:
    reason: str


@dataclass(frozen=True)
class LabeledDocument:
    tweet_id: str
    ticker: str
    timestamp: datetime  # exchange-local
    tokens: tuple
    label: str
    price_before: Decimal
    price_at: Decimal
    price_after: Decimal
    prior_trend: int = 0
    hour_volume: int = 0
    volume_high: int = 0
    weekday: int = 0

    def to_json(self) -> str:
        d = asdict(self)
        d["timestamp"] = self.timestamp.isoformat(timespec="seconds")
        d["tokens"] = list(self.tokens)
        for k in ("price_before", "price_at", "price_after"):
            d[k] = str(d[k])
        return json.dumps(d, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "LabeledDocument":
        d = json.loads(line)
        d["timestamp"] = datetime.fromisoformat(d["timestamp"])
        d["tokens"] = tuple(d["tokens"])
        for k in ("price_before", "price_at", "price_after"):
            d[k] = Decimal(d[k])
        return cls(**d)


class BarIndex:
    """Per-session lookup of minute closes and volumes for one ticker."""

    def __init__(self, bars: Iterable[MinuteBar]):
        by_day: dict[date, list[MinuteBar]] = defaultdict(list)
        for b in bars:
            by_day[b.timestamp.date()].append(b)
        self._minutes: dict[date, list[datetime]] = {}
        self._closes: dict[date, list[Decimal]] = {}
        self._cumvol: dict[date, list[int]] = {}
        self._highs: dict[date, Decimal] = {}
        for d, day_bars in by_day.items():
            day_bars.sort(key=lambda b: b.timestamp)
            self._minutes[d] = [b.timestamp for b in day_bars]
            self._closes[d] = [b.close for b in day_bars]
            cum = [0]
            for b in day_bars:
                cum.append(cum[-1] + b.volume)
            self._cumvol[d] = cum
            self._highs[d] = max(b.high for b in day_bars)

    @property
    def days(self) -> list[date]:
        return sorted(self._minutes)

    def is_trading_day(self, d: date) -> bool:
        return d in self._minutes

    def max_high(self, days: Iterable[date] | None = None) -> Decimal:
        days = self.days if days is None else [d for d in days if d in self._highs]
        if not days:
            raise PriceLookupError("no bars in requested period")
        return max(self._highs[d] for d in days)

    def price_at(self, instant: datetime) -> Decimal:
        """Close of the bar at ``instant``'s minute, else the latest earlier bar that session."""
        minute = instant.replace(second=0, microsecond=0)
        d = minute.date()
        if d not in self._minutes or not (SESSION_OPEN <= minute.time() <= SESSION_CLOSE):
            raise PriceLookupError(f"{instant} is outside any trading session")
        i = bisect.bisect_right(self._minutes[d], minute)
        if i == 0:
            raise PriceLookupError(f"no bar at or before {instant} in its session")
        return self._closes[d][i - 1]

    def volume_between(self, start: datetime, end: datetime) -> int:
        """Shares traded in bars with minute in [start, end) on start's date."""
        d = start.date()
        if d not in self._minutes:
            raise PriceLookupError(f"{start.date()} is not a trading day")
        mins = self._minutes[d]
        lo = bisect.bisect_left(mins, start.replace(second=0, microsecond=0))
        hi = bisect.bisect_left(mins, end)
        cum = self._cumvol[d]
        return cum[hi] - cum[lo]

    def daily_closes(self) -> list[tuple[date, Decimal]]:
        return [(d, self._closes[d][-1]) for d in self.days]


def as_index(bars) -> BarIndex:
    return bars if isinstance(bars, BarIndex) else BarIndex(bars)


def price_at(bars, instant: datetime) -> Decimal:
    return as_index(bars).price_at(instant)


def window_skip_reason(index: BarIndex, local: datetime) -> str | None:
    """Why a one-hour look-back/look-ahead window at ``local`` is unusable, if it is."""
    if local.weekday() >= 5 or not index.is_trading_day(local.date()):
        return "non-trading-day"
    t = local.time()
    if t < SESSION_OPEN or t > SESSION_CLOSE:
        return "outside-market-hours"
    minute = local.replace(second=0, microsecond=0)
    open_dt = datetime.combine(local.date(), SESSION_OPEN)
    close_dt = datetime.combine(local.date(), SESSION_CLOSE)
    if minute - HOUR < open_dt:
        return "first-hour"
    if minute + HOUR > close_dt:
        return "exit-after-close"
    return None


def label_tweet(tweet: Tweet, bars, ticker: str = "") -> LabeledDocument | Skip:
    index = as_index(bars)
    local = tweet.local_time
    reason = window_skip_reason(index, local)
    if reason:
        return Skip(reason)
    minute = local.replace(second=0, microsecond=0)
    try:
        before = index.price_at(minute - HOUR)
        now = index.price_at(minute)
        after = index.price_at(minute + HOUR)
    except PriceLookupError:
        return Skip("missing-data")
    if after == now:
        return Skip("unchanged-price")
    doc = LabeledDocument(
        tweet_id=tweet.id,
        ticker=ticker.upper() or (min(tweet.cashtags) if tweet.cashtags else ""),
        timestamp=local,
        tokens=tuple(tokenize(tweet.text)),
        label=BUY if after > now else SELL,
        price_before=before,
        price_at=now,
        price_after=after,
    )
    return attach_context(doc, index, None)


def attach_context(doc: LabeledDocument, bars, training_mean_hour_volume: float | None) -> LabeledDocument:
    """Fill prior trend, prior-hour volume, the high-volume flag and weekday.

    With ``training_mean_hour_volume=None`` the volume flag is left at 0; it is
    set once the training split is known (see :func:`apply_volume_threshold`).
    """
    index = as_index(bars)
    minute = doc.timestamp.replace(second=0, microsecond=0)
    try:
        before = index.price_at(minute - HOUR)
        vol = index.volume_between(minute - HOUR, minute)
    except PriceLookupError as exc:
        raise PriceLookupError(f"missing-data: {exc}") from exc
    flag = 0 if training_mean_hour_volume is None else int(vol > training_mean_hour_volume)
    return replace(
        doc,
        price_before=before,
        prior_trend=int(doc.price_at > before),
        hour_volume=vol,
        volume_high=flag,
        weekday=doc.timestamp.weekday(),
    )


def label_all(tweets: Iterable[Tweet], bars, ticker: str) -> tuple[list[LabeledDocument], Counter]:
    """Label every tweet; returns documents sorted by time and a skip-reason tally."""
    index = as_index(bars)
    docs, skipped = [], Counter()
    for tw in tweets:
        out = label_tweet(tw, index, ticker)
        if isinstance(out, Skip):
            skipped[out.reason] += 1
        else:
            docs.append(out)
    docs.sort(key=lambda d: (d.timestamp, d.tweet_id))
    return docs, skipped


def mean_hour_volume(docs: Sequence[LabeledDocument]) -> float:
    if not docs:
        raise ValueError("cannot compute mean hourly volume of no documents")
    return sum(d.hour_volume for d in docs) / len(docs)


def apply_volume_threshold(docs: Iterable[LabeledDocument], mean_volume: float) -> list[LabeledDocument]:
    return [replace(d, volume_high=int(d.hour_volume > mean_volume)) for d in docs]


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    validation: tuple
    test: tuple
    seed: int


def split(docs: Sequence[LabeledDocument], train_frac: float = 0.8, seed: int = 0,
          test_period: tuple[date, date] | None = None) -> DatasetSplit:
    """Hold out ``test_period`` (inclusive dates), then shuffle the rest and cut train/validation."""
    ordered = sorted(docs, key=lambda d: (d.timestamp, d.tweet_id))

    def in_test(d: LabeledDocument) -> bool:
        return test_period is not None and test_period[0] <= d.timestamp.date() <= test_period[1]

    test = [d for d in ordered if in_test(d)]
    pool = [d for d in ordered if not in_test(d)]
    if not pool:
        raise ValueError("no documents outside the test period to train on")
    random.Random(seed).shuffle(pool)
    n_train = math.floor(len(pool) * train_frac + 0.5)
    return DatasetSplit(tuple(pool[:n_train]), tuple(pool[n_train:]), tuple(test), seed)


def temporal_distribution(docs: Iterable[LabeledDocument]) -> tuple[dict, dict]:
    by_hour: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    by_weekday: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for d in docs:
        col = 0 if d.label == BUY else 1
        by_hour[d.timestamp.hour][col] += 1
        by_weekday[d.timestamp.weekday()][col] += 1
    return ({k: tuple(v) for k, v in sorted(by_hour.items())},
            {k: tuple(v) for k, v in sorted(by_weekday.items())})


def histogram_csv(counts: dict) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["key", "buy", "sell"])
    for k, (b, s) in sorted(counts.items()):
        w.writerow([k, b, s])
    return out.getvalue()


def docs_by_month(docs: Iterable[LabeledDocument]) -> dict[tuple[int, int], list[LabeledDocument]]:
    months: dict[tuple[int, int], list[LabeledDocument]] = defaultdict(list)
    for d in docs:
        months[(d.timestamp.year, d.timestamp.month)].append(d)
    return dict(sorted(months.items()))


def write_jsonl(docs: Iterable[LabeledDocument], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for d in docs:
            fh.write(d.to_json() + "\n")


def read_jsonl(path) -> list[LabeledDocument]:
    with open(path, encoding="utf-8") as fh:
        return [LabeledDocument.from_json(line) for line in fh if line.strip()]
