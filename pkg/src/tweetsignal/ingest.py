"""Tweet and minute-bar ingestion.

Tweets arrive as JSON Lines (``id``, ``timestamp``, ``text``); market data as
CSV with header ``date,time,open,high,low,close,volume`` in exchange-local
time.  Exchange time is US/Eastern, converted with a rule-generated DST table
so results never depend on the host's timezone database.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from decimal import Decimal, InvalidOperation
from functools import lru_cache
from typing import IO, Iterable, Sequence

logger = logging.getLogger(__name__)

SESSION_OPEN = time(9, 30)
SESSION_CLOSE = time(16, 0)
BAR_HEADER = ["date", "time", "open", "high", "low", "close", "volume"]
MAX_BAD_LINE_FRACTION = 0.10

# `$` + 1-5 ASCII letters, not glued to a preceding word char or trailing letters/digits.
CASHTAG_RE = re.compile(r"(?<![\w$])\$([A-Za-z]{1,5})(?![A-Za-z0-9_])")


class IngestError(ValueError):
    """Raised when an input file cannot be used at all."""


@dataclass(frozen=True)
class Tweet:
    id: str
    timestamp: datetime  # aware, UTC
    text: str
    cashtags: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_text(cls, id: str, timestamp: datetime, text: str) -> "Tweet":
        return cls(id=id, timestamp=timestamp, text=text, cashtags=extract_cashtags(text))

    @property
    def local_time(self) -> datetime:
        return utc_to_exchange(self.timestamp)

    def to_json(self) -> str:
        ts = self.timestamp.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        return json.dumps({"id": self.id, "timestamp": ts, "text": self.text}, ensure_ascii=False)


@dataclass(frozen=True)
class MinuteBar:
    timestamp: datetime  # naive, exchange-local, minute resolution
    open: Decimal
    high: Decimal
    low: Decimal
    close: Decimal
    volume: int

    def check(self) -> None:
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise ValueError(f"OHLC invariant violated at {self.timestamp}")
        if self.volume < 0:
            raise ValueError(f"negative volume at {self.timestamp}")
        if self.low <= 0:
            raise ValueError(f"non-positive price at {self.timestamp}")
        if not in_session(self.timestamp):
            raise ValueError(f"bar outside market hours at {self.timestamp}")


@dataclass(frozen=True)
class TradingCalendar:
    """Trading days taken from the distinct dates of a bar file."""

    days: frozenset

    @classmethod
    def from_bars(cls, bars: Iterable[MinuteBar]) -> "TradingCalendar":
        return cls(frozenset(b.timestamp.date() for b in bars))

    def is_trading_day(self, d: date) -> bool:
        return d in self.days

    def sorted_days(self) -> list[date]:
        return sorted(self.days)

    def session_bounds(self, d: date) -> tuple[datetime, datetime]:
        return datetime.combine(d, SESSION_OPEN), datetime.combine(d, SESSION_CLOSE)


@dataclass
class LineError:
    line: int
    message: str


def extract_cashtags(text: str) -> frozenset:
    return frozenset(m.group(1).upper() for m in CASHTAG_RE.finditer(text))


# --- exchange time -----------------------------------------------------------

def _nth_sunday(year: int, month: int, n: int) -> date:
    d = date(year, month, 1)
    first = d + timedelta(days=(6 - d.weekday()) % 7)
    return first + timedelta(weeks=n - 1)


def _last_sunday(year: int, month: int) -> date:
    d = date(year + (month == 12), month % 12 + 1, 1) - timedelta(days=1)
    return d - timedelta(days=(d.weekday() + 1) % 7)


@lru_cache(maxsize=None)
def dst_window_utc(year: int) -> tuple[datetime, datetime]:
    """UTC instants (naive) at which US Eastern DST starts and ends in ``year``."""
    if year >= 2007:
        start, end = _nth_sunday(year, 3, 2), _nth_sunday(year, 11, 1)
    else:
        start, end = _nth_sunday(year, 4, 1), _last_sunday(year, 10)
    # 02:00 EST = 07:00 UTC; 02:00 EDT = 06:00 UTC
    return datetime.combine(start, time(7)), datetime.combine(end, time(6))


def utc_offset_hours(instant_utc: datetime) -> int:
    naive = instant_utc.astimezone(timezone.utc).replace(tzinfo=None) if instant_utc.tzinfo else instant_utc
    start, end = dst_window_utc(naive.year)
    return -4 if start <= naive < end else -5


def utc_to_exchange(instant_utc: datetime) -> datetime:
    """Convert a UTC instant to naive US/Eastern wall time."""
    naive = instant_utc.astimezone(timezone.utc).replace(tzinfo=None) if instant_utc.tzinfo else instant_utc
    return naive + timedelta(hours=utc_offset_hours(naive))


def exchange_to_utc(local: datetime) -> datetime:
    """Inverse of :func:`utc_to_exchange` for unambiguous wall times."""
    guess = local + timedelta(hours=5)
    if utc_offset_hours(guess) == -4:
        guess = local + timedelta(hours=4)
    return guess.replace(tzinfo=timezone.utc)


def in_session(local: datetime) -> bool:
    return local.weekday() < 5 and SESSION_OPEN <= local.time() <= SESSION_CLOSE


# --- tweets ------------------------------------------------------------------

def parse_timestamp(value: str) -> datetime:
    """ISO-8601 to an aware UTC datetime; a timestamp without an offset is read as UTC."""
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _lines(source) -> Iterable[str]:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    for raw in source:
        yield raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw


def parse_tweets(source: IO | bytes | Iterable[str]) -> tuple[list[Tweet], list[LineError]]:
    """Parse JSON Lines tweets.

    Malformed lines are collected rather than raised; if more than 10% of the
    non-blank lines fail (and more than one) the whole file is rejected with
    :class:`IngestError`.
    """
    tweets: list[Tweet] = []
    errors: list[LineError] = []
    seen = 0
    for lineno, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        seen += 1
        try:
            obj = json.loads(line)
            if not isinstance(obj, dict):
                raise ValueError("line is not a JSON object")
            missing = [k for k in ("id", "timestamp", "text") if k not in obj]
            if missing:
                raise ValueError(f"missing field(s) {missing}")
            tweets.append(Tweet.from_text(str(obj["id"]), parse_timestamp(str(obj["timestamp"])), str(obj["text"])))
        except (ValueError, TypeError) as exc:
            errors.append(LineError(lineno, str(exc)))
    # a single bad line never aborts, so tiny files are not rejected outright
    if len(errors) > max(1.0, MAX_BAD_LINE_FRACTION * seen):
        raise IngestError(
            f"{len(errors)} of {seen} tweet lines malformed (first at line {errors[0].line}: {errors[0].message})"
        )
    for err in errors:
        logger.warning("tweet line %d skipped: %s", err.line, err.message)
    return tweets, errors


def serialize_tweets(tweets: Iterable[Tweet]) -> str:
    return "".join(t.to_json() + "\n" for t in tweets)


# --- bars --------------------------------------------------------------------

def _bar_time(d: str, t: str) -> datetime:
    # fromisoformat is several times faster than strptime on 100k-row files
    if len(d) != 10 or len(t) != 5:
        raise ValueError(f"expected YYYY-MM-DD and HH:MM, got {d!r} {t!r}")
    return datetime.fromisoformat(f"{d}T{t}")


def parse_bars(source: IO | bytes | Iterable[str]) -> list[MinuteBar]:
    """Parse a minute-bar CSV.  Rows must already be strictly ascending."""
    reader = csv.reader(_lines(source))
    header = next(reader, None)
    if header is None:
        return []
    if [h.strip().lower() for h in header] != BAR_HEADER:
        raise IngestError(f"bar header must be {','.join(BAR_HEADER)}, got {','.join(header)}")
    bars: list[MinuteBar] = []
    for rowno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        try:
            d, t, o, h, lo, c, v = (x.strip() for x in row)
            bar = MinuteBar(
                timestamp=_bar_time(d, t),
                open=Decimal(o), high=Decimal(h), low=Decimal(lo), close=Decimal(c),
                volume=int(v),
            )
            bar.check()
        except (ValueError, InvalidOperation) as exc:
            raise IngestError(f"bar row {rowno}: {exc}") from exc
        if bars and bar.timestamp <= bars[-1].timestamp:
            kind = "duplicate" if bar.timestamp == bars[-1].timestamp else "non-monotonic"
            raise IngestError(f"bar row {rowno}: {kind} timestamp {bar.timestamp}")
        bars.append(bar)
    return bars


def serialize_bars(bars: Iterable[MinuteBar]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BAR_HEADER)
    for b in bars:
        w.writerow([b.timestamp.strftime("%Y-%m-%d"), b.timestamp.strftime("%H:%M"),
                    b.open, b.high, b.low, b.close, b.volume])
    return out.getvalue()


def read_tweets(path) -> tuple[list[Tweet], list[LineError]]:
    with open(path, "rb") as fh:
        return parse_tweets(fh)


def read_bars(path) -> list[MinuteBar]:
    with open(path, "rb") as fh:
        return parse_bars(fh)


# --- filtering ---------------------------------------------------------------

def spam_filter(tweets: Sequence[Tweet], max_cashtags: int = 2) -> tuple[list[Tweet], float]:
    """Drop tweets naming more than ``max_cashtags`` tickers.

    Returns the kept tweets and the fraction removed.
    """
    kept = [t for t in tweets if len(t.cashtags) <= max_cashtags]
    total = len(tweets)
    return kept, ((total - len(kept)) / total if total else 0.0)


def select_for_stock(tweets: Iterable[Tweet], ticker: str) -> list[Tweet]:
    ticker = ticker.upper()
    return [t for t in tweets if ticker in t.cashtags]
