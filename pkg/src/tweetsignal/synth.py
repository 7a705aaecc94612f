"""Synthetic tweets and minute bars with planted word/price correlations.

Construction
------------
For every trading day and every trade hour ``j`` in 10..15 a direction
``D_j`` (up/down) is drawn.  The price level jumps by ``hourly_vol`` in that
direction at minute ``j:01`` and otherwise only wobbles by a bounded amount
(well under half a jump), so:

* a tweet posted during hour ``j-1`` (at minute >= 1) sees exactly one jump,
  ``D_j``, between its own minute and one hour later, so its price label is
  ``D_j``;
* the trade opened at ``j:00`` and closed at ``j+1:00`` also realises ``D_j``.

Each tweet carries ``planted_per_tweet`` words from the list matching the
upcoming direction with probability ``signal_strength`` (else from the
opposite list), plus uniformly drawn noise words.  Before ``flip_before`` the
word lists swap roles, which plants a regime change.

Random numbers come from SplitMix64 (Steele, Lea & Flood 2014):

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)            (all arithmetic mod 2**64)

uniform() = (out >> 11) * 2**-53 and below(n) = floor(uniform() * n), so the
stream is easy to reproduce in any language.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, time, timedelta
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Sequence

from .ingest import MinuteBar, Tweet, exchange_to_utc, serialize_bars, serialize_tweets

MASK64 = (1 << 64) - 1
TRADE_HOURS = (10, 11, 12, 13, 14, 15)
CENT = Decimal("0.01")


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        return int(self.uniform() * n)

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 7
    n_tweets: int = 20_000
    start: date = date(2016, 1, 1)
    end: date = date(2017, 1, 31)
    ticker: str = "SYN"
    n_buy_words: int = 25
    n_sell_words: int = 25
    n_noise_words: int = 5_000
    planted_per_tweet: int = 2
    noise_per_tweet: int = 6
    signal_strength: float = 0.7
    hourly_vol: float = 0.005
    up_probability: float = 0.5
    start_price: float = 100.0
    url_probability: float = 0.1
    spam_fraction: float = 0.0
    flip_before: date | None = None

    def validate(self) -> None:
        if not 0.5 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0.5, 1]")
        if not 0.0 < self.up_probability < 1.0:
            raise ValueError("up_probability must lie in (0, 1)")
        if self.n_tweets <= 0:
            raise ValueError("n_tweets must be positive")
        if self.n_buy_words + self.n_sell_words + self.n_noise_words <= 0:
            raise ValueError("vocabulary is empty")
        if (self.n_buy_words == 0) != (self.n_sell_words == 0):
            raise ValueError("planted Buy and Sell lists must both be empty or both non-empty")
        if self.hourly_vol <= 0 or self.start_price <= 0:
            raise ValueError("hourly_vol and start_price must be positive")
        if self.end < self.start:
            raise ValueError("end precedes start")


@dataclass
class SynthCorpus:
    spec: SynthSpec
    tweets: list
    bars: list
    buy_words: list
    sell_words: list
    directions: dict = field(repr=False)  # (date, hour) -> +1 / -1

    @property
    def planted(self) -> set:
        return set(self.buy_words) | set(self.sell_words)

    def write(self, outdir) -> dict:
        os.makedirs(outdir, exist_ok=True)
        paths = {
            "tweets": os.path.join(outdir, "tweets.jsonl"),
            "bars": os.path.join(outdir, "bars.csv"),
            "buy_words": os.path.join(outdir, "planted_buy.txt"),
            "sell_words": os.path.join(outdir, "planted_sell.txt"),
        }
        with open(paths["tweets"], "w", encoding="utf-8") as fh:
            fh.write(serialize_tweets(self.tweets))
        with open(paths["bars"], "w", encoding="utf-8") as fh:
            fh.write(serialize_bars(self.bars))
        for key, words in (("buy_words", self.buy_words), ("sell_words", self.sell_words)):
            with open(paths[key], "w", encoding="utf-8") as fh:
                fh.write("".join(w + "\n" for w in words))
        return paths


_CONSONANTS = "bcdfghjklmnprstvwz"
_VOWELS = "aeiou"


def _make_words(rng: SplitMix64, n: int, taken: set) -> list[str]:
    words = []
    while len(words) < n:
        syllables = 2 + rng.below(3)
        w = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(syllables))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def trading_days(start: date, end: date) -> list[date]:
    days, d = [], start
    while d <= end:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def _to_cents(x: float) -> Decimal:
    return Decimal(repr(x)).quantize(CENT, rounding=ROUND_HALF_EVEN)


def _day_bars(rng: SplitMix64, day: date, level: float, dirs: dict, spec: SynthSpec):
    """Minute bars 09:30..16:00 for one day; returns (bars, closing level)."""
    wobble = spec.hourly_vol / 5.0
    bars = []
    prev_close = None
    t = datetime.combine(day, time(9, 30))
    stop = datetime.combine(day, time(16, 0))
    while t <= stop:
        if t.minute == 1 and t.hour in TRADE_HOURS:
            level *= 1.0 + dirs[(day, t.hour)] * spec.hourly_vol
        close = _to_cents(level * (1.0 + wobble * (2.0 * rng.uniform() - 1.0)))
        open_ = close if prev_close is None else prev_close
        hi = max(open_, close) + CENT * rng.below(3)
        lo = max(min(open_, close) - CENT * rng.below(3), CENT)
        bars.append(MinuteBar(t, open_, hi, lo, close, 1_000 + rng.below(49_000)))
        prev_close = close
        t += timedelta(minutes=1)
    return bars, level


def _tweet_minute(rng: SplitMix64) -> tuple[int, int]:
    """A minute in [09:30, 15:00) avoiding each hour's :00 minute."""
    while True:
        m = 30 + rng.below(330)  # minutes after 09:00
        hour, minute = 9 + m // 60, m % 60
        if minute != 0:
            return hour, minute


def generate(spec: SynthSpec) -> SynthCorpus:
    spec.validate()
    rng = SplitMix64(spec.seed)
    taken: set = set()
    buy_words = _make_words(rng, spec.n_buy_words, taken)
    sell_words = _make_words(rng, spec.n_sell_words, taken)
    noise_words = _make_words(rng, spec.n_noise_words, taken)
    others = _make_words(rng, 4, set(taken) | {spec.ticker.lower()})
    spam_tags = [w[:4].upper() for w in others]

    days = trading_days(spec.start, spec.end)
    if not days:
        raise ValueError("date range contains no weekdays")
    dirs = {}
    for d in days:
        for h in TRADE_HOURS:
            dirs[(d, h)] = 1 if rng.uniform() < spec.up_probability else -1

    bars: list[MinuteBar] = []
    level = spec.start_price
    for d in days:
        day_bars, level = _day_bars(rng, d, level, dirs, spec)
        bars.extend(day_bars)

    slots = []
    for _ in range(spec.n_tweets):
        d = days[rng.below(len(days))]
        hour, minute = _tweet_minute(rng)
        second = rng.below(60)
        slots.append((d, hour, minute, second))
    slots.sort()

    tweets = []
    for i, (d, hour, minute, second) in enumerate(slots):
        up = dirs[(d, hour + 1)] > 0
        if spec.flip_before is not None and d < spec.flip_before:
            up = not up
        words = []
        if buy_words:
            agree = rng.uniform() < spec.signal_strength
            source = buy_words if up == agree else sell_words
            words.extend(rng.choice(source) for _ in range(spec.planted_per_tweet))
        if noise_words:
            words.extend(rng.choice(noise_words) for _ in range(spec.noise_per_tweet))
        # Fisher-Yates on the word order
        for a in range(len(words) - 1, 0, -1):
            b = rng.below(a + 1)
            words[a], words[b] = words[b], words[a]
        tags = [f"${spec.ticker}"]
        if rng.uniform() < spec.spam_fraction:
            tags.extend(f"${t}" for t in spam_tags[:2 + rng.below(3)])
        text = " ".join(tags + words)
        if rng.uniform() < spec.url_probability:
            text += f" https://t.co/{rng.next() & 0xFFFFFF:06x}"
        local = datetime.combine(d, time(hour, minute, second))
        tweets.append(Tweet.from_text(f"{spec.seed}-{i:06d}", exchange_to_utc(local), text))

    return SynthCorpus(spec, tweets, bars, buy_words, sell_words, dirs)


def recovery_score(ranked_terms: Sequence[str], truth, k: int) -> float:
    """Share of the top-``k`` ranked terms that were planted, out of min(k, #planted)."""
    planted = set(truth)
    if k <= 0 or not planted:
        return 0.0
    hits = len(set(ranked_terms[:k]) & planted)
    return hits / min(k, len(planted))


def spec_to_dict(spec: SynthSpec) -> dict:
    d = asdict(spec)
    for k in ("start", "end", "flip_before"):
        if d[k] is not None:
            d[k] = d[k].isoformat()
    return d
