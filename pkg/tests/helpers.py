"""Small builders shared by the test modules."""

from datetime import date, datetime, time, timedelta
from decimal import Decimal

from tweetsignal.ingest import MinuteBar, Tweet, exchange_to_utc
from tweetsignal.labeler import LabeledDocument


def session_bars(day: date, price="100.00", changes=None, volume=1000, skip=()):
    """Flat minute bars for one session; ``changes`` maps "HH:MM" to a new close from that minute on."""
    changes = {k: Decimal(v) for k, v in (changes or {}).items()}
    level = Decimal(price)
    bars, prev = [], None
    t = datetime.combine(day, time(9, 30))
    while t.time() <= time(16, 0):
        key = t.strftime("%H:%M")
        level = changes.get(key, level)
        if key not in skip:
            o = level if prev is None else prev
            bars.append(MinuteBar(t, o, max(o, level), min(o, level), level, volume))
            prev = level
        t += timedelta(minutes=1)
    return bars


def tweet_at(local: datetime, text: str = "$AAPL up", id: str = "t"):
    return Tweet.from_text(id, exchange_to_utc(local), text)


def doc(label: str, tokens=("w",), ts=datetime(2016, 5, 2, 11, 0), **kw):
    base = dict(tweet_id=kw.pop("tweet_id", "d"), ticker="X", timestamp=ts, tokens=tuple(tokens), label=label,
                price_before=Decimal("1"), price_at=Decimal("1"), price_after=Decimal("1"))
    base.update(kw)
    return LabeledDocument(**base)
