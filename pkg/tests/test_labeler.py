from collections import Counter
from datetime import date, datetime
from decimal import Decimal

import pytest

from helpers import doc, session_bars, tweet_at
from tweetsignal.labeler import (BUY, SELL, LabeledDocument, PriceLookupError, Skip, apply_volume_threshold,
                                 as_index, attach_context, decode_labels, encode_labels, histogram_csv,
                                 label_all, label_tweet, mean_hour_volume, price_at, read_jsonl, split,
                                 temporal_distribution, write_jsonl)

MON = date(2016, 5, 2)


def test_price_at_exact_and_carried_forward():
    bars = session_bars(MON, "100.00", {"10:00": "100.10", "10:01": "100.20"}, skip={"10:02", "10:03"})
    assert price_at(bars, datetime(2016, 5, 2, 10, 1)) == Decimal("100.20")
    assert price_at(bars, datetime(2016, 5, 2, 10, 2)) == Decimal("100.20")
    assert price_at(bars, datetime(2016, 5, 2, 10, 1, 59)) == Decimal("100.20")
    with pytest.raises(PriceLookupError):
        price_at(bars, datetime(2016, 5, 2, 9, 0))
    with pytest.raises(PriceLookupError):
        price_at(bars, datetime(2016, 5, 3, 11, 0))  # no session that day


def test_carry_forward_stops_at_session_start():
    bars = session_bars(MON) + session_bars(date(2016, 5, 3), skip={f"09:{m}" for m in range(30, 60)})
    with pytest.raises(PriceLookupError):
        price_at(bars, datetime(2016, 5, 3, 9, 45))


@pytest.mark.parametrize("after,label", [("100.50", BUY), ("99.90", SELL)])
def test_label_direction(after, label):
    bars = session_bars(MON, "100.00", {"12:00": after})
    out = label_tweet(tweet_at(datetime(2016, 5, 2, 11, 0, 30)), bars, "AAPL")
    assert out.label == label
    assert out.price_at == Decimal("100.00") and out.price_after == Decimal(after)
    assert out.timestamp == datetime(2016, 5, 2, 11, 0, 30)


@pytest.mark.parametrize("local,reason", [
    (datetime(2016, 5, 2, 15, 30), "exit-after-close"),
    (datetime(2016, 5, 2, 10, 0), "first-hour"),
    (datetime(2016, 5, 2, 8, 0), "outside-market-hours"),
    (datetime(2016, 5, 2, 17, 0), "outside-market-hours"),
    (datetime(2016, 5, 7, 12, 0), "non-trading-day"),  # Saturday
    (datetime(2016, 5, 3, 12, 0), "non-trading-day"),  # weekday without bars (holiday)
    (datetime(2016, 5, 2, 12, 0), "unchanged-price"),
])
def test_skip_reasons(local, reason):
    assert label_tweet(tweet_at(local), session_bars(MON)) == Skip(reason)


def test_missing_data_skip():
    late_open = session_bars(MON, skip={f"{h:02d}:{m:02d}" for h in (9, 10) for m in range(60)})
    assert label_tweet(tweet_at(datetime(2016, 5, 2, 11, 30)), late_open) == Skip("missing-data")


def test_context_features():
    bars = session_bars(MON, "99.00", {"11:00": "100.00", "12:00": "101.00"}, volume=2000)
    d = label_tweet(tweet_at(datetime(2016, 5, 2, 11, 0)), bars)
    assert d.prior_trend == 1 and d.price_before == Decimal("99.00")
    assert d.hour_volume == 60 * 2000
    assert d.weekday == 0 and d.volume_high == 0
    assert attach_context(d, bars, 4_000_000.0).volume_high == 0
    assert attach_context(d, bars, 100_000.0).volume_high == 1


def test_volume_threshold_uses_given_mean():
    docs = [doc(BUY, hour_volume=5_000_000), doc(SELL, hour_volume=3_000_000)]
    assert mean_hour_volume(docs) == 4_000_000
    assert [d.volume_high for d in apply_volume_threshold(docs, 4_000_000)] == [1, 0]


def test_label_rule_and_windows_on_synthetic(small_corpus):
    corpus, docs, skipped = small_corpus
    assert docs and sum(skipped.values()) + len(docs) == len(corpus.tweets)
    for d in docs:
        assert (d.label == BUY) == (d.price_after > d.price_at)
        assert min(d.price_before, d.price_at, d.price_after) > 0
        assert 0 <= d.weekday <= 4
        t = d.timestamp
        assert (t.hour, t.minute) >= (10, 30) and (t.hour, t.minute) <= (15, 0)


def test_split_ratio_and_determinism():
    docs = [doc(BUY if i % 2 else SELL, tweet_id=str(i), ts=datetime(2016, 5, 2, 11, i)) for i in range(10)]
    a = split(docs, 0.8, 7, (date(2017, 1, 1), date(2017, 1, 31)))
    b = split(list(reversed(docs)), 0.8, 7, (date(2017, 1, 1), date(2017, 1, 31)))
    assert (len(a.train), len(a.validation), len(a.test)) == (8, 2, 0)
    assert a == b
    assert {d.tweet_id for d in a.train} | {d.tweet_id for d in a.validation} == {str(i) for i in range(10)}


def test_split_holds_out_test_period():
    docs = [doc(BUY, tweet_id="a", ts=datetime(2016, 12, 30, 11)), doc(SELL, tweet_id="b", ts=datetime(2017, 1, 3, 11))]
    s = split(docs, 0.5, 0, (date(2017, 1, 1), date(2017, 1, 31)))
    assert [d.tweet_id for d in s.test] == ["b"]
    with pytest.raises(ValueError):
        split(docs[1:], 0.8, 0, (date(2017, 1, 1), date(2017, 1, 31)))


def test_temporal_distribution():
    docs = [doc(BUY, ts=datetime(2016, 5, 2, 10, i)) for i in range(3)] + [doc(SELL, ts=datetime(2016, 5, 3, 11, 5))]
    by_hour, by_day = temporal_distribution(docs)
    assert by_hour == {10: (3, 0), 11: (0, 1)}
    assert by_day == {0: (3, 0), 1: (0, 1)}
    assert temporal_distribution([]) == ({}, {})
    assert histogram_csv(by_hour) == "key,buy,sell\n10,3,0\n11,0,1\n"


def test_temporal_partition_identity(small_corpus):
    _, docs, _ = small_corpus
    by_hour, by_day = temporal_distribution(docs)
    totals = Counter(d.label for d in docs)
    for grouping in (by_hour, by_day):
        assert sum(b for b, _ in grouping.values()) == totals[BUY]
        assert sum(s for _, s in grouping.values()) == totals[SELL]


def test_jsonl_round_trip(tmp_path, small_corpus):
    _, docs, _ = small_corpus
    path = tmp_path / "docs.jsonl"
    write_jsonl(docs[:50], path)
    assert read_jsonl(path) == docs[:50]
    assert LabeledDocument.from_json(docs[0].to_json()) == docs[0]


def test_label_codes():
    assert encode_labels([BUY, SELL]).tolist() == [1, 0]
    assert decode_labels([0, 1]) == [SELL, BUY]
    with pytest.raises(ValueError):
        encode_labels(["Hold"])


def test_label_all_sorted(small_corpus):
    corpus, _, _ = small_corpus
    docs, _ = label_all(reversed(corpus.tweets[:200]), as_index(corpus.bars), "SYN")
    assert docs == sorted(docs, key=lambda d: (d.timestamp, d.tweet_id))
