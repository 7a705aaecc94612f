from datetime import date, datetime, timezone
from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st

from helpers import session_bars
from tweetsignal.ingest import (IngestError, MinuteBar, TradingCalendar, Tweet, exchange_to_utc,
                                extract_cashtags, parse_bars, parse_timestamp, parse_tweets,
                                select_for_stock, serialize_bars, serialize_tweets, spam_filter,
                                utc_offset_hours, utc_to_exchange)

HEADER = "date,time,open,high,low,close,volume\n"


def test_parse_single_tweet():
    line = '{"id":"1","timestamp":"2016-05-02T14:03:11Z","text":"$AAPL to the moon"}\n'
    tweets, errors = parse_tweets([line])
    assert errors == []
    (t,) = tweets
    assert t.id == "1" and t.cashtags == {"AAPL"}
    assert t.timestamp == datetime(2016, 5, 2, 14, 3, 11, tzinfo=timezone.utc)


def test_bad_line_among_valid_ones_is_reported_not_fatal():
    good = '{"id":"%d","timestamp":"2016-05-02T14:03:11Z","text":"x"}\n'
    lines = [good % 1, "not json\n", good % 2, good % 3]
    tweets, errors = parse_tweets(lines)
    assert len(tweets) == 3
    assert [e.line for e in errors] == [2]


def test_mostly_garbage_file_is_rejected():
    good = '{"id":"1","timestamp":"2016-05-02T14:03:11Z","text":"x"}\n'
    with pytest.raises(IngestError):
        parse_tweets([good] + ["garbage\n"] * 5)


def test_missing_field_counts_as_bad_line():
    tweets, errors = parse_tweets(['{"id":"1","text":"x"}\n'] + ['{"id":"2","timestamp":"2016-05-02T14:03:11Z","text":"y"}\n'] * 20)
    assert len(tweets) == 20 and "timestamp" in errors[0].message


def test_cashtags_are_case_normalised():
    assert extract_cashtags("$aapl vs $TSLA") == {"AAPL", "TSLA"}


@pytest.mark.parametrize("text,tags", [
    ("$5 off", set()),
    ("price $12.50", set()),
    ("US$AAPL", set()),
    ("$TOOLONG", set()),
    ("$fb, $goog!", {"FB", "GOOG"}),
    ("$$AAPL", set()),
])
def test_cashtag_edges(text, tags):
    assert extract_cashtags(text) == tags


def test_tweet_round_trip():
    t = Tweet.from_text("9", datetime(2016, 3, 1, 15, 0, 5, tzinfo=timezone.utc), "héllo $FB")
    (back,), _ = parse_tweets(serialize_tweets([t]).splitlines(keepends=True))
    assert back == t


def test_timestamp_offsets():
    assert parse_timestamp("2016-05-02T10:03:11-04:00") == datetime(2016, 5, 2, 14, 3, 11, tzinfo=timezone.utc)
    assert parse_timestamp("2016-05-02T14:03:11") == parse_timestamp("2016-05-02T14:03:11Z")
    with pytest.raises(ValueError):
        parse_timestamp("yesterday")


@pytest.mark.parametrize("utc,offset", [
    (datetime(2016, 3, 13, 6, 59), -5),  # just before the spring change (2nd Sunday of March)
    (datetime(2016, 3, 13, 7, 0), -4),
    (datetime(2016, 11, 6, 5, 59), -4),  # first Sunday of November
    (datetime(2016, 11, 6, 6, 0), -5),
    (datetime(2006, 4, 2, 7, 0), -4),  # pre-2007 rule: first Sunday of April
    (datetime(2006, 10, 29, 6, 0), -5),  # ... to the last Sunday of October
    (datetime(2017, 1, 3, 15, 0), -5),
])
def test_dst_offsets(utc, offset):
    assert utc_offset_hours(utc.replace(tzinfo=timezone.utc)) == offset


def test_exchange_conversion_round_trip():
    local = datetime(2016, 7, 1, 10, 15)
    assert utc_to_exchange(exchange_to_utc(local)) == local
    assert exchange_to_utc(local).hour == 14


def test_parse_bar_row():
    (bar,) = parse_bars([HEADER, "2017-01-03,09:30,115.80,116.33,114.76,116.15,28781865\n"])
    assert bar == MinuteBar(datetime(2017, 1, 3, 9, 30), Decimal("115.80"), Decimal("116.33"),
                            Decimal("114.76"), Decimal("116.15"), 28781865)


@pytest.mark.parametrize("rows,needle", [
    (["2017-01-03,09:30,1,1,1,1,1\n", "2017-01-03,09:30,1,1,1,1,1\n"], "duplicate"),
    (["2017-01-03,09:31,1,1,1,1,1\n", "2017-01-03,09:30,1,1,1,1,1\n"], "non-monotonic"),
    (["2017-01-03,09:30,1,1,2,1,1\n"], "row 2"),
    (["2017-01-03,08:30,1,1,1,1,1\n"], "market hours"),
    (["2017-01-03,09:30,1,1,1,1,-5\n"], "volume"),
    (["2017-01-03,9:30,1,1,1,1,1\n"], "row 2.*HH:MM"),
    (["2017-1-03,09:30,1,1,1,1,1\n"], "row 2"),
    (["2017-01-03,09:30:00,1,1,1,1,1\n"], "row 2"),
])
def test_bad_bars_name_the_row(rows, needle):
    with pytest.raises(IngestError, match=needle):
        parse_bars([HEADER] + rows)


def test_bar_header_checked():
    with pytest.raises(IngestError, match="header"):
        parse_bars(["date,open\n"])


def test_bars_round_trip():
    bars = session_bars(date(2016, 5, 2), "101.25", {"10:15": "101.40", "12:00": "99.99"})
    assert parse_bars(serialize_bars(bars).splitlines(keepends=True)) == bars


def test_calendar_from_bars():
    bars = session_bars(date(2016, 5, 2)) + session_bars(date(2016, 5, 4))
    cal = TradingCalendar.from_bars(bars)
    assert cal.is_trading_day(date(2016, 5, 2)) and not cal.is_trading_day(date(2016, 5, 3))


def _tweets(tag_sets):
    now = datetime(2016, 5, 2, 14, tzinfo=timezone.utc)
    return [Tweet.from_text(str(i), now, " ".join("$" + t for t in tags)) for i, tags in enumerate(tag_sets)]


def test_spam_filter_threshold():
    kept, frac = spam_filter(_tweets([("AAPL", "TSLA", "FB"), ("AAPL", "TSLA")]))
    assert [t.id for t in kept] == ["1"] and frac == 0.5


def test_spam_fraction_arithmetic():
    tweets = _tweets([("A", "B", "C")] * 24 + [("A",)] * 76)
    kept, frac = spam_filter(tweets)
    assert frac == 0.24 and len(kept) == 76
    assert spam_filter([]) == ([], 0.0)


@given(st.lists(st.lists(st.sampled_from(["AAPL", "FB", "TSLA", "MSFT", "GOOG"]), max_size=5), max_size=30))
@settings(max_examples=50, deadline=None)
def test_spam_filter_idempotent_and_conserving(tag_sets):
    tweets = _tweets(tag_sets)
    kept, frac = spam_filter(tweets)
    again, frac2 = spam_filter(kept)
    assert again == kept and frac2 == 0.0
    assert len(kept) + round(frac * len(tweets)) == len(tweets)


def test_select_for_stock():
    tweets = _tweets([("AAPL",), ("TSLA",), ("AAPL", "TSLA")])
    assert [t.id for t in select_for_stock(tweets, "aapl")] == ["0", "2"]
    assert select_for_stock([], "AAPL") == []
    assert select_for_stock(tweets, "FB") == []
