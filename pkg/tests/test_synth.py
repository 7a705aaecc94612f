from datetime import date

import pytest

from tweetsignal.ingest import parse_bars, parse_tweets, serialize_bars, serialize_tweets
from tweetsignal.labeler import BUY, label_all, split
from tweetsignal.pipeline import TextClassifier
from tweetsignal.synth import SplitMix64, SynthSpec, generate, recovery_score, spec_to_dict, trading_days

SMALL = dict(start=date(2016, 3, 1), end=date(2016, 4, 29), n_tweets=2000, n_noise_words=300)


def test_splitmix_reference_stream():
    rng = SplitMix64(0)
    assert rng.next() == 0xE220A8397B1DCDAF
    assert rng.next() == 0x6E789E6AA1B965F4
    r = SplitMix64(1234567)
    assert [r.next() for _ in range(2)] == [6457827717110365317, 3203168211198807973]
    u = SplitMix64(3)
    assert all(0 <= u.uniform() < 1 for _ in range(1000))
    assert {SplitMix64(s).below(5) for s in range(200)} == set(range(5))


def test_determinism():
    a, b = generate(SynthSpec(seed=5, **SMALL)), generate(SynthSpec(seed=5, **SMALL))
    assert serialize_tweets(a.tweets) == serialize_tweets(b.tweets)
    assert serialize_bars(a.bars) == serialize_bars(b.bars)
    c = generate(SynthSpec(seed=6, **SMALL))
    assert serialize_tweets(a.tweets) != serialize_tweets(c.tweets)


def test_outputs_round_trip_and_satisfy_invariants(tmp_path):
    corpus = generate(SynthSpec(seed=2, **SMALL))
    paths = corpus.write(tmp_path)
    with open(paths["bars"]) as fh:
        bars = parse_bars(fh)
    with open(paths["tweets"]) as fh:
        tweets, errors = parse_tweets(fh)
    assert errors == [] and len(tweets) == 2000
    for b in bars:
        b.check()
        assert b.timestamp.weekday() < 5
    assert {b.timestamp.date() for b in bars} == set(trading_days(SMALL["start"], SMALL["end"]))
    assert (tmp_path / "planted_buy.txt").read_text().split() == corpus.buy_words
    assert all(t.local_time.time().minute != 0 for t in corpus.tweets)


def test_planted_agreement_tracks_signal_strength():
    spec = SynthSpec(seed=9, n_tweets=20_000, signal_strength=0.7)
    corpus = generate(spec)
    buy, sell = set(corpus.buy_words), set(corpus.sell_words)
    agree = 0
    for t in corpus.tweets:
        local = t.local_time
        up = corpus.directions[(local.date(), local.hour + 1)] > 0
        words = set(t.text.split())
        planted_up = bool(words & buy)
        assert planted_up != bool(words & sell)
        agree += planted_up == up
    assert agree / len(corpus.tweets) == pytest.approx(0.7, abs=0.02)


def test_labels_follow_planted_direction():
    corpus = generate(SynthSpec(seed=4, **SMALL))
    docs, _ = label_all(corpus.tweets, corpus.bars, "SYN")
    assert len(docs) > 1000
    for d in docs:
        local = d.timestamp
        assert (d.label == BUY) == (corpus.directions[(local.date(), local.hour + 1)] > 0)


def test_perfect_signal_gives_perfect_accuracy():
    corpus = generate(SynthSpec(seed=3, signal_strength=1.0, **{**SMALL, "n_noise_words": 0}))
    docs, _ = label_all(corpus.tweets, corpus.bars, "SYN")
    s = split(docs, 0.8, seed=1)
    clf = TextClassifier.fit(s.train, model="mnb", ranker="cs", k=1000)
    assert clf.evaluate(s.validation).accuracy == 1.0


def test_flip_reverses_planted_meaning():
    spec = SynthSpec(seed=8, flip_before=date(2016, 4, 1), signal_strength=1.0, **SMALL)
    corpus = generate(spec)
    buy = set(corpus.buy_words)
    for t in corpus.tweets[:300] + corpus.tweets[-300:]:
        local = t.local_time
        up = corpus.directions[(local.date(), local.hour + 1)] > 0
        if local.date() < spec.flip_before:
            up = not up
        assert bool(set(t.text.split()) & buy) == up


def test_spec_validation():
    for bad in (dict(signal_strength=0.4), dict(n_tweets=0), dict(n_buy_words=0),
                dict(n_buy_words=0, n_sell_words=0, n_noise_words=0), dict(end=date(2015, 1, 1))):
        with pytest.raises(ValueError):
            generate(SynthSpec(**bad))
    assert spec_to_dict(SynthSpec())["start"] == "2016-01-01"


def test_recovery_score():
    truth = ["a", "b", "c"]
    assert recovery_score(["c", "a", "b", "x"], truth, 3) == 1.0
    assert recovery_score(["x", "y", "z"], truth, 3) == 0.0
    assert recovery_score(["a", "b"], truth, 2) == 1.0
    assert recovery_score(["a", "x", "y", "z", "b"], truth, 5) == pytest.approx(2 / 3)
    assert recovery_score(["a"], [], 1) == 0.0
