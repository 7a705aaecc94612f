"""Hourly trading on a held-out month: trained model (A) against two lexicons (B, C).

B is a deliberately upbeat lexicon, which is the buy-and-hold trap: nearly
every order comes out Buy.
"""
from datetime import date
from pathlib import Path

from tweetsignal.backtest import (breakdown, equity_csv, equity_svg, lookahead_violations, posts_from_tweets,
                                  run_backtest, size_account)
from tweetsignal.labeler import as_index, label_all, split
from tweetsignal.lexicon import classify_lexicon, parse_scored, parse_wordlists, skew_report
from tweetsignal.pipeline import TextClassifier
from tweetsignal.synth import SynthSpec, generate

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
month = (date(2017, 1, 1), date(2017, 1, 31))

spec = SynthSpec(seed=7)
corpus = generate(spec)
docs, _ = label_all(corpus.tweets, corpus.bars, spec.ticker)
parts = split(docs, 0.8, seed=7, test_period=month)
clf = TextClassifier.fit(parts.train, model="mnb", ranker="cs", k=1000)

index = as_index(corpus.bars)
posts = posts_from_tweets(t for t in corpus.tweets if month[0] <= t.local_time.date() <= month[1])
account = size_account(index, period=month, ticker=spec.ticker)
print(f"account size: {account.size:.2f} (max price {account.max_price})")

upbeat = parse_scored([f"{w}\t0.5" for w in corpus.buy_words + corpus.sell_words[:5]], name="upbeat")
lists = parse_wordlists(corpus.buy_words, corpus.sell_words, name="finance")
methods = {
    "a": clf.classify_posts,
    "b": lambda ps: [classify_lexicon(p.tokens, upbeat) for p in ps],
    "c": lambda ps: [classify_lexicon(p.tokens, lists) for p in ps],
}

reports = []
for m, classify in methods.items():
    r = run_backtest(posts, index, classify, ticker=spec.ticker, period=month, method=m, account=account)
    reports.append(r)
    b = breakdown(r.trades)
    print(f"method {m}: {len(r.trades)} trades, pnl {r.gross_pnl}, monthly {float(r.return_rate):.2%}, "
          f"net {float(r.net_return_rate):.2%}, Buy share {b['Buy']['placed_pct']:.0f}%, "
          f"correct {b['total']['correct_pct']:.1f}%, look-ahead {len(lookahead_violations(r))}")

print("method b classifications:", skew_report(methods["b"](posts))["all"])

(out / "equity.csv").write_text(equity_csv(reports))
(out / "equity.svg").write_text(equity_svg(reports, title="synthetic month, methods A/B/C"))
print("wrote", out / "equity.svg")
