"""Label tweets by what the price did next.

A small synthetic corpus stands in for scraped tweets and minute bars.  Each
tweet in market hours gets Buy or Sell from the price 60 minutes later.
"""
from collections import Counter
from datetime import date

from tweetsignal.ingest import spam_filter
from tweetsignal.labeler import histogram_csv, label_all, temporal_distribution
from tweetsignal.synth import SynthSpec, generate

spec = SynthSpec(seed=1, n_tweets=4000, start=date(2016, 9, 1), end=date(2016, 12, 30), spam_fraction=0.2)
corpus = generate(spec)
print(len(corpus.tweets), "tweets,", len(corpus.bars), "minute bars")

# tweets naming 3+ cashtags are treated as spam
tweets, removed = spam_filter(corpus.tweets)
print(f"spam filter removed {removed:.1%}")

docs, skipped = label_all(tweets, corpus.bars, spec.ticker)
print(len(docs), "labelled")
for reason, n in sorted(skipped.items()):
    print(f"  skipped {n:5d}  {reason}")

print(Counter(d.label for d in docs))
first = docs[0]
print(first.timestamp, first.price_at, "->", first.price_after, first.label, " ".join(first.tokens))

by_hour, by_weekday = temporal_distribution(docs)
print(histogram_csv(by_hour))
