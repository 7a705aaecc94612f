"""How much history to train on when word meanings drift.

Planted words swap meaning in October 2016, so training on older months
teaches the model the wrong thing for January 2017.
"""
from datetime import date

from tweetsignal.labeler import label_all
from tweetsignal.sweeps import peak_window, window_csv, window_sweep
from tweetsignal.synth import SynthSpec, generate

spec = SynthSpec(seed=21, n_tweets=20_000, flip_before=date(2016, 10, 1))
corpus = generate(spec)
docs, _ = label_all(corpus.tweets, corpus.bars, spec.ticker)

cells = window_sweep(docs, (2017, 1), range(1, 13), model="mnb", ranker="cs", k=1000)
print(window_csv(cells))
for c in cells:
    bar = "#" * int(round((c.accuracy or 0) * 50))
    print(f"{c.months:2d} months  {bar}")
print("best window:", peak_window(cells), "months")
