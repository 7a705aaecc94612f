"""Validation accuracy over model x ranker x subset size."""
from datetime import date

from tweetsignal.labeler import label_all, split
from tweetsignal.sweeps import feature_sweep
from tweetsignal.synth import SynthSpec, generate

spec = SynthSpec(seed=4, n_tweets=12_000, n_noise_words=3000, start=date(2016, 1, 1), end=date(2016, 12, 30))
corpus = generate(spec)
docs, _ = label_all(corpus.tweets, corpus.bars, spec.ticker)
parts = split(docs, 0.8, seed=0)

sizes = (250, 500, 1000, 2000, 3000)
sweep = feature_sweep(parts.train, parts.validation, sizes=sizes)
grid = sweep.grid()

print("model ranker " + " ".join(f"{s:>6d}" for s in sizes))
for model in ("mnb", "lr"):
    for ranker in ("cs", "fv", "mi", "rfe"):
        row = [grid.get((model, ranker, s)) for s in sizes]
        print(f"{model:5s} {ranker:6s} " + " ".join("     -" if a is None else f"{a:6.3f}" for a in row))

best = sweep.best()
print("best:", best.model, best.ranker, best.size, round(best.accuracy, 3))
for note in sorted({c.note for c in sweep.cells if c.note}):
    print("note:", note)
