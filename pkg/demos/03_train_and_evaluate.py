"""Naive Bayes against logistic regression, with True Buy / True Sell rates.

The TBR/TSR gap is the quick check for a model that only ever says one thing.
"""
from datetime import date

import numpy as np

from tweetsignal.labeler import BUY, label_all, split
from tweetsignal.models import evaluate_predictions
from tweetsignal.pipeline import TextClassifier
from tweetsignal.synth import SynthSpec, generate

spec = SynthSpec(seed=3, n_tweets=10_000, start=date(2016, 3, 1), end=date(2016, 12, 30))
corpus = generate(spec)
docs, _ = label_all(corpus.tweets, corpus.bars, spec.ticker)
parts = split(docs, 0.8, seed=0)
print(len(parts.train), "train /", len(parts.validation), "validation")

for model in ("mnb", "lr"):
    clf = TextClassifier.fit(parts.train, model=model, ranker="cs", k=1000)
    r = clf.evaluate(parts.validation)
    print(f"{model}: accuracy {r.accuracy:.3f}  TBR {r.tbr:.3f}  TSR {r.tsr:.3f}  gap {r.tbr_tsr_gap:.3f}")
    if model == "lr":
        print("   newton iterations:", clf.model.n_iter, " final gradient:", f"{clf.model.grad_norm:.1e}")

# a degenerate always-Buy predictor can still post a respectable accuracy
truth = [d.label for d in parts.validation]
r = evaluate_predictions(truth, [BUY] * len(truth))
print(f"always Buy: accuracy {r.accuracy:.3f}  gap {r.tbr_tsr_gap:.1f}")

clf = TextClassifier.fit(parts.train, model="mnb", ranker="cs", k=1000)
print("strongest Sell words:", clf.signal_words("Sell", 8))
print("strongest Buy words: ", clf.signal_words("Buy", 8))
print("\n".join(clf.dictionary_csv().splitlines()[:4]))

# stock context as extra columns
clf = TextClassifier.fit(parts.train, model="mnb", ranker="cs", k=1000,
                         stock_features=("prior_trend", "volume_binary", "weekday"))
print("with stock features:", round(clf.evaluate(parts.validation).accuracy, 3))
print(np.round(clf.predict_proba(parts.validation[:5]), 3))
