"""TF-IDF features and the three statistical rankers.

Planted words should float to the top of every ranking; noise words should not.
"""
from datetime import date

import numpy as np

from tweetsignal.labeler import label_all
from tweetsignal.select import chi2_scores, f_scores, mi_scores
from tweetsignal.synth import SynthSpec, generate, recovery_score
from tweetsignal.tokenizer import tokenize
from tweetsignal.vectorizer import fit_vocabulary, transform

print(tokenize("$AAPL soooo BULLISH!!! up 3% today https://t.co/xyz"))

spec = SynthSpec(seed=2, n_tweets=8000, n_buy_words=10, n_sell_words=10, n_noise_words=1000,
                 start=date(2016, 6, 1), end=date(2016, 12, 30))
corpus = generate(spec)
docs, _ = label_all(corpus.tweets, corpus.bars, spec.ticker)

vocab = fit_vocabulary(d.tokens for d in docs)
X = transform((d.tokens for d in docs), vocab).X
y = [d.label for d in docs]
print(X.shape, "matrix,", X.nnz, "non-zeros")

norms = np.sqrt(np.asarray(X.power(2).sum(axis=1)).ravel())
print("row norms:", sorted({float(v) for v in np.round(norms, 12)}))

for name, ranker in (("chi2", chi2_scores), ("F", f_scores), ("MI", mi_scores)):
    order = ranker(X, y).order()
    terms = [vocab.terms[i] for i in order]
    print(f"{name:4s} top 8: {' '.join(terms[:8])}   recovery@20 = {recovery_score(terms, corpus.planted, 20):.2f}")

print("planted buy: ", " ".join(corpus.buy_words))
print("planted sell:", " ".join(corpus.sell_words))
