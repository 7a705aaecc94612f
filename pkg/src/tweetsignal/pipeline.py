"""Vocabulary + ranker selection + optional stock features + classifier, as one object."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import models as M
from .labeler import (BUY, HOUR, SELL, PriceLookupError, apply_volume_threshold, as_index, decode_labels,
                      encode_labels)
from .select import rank, top_k
from .vectorizer import DocTermMatrix, Vocabulary, append_stock_features, fit_vocabulary, transform

logger = logging.getLogger(__name__)

PIPELINE_FORMAT_VERSION = 1


@dataclass
class _Context:
    """Stock context for a post that was never labelled (e.g. during backtesting)."""

    prior_trend: int
    hour_volume: int
    volume_high: int
    weekday: int


@dataclass
class TextClassifier:
    vocab: Vocabulary
    kept: np.ndarray  # word-column indices, best-first
    scores: np.ndarray  # ranker score of each kept column
    model: object
    model_kind: str
    ranker: str
    stock_features: tuple = ()
    mean_hour_volume: float | None = None
    notes: list = field(default_factory=list)

    @classmethod
    def fit(cls, docs: Sequence, model: str = "mnb", ranker: str = "cs", k: int = 5000,
            alpha: float = 1.0, lam: float = 1.0, stock_features: Sequence[str] = (),
            mean_hour_volume: float | None = None, step_frac: float = 0.1) -> "TextClassifier":
        vocab = fit_vocabulary(d.tokens for d in docs)
        y = encode_labels([d.label for d in docs])
        X = transform((d.tokens for d in docs), vocab).X
        notes = []
        if k > len(vocab):
            notes.append(f"k={k} clamped to vocabulary size {len(vocab)}")
            k = len(vocab)

        def trainer(Xs, ys):
            return M.train(model, Xs, ys, alpha=alpha, lam=lam)

        scores = rank(ranker, X, y, model_trainer=trainer, target_k=k, step_frac=step_frac)
        Xk, kept = top_k(X, scores, k)
        if set(stock_features) & {"volume_int", "volume_binary"} and mean_hour_volume is None:
            mean_hour_volume = float(np.mean([d.hour_volume for d in docs]))
        self = cls(vocab, kept, scores.scores[kept], None, model, ranker, tuple(stock_features),
                   mean_hour_volume, notes)
        self.model = trainer(self._with_stock(Xk, docs), y)
        return self

    def _with_stock(self, Xk, docs):
        if not self.stock_features:
            return Xk
        if "volume_binary" in self.stock_features:  # flag relative to the training mean
            docs = apply_volume_threshold(docs, self.mean_hour_volume)
        m = DocTermMatrix(Xk.tocsr(), [self.vocab.terms[i] for i in self.kept], Xk.shape[1])
        return append_stock_features(m, docs, self.stock_features, self.mean_hour_volume).X

    def features(self, docs: Sequence):
        X = transform((d.tokens for d in docs), self.vocab).X
        return self._with_stock(X[:, self.kept], docs)

    def predict(self, docs: Sequence) -> list[str]:
        if not docs:
            return []
        return decode_labels(self.model.predict(self.features(docs)))

    def predict_proba(self, docs: Sequence) -> np.ndarray:
        return self.model.predict_proba(self.features(docs))

    def evaluate(self, docs: Sequence) -> M.EvaluationReport:
        return M.evaluate_predictions([d.label for d in docs], self.predict(docs))

    def classify_posts(self, posts: Sequence, bars=None) -> list[str]:
        """Labels for backtest posts; stock features are rebuilt from ``bars`` when needed."""
        if not self.stock_features:
            return self.predict(posts)
        if bars is None:
            raise ValueError("this classifier uses stock features; pass the bars")
        index = as_index(bars)
        ctx = []
        for p in posts:
            minute = p.timestamp.replace(second=0, microsecond=0)
            try:
                now, before = index.price_at(minute), index.price_at(minute - HOUR)
                vol = index.volume_between(minute - HOUR, minute)
            except PriceLookupError:
                now = before = 0
                vol = 0
            ctx.append(_Context(int(now > before), vol, 0, min(p.timestamp.weekday(), 4)))
        X = transform((p.tokens for p in posts), self.vocab).X[:, self.kept]
        return decode_labels(self.model.predict(self._with_stock(X, ctx)))

    # --- reporting & persistence ---

    def dictionary(self) -> list[tuple]:
        """(rank, term, ranker score, buy weight, sell weight) per kept word, best-first.

        For MNB the weights are the log conditional probabilities; for LR the
        Buy weight is the coefficient and the Sell weight its negation.
        """
        rows = []
        for r, (col, score) in enumerate(zip(self.kept, self.scores), start=1):
            j = r - 1
            if self.model_kind == "mnb":
                bw, sw = self.model.feature_log_prob[1, j], self.model.feature_log_prob[0, j]
            else:
                bw, sw = self.model.theta[j], -self.model.theta[j]
            rows.append((r, self.vocab.terms[col], float(score), float(bw), float(sw)))
        return rows

    def dictionary_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["rank", "term", "score", "buy_weight", "sell_weight"])
        for r, term, score, bw, sw in self.dictionary():
            w.writerow([r, term, repr(score), repr(bw), repr(sw)])
        return out.getvalue()

    def signal_words(self, side: str = SELL, n: int = 20) -> list[str]:
        """Kept words leaning most strongly to ``side``."""
        rows = self.dictionary()
        lean = [(bw - sw, term) for _, term, _, bw, sw in rows]
        lean.sort(reverse=(side == BUY))
        return [t for _, t in lean[:n]]

    def to_dict(self) -> dict:
        return {
            "format_version": PIPELINE_FORMAT_VERSION,
            "model_kind": self.model_kind,
            "ranker": self.ranker,
            "model": self.model.to_dict(),
            "vocabulary": self.vocab.to_dict(),
            "selected": self.kept.tolist(),
            "selected_scores": self.scores.tolist(),
            "stock_features": list(self.stock_features),
            "mean_hour_volume": self.mean_hour_volume,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TextClassifier":
        if d.get("format_version") != PIPELINE_FORMAT_VERSION:
            raise ValueError(f"unsupported model file version {d.get('format_version')!r}")
        return cls(Vocabulary.from_dict(d["vocabulary"]), np.asarray(d["selected"], dtype=np.int64),
                   np.asarray(d["selected_scores"], dtype=float), M.model_from_dict(d["model"]),
                   d["model_kind"], d["ranker"], tuple(d["stock_features"]), d["mean_hour_volume"],
                   list(d.get("notes", [])))

    def dumps(self, **metadata) -> str:
        return json.dumps({**self.to_dict(), "metadata": metadata}, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "TextClassifier":
        return cls.from_dict(json.loads(text))
