"""Validation sweeps: feature-subset size per model/ranker, and training-window length."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Sequence

import numpy as np

from . import models as M
from .labeler import apply_volume_threshold, encode_labels
from .pipeline import TextClassifier
from .select import RANKERS, UnsupportedModelError, rank, top_k
from .vectorizer import DocTermMatrix, append_stock_features, fit_vocabulary, transform

logger = logging.getLogger(__name__)

MODELS = ("mnb", "lr")
DEFAULT_SIZES = tuple(range(1000, 10001, 1000))
WINDOWS = tuple(range(1, 13))


@dataclass
class SweepCell:
    model: str
    ranker: str
    size: int
    accuracy: float | None
    effective_size: int | None = None
    note: str = ""


@dataclass
class FeatureSweep:
    cells: list = field(default_factory=list)
    skipped: list = field(default_factory=list)  # (model, ranker, reason)

    def grid(self) -> dict:
        return {(c.model, c.ranker, c.size): c.accuracy for c in self.cells}

    def best(self) -> SweepCell:
        scored = [c for c in self.cells if c.accuracy is not None]
        return max(scored, key=lambda c: c.accuracy)

    def to_csv(self, header_comment: str | None = None) -> str:
        out = io.StringIO()
        if header_comment:
            out.write(f"# {header_comment}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["model", "ranker", "size", "accuracy"])
        for c in self.cells:
            w.writerow([c.model, c.ranker, c.size, "" if c.accuracy is None else repr(c.accuracy)])
        return out.getvalue()


def _trainer(model: str, alpha: float, lam: float):
    def fit(X, y):
        return M.train(model, X, y, alpha=alpha, lam=lam)
    return fit


def feature_sweep(train_docs: Sequence, validation_docs: Sequence, models: Sequence[str] = MODELS,
                  rankers: Sequence[str] = RANKERS, sizes: Sequence[int] = DEFAULT_SIZES,
                  alpha: float = 1.0, lam: float = 1.0, stock_features: Sequence[str] = (),
                  step_frac: float = 0.1) -> FeatureSweep:
    """Validation accuracy for every (model, ranker, size) cell.

    Each ranker is run once per model (the statistical rankers once overall)
    and every size reuses that ordering.  RFE is run down to the smallest
    size, so its ordering covers all larger ones too.  Sizes above the
    vocabulary are clamped with a note.  Stock features, if any, are appended
    after selection.
    """
    if not train_docs or not validation_docs:
        raise ValueError("feature sweep needs non-empty training and validation sets")
    vocab = fit_vocabulary(d.tokens for d in train_docs)
    y = encode_labels([d.label for d in train_docs])
    Xtr = transform((d.tokens for d in train_docs), vocab).X
    Xva = transform((d.tokens for d in validation_docs), vocab).X
    truth = [d.label for d in validation_docs]
    mean_vol = (float(np.mean([d.hour_volume for d in train_docs]))
                if set(stock_features) & {"volume_int", "volume_binary"} else None)
    min_k = min(min(sizes), len(vocab))

    def with_stock(X, kept, docs):
        if not stock_features:
            return X
        if "volume_binary" in stock_features:
            docs = apply_volume_threshold(docs, mean_vol)
        m = DocTermMatrix(X.tocsr(), [vocab.terms[i] for i in kept], X.shape[1])
        return append_stock_features(m, docs, stock_features, mean_vol).X

    result = FeatureSweep()
    shared = {}
    for model in models:
        trainer = _trainer(model, alpha, lam)
        for ranker in rankers:
            try:
                if ranker == "rfe":
                    scores = rank(ranker, Xtr, y, model_trainer=trainer, target_k=min_k, step_frac=step_frac)
                else:
                    if ranker not in shared:
                        shared[ranker] = rank(ranker, Xtr, y)
                    scores = shared[ranker]
            except UnsupportedModelError as exc:
                result.skipped.append((model, ranker, str(exc)))
                logger.info("skipping %s/%s: %s", model, ranker, exc)
                continue
            for size in sizes:
                k = min(size, len(vocab))
                note = f"size {size} clamped to vocabulary size {len(vocab)}" if k < size else ""
                Xk, kept = top_k(Xtr, scores, k)
                fitted = trainer(with_stock(Xk, kept, train_docs), y)
                pred = fitted.predict(with_stock(Xva[:, kept], kept, validation_docs))
                acc = M.evaluate_predictions(truth, pred).accuracy
                result.cells.append(SweepCell(model, ranker, size, acc, k, note))
                logger.debug("%s/%s/%d: %.4f", model, ranker, size, acc)
    return result


# --- training window ---------------------------------------------------------

def _month_key(d) -> tuple[int, int]:
    t = d.timestamp
    return (t.year, t.month)


def _shift_month(ym: tuple[int, int], back: int) -> tuple[int, int]:
    idx = ym[0] * 12 + (ym[1] - 1) - back
    return (idx // 12, idx % 12 + 1)


@dataclass
class WindowCell:
    months: int
    accuracy: float | None
    n_train: int
    note: str = ""


def window_sweep(docs: Sequence, validation_month: tuple[int, int] | date, windows: Sequence[int] = WINDOWS,
                 model: str = "mnb", ranker: str = "cs", k: int = 5000, alpha: float = 1.0,
                 lam: float = 1.0, stock_features: Sequence[str] = ()) -> list[WindowCell]:
    """Accuracy on ``validation_month`` after training on the trailing ``w`` months, per ``w``.

    A window whose oldest month holds no documents is marked missing
    (accuracy None) rather than silently repeating the shorter window.
    """
    if isinstance(validation_month, date):
        validation_month = (validation_month.year, validation_month.month)
    by_month: dict = {}
    for d in docs:
        by_month.setdefault(_month_key(d), []).append(d)
    validation = by_month.get(validation_month, [])
    if not validation:
        raise ValueError(f"no documents in validation month {validation_month[0]}-{validation_month[1]:02d}")
    earlier = [m for m in by_month if m < validation_month]
    if not earlier:
        raise ValueError("no history before the validation month")
    first = min(earlier)
    history = (validation_month[0] - first[0]) * 12 + validation_month[1] - first[1]
    if max(windows) > history:
        raise ValueError(f"window of {max(windows)} months exceeds the {history} months of history available")

    cells = []
    for w in windows:
        months = [_shift_month(validation_month, b) for b in range(1, w + 1)]
        oldest = months[-1]
        train = [d for m in months for d in by_month.get(m, [])]
        if not by_month.get(oldest):
            cells.append(WindowCell(w, None, len(train), f"no documents in {oldest[0]}-{oldest[1]:02d}"))
            continue
        try:
            clf = TextClassifier.fit(train, model=model, ranker=ranker, k=k, alpha=alpha, lam=lam,
                                     stock_features=stock_features)
        except ValueError as exc:  # e.g. a single-class window
            cells.append(WindowCell(w, None, len(train), str(exc)))
            continue
        cells.append(WindowCell(w, clf.evaluate(validation).accuracy, len(train), "; ".join(clf.notes)))
    return cells


def window_csv(cells: Sequence[WindowCell], header_comment: str | None = None) -> str:
    out = io.StringIO()
    if header_comment:
        out.write(f"# {header_comment}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["window_months", "accuracy", "n_train"])
    for c in cells:
        w.writerow([c.months, "" if c.accuracy is None else repr(c.accuracy), c.n_train])
    return out.getvalue()


def peak_window(cells: Sequence[WindowCell]) -> int:
    scored = [c for c in cells if c.accuracy is not None]
    if not scored:
        raise ValueError("no scored windows")
    return max(scored, key=lambda c: (c.accuracy, -c.months)).months
