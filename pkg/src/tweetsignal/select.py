"""Univariate feature rankers (chi-squared, ANOVA F, mutual information),
recursive feature elimination, and top-k column selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .labeler import encode_labels

RANKERS = ("cs", "fv", "mi", "rfe")
# Relative size below which a sum of squares is treated as exactly zero.
DEGENERATE_RTOL = 1e-12


class UnsupportedModelError(TypeError):
    """The model exposes no per-feature weights, so it cannot drive RFE."""


@dataclass
class RankerScores:
    scores: np.ndarray
    ranker: str
    rounds: int | None = None  # elimination rounds, RFE only

    def __len__(self) -> int:
        return len(self.scores)

    def order(self) -> np.ndarray:
        """Feature indices best-first; ties go to the lower index."""
        return np.argsort(-self.scores, kind="stable")


def _check_binary(y: np.ndarray) -> None:
    if len(np.unique(y)) < 2:
        raise ValueError("feature ranking needs documents from both classes")


def _presence(X) -> sp.csr_matrix:
    P = sp.csr_matrix(X, copy=True)
    P.data = (P.data > 0).astype(float)
    P.eliminate_zeros()
    return P


def contingency(X, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-feature document counts N11, N10, N01, N00 (term present?, class Buy?)."""
    y = encode_labels(labels).astype(float)
    P = _presence(X)
    n_buy = y.sum()
    n_sell = len(y) - n_buy
    n11 = np.asarray(P.T @ y).ravel()
    n10 = np.asarray(P.sum(axis=0)).ravel() - n11
    return n11, n10, n_buy - n11, n_sell - n10


def chi2_scores(X, labels) -> RankerScores:
    y = encode_labels(labels)
    _check_binary(y)
    n11, n10, n01, n00 = contingency(X, y)
    n = len(y)
    observed = np.stack([n11, n10, n01, n00])
    row = np.stack([n11 + n10, n11 + n10, n01 + n00, n01 + n00])
    col = np.stack([n11 + n01, n10 + n00, n11 + n01, n10 + n00])
    expected = row * col / n
    with np.errstate(divide="ignore", invalid="ignore"):
        cells = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return RankerScores(cells.sum(axis=0), "cs")


def mi_scores(X, labels) -> RankerScores:
    y = encode_labels(labels)
    _check_binary(y)
    n11, n10, n01, n00 = contingency(X, y)
    n = float(len(y))
    joint = np.stack([n11, n10, n01, n00]) / n
    p_t = np.stack([n11 + n10, n11 + n10, n01 + n00, n01 + n00]) / n
    p_c = np.stack([n11 + n01, n10 + n00, n11 + n01, n10 + n00]) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(joint > 0, joint * np.log(joint / (p_t * p_c)), 0.0)
    return RankerScores(terms.sum(axis=0), "mi")


def f_scores(X, labels) -> RankerScores:
    """One-way ANOVA F with two groups over the real-valued weights.

    A feature whose within-group sum of squares vanishes while the group means
    differ separates the classes perfectly; it gets the largest finite score
    plus one.  A feature constant across all documents scores 0.
    """
    y = encode_labels(labels)
    _check_binary(y)
    Xc = sp.csc_matrix(X, dtype=float) if sp.issparse(X) else np.asarray(X, dtype=float)
    n = len(y)
    k = 2
    total_sq = np.asarray(Xc.multiply(Xc).sum(axis=0) if sp.issparse(Xc) else (Xc * Xc).sum(axis=0)).ravel()
    grand = np.asarray(Xc.sum(axis=0)).ravel() / n
    ssb = np.zeros(Xc.shape[1])
    ssw = np.zeros(Xc.shape[1])
    for g in (0, 1):
        rows = np.flatnonzero(y == g)
        sub = Xc[rows]
        n_g = len(rows)
        s = np.asarray(sub.sum(axis=0)).ravel()
        sq = np.asarray(sub.multiply(sub).sum(axis=0) if sp.issparse(sub) else (sub * sub).sum(axis=0)).ravel()
        mean = s / n_g
        ssb += n_g * (mean - grand) ** 2
        ssw += np.maximum(sq - n_g * mean ** 2, 0.0)
    scale = np.maximum(total_sq, np.finfo(float).tiny)
    zero_b = ssb <= DEGENERATE_RTOL * scale
    zero_w = ssw <= DEGENERATE_RTOL * scale
    f = np.zeros(Xc.shape[1])
    ok = ~zero_w
    f[ok] = (ssb[ok] / (k - 1)) / (ssw[ok] / (n - k))
    f[zero_b] = 0.0
    separating = zero_w & ~zero_b
    if separating.any():
        finite = f[~separating]
        f[separating] = (finite.max() if finite.size else 0.0) + 1.0
    return RankerScores(f, "fv")


def rfe(model_trainer: Callable, X, labels, target_k: int, step_frac: float = 0.1) -> RankerScores:
    """Recursive feature elimination.

    ``model_trainer(X, y)`` must return a model with ``feature_weights()``.
    Each round retrains on the surviving columns and drops the
    ``ceil(step_frac * remaining)`` lowest-weight ones (never going below
    ``target_k``).  A feature's score is the round it was dropped in, plus a
    fraction in [0, 1) giving its weight rank within that round; survivors get
    the final round number, ranked by the last model's weights.
    """
    y = encode_labels(labels)
    X = sp.csc_matrix(X) if sp.issparse(X) else np.asarray(X)
    n_features = X.shape[1]
    scores = np.zeros(n_features)
    alive = np.arange(n_features)
    rnd = 0
    while True:
        model = model_trainer(X[:, alive], y)
        if not hasattr(model, "feature_weights"):
            raise UnsupportedModelError(f"{type(model).__name__} exposes no feature weights")
        w = np.asarray(model.feature_weights(), dtype=float)
        order = np.lexsort((alive, w))  # ascending weight, lower index first on ties
        n_drop = min(math.ceil(step_frac * len(alive)), len(alive) - target_k)
        if n_drop <= 0:
            scores[alive[order]] = rnd + np.arange(len(alive)) / len(alive)
            break
        dropped = order[:n_drop]
        scores[alive[dropped]] = rnd + np.arange(n_drop) / n_drop
        alive = np.sort(alive[order[n_drop:]])
        rnd += 1
    return RankerScores(scores, "rfe", rounds=rnd)


def rank(ranker: str, X, labels, model_trainer: Callable | None = None, target_k: int | None = None,
         step_frac: float = 0.1) -> RankerScores:
    if ranker == "cs":
        return chi2_scores(X, labels)
    if ranker == "fv":
        return f_scores(X, labels)
    if ranker == "mi":
        return mi_scores(X, labels)
    if ranker == "rfe":
        if model_trainer is None:
            raise ValueError("rfe needs a model trainer")
        return rfe(model_trainer, X, labels, target_k if target_k is not None else 1, step_frac)
    raise ValueError(f"unknown ranker {ranker!r}; expected one of {RANKERS}")


def top_k(X, scores: RankerScores, k: int):
    """Keep the ``k`` best columns, best-first.  Returns (reduced X, kept indices)."""
    if k <= 0:
        raise ValueError("k must be positive")
    if k > X.shape[1]:
        raise ValueError(f"k={k} exceeds the {X.shape[1]} available features")
    kept = scores.order()[:k]
    Xr = sp.csc_matrix(X)[:, kept].tocsr() if sp.issparse(X) else np.asarray(X)[:, kept]
    return Xr, kept
