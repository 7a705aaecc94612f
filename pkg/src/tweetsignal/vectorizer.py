"""Sparse TF-IDF document-term matrices.

Raw term counts are scaled by the smoothed idf ``ln((1+N)/(1+df)) + 1`` and
each row is L2-normalised.  Stock feature columns may be appended afterwards;
they are left unnormalised.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

STOCK_FEATURES = ("prior_trend", "volume_int", "volume_binary", "weekday")
WEEKDAY_NAMES = tuple(f"weekday_{i}" for i in range(5))


@dataclass
class Vocabulary:
    terms: list
    df: np.ndarray
    n_docs: int
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def idf(self) -> np.ndarray:
        return np.log((1.0 + self.n_docs) / (1.0 + self.df)) + 1.0

    def to_dict(self) -> dict:
        return {"terms": list(self.terms), "df": self.df.tolist(), "n_docs": self.n_docs}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(list(d["terms"]), np.asarray(d["df"], dtype=np.int64), int(d["n_docs"]))


@dataclass
class DocTermMatrix:
    X: sp.csr_matrix
    names: list
    n_word_cols: int

    @property
    def shape(self):
        return self.X.shape

    def word_block(self) -> sp.csr_matrix:
        return self.X[:, : self.n_word_cols]

    def to_coo_text(self) -> str:
        coo = self.X.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return "".join(f"{coo.row[i]},{coo.col[i]},{float(coo.data[i])!r}\n" for i in order)


def fit_vocabulary(train_docs: Iterable[Sequence[str]]) -> Vocabulary:
    df: Counter = Counter()
    n = 0
    for toks in train_docs:
        n += 1
        df.update(set(toks))
    if not n or not df:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    terms = sorted(df)
    return Vocabulary(terms, np.array([df[t] for t in terms], dtype=np.int64), n)


def transform(docs: Iterable[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    idf = vocab.idf
    indptr, indices, data = [0], [], []
    for toks in docs:
        counts = Counter(vocab.index[t] for t in toks if t in vocab.index)
        cols = sorted(counts)
        vals = np.array([counts[c] * idf[c] for c in cols], dtype=float)
        norm = np.sqrt(vals @ vals) if len(vals) else 0.0
        indices.extend(cols)
        data.extend((vals / norm).tolist() if norm > 0 else [])
        indptr.append(len(indices))
    X = sp.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, len(vocab)),
    )
    return DocTermMatrix(X, list(vocab.terms), len(vocab))


def stock_feature_columns(docs, which: Iterable[str], mean_hour_volume: float | None = None):
    """Dense stock-feature block (n_docs x k) and its column names."""
    which = list(which)
    unknown = [w for w in which if w not in STOCK_FEATURES]
    if unknown:
        raise ValueError(f"unknown stock feature(s): {unknown}")
    cols, names = [], []
    for w in STOCK_FEATURES:  # fixed column order regardless of request order
        if w not in which:
            continue
        if w == "prior_trend":
            cols.append([float(d.prior_trend) for d in docs])
            names.append(w)
        elif w == "volume_binary":
            cols.append([float(d.volume_high) for d in docs])
            names.append(w)
        elif w == "volume_int":
            if not mean_hour_volume:
                raise ValueError("volume_int needs the training-period mean hourly volume")
            cols.append([d.hour_volume / mean_hour_volume for d in docs])
            names.append(w)
        elif w == "weekday":
            for day in range(5):
                cols.append([float(d.weekday == day) for d in docs])
            names.extend(WEEKDAY_NAMES)
    dense = np.array(cols, dtype=float).T if cols else np.zeros((len(docs), 0))
    return dense.reshape(len(docs), len(names)), names


def append_stock_features(m: DocTermMatrix, docs, which: Iterable[str],
                          mean_hour_volume: float | None = None) -> DocTermMatrix:
    if m.shape[0] != len(docs):
        raise ValueError("matrix rows and documents differ in number")
    dense, names = stock_feature_columns(docs, which, mean_hour_volume)
    if not names:
        return m
    X = sp.hstack([m.X, sp.csr_matrix(dense)], format="csr")
    X.eliminate_zeros()
    return DocTermMatrix(X, list(m.names) + names, m.n_word_cols)
