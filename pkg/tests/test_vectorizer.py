import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import doc
from tweetsignal.vectorizer import (Vocabulary, append_stock_features, fit_vocabulary,
                                    stock_feature_columns, transform)


def test_fit_counts_documents_not_occurrences():
    v = fit_vocabulary([["up", "up"], ["down"]])
    assert len(v) == 2 and v.df[v.index["up"]] == 1 and v.df[v.index["down"]] == 1
    one = fit_vocabulary([["x"]])
    assert len(one) == 1 and one.df.tolist() == [1]
    with pytest.raises(ValueError):
        fit_vocabulary([])


def test_hand_computed_row():
    v = fit_vocabulary([["up"], ["down"]])
    row = transform([["up", "up", "down"]], v).X.toarray()[0]
    idf = math.log(3 / 2) + 1
    assert v.idf == pytest.approx([idf, idf])
    assert row[v.index["up"]] == pytest.approx(0.894427191, abs=1e-9)
    assert row[v.index["down"]] == pytest.approx(0.447213595, abs=1e-9)


def test_single_term_and_oov_rows():
    v = fit_vocabulary([["a", "b"], ["c"]])
    X = transform([["b"], ["zzz"], []], v).X
    assert X[0, v.index["b"]] == 1.0 and X[0].nnz == 1
    assert X[1].nnz == 0 and X[2].nnz == 0


def test_idf_oracle_against_direct_formula():
    docs = [["a", "b", "a"], ["b", "c"], ["c", "c", "d"], ["a"]]
    v = fit_vocabulary(docs)
    N = len(docs)
    X = transform(docs, v).X.toarray()
    for i, toks in enumerate(docs):
        raw = np.zeros(len(v))
        for t in toks:
            df = sum(t in d for d in docs)
            raw[v.index[t]] += math.log((1 + N) / (1 + df)) + 1
        assert np.allclose(X[i], raw / np.linalg.norm(raw), atol=1e-12)


words = st.lists(st.lists(st.sampled_from(list("abcdefgh")), max_size=8), min_size=1, max_size=15)


@given(words, words)
@settings(max_examples=100, deadline=None)
def test_row_norms_and_fit_transform_separation(train, other):
    if not any(train):
        return
    v = fit_vocabulary(train)
    for docs in (train, other):
        m = transform(docs, v)
        norms = np.sqrt(np.asarray(m.X.multiply(m.X).sum(axis=1)).ravel())
        assert all(abs(n) < 1e-9 or abs(n - 1) < 1e-9 for n in norms)
        assert (m.X.data > 0).all()
        assert m.X.nnz == sum(len({t for t in d if t in v.index}) for d in docs)
    # the idf used for other docs is the training idf, whatever those docs contain
    a = transform([["a", "b"]], v).X.toarray()
    b = transform([["a", "b"]] + other, v).X.toarray()[:1]
    assert np.array_equal(a, b)


def test_vocabulary_round_trip():
    v = fit_vocabulary([["x", "y"], ["y"]])
    w = Vocabulary.from_dict(v.to_dict())
    assert w.terms == v.terms and np.array_equal(w.df, v.df) and w.n_docs == v.n_docs


def test_stock_features():
    docs = [doc("Buy", prior_trend=1, weekday=2), doc("Buy", prior_trend=0), doc("Buy", prior_trend=1)]
    dense, names = stock_feature_columns(docs, ["prior_trend"])
    assert names == ["prior_trend"] and dense[:, 0].tolist() == [1, 0, 1]
    dense, names = stock_feature_columns(docs[:1], ["weekday"])
    assert dense[0].tolist() == [0, 0, 1, 0, 0]  # Wednesday
    hv = [doc("Buy", hour_volume=5_000_000, volume_high=1), doc("Sell", hour_volume=2_000_000)]
    dense, names = stock_feature_columns(hv, ["volume_int", "volume_binary"], 4_000_000)
    assert names == ["volume_int", "volume_binary"]
    assert dense.tolist() == [[1.25, 1.0], [0.5, 0.0]]
    with pytest.raises(ValueError):
        stock_feature_columns(docs, ["sentiment"])


def test_append_keeps_word_block():
    v = fit_vocabulary([["a"], ["b"]])
    docs = [doc("Buy", tokens=("a",), prior_trend=1), doc("Sell", tokens=("b",), prior_trend=1)]
    m = transform([d.tokens for d in docs], v)
    out = append_stock_features(m, docs, ["prior_trend", "weekday"])
    assert out.shape == (2, 2 + 1 + 5) and out.n_word_cols == 2
    assert (out.word_block() != m.X).nnz == 0
    assert out.names[2:] == ["prior_trend"] + [f"weekday_{i}" for i in range(5)]
    assert out.X[0, 2] == 1.0  # not rescaled by the L2 step
    with pytest.raises(ValueError):
        append_stock_features(m, docs[:1], ["prior_trend"])


def test_coo_text():
    v = fit_vocabulary([["a"]])
    assert transform([["a"], []], v).to_coo_text() == "0,0,1.0\n"
