"""Tweet tokenizer.

Steps, in order: URLs become ``<url>``, text is lowercased, punctuation and
symbol characters are deleted (whitespace separates tokens), runs of three or
more identical letters shrink to two, and purely numeric tokens are dropped.
No stemming, lemmatisation or POS tagging is applied.
"""

from __future__ import annotations

import re
import unicodedata

URL_TAG = "<url>"

_URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
_REPEAT_RE = re.compile(r"([^\W\d_])\1{2,}")


def _strip_punct(token: str) -> str:
    return "".join(ch for ch in token if unicodedata.category(ch)[0] not in "PS")


def tokenize(text: str) -> list[str]:
    text = _URL_RE.sub(f" {URL_TAG} ", text)
    tokens = []
    for raw in text.lower().split():
        tok = raw if raw == URL_TAG else _strip_punct(raw)
        if not tok:
            continue
        tok = _REPEAT_RE.sub(r"\1\1", tok)
        if tok.isnumeric():
            continue
        tokens.append(tok)
    return tokens


def dump_tokens(docs) -> str:
    """One whitespace-joined line per document, for debugging."""
    return "".join(" ".join(toks) + "\n" for toks in docs)
