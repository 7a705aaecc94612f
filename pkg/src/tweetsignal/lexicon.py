"""Dictionary baselines.

Method B sums signed word scores from a generic sentiment lexicon; Method C
counts hits in financial positive/negative word lists.  Positive totals map to
Buy, negative to Sell, and zero (including no hits) to Unclassified.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .labeler import BUY, SELL

logger = logging.getLogger(__name__)

UNCLASSIFIED = "Unclassified"


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class ScoredLexicon:
    name: str
    scores: dict = field(default_factory=dict)  # method B
    positive: frozenset = frozenset()  # method C
    negative: frozenset = frozenset()
    kind: str = "scored"

    def __len__(self) -> int:
        return len(self.scores) if self.kind == "scored" else len(self.positive) + len(self.negative)

    def score(self, tokens: Iterable[str]) -> tuple[float, int]:
        """(summed score, number of matched tokens)."""
        total, hits = 0.0, 0
        if self.kind == "scored":
            for t in tokens:
                if t in self.scores:
                    total += self.scores[t]
                    hits += 1
        else:
            for t in tokens:
                if t in self.positive:
                    total += 1
                    hits += 1
                elif t in self.negative:
                    total -= 1
                    hits += 1
        return total, hits


def parse_scored(lines: Iterable[str], name: str = "scored") -> ScoredLexicon:
    scores: dict[str, float] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"line {lineno}: expected term<TAB>score")
        term = parts[0].strip().lower()
        try:
            value = float(parts[1])
        except ValueError as exc:
            raise LexiconError(f"line {lineno}: unparseable score {parts[1]!r}") from exc
        if value != value or value in (float("inf"), float("-inf")):
            raise LexiconError(f"line {lineno}: score must be finite")
        if term in scores:
            logger.warning("lexicon %s: duplicate term %r at line %d (last score wins)", name, term, lineno)
        scores[term] = value
    if not scores:
        logger.warning("lexicon %s is empty", name)
    return ScoredLexicon(name=name, scores=scores, kind="scored")


def parse_wordlists(positive: Iterable[str], negative: Iterable[str], name: str = "wordlists") -> ScoredLexicon:
    pos = frozenset(w.strip().lower() for w in positive if w.strip())
    neg = frozenset(w.strip().lower() for w in negative if w.strip())
    overlap = pos & neg
    if overlap:
        raise LexiconError(f"words in both lists: {sorted(overlap)[:10]}")
    if not pos and not neg:
        logger.warning("lexicon %s is empty", name)
    return ScoredLexicon(name=name, positive=pos, negative=neg, kind="wordlists")


def load_lexicon(source, kind: str = "scored", negative=None) -> ScoredLexicon:
    """Load a scored TSV (``kind='scored'``) or a pair of word lists.

    For word lists pass the positive file as ``source`` and the negative file
    as ``negative``.
    """
    if kind == "scored":
        with open(source, encoding="utf-8") as fh:
            return parse_scored(fh, name=str(source))
    if kind == "wordlists":
        if negative is None:
            raise LexiconError("word-list lexicons need both positive and negative files")
        with open(source, encoding="utf-8") as p, open(negative, encoding="utf-8") as n:
            return parse_wordlists(p, n, name=f"{source}+{negative}")
    raise LexiconError(f"unknown lexicon kind {kind!r}")


def classify_lexicon(tokens: Iterable[str], lex: ScoredLexicon) -> str:
    total, hits = lex.score(tokens)
    if not hits or total == 0:
        return UNCLASSIFIED
    return BUY if total > 0 else SELL


def skew_report(classifications: Iterable[str]) -> dict:
    """Buy/Sell/Unclassified fractions over all documents and over classified ones only."""
    labels = list(classifications)
    if not labels:
        raise ValueError("cannot report skew of an empty batch")
    n = len(labels)
    b, s = labels.count(BUY), labels.count(SELL)
    u = n - b - s
    classified = b + s
    return {
        "n": n,
        "all": {"buy": b / n, "sell": s / n, "unclassified": u / n},
        "classified": ({"buy": b / classified, "sell": s / classified} if classified else None),
    }
