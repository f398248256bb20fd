"""Hashtag documents, TF-IDF weighting and top-term vectors."""
from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

from .preprocess import MIN_TERM_LEN, TokenizedPost

log = logging.getLogger(__name__)

TOP_K_TERMS = 10
SELECTIONS = ("frequency", "tfidf")


class TermVector(Mapping):
    """Immutable sparse term -> weight vector with non-negative weights.

    Zero weights are never stored; absent terms read as 0.
    """

    __slots__ = ("_entries", "_norm")

    def __init__(self, entries: Optional[Mapping[str, float] | Iterable[tuple[str, float]]] = None):
        items = entries.items() if isinstance(entries, Mapping) else (entries or ())
        data = {}
        for term, weight in items:
            weight = float(weight)
            if not weight >= 0.0:
                raise ValueError(f"negative or NaN weight for {term!r}: {weight}")
            if weight > 0.0:
                data[term] = weight
        self._entries = dict(sorted(data.items()))
        self._norm = None

    def __getitem__(self, term):
        return self._entries[term]

    def get(self, term, default=0.0):
        return self._entries.get(term, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        if isinstance(other, TermVector):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._entries.items()))

    def __repr__(self):
        return f"TermVector({self._entries!r})"

    def norm(self) -> float:
        if self._norm is None:
            self._norm = math.sqrt(sum(w * w for w in self._entries.values()))
        return self._norm

    def dot(self, other: "TermVector") -> float:
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        return sum(w * b._entries.get(t, 0.0) for t, w in a._entries.items())

    def to_pairs(self) -> list[list]:
        return [[t, w] for t, w in self._entries.items()]


@dataclass(frozen=True)
class HashtagDocument:
    """All tokens of all posts sharing one hashtag."""

    hashtag: str
    term_counts: Mapping[str, int]
    post_count: int

    def __post_init__(self):
        if self.post_count < 1:
            raise ValueError("post_count must be >= 1")


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    n_tags: int = 0
    index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("vocabulary has duplicate terms")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index


def build_hashtag_documents(posts: Iterable[TokenizedPost], top_n: int) -> list[HashtagDocument]:
    """Merge posts by hashtag and return the `top_n` largest documents.

    A post carrying several tags contributes its tokens to each of them.
    Documents are ordered by post count, descending, then by hashtag.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    counts: dict[str, Counter] = {}
    n_posts: Counter = Counter()
    for post in posts:
        if not post.hashtags:
            continue
        terms = Counter(t for t in post.terms if len(t) >= MIN_TERM_LEN)
        for tag in post.hashtags:
            counts.setdefault(tag, Counter()).update(terms)
            n_posts[tag] += 1
    ranked = sorted(n_posts, key=lambda tag: (-n_posts[tag], tag))
    if len(ranked) < top_n:
        log.warning("only %d distinct hashtags, fewer than top_n=%d", len(ranked), top_n)
    return [
        HashtagDocument(tag, dict(sorted(counts[tag].items())), n_posts[tag])
        for tag in ranked[:top_n]
    ]


def document_frequency(docs: Sequence[HashtagDocument]) -> Counter:
    df: Counter = Counter()
    for doc in docs:
        df.update(t for t, c in doc.term_counts.items() if c > 0)
    return df


def idf_weights(docs: Sequence[HashtagDocument]) -> dict[str, float]:
    """ln(D / df(t)) for every term occurring in `docs`."""
    if not docs:
        raise ValueError("need at least one document")
    n_docs = len(docs)
    return {t: math.log(n_docs / df) for t, df in sorted(document_frequency(docs).items())}


def tfidf(docs: Sequence[HashtagDocument]) -> list[dict[str, float]]:
    """Per-document weights count(t, d) * ln(D / df(t))."""
    idf = idf_weights(docs)
    return [{t: c * idf[t] for t, c in doc.term_counts.items() if c > 0} for doc in docs]


def top_terms(doc: HashtagDocument, weights: Mapping[str, float], k: int = TOP_K_TERMS,
              selection: str = "frequency") -> TermVector:
    """Select up to `k` terms of `doc` and return them with their TF-IDF weights.

    With ``selection="frequency"`` terms are ranked by raw count; with
    ``"tfidf"`` by weight. Ties go to the lexicographically smaller term.
    Selected terms whose weight is 0 are dropped from the vector.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if selection == "frequency":
        key = lambda t: (-doc.term_counts[t], t)  # noqa: E731
    elif selection == "tfidf":
        key = lambda t: (-weights.get(t, 0.0), -doc.term_counts[t], t)  # noqa: E731
    else:
        raise ValueError(f"unknown selection {selection!r}")
    chosen = sorted((t for t, c in doc.term_counts.items() if c > 0), key=key)[:k]
    return TermVector((t, weights.get(t, 0.0)) for t in chosen)


def build_vocabulary(vectors: Iterable[TermVector], n_tags: Optional[int] = None) -> Vocabulary:
    vectors = list(vectors)
    terms = sorted(set().union(*(v.keys() for v in vectors))) if vectors else []
    return Vocabulary(tuple(terms), len(vectors) if n_tags is None else n_tags)


def count_vector(terms: Iterable[str], idf: Mapping[str, float]) -> TermVector:
    """Raw counts of `terms` times `idf`, restricted to terms `idf` knows."""
    counts = Counter(t for t in terms if t in idf)
    return TermVector((t, c * idf[t]) for t, c in counts.items())
