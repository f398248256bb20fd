"""Hashtag clustering into topics.

Hashtag vectors are clustered with average-linkage agglomeration over cosine
distance. The merge tree is then walked from the root: at each node the
smaller child becomes a topic and the walk continues into the larger one,
until a single leaf is left (which becomes the last topic).
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import sparse

from . import __version__
from .preprocess import TokenizedPost
from .vectorize import (
    TOP_K_TERMS,
    HashtagDocument,
    TermVector,
    Vocabulary,
    build_hashtag_documents,
    build_vocabulary,
    idf_weights,
    tfidf,
    top_terms,
)

log = logging.getLogger(__name__)

CENTROIDS = ("mean", "retop10")
MODEL_FORMAT = "topiclens-model/1"


def cosine_distance(u: TermVector, v: TermVector) -> float:
    """1 - cos(u, v); 1 when either vector is all-zero."""
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 1.0
    return min(1.0, max(0.0, 1.0 - u.dot(v) / (nu * nv)))


def unit_rows(vectors: Sequence[Mapping[str, float]], index: Mapping[str, int]) -> sparse.csr_matrix:
    """L2-normalized sparse rows over `index`; terms outside it are ignored
    before normalizing. All-zero rows stay zero."""
    indptr, cols, vals = [0], [], []
    for vec in vectors:
        row = sorted((index[t], w) for t, w in vec.items() if t in index and w > 0)
        norm = math.sqrt(sum(w * w for _, w in row))
        if norm > 0:
            cols.extend(c for c, _ in row)
            vals.extend(w / norm for _, w in row)
        indptr.append(len(cols))
    return sparse.csr_matrix(
        (np.asarray(vals, dtype=float), np.asarray(cols, dtype=np.int64), np.asarray(indptr)),
        shape=(len(vectors), max(len(index), 1)))


def distance_block(rows_a: sparse.csr_matrix, rows_b: sparse.csr_matrix) -> np.ndarray:
    """Cosine distances between two sets of unit rows; zero rows give 1."""
    sim = np.asarray((rows_a @ rows_b.T).todense(), dtype=float)
    dist = np.clip(1.0 - sim, 0.0, 1.0)
    zero_a = np.diff(rows_a.indptr) == 0
    zero_b = np.diff(rows_b.indptr) == 0
    dist[zero_a, :] = 1.0
    dist[:, zero_b] = 1.0
    return dist


def pairwise_distances(vectors: Sequence[TermVector]) -> np.ndarray:
    terms = sorted(set().union(*(v.keys() for v in vectors))) if vectors else []
    rows = unit_rows(vectors, {t: i for i, t in enumerate(terms)})
    dist = distance_block(rows, rows)
    np.fill_diagonal(dist, 0.0)
    return dist


@dataclass(frozen=True)
class Dendrogram:
    """Binary merge tree over labelled leaves.

    Leaves are nodes ``0..n-1``; the k-th merge creates node ``n + k``.
    Each merge is ``(left, right, height, size)``.
    """

    labels: tuple[str, ...]
    merges: tuple[tuple[int, int, float, int], ...] = ()

    def __post_init__(self):
        if not self.labels:
            raise ValueError("dendrogram needs at least one leaf")
        if len(self.merges) != len(self.labels) - 1:
            raise ValueError("a tree over n leaves has n - 1 merges")

    @property
    def n_leaves(self) -> int:
        return len(self.labels)

    @property
    def root(self) -> int:
        return 2 * self.n_leaves - 2

    def is_leaf(self, node: int) -> bool:
        return node < self.n_leaves

    def children(self, node: int) -> tuple[int, int]:
        left, right, _, _ = self.merges[node - self.n_leaves]
        return left, right

    def height(self, node: int) -> float:
        return 0.0 if self.is_leaf(node) else self.merges[node - self.n_leaves][2]

    def size(self, node: int) -> int:
        return 1 if self.is_leaf(node) else self.merges[node - self.n_leaves][3]

    def leaves(self, node: int) -> list[str]:
        out, stack = [], [node]
        while stack:
            node = stack.pop()
            if self.is_leaf(node):
                out.append(self.labels[node])
            else:
                stack.extend(self.children(node))
        return sorted(out)

    def to_linkage(self) -> np.ndarray:
        """The tree as a scipy linkage matrix (for ``scipy...dendrogram``)."""
        return np.array([[a, b, h, s] for a, b, h, s in self.merges], dtype=float).reshape(-1, 4)

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "merges": [{"left": a, "right": b, "height": h, "size": s}
                       for a, b, h, s in self.merges],
        }

    @classmethod
    def from_dict(cls, obj) -> "Dendrogram":
        return cls(tuple(obj["labels"]),
                   tuple((m["left"], m["right"], m["height"], m["size"]) for m in obj["merges"]))


# absolute slack when comparing merge distances for ties
TIE_TOL = 1e-12


def agglomerate_matrix(dist: np.ndarray, labels: Sequence[str]) -> Dendrogram:
    """Average-linkage (UPGMA) clustering of a precomputed distance matrix.

    Among pairs at the same minimum distance, the pair whose members'
    smallest labels are lexicographically smallest (first, then second) is
    merged. Distances within ``TIE_TOL`` of the minimum count as tied, so
    rounding in the linkage update cannot reorder mathematically equal pairs.
    """
    n = len(labels)
    if n == 0:
        raise ValueError("nothing to cluster")
    if len(set(labels)) != n:
        raise ValueError("labels must be unique")
    d = np.array(dist, dtype=float, copy=True)
    if d.shape != (n, n):
        raise ValueError(f"distance matrix shape {d.shape} does not match {n} labels")
    np.fill_diagonal(d, np.inf)
    # rank of each slot's smallest member label; slot i holds a live cluster
    order = sorted(range(n), key=lambda i: labels[i])
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    node = list(range(n))
    size = [1] * n
    merges = []
    for step in range(n - 1):
        best = d.min()
        ii, jj = np.nonzero(d <= best + TIE_TOL)
        lo = np.minimum(rank[ii], rank[jj])
        hi = np.maximum(rank[ii], rank[jj])
        pick = np.lexsort((hi, lo))[0]
        i, j = int(ii[pick]), int(jj[pick])
        if rank[j] < rank[i]:
            i, j = j, i
        ni, nj = size[i], size[j]
        merges.append((node[i], node[j], float(d[i, j]), ni + nj))
        merged = (ni * d[i] + nj * d[j]) / (ni + nj)
        d[i, :] = merged
        d[:, i] = merged
        d[i, i] = np.inf
        d[j, :] = np.inf
        d[:, j] = np.inf
        node[i] = n + step
        size[i] = ni + nj
        rank[i] = min(rank[i], rank[j])
    return Dendrogram(tuple(labels), tuple(merges))


def agglomerate(vectors: Sequence[TermVector], labels: Sequence[str]) -> Dendrogram:
    """Average-linkage clustering of hashtag vectors under cosine distance."""
    if len(vectors) != len(labels):
        raise ValueError("one label per vector is required")
    return agglomerate_matrix(pairwise_distances(vectors), labels)


def divisive_cut(dendrogram: Dendrogram) -> list[tuple[str, ...]]:
    """Peel topics off the merge tree, smaller child first.

    On equal child sizes the child holding the lexicographically smallest
    hashtag is kept for further splitting. The final leaf is emitted too, so
    the result partitions the leaves.
    """
    cuts = []
    node = dendrogram.root
    while not dendrogram.is_leaf(node):
        a, b = dendrogram.children(node)
        sa, sb = dendrogram.size(a), dendrogram.size(b)
        if sa == sb:
            large = a if min(dendrogram.leaves(a)) < min(dendrogram.leaves(b)) else b
        else:
            large = a if sa > sb else b
        small = b if large == a else a
        cuts.append(tuple(dendrogram.leaves(small)))
        node = large
    cuts.append((dendrogram.labels[node],))
    return cuts


@dataclass(frozen=True)
class Topic:
    id: int
    hashtags: tuple[str, ...]
    centroid: TermVector
    post_count: int = 0
    label: str = ""

    def __post_init__(self):
        if not self.hashtags:
            raise ValueError(f"topic {self.id} has no hashtags")
        object.__setattr__(self, "hashtags", tuple(sorted(self.hashtags)))
        if not self.label:
            object.__setattr__(self, "label", "|".join(self.hashtags))


def mean_vector(vectors: Sequence[TermVector]) -> TermVector:
    total: dict[str, float] = {}
    for vec in vectors:
        for t, w in vec.items():
            total[t] = total.get(t, 0.0) + w
    return TermVector((t, w / len(vectors)) for t, w in total.items())


def make_topics(cuts: Sequence[Sequence[str]], docs: Sequence[HashtagDocument],
                vectors: Mapping[str, TermVector], centroid: str = "mean",
                idf: Optional[Mapping[str, float]] = None, k: int = TOP_K_TERMS,
                selection: str = "frequency") -> list[Topic]:
    """Turn hashtag groups into numbered topics.

    ``centroid="mean"`` averages the member vectors; ``"retop10"`` pools the
    members' term counts and re-selects the top `k` terms, weighted by
    count * idf.
    """
    by_tag = {d.hashtag: d for d in docs}
    topics = []
    for topic_id, members in enumerate(cuts):
        if not members:
            raise ValueError(f"cut {topic_id} is empty")
        missing = [h for h in members if h not in vectors]
        if missing:
            raise KeyError(f"no vector for hashtag(s) {missing}")
        if centroid == "mean":
            vec = mean_vector([vectors[h] for h in members])
        elif centroid == "retop10":
            if idf is None:
                raise ValueError("retop10 centroids need idf weights")
            counts: dict[str, int] = {}
            for h in members:
                for t, c in by_tag[h].term_counts.items():
                    counts[t] = counts.get(t, 0) + c
            merged = HashtagDocument("|".join(sorted(members)), counts,
                                     sum(by_tag[h].post_count for h in members))
            weights = {t: c * idf.get(t, 0.0) for t, c in counts.items()}
            vec = top_terms(merged, weights, k, selection)
        else:
            raise ValueError(f"unknown centroid mode {centroid!r}")
        post_count = sum(by_tag[h].post_count for h in members if h in by_tag)
        topics.append(Topic(topic_id, tuple(members), vec, post_count))
    return topics


@dataclass(frozen=True)
class TopicModel:
    platform: str
    vocabulary: Vocabulary
    idf: Mapping[str, float]
    topics: tuple[Topic, ...]
    threshold: float = 0.9
    config: Mapping = field(default_factory=dict)
    manifest: Mapping = field(default_factory=dict)
    version: str = __version__

    def __post_init__(self):
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("threshold must lie in (0, 1]")
        seen = set()
        for topic in self.topics:
            if seen.intersection(topic.hashtags):
                raise ValueError(f"topic {topic.id} shares hashtags with another topic")
            seen.update(topic.hashtags)
        missing = set(self.vocabulary.terms) - set(self.idf)
        if missing:
            raise ValueError(f"no idf for {len(missing)} vocabulary term(s)")

    def tag_index(self) -> dict[str, int]:
        """hashtag -> topic id."""
        return {h: t.id for t in self.topics for h in t.hashtags}

    def topic(self, topic_id: int) -> Topic:
        for t in self.topics:
            if t.id == topic_id:
                return t
        raise KeyError(topic_id)

    def ranked(self, k: Optional[int] = None) -> list[Topic]:
        """Topics by member post count, descending; ties by id."""
        ranked = sorted(self.topics, key=lambda t: (-t.post_count, t.id))
        return ranked if k is None else ranked[:k]

    def subset(self, topic_ids) -> "TopicModel":
        """A model keeping only `topic_ids` (an int k means the top k).

        Vocabulary and idf are kept whole so post vectors do not change.
        """
        if isinstance(topic_ids, int):
            topic_ids = [t.id for t in self.ranked(topic_ids)]
        keep = set(topic_ids)
        return replace(self, topics=tuple(t for t in self.topics if t.id in keep))

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": self.version,
            "platform": self.platform,
            "threshold": self.threshold,
            "n_tags": self.vocabulary.n_tags,
            "vocabulary": list(self.vocabulary.terms),
            "idf": [self.idf[t] for t in self.vocabulary.terms],
            "topics": [
                {"id": t.id, "hashtags": list(t.hashtags), "label": t.label,
                 "post_count": t.post_count, "centroid": t.centroid.to_pairs()}
                for t in self.topics
            ],
            "config": dict(self.config),
            "manifest": dict(self.manifest),
        }

    @classmethod
    def from_dict(cls, obj) -> "TopicModel":
        if obj.get("format") != MODEL_FORMAT:
            raise ValueError(f"not a topic model file (format {obj.get('format')!r})")
        terms = tuple(obj["vocabulary"])
        return cls(
            platform=obj["platform"],
            vocabulary=Vocabulary(terms, obj.get("n_tags", 0)),
            idf=dict(zip(terms, obj["idf"])),
            topics=tuple(
                Topic(t["id"], tuple(t["hashtags"]), TermVector(map(tuple, t["centroid"])),
                      t["post_count"], t["label"])
                for t in obj["topics"]),
            threshold=obj["threshold"],
            config=obj.get("config", {}),
            manifest=obj.get("manifest", {}),
            version=obj.get("version", __version__),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TopicModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "TopicModel":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


@dataclass(frozen=True)
class BuildResult:
    model: TopicModel
    dendrogram: Dendrogram
    documents: tuple[HashtagDocument, ...]
    vectors: Mapping[str, TermVector]


def build_model(posts: Sequence[TokenizedPost], platform: str = "", top_tags: int = 100,
                selection: str = "frequency", centroid: str = "mean",
                threshold: float = 0.9, k_terms: int = TOP_K_TERMS,
                config: Optional[Mapping] = None) -> BuildResult:
    """Run the full model build: documents, TF-IDF, top terms, clustering,
    topics."""
    docs = build_hashtag_documents(posts, top_tags)
    if not docs:
        raise ValueError("no hashtagged posts to build topics from")
    idf = idf_weights(docs)
    vectors = {d.hashtag: top_terms(d, w, k_terms, selection)
               for d, w in zip(docs, tfidf(docs))}
    labels = [d.hashtag for d in docs]
    dendrogram = agglomerate([vectors[h] for h in labels], labels)
    topics = make_topics(divisive_cut(dendrogram), docs, vectors, centroid, idf,
                         k_terms, selection)
    vocabulary = build_vocabulary([t.centroid for t in topics], n_tags=len(docs))
    model = TopicModel(
        platform=platform,
        vocabulary=vocabulary,
        idf={t: idf[t] for t in vocabulary.terms},
        topics=tuple(topics),
        threshold=threshold,
        config=dict(config or {"top_tags": top_tags, "selection": selection,
                               "centroid": centroid, "k_terms": k_terms}),
    )
    return BuildResult(model, dendrogram, tuple(docs), vectors)
