"""Assigning posts to topics and calibrating the distance threshold."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .preprocess import TokenizedPost
from .topics import TopicModel, distance_block, unit_rows
from .vectorize import TermVector, count_vector

DEFAULT_THRESHOLD = 0.9
VIA = ("tag", "centroid", "unknown")
_BATCH = 4096


@dataclass(frozen=True)
class Assignment:
    post_id: str
    topic_id: Optional[int]
    via: str
    distance: Optional[float] = None

    def __post_init__(self):
        if self.via not in VIA:
            raise ValueError(f"unknown via {self.via!r}")
        if self.via == "tag" and self.distance is not None:
            raise ValueError("tag assignments carry no distance")
        if self.via == "unknown" and self.topic_id is not None:
            raise ValueError("unknown assignments carry no topic")

    @property
    def known(self) -> bool:
        return self.topic_id is not None

    def to_dict(self) -> dict:
        return {"id": self.post_id, "topic_id": self.topic_id, "via": self.via,
                "distance": self.distance}


def post_vector(post: TokenizedPost, model: TopicModel) -> TermVector:
    """Term counts of the post times the model's idf, over the model vocabulary."""
    return count_vector(post.terms, model.idf)


class CentroidIndex:
    """Unit-normalized centroid rows of a model, for batched distances."""

    def __init__(self, model: TopicModel):
        self.model = model
        self.topics = sorted(model.topics, key=lambda t: t.id)
        self.topic_ids = np.array([t.id for t in self.topics], dtype=np.int64)
        self.term_index = dict(model.vocabulary.index)
        for t in self.topics:
            for term in t.centroid:
                self.term_index.setdefault(term, len(self.term_index))
        self.rows = unit_rows([t.centroid for t in self.topics], self.term_index)
        self.tags = model.tag_index()

    def distances(self, vectors: Sequence[TermVector]) -> np.ndarray:
        """len(vectors) x n_topics matrix of cosine distances."""
        return distance_block(unit_rows(vectors, self.term_index), self.rows)

    def vectors(self, posts: Sequence[TokenizedPost]) -> list[TermVector]:
        return [post_vector(p, self.model) for p in posts]

    def tag_topic(self, post: TokenizedPost) -> Optional[int]:
        for tag in post.hashtags:
            if tag in self.tags:
                return self.tags[tag]
        return None


def assign_posts(posts: Sequence[TokenizedPost], model: TopicModel,
                 d_t: float = DEFAULT_THRESHOLD,
                 index: Optional[CentroidIndex] = None) -> list[Assignment]:
    """Classify posts: by hashtag when one belongs to a topic, else to the
    nearest centroid if it is closer than `d_t`, else unknown.

    Ties in distance go to the lowest topic id. Output order follows input.
    """
    if not 0.0 < d_t <= 1.0:
        raise ValueError("d_t must lie in (0, 1]")
    index = index or CentroidIndex(model)
    out: list[Optional[Assignment]] = [None] * len(posts)
    pending = []
    for i, post in enumerate(posts):
        topic_id = index.tag_topic(post)
        if topic_id is not None:
            out[i] = Assignment(post.post_id, topic_id, "tag")
        else:
            pending.append(i)
    for start in range(0, len(pending), _BATCH):
        batch = pending[start:start + _BATCH]
        if len(index.topics) == 0:
            for i in batch:
                out[i] = Assignment(posts[i].post_id, None, "unknown")
            continue
        dist = index.distances(index.vectors([posts[i] for i in batch]))
        best = np.argmin(dist, axis=1)
        for row, i in enumerate(batch):
            d = float(dist[row, best[row]])
            if d < d_t:
                out[i] = Assignment(posts[i].post_id, int(index.topic_ids[best[row]]),
                                    "centroid", d)
            else:
                out[i] = Assignment(posts[i].post_id, None, "unknown")
    return out  # type: ignore[return-value]


def assign_post(post: TokenizedPost, model: TopicModel,
                d_t: float = DEFAULT_THRESHOLD) -> Assignment:
    return assign_posts([post], model, d_t)[0]


@dataclass(frozen=True)
class DistanceSummary:
    count: int
    quantiles: tuple[float, ...]  # at 0%, 1%, ..., 100%
    mean: Optional[float] = None

    @classmethod
    def of(cls, values: np.ndarray) -> "DistanceSummary":
        if values.size == 0:
            return cls(0, ())
        qs = np.quantile(values, np.linspace(0.0, 1.0, 101))
        # float noise in interpolation must not break monotonicity
        qs = np.maximum.accumulate(qs)
        return cls(int(values.size), tuple(float(q) for q in qs), float(values.mean()))

    def to_dict(self) -> dict:
        return {"count": self.count, "mean": self.mean, "quantiles": list(self.quantiles)}


@dataclass(frozen=True)
class CalibrationReport:
    intra: DistanceSummary
    inter: DistanceSummary
    target_intra_coverage: float
    recommended_threshold: float
    target_reached: bool
    coverage_at_default: float
    inter_coverage_at_default: float
    coverage_at_recommended: float
    inter_coverage_at_recommended: float
    skipped_posts: int = 0
    intra_includes_self: bool = True

    def to_dict(self) -> dict:
        return {
            "intra_includes_self": self.intra_includes_self,
            "default_threshold": DEFAULT_THRESHOLD,
            "target_intra_coverage": self.target_intra_coverage,
            "recommended_threshold": self.recommended_threshold,
            "target_reached": self.target_reached,
            "coverage_at_default": self.coverage_at_default,
            "inter_coverage_at_default": self.inter_coverage_at_default,
            "coverage_at_recommended": self.coverage_at_recommended,
            "inter_coverage_at_recommended": self.inter_coverage_at_recommended,
            "skipped_posts": self.skipped_posts,
            "intra": self.intra.to_dict(),
            "inter": self.inter.to_dict(),
        }


def _below(values: np.ndarray, x: float) -> float:
    # distances that equal a grid point up to rounding do not count as below it
    return float(np.mean(values < x - 1e-9)) if values.size else 0.0


def threshold_grid(step: float = 0.01) -> list[float]:
    n = int(round(1.0 / step))
    return [k / n for k in range(1, n + 1)]


def calibrate(model: TopicModel, tagged_posts: Iterable[TokenizedPost],
              target_intra_coverage: float = 0.75) -> CalibrationReport:
    """Distance distributions of posts to their own topic's centroid (intra)
    and to every other centroid (inter), and the smallest 0.01-grid
    threshold whose intra coverage meets the target.

    Posts with no hashtag in the model are skipped and counted. A post's own
    tokens are part of its topic centroid (no leave-one-out).
    """
    if not 0.0 <= target_intra_coverage <= 1.0:
        raise ValueError("target coverage must lie in [0, 1]")
    index = CentroidIndex(model)
    posts, topic_of, skipped = [], [], 0
    for post in tagged_posts:
        topic_id = index.tag_topic(post)
        if topic_id is None:
            skipped += 1
            continue
        posts.append(post)
        topic_of.append(topic_id)
    if not posts:
        raise ValueError("no posts carry a hashtag of the model")
    column = {int(t): i for i, t in enumerate(index.topic_ids)}
    own = np.array([column[t] for t in topic_of])
    intra_parts, inter_parts = [], []
    for start in range(0, len(posts), _BATCH):
        dist = index.distances(index.vectors(posts[start:start + _BATCH]))
        rows = np.arange(dist.shape[0])
        cols = own[start:start + _BATCH]
        intra_parts.append(dist[rows, cols])
        mask = np.ones_like(dist, dtype=bool)
        mask[rows, cols] = False
        inter_parts.append(dist[mask])
    intra = np.concatenate(intra_parts)
    inter = np.concatenate(inter_parts)

    recommended, reached = 1.0, False
    for x in threshold_grid():
        if _below(intra, x) >= target_intra_coverage:
            recommended, reached = x, True
            break
    return CalibrationReport(
        intra=DistanceSummary.of(intra),
        inter=DistanceSummary.of(inter),
        target_intra_coverage=target_intra_coverage,
        recommended_threshold=recommended,
        target_reached=reached,
        coverage_at_default=_below(intra, DEFAULT_THRESHOLD),
        inter_coverage_at_default=_below(inter, DEFAULT_THRESHOLD),
        coverage_at_recommended=_below(intra, recommended),
        inter_coverage_at_recommended=_below(inter, recommended),
        skipped_posts=skipped,
    )
