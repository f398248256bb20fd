"""Cross-corpus analytics: centroid distance matrices and their CDF,
cross-coverage, topic rankings and Kendall's tau."""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .assign import DEFAULT_THRESHOLD, Assignment, CentroidIndex, assign_posts
from .preprocess import TokenizedPost
from .topics import TopicModel, distance_block, unit_rows

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DistanceMatrix:
    row_ids: tuple[int, ...]
    col_ids: tuple[int, ...]
    values: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValueError("matrix shape does not match its id lists")

    @property
    def size(self) -> int:
        return int(self.values.size)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + list(self.col_labels or map(str, self.col_ids)))
        for label, row in zip(self.row_labels or map(str, self.row_ids), self.values):
            writer.writerow([label] + [f"{v:.6f}" for v in row])
        return buf.getvalue()


def cross_matrix(model_a: TopicModel, model_b: TopicModel, top_k: Optional[int] = None) -> DistanceMatrix:
    """Cosine distances between the centroids of the `top_k` most popular
    topics of each model. Terms are joined by exact string match."""
    if not model_a.topics or not model_b.topics:
        raise ValueError("both models need at least one topic")
    for model in (model_a, model_b):
        if top_k is not None and top_k > len(model.topics):
            log.warning("top-%d requested but model %r has %d topics; using all",
                        top_k, model.platform, len(model.topics))
    topics_a = model_a.ranked(top_k)
    topics_b = model_b.ranked(top_k)
    terms = sorted(set().union(*(t.centroid.keys() for t in topics_a + topics_b)))
    index = {t: i for i, t in enumerate(terms)}
    values = distance_block(unit_rows([t.centroid for t in topics_a], index),
                            unit_rows([t.centroid for t in topics_b], index))
    return DistanceMatrix(
        tuple(t.id for t in topics_a), tuple(t.id for t in topics_b), values,
        tuple(t.label for t in topics_a), tuple(t.label for t in topics_b))


@dataclass(frozen=True)
class DistanceCDF:
    grid: tuple[float, ...]
    cumulative: tuple[float, ...]
    frac_below: float  # strict, at `cut`
    cut: float = DEFAULT_THRESHOLD

    def at(self, x: float) -> float:
        i = int(np.searchsorted(np.asarray(self.grid), x, side="right")) - 1
        return self.cumulative[i] if i >= 0 else 0.0

    def to_pairs(self) -> list[list[float]]:
        return [[x, f] for x, f in zip(self.grid, self.cumulative)]


def distance_cdf(matrix: DistanceMatrix | np.ndarray, step: float = 0.01,
                 cut: float = DEFAULT_THRESHOLD) -> DistanceCDF:
    """Empirical CDF F(x) = fraction of cells <= x on a grid 0, step, ..., 1,
    plus the fraction of cells strictly below `cut`."""
    values = np.asarray(matrix.values if isinstance(matrix, DistanceMatrix) else matrix,
                        dtype=float).ravel()
    if values.size == 0:
        raise ValueError("empty distance matrix")
    n = int(round(1.0 / step))
    grid = [k / n for k in range(n + 1)]
    ordered = np.sort(values)
    counts = np.searchsorted(ordered, grid, side="right")
    cumulative = [int(c) / values.size for c in counts]
    if ordered[-1] <= 1.0:
        cumulative[-1] = 1.0
    return DistanceCDF(tuple(grid), tuple(cumulative),
                       float(np.count_nonzero(values < cut)) / values.size, cut)


@dataclass(frozen=True)
class Coverage:
    total: int
    via_tag: int
    via_centroid: int

    @property
    def covered(self) -> int:
        return self.via_tag + self.via_centroid

    @property
    def fraction(self) -> float:
        return self.covered / self.total

    def to_dict(self) -> dict:
        return {"total": self.total, "via_tag": self.via_tag,
                "via_centroid": self.via_centroid, "fraction": self.fraction}


def coverage_breakdown(model: TopicModel, foreign_posts: Sequence[TokenizedPost],
                       d_t: float = DEFAULT_THRESHOLD,
                       index: Optional[CentroidIndex] = None) -> Coverage:
    if not foreign_posts:
        raise ValueError("empty corpus")
    counts = Counter(a.via for a in assign_posts(foreign_posts, model, d_t, index))
    return Coverage(len(foreign_posts), counts["tag"], counts["centroid"])


def cross_coverage(model: TopicModel, foreign_posts: Sequence[TokenizedPost],
                   d_t: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of `foreign_posts` that the model assigns to some topic."""
    return coverage_breakdown(model, foreign_posts, d_t).fraction


@dataclass(frozen=True)
class TopicRanking:
    entries: tuple[tuple[int, int], ...] = ()

    @property
    def ids(self) -> list[int]:
        return [i for i, _ in self.entries]

    def __len__(self):
        return len(self.entries)

    def to_list(self) -> list[list[int]]:
        return [[i, c] for i, c in self.entries]


def rank_counts(counts: dict[int, int]) -> TopicRanking:
    return TopicRanking(tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))))


def rank_topics(assignments: Iterable[Assignment]) -> TopicRanking:
    """Topics by number of assigned posts, descending; ties by id."""
    return rank_counts(Counter(a.topic_id for a in assignments if a.topic_id is not None))


def complete_ranking(ranking: TopicRanking, universe: Iterable[int]) -> list[int]:
    """Order every id of `universe` by its count in `ranking` (missing ids
    count 0), ties by id."""
    counts = dict(ranking.entries)
    return sorted(universe, key=lambda i: (-counts.get(i, 0), i))


@dataclass(frozen=True)
class KendallResult:
    tau: float
    p_value: float
    concordant: int
    discordant: int
    n: int

    @property
    def tau_exact(self) -> Fraction:
        return Fraction(self.concordant - self.discordant, self.n * (self.n - 1) // 2)

    def to_dict(self) -> dict:
        return {"tau": self.tau, "p_value": self.p_value, "n": self.n,
                "concordant": self.concordant, "discordant": self.discordant}


def _count_inversions(seq: list[int]) -> int:
    """Inversions of `seq` by merge sort."""
    if len(seq) < 2:
        return 0
    inversions = 0
    width = 1
    a = list(seq)
    n = len(a)
    while width < n:
        out = []
        for lo in range(0, n, 2 * width):
            left, right = a[lo:lo + width], a[lo + width:lo + 2 * width]
            i = j = 0
            while i < len(left) and j < len(right):
                if right[j] < left[i]:
                    out.append(right[j])
                    inversions += len(left) - i
                    j += 1
                else:
                    out.append(left[i])
                    i += 1
            out.extend(left[i:])
            out.extend(right[j:])
        a = out
        width *= 2
    return inversions


def kendall_tau(rank_a: Sequence, rank_b: Sequence) -> KendallResult:
    """Kendall's tau-a between two strict rankings of the same ids, with a
    two-sided p-value from the normal approximation."""
    n = len(rank_a)
    if n < 2:
        raise ValueError("need at least two ranked items")
    if len(set(rank_a)) != n or len(rank_b) != n or set(rank_a) != set(rank_b):
        raise ValueError("rankings must be permutations of the same ids")
    position = {item: i for i, item in enumerate(rank_b)}
    discordant = _count_inversions([position[item] for item in rank_a])
    pairs = n * (n - 1) // 2
    concordant = pairs - discordant
    tau = (concordant - discordant) / pairs
    z = 3.0 * tau * math.sqrt(n * (n - 1)) / math.sqrt(2.0 * (2 * n + 5))
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return KendallResult(tau, p, concordant, discordant, n)


def rerank_deleted(model: TopicModel, deleted_posts: Sequence[TokenizedPost],
                   d_t: float = DEFAULT_THRESHOLD) -> TopicRanking:
    """Rank the model's topics by how many deleted posts fall into them."""
    if not deleted_posts:
        raise ValueError("no deleted posts")
    return rank_topics(assign_posts(deleted_posts, model, d_t))


@dataclass(frozen=True)
class RerankReport:
    ranking: TopicRanking
    reference: tuple[int, ...]
    reranked: tuple[int, ...]
    kendall: Optional[KendallResult]
    classified: int
    total: int

    def to_dict(self, model: TopicModel) -> dict:
        label = {t.id: t.label for t in model.topics}
        return {
            "deleted_posts": self.total,
            "classified": self.classified,
            "ranking": [{"topic_id": i, "label": label[i], "count": c}
                        for i, c in self.ranking.entries],
            "reference_order": list(self.reference),
            "reranked_order": list(self.reranked),
            "kendall": self.kendall.to_dict() if self.kendall else None,
        }


def deleted_rank_correlation(model: TopicModel, deleted_posts: Sequence[TokenizedPost],
                             d_t: float = DEFAULT_THRESHOLD, top_k: int = 100,
                             reference: Optional[TopicRanking] = None) -> RerankReport:
    """Re-rank the `top_k` topics of a (foreign) model by deleted-post counts
    and correlate with the reference popularity order.

    The reference defaults to the model's own post-count ranking. Posts are
    classified against the `top_k` topics only.
    """
    if reference is None:
        universe = [t.id for t in model.ranked(top_k)]
    else:
        universe = reference.ids[:top_k]
    restricted = model.subset(universe)
    ranking = rerank_deleted(restricted, deleted_posts, d_t)
    reranked = complete_ranking(ranking, universe)
    kendall = kendall_tau(universe, reranked) if len(universe) >= 2 else None
    return RerankReport(ranking, tuple(universe), tuple(reranked), kendall,
                        sum(c for _, c in ranking.entries), len(deleted_posts))


@dataclass(frozen=True)
class ComparisonReport:
    matrix: DistanceMatrix
    cdf: DistanceCDF
    coverage_a_on_b: Optional[Coverage] = None
    coverage_b_on_a: Optional[Coverage] = None
    kendall: Optional[KendallResult] = None
    rankings: dict = field(default_factory=dict)

    @property
    def frac_below(self) -> float:
        return self.cdf.frac_below

    def to_dict(self) -> dict:
        return {
            "top_k": [len(self.matrix.row_ids), len(self.matrix.col_ids)],
            "rows": list(self.matrix.row_ids),
            "cols": list(self.matrix.col_ids),
            "cdf": self.cdf.to_pairs(),
            "frac_below": self.cdf.frac_below,
            "frac_below_cut": self.cdf.cut,
            "coverage_a_on_b": self.coverage_a_on_b.to_dict() if self.coverage_a_on_b else None,
            "coverage_b_on_a": self.coverage_b_on_a.to_dict() if self.coverage_b_on_a else None,
            "kendall": self.kendall.to_dict() if self.kendall else None,
            "rankings": {k: v.to_list() for k, v in self.rankings.items()},
        }


def compare_models(model_a: TopicModel, model_b: TopicModel, top_k: Optional[int] = None,
                   posts_a: Optional[Sequence[TokenizedPost]] = None,
                   posts_b: Optional[Sequence[TokenizedPost]] = None,
                   d_t: float = DEFAULT_THRESHOLD) -> ComparisonReport:
    """Matrix, CDF and (when corpora are given) cross-coverage in both
    directions. Coverage of a corpus is measured against the other model's
    `top_k` topics."""
    matrix = cross_matrix(model_a, model_b, top_k)
    rankings = {
        "a": TopicRanking(tuple((t.id, t.post_count) for t in model_a.ranked(top_k))),
        "b": TopicRanking(tuple((t.id, t.post_count) for t in model_b.ranked(top_k))),
    }
    cov_ab = cov_ba = None
    if posts_a:
        cov_ab = coverage_breakdown(model_b.subset(matrix.col_ids), posts_a, d_t)
    if posts_b:
        cov_ba = coverage_breakdown(model_a.subset(matrix.row_ids), posts_b, d_t)
    return ComparisonReport(matrix, distance_cdf(matrix), cov_ab, cov_ba, None, rankings)
