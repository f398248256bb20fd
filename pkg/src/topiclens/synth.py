"""Synthetic corpora with planted topics, for validating the pipeline.

Each topic owns a pool of two-character terms drawn from the Unicode private
use area, so they never collide with a real dictionary. Posts carry exactly
one hashtag (or none, for the untagged hold-out) and their tokens are drawn
from the topic pool, with probability ``noise_prob`` from a shared noise pool
instead.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .corpus import Corpus, Microblog, extract_hashtags

_HIGH = 0xE000  # first character: U+E000..U+EFFF
_LOW = 0xF000   # second character: U+F000..U+F0FF


@dataclass(frozen=True)
class SynthSpec:
    n_topics: int = 10
    tags_per_topic: int = 5
    terms_per_topic: int = 40
    posts_per_tag: int = 200
    tokens_per_post: int = 10
    noise_prob: float = 0.1
    shared_topic_fraction: float = 0.0
    seed: int = 0
    noise_terms: int = 200
    untagged_posts: int = 0
    zipf_exponent: float = 0.0  # 0 = uniform sampling within a pool
    tag_mode: str = "paired"

    def __post_init__(self):
        for name in ("n_topics", "tags_per_topic", "terms_per_topic", "posts_per_tag",
                     "tokens_per_post", "noise_terms"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.untagged_posts < 0:
            raise ValueError("untagged_posts must be >= 0")
        if not 0.0 <= self.noise_prob < 1.0:
            raise ValueError("noise_prob must lie in [0, 1)")
        if not 0.0 <= self.shared_topic_fraction <= 1.0:
            raise ValueError("shared_topic_fraction must lie in [0, 1]")
        if self.zipf_exponent < 0:
            raise ValueError("zipf_exponent must be >= 0")
        if self.tag_mode not in ("paired", "prefix"):
            raise ValueError(f"unknown tag mode {self.tag_mode!r}")
        if (2 * self.n_topics * self.terms_per_topic + self.noise_terms) > 4096 * 256:
            raise ValueError("spec needs more synthetic terms than available")

    @property
    def n_shared(self) -> int:
        return math.floor(self.shared_topic_fraction * self.n_topics + 1e-9)


@dataclass
class GroundTruth:
    tag_topic: dict = field(default_factory=dict)
    post_topic: dict = field(default_factory=dict)
    shared_topics: list = field(default_factory=list)
    terms: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"tags": self.tag_topic, "posts": self.post_topic,
                           "shared": self.shared_topics}, ensure_ascii=False, indent=1) + "\n"

    def lexicon(self) -> dict[str, str]:
        """term -> POS entries that let the segmenter split synthetic text."""
        return {t: "n" for t in self.terms}

    def lexicon_tsv(self) -> str:
        return "".join(f"{t}\tn\n" for t in sorted(self.terms))


def synth_term(i: int) -> str:
    return chr(_HIGH + i // 256) + chr(_LOW + i % 256)


class _Generator:
    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.rng = np.random.default_rng(spec.seed)
        self.next_term = 0
        self.noise = self.pool(spec.noise_terms)
        ranks = np.arange(1, spec.terms_per_topic + 1, dtype=float)
        weights = ranks ** -spec.zipf_exponent
        self.probs = weights / weights.sum()

    def pool(self, size: int) -> list[str]:
        terms = [synth_term(i) for i in range(self.next_term, self.next_term + size)]
        self.next_term += size
        return terms

    def tokens(self, pool: list[str]) -> list[str]:
        spec = self.spec
        picks = self.rng.choice(len(pool), size=spec.tokens_per_post, p=self.probs)
        noisy = self.rng.random(spec.tokens_per_post) < spec.noise_prob
        noise = self.rng.integers(0, len(self.noise), size=spec.tokens_per_post)
        return [self.noise[noise[k]] if noisy[k] else pool[picks[k]]
                for k in range(spec.tokens_per_post)]

    def text(self, tag: Optional[str], tokens: list[str]) -> str:
        body = "".join(tokens)
        if tag is None:
            return body
        if self.spec.tag_mode == "paired":
            return f"#{tag}#{body}"
        return f"#{tag} {body}"

    def corpus(self, platform: str, topics: list[tuple[int, list[str]]],
               truth: GroundTruth) -> Corpus:
        spec = self.spec
        posts = []
        for topic_id, pool in topics:
            for j in range(spec.tags_per_topic):
                tag = f"{platform}{topic_id:03d}h{j:02d}".lower()
                truth.tag_topic[tag] = topic_id
                for _ in range(spec.posts_per_tag):
                    posts.append((topic_id, self.text(tag, self.tokens(pool))))
        for k in range(spec.untagged_posts):
            topic_id, pool = topics[int(self.rng.integers(0, len(topics)))]
            posts.append((topic_id, self.text(None, self.tokens(pool))))
        out = []
        for n, (topic_id, text) in enumerate(posts):
            post_id = f"{platform}-{n:07d}"
            truth.post_topic[post_id] = topic_id
            out.append(Microblog(post_id, platform, text,
                                 hashtags=tuple(extract_hashtags(text, spec.tag_mode))))
        return Corpus(platform, tuple(out), spec.tag_mode)


def generate(spec: SynthSpec, platform: str = "s") -> tuple[Corpus, GroundTruth]:
    """One corpus with `n_topics` planted topics."""
    gen = _Generator(spec)
    truth = GroundTruth()
    topics = [(k, gen.pool(spec.terms_per_topic)) for k in range(spec.n_topics)]
    corpus = gen.corpus(platform, topics, truth)
    truth.terms = [synth_term(i) for i in range(gen.next_term)]
    return corpus, truth


def generate_pair(spec: SynthSpec, platforms: tuple[str, str] = ("a", "b")
                  ) -> tuple[Corpus, Corpus, GroundTruth]:
    """Two corpora sharing ``floor(shared_topic_fraction * n_topics)`` topic
    pools. Hashtags always differ between the two platforms.

    Topic ids are global: shared topics are ``0..S-1`` on both sides, the
    first platform's own topics come next, then the second's.
    """
    if platforms[0] == platforms[1]:
        raise ValueError("platform labels must differ")
    gen = _Generator(spec)
    truth = GroundTruth()
    k, s = spec.n_topics, spec.n_shared
    shared = [(i, gen.pool(spec.terms_per_topic)) for i in range(s)]
    own_a = [(i, gen.pool(spec.terms_per_topic)) for i in range(s, k)]
    own_b = [(i, gen.pool(spec.terms_per_topic)) for i in range(k, 2 * k - s)]
    truth.shared_topics = list(range(s))
    corpus_a = gen.corpus(platforms[0], shared + own_a, truth)
    corpus_b = gen.corpus(platforms[1], shared + own_b, truth)
    truth.terms = [synth_term(i) for i in range(gen.next_term)]
    return corpus_a, corpus_b, truth


def spec_dict(spec: SynthSpec) -> dict:
    return asdict(spec)
