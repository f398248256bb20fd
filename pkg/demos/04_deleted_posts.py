"""
Re-ranking topics by deleted posts
==================================

Deleted posts from one platform are classified into the other platform's
topics. Ranking topics by how many deleted posts they receive, then
correlating with the usual popularity order, shows whether deletions
follow popularity or single out particular topics.
"""

# %%
import dataclasses

import numpy as np

from topiclens import (Preprocessor, MaxMatchSegmenter, SynthSpec, build_model, generate_pair,
                       kendall_tau, load_table)
from topiclens.compare import deleted_rank_correlation

spec = SynthSpec(shared_topic_fraction=1.0, posts_per_tag=100, zipf_exponent=1.0, seed=4)
corpus_a, corpus_b, truth = generate_pair(spec)
pre = Preprocessor(load_table(), MaxMatchSegmenter(truth.lexicon()))
model_a = build_model(pre.process(corpus_a.posts), "a", top_tags=50).model

# %%
# Mark posts of platform b as deleted, heavily for planted topics 7-9.
rng = np.random.default_rng(0)
rate = {k: 0.3 if k >= 7 else 0.02 for k in range(10)}
deleted = [dataclasses.replace(p, deleted=True) for p in corpus_b.posts
           if rng.random() < rate[truth.post_topic[p.id]]]
deleted_tokens = pre.process(deleted)
print(len(deleted), "deleted posts")

# %%
report = deleted_rank_correlation(model_a, deleted_tokens, d_t=0.9, top_k=10)
label = {t.id: t.label for t in model_a.topics}
for topic_id, count in report.ranking.entries[:5]:
    print(f"{count:5d}  {label[topic_id]}")
print(f"classified {report.classified} of {report.total}")
print(f"tau = {report.kendall.tau:.3f}, p = {report.kendall.p_value:.3g}")

# %%
# For reference, tau of two unrelated orders of ten items is near zero.
print(kendall_tau(list(range(10)), [3, 7, 0, 9, 1, 5, 8, 2, 6, 4]).tau)
