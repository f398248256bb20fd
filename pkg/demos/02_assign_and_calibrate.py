"""
Assigning untagged posts
========================

Posts without a known hashtag go to the nearest topic centroid, as long as
it is closer than a distance threshold. Calibration shows where the
threshold sits relative to the distances seen inside and across topics.
"""

# %%
from collections import Counter

from topiclens import (Preprocessor, MaxMatchSegmenter, SynthSpec, assign_posts, build_model,
                       calibrate, generate, load_table)

spec = SynthSpec(posts_per_tag=100, untagged_posts=1000, seed=2)
corpus, truth = generate(spec)
posts = Preprocessor(load_table(), MaxMatchSegmenter(truth.lexicon())).process(corpus.posts)
model = build_model(posts, corpus.platform, top_tags=50).model

# %%
# Tagged posts take the tag path; the untagged ones are matched by centroid.
out = assign_posts(posts, model, d_t=0.9)
print(Counter(a.via for a in out))

# %%
# How many centroid assignments land in the right planted topic?
meaning = {t.id: Counter(truth.tag_topic[h] for h in t.hashtags).most_common(1)[0][0]
           for t in model.topics}
hits = [meaning[a.topic_id] == truth.post_topic[a.post_id] for a in out if a.via == "centroid"]
print(f"centroid accuracy {sum(hits) / len(hits):.3f} over {len(hits)} posts")

# %%
# Distances of tagged posts to their own centroid against distances to the
# others. The recommended threshold is the first 0.01 grid point covering
# the target share of own-topic distances.
report = calibrate(model, [p for p in posts if p.hashtags], target_intra_coverage=0.75)
print("intra median", round(report.intra.quantiles[50], 3),
      "inter median", round(report.inter.quantiles[50], 3))
print("recommended threshold", report.recommended_threshold)
print("own-topic coverage at 0.9:", round(report.coverage_at_default, 3),
      "other-topic coverage at 0.9:", round(report.inter_coverage_at_default, 3))

# %%
# Lower thresholds only ever turn assignments into unknowns.
for d_t in (0.3, 0.5, 0.7, 0.9, 1.0):
    known = sum(a.known for a in assign_posts(posts, model, d_t))
    print(f"d_t={d_t}: {known} of {len(posts)} assigned")
