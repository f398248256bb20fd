"""
Comparing two platforms
=======================

Two corpora share three of their ten topics but use different hashtags for
them. Centroid distances and cross-coverage reveal the overlap.
"""

# %%

from topiclens import (Preprocessor, MaxMatchSegmenter, SynthSpec, build_model, compare_models,
                       generate_pair, load_table)

spec = SynthSpec(shared_topic_fraction=0.3, posts_per_tag=100, zipf_exponent=1.0, seed=3)
corpus_a, corpus_b, truth = generate_pair(spec)
pre = Preprocessor(load_table(), MaxMatchSegmenter(truth.lexicon()))
posts_a, posts_b = pre.process(corpus_a.posts), pre.process(corpus_b.posts)
model_a = build_model(posts_a, "a", top_tags=50).model
model_b = build_model(posts_b, "b", top_tags=50).model
print("shared planted topics:", truth.shared_topics)

# %%
report = compare_models(model_a, model_b, top_k=None, posts_a=posts_a, posts_b=posts_b)
matrix = report.matrix
print(matrix.values.shape, "centroid pairs")
print(f"pairs closer than 0.9: {report.frac_below:.3f}")

# %%
# Nearest b topic for every a topic that has one closer than 0.5: these are
# the shared topics, under different hashtags.
nearest = matrix.values.argmin(axis=1)
for i, j in enumerate(nearest):
    if matrix.values[i, j] < 0.5:
        print(f"{matrix.row_labels[i]:>40}  ~  {matrix.col_labels[j]:<40} {matrix.values[i, j]:.3f}")

# %%
# The distance CDF on a 0.01 grid, sampled every tenth point.
print([(x, round(f, 3)) for x, f in report.cdf.to_pairs()[::10]])

# %%
# Cross-coverage: the share of one platform's posts the other model can place.
print("a on model b:", round(report.coverage_a_on_b.fraction, 3))
print("b on model a:", round(report.coverage_b_on_a.fraction, 3))
