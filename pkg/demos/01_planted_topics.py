"""
Recovering planted topics
=========================

Generate a corpus whose hashtags come from ten known topics, build a topic
model from it, and check how well the hashtag partition is recovered.
"""

# %%
# A synthetic corpus: ten topics, five hashtags each, two hundred posts per
# hashtag. Terms are private-use characters, so a lexicon of them is handed
# to the segmenter.
from collections import Counter

from topiclens import Preprocessor, MaxMatchSegmenter, SynthSpec, build_model, generate, load_table

spec = SynthSpec(n_topics=10, tags_per_topic=5, posts_per_tag=200, noise_prob=0.1, seed=1)
corpus, truth = generate(spec)
print(len(corpus), "posts,", len(truth.tag_topic), "hashtags")

pre = Preprocessor(load_table(), MaxMatchSegmenter(truth.lexicon()))
posts = pre.process(corpus.posts)

# %%
# Build: hashtag documents, top terms, average-linkage tree, divisive cut.
result = build_model(posts, corpus.platform, top_tags=50)
model = result.model
print(len(model.topics), "topics")

# %%
# Each recovered topic should draw its hashtags from a single planted topic.
for topic in model.ranked(5):
    sources = Counter(truth.tag_topic[h] for h in topic.hashtags)
    print(f"topic {topic.id:2d}  {topic.post_count:5d} posts  planted {dict(sources)}")

# %%
# The merge tree itself: heights of the last few merges show the gap between
# within-topic and between-topic distances.
heights = [m[2] for m in result.dendrogram.merges]
print("last merges:", [round(h, 3) for h in heights[-12:]])
