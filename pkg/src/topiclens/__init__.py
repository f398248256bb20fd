"""Hashtag-seeded topic detection for microblogs and cross-corpus comparison."""

__version__ = "0.1.0"

from .corpus import Corpus, Microblog, extract_hashtags, filter_deleted, read_corpus  # noqa: E402
from .preprocess import (  # noqa: E402
    MaxMatchSegmenter,
    Preprocessor,
    Token,
    TokenizedPost,
    filter_tokens,
    load_dictionary,
    load_table,
    normalize,
    segment_maxmatch,
    to_simplified,
)
from .vectorize import (  # noqa: E402
    HashtagDocument,
    TermVector,
    Vocabulary,
    build_hashtag_documents,
    build_vocabulary,
    tfidf,
    top_terms,
)
from .topics import (  # noqa: E402
    Dendrogram,
    Topic,
    TopicModel,
    agglomerate,
    build_model,
    cosine_distance,
    divisive_cut,
    make_topics,
)
from .assign import Assignment, assign_post, assign_posts, calibrate, post_vector  # noqa: E402
from .compare import (  # noqa: E402
    compare_models,
    cross_coverage,
    cross_matrix,
    deleted_rank_correlation,
    distance_cdf,
    kendall_tau,
    rank_topics,
    rerank_deleted,
)
from .synth import SynthSpec, generate, generate_pair  # noqa: E402
