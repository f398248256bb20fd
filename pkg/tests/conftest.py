import pytest

from topiclens.preprocess import MaxMatchSegmenter, Preprocessor, load_table
from topiclens.synth import SynthSpec, generate, generate_pair
from topiclens.topics import build_model

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}")


@pytest.fixture(scope="session")
def table():
    return load_table()


def synth_preprocessor(truth, table):
    return Preprocessor(table, MaxMatchSegmenter(truth.lexicon()))


@pytest.fixture(scope="session")
def planted(table):
    """The planted-topic corpus of the acceptance criteria, built end to end."""
    spec = SynthSpec(n_topics=10, tags_per_topic=5, terms_per_topic=40, posts_per_tag=200,
                     noise_prob=0.1, untagged_posts=2000, seed=2012)
    corpus, truth = generate(spec)
    posts = synth_preprocessor(truth, table).process(corpus.posts)
    result = build_model(posts, corpus.platform, top_tags=50)
    return spec, corpus, truth, posts, result


@pytest.fixture(scope="session")
def planted_pair(table):
    """Two platforms sharing 3 of 10 topics."""
    spec = SynthSpec(shared_topic_fraction=0.3, posts_per_tag=100, seed=11)
    a, b, truth = generate_pair(spec)
    pre = synth_preprocessor(truth, table)
    posts_a, posts_b = pre.process(a.posts), pre.process(b.posts)
    model_a = build_model(posts_a, "a", top_tags=50).model
    model_b = build_model(posts_b, "b", top_tags=50).model
    return spec, truth, posts_a, posts_b, model_a, model_b
