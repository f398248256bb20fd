import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from topiclens.preprocess import Token, TokenizedPost
from topiclens.vectorize import (
    HashtagDocument,
    TermVector,
    build_hashtag_documents,
    build_vocabulary,
    idf_weights,
    tfidf,
    top_terms,
)


def post(pid, tags, terms):
    return TokenizedPost(pid, tuple(Token(t, "n") for t in terms), tuple(tags))


def doc(tag, counts, n=1):
    return HashtagDocument(tag, counts, n)


def test_documents_aggregate_counts():
    docs = build_hashtag_documents([post("p1", ["a"], ["xx", "yy"]), post("p2", ["a"], ["xx"])], 5)
    assert len(docs) == 1
    assert docs[0].hashtag == "a"
    assert dict(docs[0].term_counts) == {"xx": 2, "yy": 1}
    assert docs[0].post_count == 2


def test_multi_tag_post_feeds_every_document():
    docs = build_hashtag_documents([post("p1", ["a", "b"], ["xx"])], 5)
    assert {d.hashtag: dict(d.term_counts) for d in docs} == {"a": {"xx": 1}, "b": {"xx": 1}}


def test_top_n_tie_break(caplog):
    posts = ([post(f"a{i}", ["a"], ["xx"]) for i in range(5)]
             + [post(f"b{i}", ["b"], ["xx"]) for i in range(5)]
             + [post("c0", ["c"], ["xx"])])
    random.Random(1).shuffle(posts)
    assert [d.hashtag for d in build_hashtag_documents(posts, 2)] == ["a", "b"]
    assert [d.hashtag for d in build_hashtag_documents(posts, 5)] == ["a", "b", "c"]
    assert "fewer than top_n" in caplog.text


def test_untagged_posts_ignored():
    assert build_hashtag_documents([post("p", [], ["xx"])], 3) == []


def test_tfidf_examples():
    docs = [doc("d1", {"aa": 2, "bb": 1}), doc("d2", {"aa": 1}), doc("d3", {"aa": 5, "cc": 2})]
    w = tfidf(docs)
    # aa is in every document
    assert [x["aa"] for x in w] == [0.0, 0.0, 0.0]
    assert w[0]["bb"] == pytest.approx(1.0986122886681098, abs=1e-15)
    assert w[2]["cc"] == pytest.approx(2 * 1.0986122886681098, abs=1e-15)


def test_tfidf_single_document():
    assert tfidf([doc("d", {"xx": 3, "yy": 1})]) == [{"xx": 0.0, "yy": 0.0}]


def test_tfidf_needs_a_document():
    with pytest.raises(ValueError):
        tfidf([])


def _brute_tfidf(docs):
    n = len(docs)
    out = []
    for d in docs:
        row = {}
        for t, c in d.term_counts.items():
            df = sum(1 for e in docs if e.term_counts.get(t, 0) > 0)
            row[t] = c * math.log(n / df)
        out.append(row)
    return out


counts_st = st.dictionaries(st.sampled_from(["aa", "bb", "cc", "dd", "ee"]),
                            st.integers(1, 20), min_size=1)


@given(st.lists(counts_st, min_size=1, max_size=6))
def test_tfidf_matches_brute_force(rows):
    docs = [doc(f"d{i}", r) for i, r in enumerate(rows)]
    w = tfidf(docs)
    brute = _brute_tfidf(docs)
    for got, want in zip(w, brute):
        assert got.keys() == want.keys()
        for t in got:
            assert got[t] == pytest.approx(want[t], rel=1e-12, abs=0)
            assert got[t] >= 0
            df = sum(1 for d in docs if t in d.term_counts)
            assert (got[t] == 0) == (df == len(docs))


def test_top_terms_truncates_to_k():
    counts = {f"t{i:02d}": 20 - i for i in range(12)}
    d = doc("h", counts)
    weights = {t: 1.0 for t in counts}
    vec = top_terms(d, weights)
    assert len(vec) == 10
    assert set(vec) == {f"t{i:02d}" for i in range(10)}


def test_top_terms_selects_by_frequency_not_weight():
    d = doc("h", {"xx": 5, "yy": 5, "zz": 1})
    weights = {"xx": 1.0, "yy": 2.0, "zz": 100.0}
    vec = top_terms(d, weights, k=2)
    assert dict(vec) == {"xx": 1.0, "yy": 2.0}
    assert set(top_terms(d, weights, k=2, selection="tfidf")) == {"zz", "yy"}


def test_top_terms_drops_zero_weights():
    d = doc("h", {"xx": 5, "yy": 3})
    assert len(top_terms(d, {"xx": 0.0, "yy": 0.0})) == 0
    assert dict(top_terms(d, {"xx": 0.0, "yy": 1.5})) == {"yy": 1.5}


def test_top_terms_rejects_bad_args():
    with pytest.raises(ValueError):
        top_terms(doc("h", {"xx": 1}), {}, k=0)
    with pytest.raises(ValueError):
        top_terms(doc("h", {"xx": 1}), {}, selection="random")


@given(counts_st, st.integers(1, 12))
def test_top_terms_size_bound(counts, k):
    vec = top_terms(doc("h", counts), {t: 1.0 for t in counts}, k)
    assert len(vec) <= k


def test_vocabulary():
    a = TermVector({f"a{i}": 1.0 for i in range(10)})
    b = TermVector({f"b{i}": 1.0 for i in range(10)})
    assert len(build_vocabulary([a, b])) == 20
    assert len(build_vocabulary([a, a])) == 10
    assert len(build_vocabulary([])) == 0
    vocab = build_vocabulary([b, a])
    assert list(vocab.terms) == sorted(vocab.terms)
    assert len(vocab) <= 10 * vocab.n_tags


@given(st.lists(st.dictionaries(st.sampled_from("abcdefg"), st.floats(0.1, 5.0), max_size=4),
                max_size=5), st.randoms())
def test_vocabulary_permutation_invariant(rows, rnd):
    vectors = [TermVector(r) for r in rows]
    shuffled = list(vectors)
    rnd.shuffle(shuffled)
    assert build_vocabulary(vectors).terms == build_vocabulary(shuffled).terms


def test_term_vector_contract():
    v = TermVector({"b": 2.0, "a": 0.0, "c": 1.0})
    assert list(v) == ["b", "c"]
    assert "a" not in v and v.get("a") == 0.0
    assert v.norm() == pytest.approx(math.sqrt(5))
    assert v.dot(TermVector({"b": 1.0, "z": 3.0})) == 2.0
    with pytest.raises(ValueError):
        TermVector({"a": -1.0})
    with pytest.raises(ValueError):
        TermVector({"a": float("nan")})


def test_idf_matches_definition():
    docs = [doc("a", {"xx": 1, "yy": 1}), doc("b", {"xx": 1}), doc("c", {"zz": 4}), doc("d", {"xx": 2})]
    idf = idf_weights(docs)
    assert idf == {"xx": math.log(4 / 3), "yy": math.log(4), "zz": math.log(4)}


def test_pipeline_vectors_are_deterministic():
    rng = random.Random(5)
    posts = [post(str(i), [rng.choice("abc")], [rng.choice(["xx", "yy", "zz", "ww"]) for _ in range(5)])
             for i in range(200)]
    def run(ps):
        docs = build_hashtag_documents(ps, 3)
        return [top_terms(d, w).to_pairs() for d, w in zip(docs, tfidf(docs))]
    shuffled = list(posts)
    rng.shuffle(shuffled)
    assert run(posts) == run(shuffled)
