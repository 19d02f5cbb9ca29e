import collections
import math

import pytest

from newslens.textsim import (
    UnionFind,
    cosine,
    tfidf_vectors,
    threshold_components,
    tokenize,
)


def reference_tfidf(documents):
    """Independent tf-idf implementation used as an oracle (same definition,
    different code path: Counter-based, no incremental dicts)."""
    token_lists = [tokenize(d) for d in documents]
    n = len(token_lists)
    df = collections.Counter()
    for tokens in token_lists:
        df.update(set(tokens))
    out = []
    for tokens in token_lists:
        tf = collections.Counter(tokens)
        vec = {t: c * (math.log((1 + n) / (1 + df[t])) + 1.0) for t, c in tf.items()}
        norm = math.sqrt(sum(v * v for v in vec.values()))
        out.append({t: v / norm for t, v in vec.items()} if norm else vec)
    return out


def test_tokenize_drops_stopwords_and_punctuation():
    assert tokenize("The delegates voted, and the nominee won!") == [
        "delegates", "voted", "nominee", "won"]


def test_tokenize_keeps_contractions_and_digits():
    assert tokenize("It's 2024") == ["it's", "2024"]


def test_identical_documents_cosine_one():
    vecs = tfidf_vectors(["convention delegates keynote", "convention delegates keynote"])
    assert cosine(vecs[0], vecs[1]) == pytest.approx(1.0)


def test_disjoint_documents_cosine_zero():
    vecs = tfidf_vectors(["ceasefire hostage truce", "convention delegates keynote"])
    assert cosine(vecs[0], vecs[1]) == 0.0


def test_vectors_are_unit_norm():
    vecs = tfidf_vectors(["alpha beta gamma", "beta gamma delta", "epsilon"])
    for vec in vecs:
        assert math.sqrt(sum(w * w for w in vec.values())) == pytest.approx(1.0)


def test_tfidf_matches_reference_oracle():
    docs = [
        "convention delegates keynote rollcall speech",
        "delegates keynote nominee momentum",
        "ceasefire hostage truce mediators talks",
        "truce mediators progress stalled ceasefire",
        "weather outlook calm skies",
    ]
    ours = tfidf_vectors(docs)
    theirs = reference_tfidf(docs)
    assert len(ours) == len(theirs)
    for a, b in zip(ours, theirs):
        assert set(a) == set(b)
        for term in a:
            assert a[term] == pytest.approx(b[term], abs=1e-12)


def test_cosine_symmetry():
    vecs = tfidf_vectors(["alpha beta", "beta gamma delta"])
    assert cosine(vecs[0], vecs[1]) == pytest.approx(cosine(vecs[1], vecs[0]))


def test_union_find_smallest_index_root():
    uf = UnionFind(4)
    uf.union(2, 3)
    uf.union(1, 2)
    assert uf.find(3) == 1
    assert uf.find(0) == 0


def test_threshold_components_structure():
    docs = [
        "convention delegates keynote",
        "delegates keynote rollcall",
        "ceasefire hostage truce",
        "truce mediators hostage",
        "totally unrelated filler words",
    ]
    vecs = tfidf_vectors(docs)
    comps = threshold_components(vecs, 0.2)
    # independent check: brute-force adjacency + BFS
    n = len(vecs)
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if cosine(vecs[i], vecs[j]) >= 0.2:
                adj[i].append(j)
                adj[j].append(i)
    seen, expected = set(), []
    for i in range(n):
        if i in seen:
            continue
        stack, comp = [i], set()
        while stack:
            k = stack.pop()
            if k in comp:
                continue
            comp.add(k)
            stack.extend(adj[k])
        seen |= comp
        expected.append(sorted(comp))
    assert comps == expected


def test_threshold_components_all_singletons_at_high_tau():
    vecs = tfidf_vectors(["aa bb", "cc dd", "ee ff"])
    assert threshold_components(vecs, 0.99) == [[0], [1], [2]]
