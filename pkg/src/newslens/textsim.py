"""Sparse lexical similarity: tokenizer, tf-idf vectors, cosine, threshold components.

Deterministic by construction: tokens sorted, document order preserved by the
caller's input order, union-find with index-based roots.
"""

from __future__ import annotations

import math
import re
from typing import Dict, List, Sequence

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

STOPWORDS = frozenset(
    """a an and are as at be been but by for from had has have he her his i in is it
    its of on or she that the their them they this to was were will with would not
    said say says after before more over under about into than then so we you""".split()
)


def tokenize(text: str) -> List[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if t not in STOPWORDS]


def tfidf_vectors(documents: Sequence[str]) -> List[Dict[str, float]]:
    """L2-normalized tf-idf vectors (smoothed idf) for the given documents."""
    token_lists = [tokenize(doc) for doc in documents]
    n = len(token_lists)
    df: Dict[str, int] = {}
    for tokens in token_lists:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    idf = {term: math.log((1 + n) / (1 + count)) + 1.0 for term, count in df.items()}
    vectors = []
    for tokens in token_lists:
        tf: Dict[str, float] = {}
        for term in tokens:
            tf[term] = tf.get(term, 0.0) + 1.0
        vec = {term: count * idf[term] for term, count in tf.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm > 0:
            vec = {term: w / norm for term, w in vec.items()}
        vectors.append(vec)
    return vectors


def cosine(a: Dict[str, float], b: Dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    return sum(w * b.get(term, 0.0) for term, w in a.items())


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            # smaller index wins the root for determinism
            if ri < rj:
                self.parent[rj] = ri
            else:
                self.parent[ri] = rj


def threshold_components(vectors: Sequence[Dict[str, float]], tau: float) -> List[List[int]]:
    """Connected components over the similarity graph with edges where cosine >= tau.

    Returns components as sorted index lists, ordered by smallest member index.
    """
    n = len(vectors)
    uf = UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if cosine(vectors[i], vectors[j]) >= tau:
                uf.union(i, j)
    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    return [sorted(members) for _, members in sorted(groups.items())]
