"""Seeded synthetic corpus and fixture generation with planted ground truth.

Every generated article carries known labels (taxonomy chain, type, tone,
lean, per-sentence types) and a planted event-group assignment. The emitted
lexicon drives the mock provider, so pipeline output can be checked against
the planted truth exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

from .core import (
    Article,
    ArticleType,
    LeanLabel,
    PUBLISHER_IDS,
    Taxonomy,
    ToneLabel,
    article_id_for,
    body_digest,
)

# Disjoint keyword pools. Scale keywords must never appear in fillers or in
# any other pool; the mock provider's defaults fire on zero hits.
TONE_KEYWORDS = {
    "Very Negative": ["catastrophic", "devastating"],
    "Negative": ["troubling", "worrisome"],
    "Neutral": [],
    "Positive": ["encouraging", "upbeat"],
    "Very Positive": ["triumphant", "spectacular"],
}

LEAN_KEYWORDS = {
    "Democrat": ["progressive", "unionize"],
    "Neutral Leaning Democrat": ["environmentalist"],
    "Neutral": [],
    "Neutral Leaning Republican": ["deregulation"],
    "Republican": ["conservative", "tariff"],
}

TYPE_KEYWORDS = {
    "News Report": [],
    "News Analysis": ["analysis", "explainer"],
    "Opinion": ["editorial", "oped"],
}

OPINION_MARKERS = ["arguably", "regrettably"]

_BASE_FILLERS = [
    "officials", "meeting", "statement", "city", "region", "program",
    "update", "local", "national", "community", "plan", "budget", "agency",
    "department", "week", "month", "residents", "leaders", "decision",
    "announcement", "schedule", "session", "document", "committee",
]

# Wide pool keeps filler overlap between unrelated articles negligible, so
# only planted group vocabulary can push cosine past the clustering threshold.
FILLERS = _BASE_FILLERS + [f"{w}{i}" for i in range(4) for w in _BASE_FILLERS]

# Showcase vocab for the two reference event groups.
DNC_VOCAB = ["convention", "delegates", "nominee", "keynote", "rollcall"]
CEASEFIRE_VOCAB = ["ceasefire", "negotiations", "hostage", "truce", "mediators"]


def node_keywords(node_id: str) -> List[str]:
    base = node_id.replace("-", "")
    return [f"{base}kw{i}" for i in range(3)]


def build_lexicon(taxonomy: Taxonomy) -> dict:
    return {
        "taxonomy": {n.id: node_keywords(n.id) for n in taxonomy.nodes},
        "tone": {k: v for k, v in TONE_KEYWORDS.items() if v},
        "lean": {k: v for k, v in LEAN_KEYWORDS.items() if v},
        "article_type": {k: v for k, v in TYPE_KEYWORDS.items() if v},
        "opinion_markers": OPINION_MARKERS,
    }


@dataclass
class SynthArticle:
    article: Article
    truth: dict  # category_id, topic_id, subtopic_id, article_type, tone, lean,
                 # sentence_types, event_group


@dataclass
class SynthCorpus:
    articles: List[SynthArticle]
    lexicon: dict
    taxonomy_version: int
    # day -> list of planted groups, each a sorted list of article ids
    event_groups: Dict[str, List[List[str]]] = field(default_factory=dict)

    def truth_by_id(self) -> dict:
        return {sa.article.id: sa.truth for sa in self.articles}


def _sentence(words: List[str]) -> str:
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def _compose_article(
    rng: random.Random,
    chain: tuple,
    article_type: str,
    tone: str,
    lean: str,
    extra_vocab: List[str],
    n_sentences: int,
    vocab_boost: int = 1,
) -> tuple:
    """Returns (title, body, sentence_types).

    Group vocabulary dominates the title and early sentences (the clustering
    window); taxonomy and label keywords sit in a trailing anchor sentence so
    they never create cross-group similarity.
    """
    anchor_words = (
        node_keywords(chain[0])[:1]
        + node_keywords(chain[1])[:1]
        + node_keywords(chain[2])
        + TONE_KEYWORDS[tone]
        + LEAN_KEYWORDS[lean]
        + TYPE_KEYWORDS[article_type]
    )
    title = " ".join(w.capitalize() for w in extra_vocab[:3]) + " " + rng.choice(FILLERS)
    sentences, types = [], []
    lead = [rng.choice(FILLERS)] + list(extra_vocab) * vocab_boost + [rng.choice(FILLERS)]
    sentences.append(_sentence(lead))
    types.append("fact")
    for _ in range(max(n_sentences, 6) - 1):
        roll = rng.random()
        if roll < 0.2:
            inner = " ".join([rng.choice(FILLERS), rng.choice(extra_vocab or FILLERS)])
            sentences.append(
                f'"{inner.capitalize()} this {rng.choice(FILLERS)}," said the spokesperson.'
            )
            types.append("quote")
        elif roll < 0.35:
            sentences.append(
                _sentence([rng.choice(OPINION_MARKERS), "the", rng.choice(FILLERS),
                           "matters", "for", "the", rng.choice(FILLERS)])
            )
            types.append("opinion")
        else:
            words = [rng.choice(FILLERS) for _ in range(max(1, 4 - vocab_boost))]
            words += [rng.choice(extra_vocab or FILLERS) for _ in range(vocab_boost)]
            sentences.append(_sentence(words))
            types.append("fact")
    sentences.append(_sentence(anchor_words + [rng.choice(FILLERS)]))
    types.append("fact")
    return title, " ".join(sentences), types


def _chains(taxonomy: Taxonomy) -> List[tuple]:
    chains = []
    for sub in taxonomy.nodes:
        if sub.level != "subtopic":
            continue
        topic = taxonomy.node(sub.parent_id)
        chains.append((topic.parent_id, topic.id, sub.id))
    return sorted(chains)


def _make_article(pub: str, day: str, seq: int, title: str, body: str,
                  interval_seq: int) -> Article:
    slug = f"{day}-{seq:05d}"
    url = f"https://{pub}.example.com/articles/{slug}"
    minute = seq % 60
    hour = 8 + (seq // 60) % 12
    published = f"{day}T{hour:02d}:{minute:02d}:00Z"
    return Article(
        id=article_id_for(url),
        publisher_id=pub,
        url=url,
        title=title,
        body=body,
        published_at=published,
        collected_at=f"{day}T{hour:02d}:{minute:02d}:30Z",
        interval_rank=(interval_seq % 20) + 1,
        body_hash=body_digest(body),
        interval_id=f"{day}-c{interval_seq // 20}",
    )


def generate_corpus(
    n_articles: int,
    seed: int,
    taxonomy: Taxonomy,
    start_date: str = "2024-08-19",
    days: int = 3,
    publishers: Optional[List[str]] = None,
    event_fraction: float = 0.5,
) -> SynthCorpus:
    """Seeded corpus: a share of each day's articles form planted event groups
    (unique vocabulary per group), the rest are singletons."""
    import datetime as dt

    rng = random.Random(seed)
    publishers = list(publishers or PUBLISHER_IDS)
    chains = _chains(taxonomy)
    start = dt.date.fromisoformat(start_date)
    day_list = [(start + dt.timedelta(days=i)).isoformat() for i in range(days)]

    corpus = SynthCorpus(articles=[], lexicon=build_lexicon(taxonomy),
                         taxonomy_version=taxonomy.version)
    per_pub_day_counts: Dict[tuple, int] = {}
    seq = 0

    def emit(day, chain, extra_vocab, group_name):
        nonlocal seq
        pub = publishers[seq % len(publishers)]
        article_type = rng.choice(list(TYPE_KEYWORDS))
        tone = rng.choice(list(TONE_KEYWORDS))
        lean = rng.choice(list(LEAN_KEYWORDS))
        title, body, stypes = _compose_article(
            rng, chain, article_type, tone, lean, extra_vocab,
            n_sentences=rng.randint(6, 9),
        )
        key = (pub, day)
        interval_seq = per_pub_day_counts.get(key, 0)
        per_pub_day_counts[key] = interval_seq + 1
        article = _make_article(pub, day, seq, title, body, interval_seq)
        seq += 1
        corpus.articles.append(
            SynthArticle(
                article=article,
                truth={
                    "category_id": chain[0],
                    "topic_id": chain[1],
                    "subtopic_id": chain[2],
                    "article_type": article_type,
                    "tone": tone,
                    "lean": lean,
                    "sentence_types": stypes,
                    "event_group": group_name,
                },
            )
        )
        return article

    per_day = max(n_articles // days, 1)
    remainder = n_articles - per_day * days
    for di, day in enumerate(day_list):
        quota = per_day + (1 if di < remainder else 0)
        planted = int(quota * event_fraction)
        emitted = 0
        group_index = 0
        while emitted < planted:
            size = min(rng.randint(2, 5), planted - emitted)
            if size < 2:
                break
            group_name = f"{day}-g{group_index}"
            vocab = [f"evt{day.replace('-', '')}g{group_index}x{j}" for j in range(3)]
            chain = rng.choice(chains)
            members = [emit(day, chain, vocab, group_name) for _ in range(size)]
            corpus.event_groups.setdefault(day, []).append(
                sorted(a.id for a in members)
            )
            emitted += size
            group_index += 1
        for si in range(quota - emitted):
            vocab = [f"solo{day.replace('-', '')}n{si}x{j}" for j in range(3)]
            emit(day, rng.choice(chains), vocab, None)
    return corpus


def generate_reference_day(taxonomy: Taxonomy, day: str = "2024-08-21") -> SynthCorpus:
    """Fixture day with 33 convention-vocabulary articles and 7 ceasefire
    articles: two planted events of importance 33 and 7 across all publishers."""
    rng = random.Random(20240821)
    corpus = SynthCorpus(articles=[], lexicon=build_lexicon(taxonomy),
                         taxonomy_version=taxonomy.version)
    dnc_chain = ("politics", "pol-election", "pol-election-conventions")
    gaza_chain = ("politics", "pol-foreign", "pol-foreign-middleeast")
    groups = {"dnc": [], "gaza": []}
    per_pub_counts: Dict[str, int] = {}
    for i in range(40):
        if i < 33:
            pub = PUBLISHER_IDS[i % 10]
            chain, vocab, group = dnc_chain, DNC_VOCAB, "dnc"
        else:
            pub = PUBLISHER_IDS[i - 33]  # ceasefire covered by first 7 publishers
            chain, vocab, group = gaza_chain, CEASEFIRE_VOCAB, "gaza"
        title, body, stypes = _compose_article(
            rng, chain, "News Report", "Neutral", "Neutral", vocab, n_sentences=6,
            vocab_boost=3,
        )
        interval_seq = per_pub_counts.get(pub, 0)
        per_pub_counts[pub] = interval_seq + 1
        # keep sequence numbers distinct between this fixture and generate_corpus
        article = _make_article(pub, day, 90000 + i, title, body, interval_seq)
        corpus.articles.append(
            SynthArticle(
                article=article,
                truth={
                    "category_id": chain[0],
                    "topic_id": chain[1],
                    "subtopic_id": chain[2],
                    "article_type": "News Report",
                    "tone": "Neutral",
                    "lean": "Neutral",
                    "sentence_types": stypes,
                    "event_group": group,
                },
            )
        )
        groups[group].append(article.id)
    corpus.event_groups[day] = [sorted(groups["dnc"]), sorted(groups["gaza"])]
    return corpus


# --- HTML fixtures for the ingestion pipeline --------------------------------

_ARTICLE_PAGE = """<html>
<head><title>{title}</title></head>
<body>
<nav><a href="/">Home</a> | <a href="/politics">Sections</a></nav>
<h1>{title}</h1>
<time datetime="{published_at}">published</time>
<div class="article-body">
{paragraphs}
</div>
<footer>Contact us | Terms</footer>
</body>
</html>
"""


def write_fixtures(corpus: SynthCorpus, fixtures_dir) -> dict:
    """Write front pages and article pages under fixtures/<publisher>/<interval>/.

    Returns {publisher: {interval_id: link count}}.
    """
    fixtures_dir = Path(fixtures_dir)
    layout: Dict[str, Dict[str, list]] = {}
    for sa in corpus.articles:
        a = sa.article
        layout.setdefault(a.publisher_id, {}).setdefault(a.interval_id, []).append(a)
    counts: Dict[str, Dict[str, int]] = {}
    for pub, intervals in layout.items():
        for interval_id, articles in intervals.items():
            directory = fixtures_dir / pub / interval_id
            directory.mkdir(parents=True, exist_ok=True)
            articles = sorted(articles, key=lambda a: a.interval_rank)
            links = []
            for a in articles:
                slug = a.url.rsplit("/", 1)[-1]
                (directory / f"{slug}.html").write_text(
                    _ARTICLE_PAGE.format(
                        title=a.title,
                        published_at=a.published_at,
                        paragraphs=f"<p>{a.body}</p>",
                    )
                )
                links.append(f'<li><a class="story-link" href="{a.url}">{a.title}</a></li>')
            (directory / "frontpage.html").write_text(
                "<html><body><ol>\n" + "\n".join(links) + "\n</ol></body></html>"
            )
            counts.setdefault(pub, {})[interval_id] = len(links)
    (fixtures_dir / "lexicon.json").write_text(json.dumps(corpus.lexicon, indent=2))
    (fixtures_dir / "truth.json").write_text(
        json.dumps(
            {
                "taxonomy_version": corpus.taxonomy_version,
                "articles": {sa.article.url: sa.truth for sa in corpus.articles},
                "event_groups": corpus.event_groups,
            },
            indent=2,
        )
    )
    return counts
