"""Event detection: same-day clustering, ranking, summaries, sentence-type
composition, and cross-publisher top facts."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import prompts, sentences as seg, textsim
from .core import Article, Sentence, SentenceType
from .errors import MissingSentenceData, ProviderExhausted
from .providers import ProviderRequest

TAU_EVENT = 0.35
TAU_FACT = 0.5
TOP_FACTS_DEFAULT = 5
CLUSTER_SENTENCES = 5  # title + first N sentences feed the vectorizer


@dataclass
class Event:
    id: str
    window_date: str  # YYYY-MM-DD (UTC)
    article_ids: List[str]
    short_title: str = ""
    description: str = ""
    degraded_summary: bool = False
    sentence_stats: Optional[dict] = None

    @property
    def importance(self) -> int:
        return len(self.article_ids)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "window_date": self.window_date,
            "article_ids": list(self.article_ids),
            "short_title": self.short_title,
            "description": self.description,
            "degraded_summary": self.degraded_summary,
            "sentence_stats": self.sentence_stats,
            "importance": self.importance,
        }


@dataclass
class TopFact:
    id: str
    event_id: str
    canonical_text: str
    variations: List[dict]  # {article_id, sentence_index, text}
    publisher_mentions: Dict[str, bool]

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "event_id": self.event_id,
            "canonical_text": self.canonical_text,
            "variations": list(self.variations),
            "publisher_mentions": dict(self.publisher_mentions),
        }


def _cluster_document(article: Article) -> str:
    spans = seg.segment_sentences(article.body)
    first = seg.sentence_texts(article.body, spans)[:CLUSTER_SENTENCES]
    return article.title + " " + " ".join(first)


def _event_id(window_date: str, member_ids: List[str]) -> str:
    digest = hashlib.sha256((window_date + "|" + ",".join(member_ids)).encode()).hexdigest()[:12]
    return f"ev-{window_date}-{digest}"


def cluster_events(articles: List[Article], tau: float = TAU_EVENT) -> List[Event]:
    """Connected components over cosine similarity >= tau; singletons dropped.

    All articles must share one UTC window date. Deterministic: articles are
    sorted by id before vectorizing.
    """
    if not articles:
        return []
    dates = {a.published_at[:10] for a in articles}
    if len(dates) != 1:
        raise ValueError(f"articles span multiple window dates: {sorted(dates)}")
    window_date = dates.pop()
    ordered = sorted(articles, key=lambda a: a.id)
    vectors = textsim.tfidf_vectors([_cluster_document(a) for a in ordered])
    events = []
    for component in textsim.threshold_components(vectors, tau):
        if len(component) < 2:
            continue
        member_ids = sorted(ordered[i].id for i in component)
        events.append(Event(id=_event_id(window_date, member_ids),
                            window_date=window_date, article_ids=member_ids))
    return events


def rank_events(events: List[Event], article_map: Optional[dict] = None) -> List[Event]:
    """Descending importance; ties by earliest member published_at, then id."""

    def earliest(ev: Event) -> str:
        if not article_map:
            return ""
        return min(article_map[aid].published_at for aid in ev.article_ids if aid in article_map)

    return sorted(events, key=lambda ev: (-ev.importance, earliest(ev), ev.id))


def _member_degrees(articles: List[Article]) -> List[int]:
    """Sum of intra-cluster similarities per member (centrality proxy)."""
    vectors = textsim.tfidf_vectors([_cluster_document(a) for a in articles])
    degrees = []
    for i in range(len(vectors)):
        degrees.append(sum(textsim.cosine(vectors[i], vectors[j])
                           for j in range(len(vectors)) if j != i))
    return degrees


def summarize_event(event: Event, articles: List[Article], provider,
                    templates: Optional[dict] = None) -> Event:
    """Fill short_title and description with one event_summary provider call."""
    templates = templates or prompts.default_templates()
    members = sorted((a for a in articles if a.id in set(event.article_ids)),
                     key=lambda a: a.id)
    if len(members) < 2:
        raise ValueError("event must have at least 2 members")
    degrees = _member_degrees(members)
    ranked = [m for _, m in sorted(zip(degrees, members), key=lambda t: (-t[0], t[1].id))]
    titles = "\n".join(f"- {m.title}" for m in ranked)
    firsts = "\n".join(
        f"- {seg.sentence_texts(m.body, seg.segment_sentences(m.body))[0]}" for m in ranked
    )
    prompt = templates["event_summary"].render(titles=titles, first_sentences=firsts)
    try:
        text = provider.complete(ProviderRequest(model_id="", prompt=prompt)).text
        lines = [l.strip() for l in text.splitlines() if l.strip()]
        if not lines:
            raise ProviderExhausted("empty summary")
        event.short_title = " ".join(lines[0].split()[:12])
        event.description = " ".join(lines[1:]) or event.short_title
        event.degraded_summary = False
    except ProviderExhausted:
        event.short_title = f"Untitled event ({event.importance} articles)"
        event.description = ""
        event.degraded_summary = True
    return event


def sentence_type_stats(event: Event, sentences_by_article: Dict[str, List[Sentence]]) -> dict:
    """Counts and proportions of fact/quote/opinion sentences across members."""
    counts = {"fact": 0, "quote": 0, "opinion": 0}
    for aid in event.article_ids:
        member_sentences = sentences_by_article.get(aid)
        if not member_sentences:
            raise MissingSentenceData(aid)
        for s in member_sentences:
            counts[s.sentence_type.value] += 1
    total = sum(counts.values())
    proportions = {k: (v / total if total else 0.0) for k, v in counts.items()}
    return {"counts": counts, "proportions": proportions, "total": total}


def extract_top_facts(
    event: Event,
    articles: List[Article],
    sentences_by_article: Dict[str, List[Sentence]],
    k: int = TOP_FACTS_DEFAULT,
    tau_fact: float = TAU_FACT,
) -> List[TopFact]:
    """Group fact sentences by similarity; rank groups by publisher spread.

    Groups rank by (distinct publishers, total variations) descending; the
    canonical phrasing is the variation with the highest mean similarity to
    its group. Mention map covers every publisher with an article in the event.
    """
    member_ids = set(event.article_ids)
    members = {a.id: a for a in articles if a.id in member_ids}
    event_publishers = sorted({a.publisher_id for a in members.values()})
    fact_sentences = []
    for aid in sorted(member_ids):
        for s in sentences_by_article.get(aid, []):
            if s.sentence_type == SentenceType.FACT:
                fact_sentences.append(s)
    if not fact_sentences:
        return []
    vectors = textsim.tfidf_vectors([s.text for s in fact_sentences])
    groups = textsim.threshold_components(vectors, tau_fact)

    def group_key(group):
        publishers = {members[fact_sentences[i].article_id].publisher_id for i in group}
        return (-len(publishers), -len(group), min(group))

    ranked_groups = sorted(groups, key=group_key)[: max(k, 0)]
    facts = []
    for rank, group in enumerate(ranked_groups):
        # canonical = member with highest mean similarity to the others
        def mean_sim(i):
            others = [j for j in group if j != i]
            if not others:
                return 1.0
            return sum(textsim.cosine(vectors[i], vectors[j]) for j in others) / len(others)

        canonical_idx = max(group, key=lambda i: (mean_sim(i), -i))
        variations = [
            {
                "article_id": fact_sentences[i].article_id,
                "sentence_index": fact_sentences[i].index,
                "text": fact_sentences[i].text,
            }
            for i in group
        ]
        group_publishers = {members[fact_sentences[i].article_id].publisher_id for i in group}
        facts.append(
            TopFact(
                id=f"{event.id}-f{rank}",
                event_id=event.id,
                canonical_text=fact_sentences[canonical_idx].text,
                variations=variations,
                publisher_mentions={p: p in group_publishers for p in event_publishers},
            )
        )
    return facts


def coverage_matrix(events: List[Event], publishers: List[str],
                    article_map: Dict[str, Article]) -> Dict[str, Dict[str, bool]]:
    """event id -> publisher -> has at least one member article."""
    grid = {}
    for ev in events:
        present = {article_map[aid].publisher_id for aid in ev.article_ids if aid in article_map}
        grid[ev.id] = {p: p in present for p in publishers}
    return grid


def recompute_window(store, window_date: str, provider, k_facts: int = TOP_FACTS_DEFAULT,
                     tau: float = TAU_EVENT, tau_fact: float = TAU_FACT) -> dict:
    """Cluster one day's articles and atomically replace that window's events."""
    snap = store.open_snapshot()
    articles = [a for a in snap.articles() if a.published_at[:10] == window_date]
    sentence_map = snap.sentence_map()
    events = cluster_events(articles, tau=tau)
    article_map = {a.id: a for a in articles}
    event_records, fact_records = [], []
    for ev in rank_events(events, article_map):
        summarize_event(ev, articles, provider)
        try:
            ev.sentence_stats = sentence_type_stats(ev, sentence_map)
        except MissingSentenceData:
            ev.sentence_stats = None
        event_records.append(ev.to_record())
        for fact in extract_top_facts(ev, articles, sentence_map, k=k_facts, tau_fact=tau_fact):
            fact_records.append(fact.to_record())
    record = {"window_date": window_date, "events": event_records, "facts": fact_records}
    store.commit([("events", record)])
    return record
