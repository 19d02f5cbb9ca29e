"""Annotation orchestration: hierarchical taxonomy classification, label calls,
sentence typing, and the concurrent batch runner."""

from __future__ import annotations

import datetime as dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

from . import prompts, sentences as seg
from .core import (
    Annotation,
    Article,
    ArticleType,
    LeanLabel,
    Sentence,
    SentenceType,
    Taxonomy,
    ToneLabel,
    validate_annotation,
)
from .errors import InvalidLabel, ProviderExhausted, UnparsableResponse
from .providers import ProviderRequest
from .ratelimit import RateLimitPolicy, SlidingWindowLimiter
from .store import annotation_to_record, sentence_to_record

SENTENCE_BATCH_SIZE = 40
MAX_REASKS = 2


def _utcnow() -> str:
    return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class _ProviderSession:
    """Wraps a provider with optional rate limiting and re-ask handling."""

    def __init__(self, provider, policy: Optional[RateLimitPolicy] = None,
                 limiter: Optional[SlidingWindowLimiter] = None, model_id: str = ""):
        self.provider = provider
        self.policy = policy or RateLimitPolicy()
        self.limiter = limiter
        self.model_id = model_id or getattr(provider, "model_id", "unknown")

    def complete(self, prompt: str) -> str:
        request = ProviderRequest(model_id=self.model_id, prompt=prompt)
        if self.limiter is not None:
            self.limiter.acquire()
            try:
                return self.provider.complete(request).text
            finally:
                self.limiter.release()
        return self.provider.complete(request).text

    def ask_label(self, prompt: str, task: str, candidates: list) -> str:
        """Ask, re-asking with a corrective suffix up to MAX_REASKS times."""
        current = prompt
        for attempt in range(MAX_REASKS + 1):
            raw = self.complete(current)
            try:
                return prompts.parse_label_response(raw, task, candidates)
            except (UnparsableResponse, InvalidLabel):
                current = prompt + prompts.CORRECTIVE_SUFFIX
        raise ProviderExhausted(f"task {task}: no valid answer after {MAX_REASKS + 1} attempts")


def annotate_article(
    article: Article,
    provider,
    taxonomy: Taxonomy,
    policy: Optional[RateLimitPolicy] = None,
    templates: Optional[dict] = None,
    limiter: Optional[SlidingWindowLimiter] = None,
) -> Annotation:
    """Produce one complete Annotation via six classification calls.

    Taxonomy classification runs hierarchically: category, then topic within
    the category, then subtopic within the topic. Either all five labels
    validate or ProviderExhausted is raised; no partial annotation escapes.
    """
    templates = templates or prompts.default_templates()
    session = _ProviderSession(provider, policy, limiter)

    def classify_nodes(nodes):
        cands = [(n.id, n.name) for n in sorted(nodes, key=lambda n: n.id)]
        prompt = prompts.render_classify_prompt(
            templates["taxonomy_classify"], article.title, article.body, cands
        )
        return session.ask_label(prompt, "taxonomy_classify", [k for k, _ in cands])

    category_id = classify_nodes(taxonomy.categories())
    topic_id = classify_nodes(taxonomy.children(category_id))
    subtopic_id = classify_nodes(taxonomy.children(topic_id))

    def classify_scale(task, enum_cls):
        cands = [(m.value, m.value) for m in enum_cls]
        prompt = prompts.render_classify_prompt(
            templates[task], article.title, article.body, cands
        )
        answer = session.ask_label(prompt, task, [k for k, _ in cands])
        return enum_cls(answer)

    article_type = classify_scale("article_type", ArticleType)
    tone = classify_scale("tone", ToneLabel)
    lean = classify_scale("lean", LeanLabel)

    annotation = Annotation(
        article_id=article.id,
        taxonomy_version=taxonomy.version,
        category_id=category_id,
        topic_id=topic_id,
        subtopic_id=subtopic_id,
        article_type=article_type,
        tone=tone,
        lean=lean,
        provenance="llm",
        model_id=session.model_id,
        prompt_version=templates["taxonomy_classify"].prompt_version,
        created_at=_utcnow(),
    )
    violations = validate_annotation(annotation, taxonomy)
    if violations:
        raise ProviderExhausted(f"invalid annotation: {violations}")
    return annotation


def classify_sentences(
    article: Article,
    spans: list,
    provider,
    policy: Optional[RateLimitPolicy] = None,
    templates: Optional[dict] = None,
    limiter: Optional[SlidingWindowLimiter] = None,
) -> List[Sentence]:
    """Type every segmented sentence; one provider call per batch of <= 40.

    Indices the provider misses or mislabels get one re-ask, then the
    quotation-pair heuristic with a degraded-quality flag.
    """
    templates = templates or prompts.default_templates()
    session = _ProviderSession(provider, policy, limiter)
    texts = seg.sentence_texts(article.body, spans)
    results: List[Sentence] = []
    for batch_start in range(0, len(texts), SENTENCE_BATCH_SIZE):
        batch = list(range(batch_start, min(batch_start + SENTENCE_BATCH_SIZE, len(texts))))
        block = "\n".join(f"{i}: {texts[i]}" for i in batch)
        prompt = templates["sentence_types"].render(sentences=block)
        labels = prompts.parse_sentence_type_response(session.complete(prompt), batch)
        missing = [i for i in batch if i not in labels]
        if missing:
            labels.update(
                prompts.parse_sentence_type_response(session.complete(prompt), missing)
            )
            missing = [i for i in batch if i not in labels]
        for i in batch:
            if i in labels:
                stype, degraded = SentenceType(labels[i]), False
            else:
                text = texts[i]
                is_quote = text.count('"') >= 2 or ("“" in text and "”" in text)
                stype, degraded = (
                    (SentenceType.QUOTE, True) if is_quote else (SentenceType.FACT, True)
                )
            start, end = spans[i]
            results.append(
                Sentence(
                    article_id=article.id,
                    index=i,
                    text=texts[i],
                    sentence_type=stype,
                    start=start,
                    end=end,
                    degraded=degraded,
                )
            )
    return results


@dataclass
class BatchReport:
    requested: int = 0
    annotated: int = 0
    failed: int = 0
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "requested": self.requested,
            "annotated": self.annotated,
            "failed": self.failed,
            "failures": dict(self.failures),
        }


def run_annotation_batch(
    articles: List[Article],
    provider,
    taxonomy: Taxonomy,
    store,
    policy: Optional[RateLimitPolicy] = None,
) -> BatchReport:
    """Annotate pending articles concurrently under the rate-limit policy.

    Per-article results commit independently (annotation plus typed sentences
    in one batch); a failure flags the article and never stores partial data.
    """
    policy = policy or RateLimitPolicy()
    report = BatchReport(requested=len(articles))
    if not articles:
        return report
    limiter = SlidingWindowLimiter(policy)

    def work(article: Article):
        annotation = annotate_article(article, provider, taxonomy, policy, limiter=limiter)
        spans = seg.segment_sentences(article.body)
        typed = classify_sentences(article, spans, provider, policy, limiter=limiter)
        batch = [("annotations", annotation_to_record(annotation))]
        batch += [("sentences", sentence_to_record(s)) for s in typed]
        store.commit(batch)

    if policy.max_in_flight == 1:
        for article in articles:
            try:
                work(article)
                report.annotated += 1
            except Exception as e:  # noqa: BLE001 - per-article isolation
                report.failed += 1
                report.failures[article.id] = str(e)
        return report

    with ThreadPoolExecutor(max_workers=min(policy.max_in_flight, len(articles))) as pool:
        futures = {pool.submit(work, a): a for a in articles}
        for future, article in futures.items():
            try:
                future.result()
                report.annotated += 1
            except Exception as e:  # noqa: BLE001
                report.failed += 1
                report.failures[article.id] = str(e)
    return report
