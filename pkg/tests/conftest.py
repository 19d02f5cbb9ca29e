import datetime as dt
from pathlib import Path

import pytest

from newslens import store as store_mod, synth
from newslens.annotate import run_annotation_batch
from newslens.core import (
    Annotation,
    Article,
    ArticleType,
    LeanLabel,
    ToneLabel,
    article_id_for,
    body_digest,
)
from newslens.events import recompute_window
from newslens.ingestion import default_adapter_configs, run_ingestion_cycle
from newslens.providers import MockProvider
from newslens.ratelimit import RateLimitPolicy
from newslens.core import PUBLISHER_IDS

SEED_CORPUS = 11
CORPUS_DAYS = ("2024-08-19", "2024-08-20", "2024-08-21")


@pytest.fixture()
def store(tmp_path):
    return store_mod.Store(tmp_path / "store")


@pytest.fixture()
def taxonomy(store):
    return store_mod.bootstrap_taxonomy(store)


@pytest.fixture()
def mock_provider(taxonomy):
    return MockProvider(synth.build_lexicon(taxonomy))


def make_article(
    publisher_id="ap",
    url="https://ap.example.com/articles/x1",
    title="A headline",
    body="First sentence. Second sentence.",
    published_at="2024-08-19T08:00:00Z",
    rank=1,
    interval_id="2024-08-19-c0",
):
    return Article(
        id=article_id_for(url),
        publisher_id=publisher_id,
        url=url,
        title=title,
        body=body,
        published_at=published_at,
        collected_at=published_at,
        interval_rank=rank,
        body_hash=body_digest(body),
        interval_id=interval_id,
    )


def make_annotation(article_id, taxonomy, subtopic_id="pol-election-horserace",
                    article_type=ArticleType.NEWS_REPORT, tone=ToneLabel.NEUTRAL,
                    lean=LeanLabel.NEUTRAL, created_at="2024-08-19T09:00:00Z",
                    provenance="llm"):
    sub = taxonomy.node(subtopic_id)
    topic = taxonomy.node(sub.parent_id)
    return Annotation(
        article_id=article_id,
        taxonomy_version=taxonomy.version,
        category_id=topic.parent_id,
        topic_id=topic.id,
        subtopic_id=sub.id,
        article_type=article_type,
        tone=tone,
        lean=lean,
        provenance=provenance,
        model_id="mock",
        prompt_version="test-1",
        created_at=created_at,
    )


def build_pipeline_store(base_dir: Path, n_articles=100, seed=SEED_CORPUS,
                         days=CORPUS_DAYS, recompute_events=True):
    """Fixture ingest -> mock annotate -> cluster, returning everything a test needs."""
    store = store_mod.Store(base_dir / "store")
    taxonomy = store_mod.bootstrap_taxonomy(store)
    corpus = synth.generate_corpus(n_articles, seed, taxonomy,
                                   start_date=days[0], days=len(days))
    fixtures = base_dir / "fixtures"
    synth.write_fixtures(corpus, fixtures)
    configs = default_adapter_configs(PUBLISHER_IDS)
    intervals = sorted({sa.article.interval_id for sa in corpus.articles})
    for interval_id in intervals:
        run_ingestion_cycle(configs, interval_id, store, fixtures_dir=fixtures,
                            collected_at=f"{interval_id[:10]}T23:00:00Z")
    provider = MockProvider(corpus.lexicon)
    snap = store.open_snapshot()
    report = run_annotation_batch(list(snap.articles()), provider, taxonomy, store,
                                  RateLimitPolicy(max_in_flight=8))
    assert report.failed == 0, report.failures
    if recompute_events:
        for day in days:
            recompute_window(store, day, provider)
    return {
        "store": store,
        "taxonomy": taxonomy,
        "corpus": corpus,
        "fixtures": fixtures,
        "provider": provider,
        "intervals": intervals,
    }


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """Shared small end-to-end corpus; treat the store as read-only."""
    return build_pipeline_store(tmp_path_factory.mktemp("pipeline"))


def truth_for(pipeline_env, article):
    """Planted ground-truth labels for an ingested article."""
    return pipeline_env["corpus"].truth_by_id()[article.id]


def utc_day(offset=0):
    return (dt.date.today() + dt.timedelta(days=offset)).isoformat()
