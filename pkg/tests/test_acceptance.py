"""End-to-end acceptance suite.

Each test here states one externally checkable guarantee of the system and
verifies it against an independent oracle (exhaustive recounts, brute-force
component search, trace replay) rather than against the implementation's own
intermediate results.
"""

import json
import random
import time
from pathlib import Path

import jsonschema
import pytest
from fastapi.testclient import TestClient

from newslens import aggregation, synth
from newslens.api import create_app
from newslens.core import PUBLISHER_IDS
from newslens.events import cluster_events, coverage_matrix, rank_events
from newslens.errors import TaskAlreadyResolved
from newslens.ingestion import default_adapter_configs, run_ingestion_cycle
from newslens.ratelimit import RateLimitPolicy, simulate_dispatch
from newslens.review import agreement_report, record_verdict, sample_for_review
from newslens.store import (
    KINDS,
    Store,
    annotation_to_record,
    article_to_record,
    bootstrap_taxonomy,
)

from . import oracles
from .conftest import build_pipeline_store, make_annotation, truth_for
from .test_aggregation import counts_of, random_filter

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "newslens" / "schemas"

BIG_CORPUS_SIZE = 1000
BIG_CORPUS_SEED = 101
BIG_CORPUS_DAYS = 5


@pytest.fixture(scope="module")
def big(tmp_path_factory):
    """A 1000-article annotated store: articles and their ground-truth labels
    committed directly, which keeps the aggregation workload large without
    paying for HTML round-trips."""
    store = Store(tmp_path_factory.mktemp("big") / "store")
    taxonomy = bootstrap_taxonomy(store)
    corpus = synth.generate_corpus(BIG_CORPUS_SIZE, BIG_CORPUS_SEED, taxonomy,
                                   start_date="2024-08-18", days=BIG_CORPUS_DAYS)
    from newslens.core import ArticleType, LeanLabel, ToneLabel

    batch = []
    for sa in corpus.articles:
        batch.append(("articles", article_to_record(sa.article)))
        ann = make_annotation(
            sa.article.id, taxonomy,
            subtopic_id=sa.truth["subtopic_id"],
            article_type=ArticleType(sa.truth["article_type"]),
            tone=ToneLabel(sa.truth["tone"]),
            lean=LeanLabel(sa.truth["lean"]),
        )
        batch.append(("annotations", annotation_to_record(ann)))
    store.commit(batch)
    return {"store": store, "taxonomy": taxonomy, "corpus": corpus}


def big_filters(taxonomy, n, seed=4242):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        flt = random_filter(rng, taxonomy)
        # widen dates to span the 5-day corpus
        out.append(flt)
    return out


def test_aggregation_oracle_equivalence_1000_articles(big):
    snap = big["store"].open_snapshot()
    taxonomy = big["taxonomy"]
    assert len(snap.records("articles")) >= 1000
    assert {r["publisher_id"] for r in snap.records("articles")} == set(PUBLISHER_IDS)

    started = time.monotonic()
    for flt in big_filters(taxonomy, 200):
        ours = counts_of(aggregation.coverage_counts(snap, flt, taxonomy))
        assert ours == oracles.oracle_coverage_counts(snap, flt, taxonomy)

        dim = flt.color_by if flt.color_by in ("lean", "tone") else "lean"
        dist = counts_of(aggregation.label_distribution(snap, flt, dim, taxonomy))
        assert dist == oracles.oracle_label_distribution(snap, flt, taxonomy, dim)

        means = aggregation.mean_label(snap, flt, dim, taxonomy)
        expected = oracles.oracle_mean_label(snap, flt, taxonomy, dim)
        assert set(means) == set(expected)
        for key in means:
            for pub, value in means[key].items():
                other = expected[key][pub]
                if value is None or other is None:
                    assert value is other
                else:
                    assert abs(value - other) <= 1e-12

        grid = aggregation.grid_summary(snap, flt, taxonomy)
        for row in grid["rows"]:
            for pub in flt.publishers:
                assert row["cells"][pub]["count"] == ours[pub][row["key"]]
            best = sorted(flt.publishers,
                          key=lambda p: (-ours[p][row["key"]], p))[0]
            assert row["max_publisher"] == best
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"aggregation equivalence took {elapsed:.1f}s"


def test_partition_laws_hold_for_every_tested_filter(big):
    snap = big["store"].open_snapshot()
    taxonomy = big["taxonomy"]
    for flt in big_filters(taxonomy, 200):
        slice_ = aggregation.coverage_counts(snap, flt, taxonomy)
        node = taxonomy.node(flt.node) if flt.node else None
        if node is None or node.level in ("category", "topic"):
            # each child key's own total equals its count in the parent slice
            for key in slice_.keys:
                child = aggregation.coverage_counts(
                    snap, type(flt)(node=key, publishers=flt.publishers,
                                    date_from=flt.date_from, date_to=flt.date_to,
                                    article_types=flt.article_types),
                    taxonomy)
                for pub in flt.publishers:
                    parent_count = next(s["count"] for s in slice_.segments[pub]
                                        if s["key"] == key)
                    assert child.publisher_total(pub) == parent_count

        for dim in ("lean", "tone"):
            dist = aggregation.label_distribution(snap, flt, dim, taxonomy)
            for pub in flt.publishers:
                assert dist.publisher_total(pub) == slice_.publisher_total(pub)

        normalized = aggregation.normalize(
            aggregation.coverage_counts(snap, flt, taxonomy))
        for pub in flt.publishers:
            if normalized.publisher_total(pub):
                total = sum(s["proportion"] for s in normalized.segments[pub])
                assert abs(total - 1.0) <= 1e-9


def test_reference_day_two_events_33_and_7(big):
    taxonomy = big["taxonomy"]
    started = time.monotonic()
    corpus = synth.generate_reference_day(taxonomy, day="2024-08-21")
    articles = [sa.article for sa in corpus.articles]
    events = rank_events(cluster_events(articles), {a.id: a for a in articles})
    assert len(events) == 2
    assert [ev.importance for ev in events] == [33, 7]
    truth = corpus.truth_by_id()
    assert {truth[a]["event_group"] for a in events[0].article_ids} == {"dnc"}
    assert {truth[a]["event_group"] for a in events[1].article_ids} == {"gaza"}

    matrix = coverage_matrix(events, list(PUBLISHER_IDS), {a.id: a for a in articles})
    covered = {}
    for a in articles:
        covered.setdefault(truth[a.id]["event_group"], set()).add(a.publisher_id)
    assert matrix[events[0].id] == {p: p in covered["dnc"] for p in PUBLISHER_IDS}
    assert matrix[events[1].id] == {p: p in covered["gaza"] for p in PUBLISHER_IDS}
    assert covered["dnc"] == set(PUBLISHER_IDS)  # 33 articles reach all 10
    assert len(covered["gaza"]) == 7
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"reference day took {elapsed:.1f}s"


def test_clustering_purity_and_determinism_over_ten_seeds(tmp_path):
    store = Store(tmp_path / "store")
    taxonomy = bootstrap_taxonomy(store)
    for seed in range(10):
        corpus = synth.generate_corpus(60, seed, taxonomy,
                                       start_date="2024-08-19", days=1)
        day = "2024-08-19"
        articles = [sa.article for sa in corpus.articles]
        truth = corpus.truth_by_id()
        events = cluster_events(articles)

        # purity 1.0: every recovered cluster is drawn from exactly one
        # planted group, and the planted partition is recovered exactly
        recovered = sorted(sorted(ev.article_ids) for ev in events)
        planted = sorted(corpus.event_groups.get(day, []))
        assert recovered == planted, f"seed {seed}"
        for ev in events:
            groups = {truth[a]["event_group"] for a in ev.article_ids}
            assert len(groups) == 1 and None not in groups

        # byte-identical repeat
        again = cluster_events(articles)
        as_bytes = lambda evs: json.dumps(
            [{"id": e.id, "window_date": e.window_date,
              "article_ids": e.article_ids} for e in evs],
            sort_keys=True).encode()
        assert as_bytes(events) == as_bytes(again)


def test_rate_limit_trace_safe_for_1000_requests():
    policy = RateLimitPolicy(max_requests_per_minute=500, max_in_flight=32)
    trace = simulate_dispatch(1000, policy)
    assert len(trace) == 1000
    violations = oracles.check_rate_trace(trace, 500, 32)
    assert violations == []


def logical_records(store):
    """Record sets per kind with volatile wall-clock fields removed."""
    snap = store.open_snapshot()
    out = {}
    for kind in KINDS:
        records = []
        for r in snap.records(kind):
            r = dict(r)
            if kind == "annotations":
                r.pop("created_at", None)
            records.append(json.dumps(r, sort_keys=True))
        out[kind] = sorted(records)
    return out


def test_pipeline_determinism_and_planted_truth(tmp_path):
    envs = [build_pipeline_store(tmp_path / name, n_articles=60,
                                 days=("2024-08-19",))
            for name in ("run1", "run2")]
    assert logical_records(envs[0]["store"]) == logical_records(envs[1]["store"])

    env = envs[0]
    snap = env["store"].open_snapshot()
    current = snap.current_annotations()
    articles = snap.articles()
    assert len(articles) == 60
    for article in articles:
        truth = truth_for(env, article)
        ann = current[article.id]
        assert (ann.category_id, ann.topic_id, ann.subtopic_id) == (
            truth["category_id"], truth["topic_id"], truth["subtopic_id"])
        assert ann.article_type.value == truth["article_type"]
        assert ann.tone.value == truth["tone"]
        assert ann.lean.value == truth["lean"]
        typed = snap.sentences_for(article.id)
        assert [s.sentence_type.value for s in typed] == truth["sentence_types"]


def test_ingestion_caps_and_idempotence(tmp_path):
    store = Store(tmp_path / "store")
    bootstrap_taxonomy(store)
    taxonomy = store.open_snapshot().taxonomy()
    corpus = synth.generate_corpus(120, 7, taxonomy, start_date="2024-08-19", days=1)
    fixtures = tmp_path / "fx"
    synth.write_fixtures(corpus, fixtures)

    # an oversized interval: 25 links on one front page
    big_dir = fixtures / "ap" / "2024-08-19-c9"
    big_dir.mkdir(parents=True)
    links = []
    for i in range(25):
        url = f"https://ap.example.com/articles/big{i}"
        (big_dir / f"big{i}.html").write_text(
            f'<h1>Big {i}</h1><time datetime="2024-08-19T01:00:00Z"></time>'
            f'<div class="article-body"><p>Oversized body {i}. More text.</p></div>')
        links.append(f'<a class="story-link" href="{url}">b</a>')
    (big_dir / "frontpage.html").write_text("".join(links))

    configs = default_adapter_configs(PUBLISHER_IDS)
    intervals = sorted({sa.article.interval_id for sa in corpus.articles})
    intervals.append("2024-08-19-c9")
    for interval in intervals:
        run_ingestion_cycle(configs, interval, store, fixtures_dir=fixtures)

    per_cell = {}
    for r in store.open_snapshot().records("articles"):
        cell = (r["publisher_id"], r["interval_id"])
        per_cell[cell] = per_cell.get(cell, 0) + 1
    assert all(count <= 20 for count in per_cell.values())
    assert per_cell[("ap", "2024-08-19-c9")] == 20

    for interval in intervals:
        report = run_ingestion_cycle(configs, interval, store, fixtures_dir=fixtures)
        assert report.totals()["new"] == 0


def test_durability_whole_batches_only(tmp_path):
    store = Store(tmp_path / "store")
    taxonomy = bootstrap_taxonomy(store)
    committed = []
    for i in range(3):
        from .conftest import make_article

        art = make_article(url=f"https://ap.example.com/articles/d{i}",
                           body=f"Durable body {i}. Second sentence.")
        committed.append(art)
        store.commit([("articles", article_to_record(art)),
                      ("annotations",
                       annotation_to_record(make_annotation(art.id, taxonomy)))])

    # simulate a crash mid-batch: bytes appended but never published
    from .conftest import make_article

    torn = make_article(url="https://ap.example.com/articles/torn",
                        body="Torn write body. Second sentence.")
    store._append_unpublished("articles", article_to_record(torn))

    reopened = Store(store.path)
    snap = reopened.open_snapshot()
    ids = {r["id"] for r in snap.records("articles")}
    assert ids == {a.id for a in committed}
    assert torn.id not in ids
    # every article still has its same-batch annotation: no half batches
    annotated = {r["article_id"] for r in snap.records("annotations")}
    assert annotated == ids


def load_schema(name):
    return json.loads((SCHEMA_DIR / f"{name}.json").read_text())


def test_api_equivalence_schemas_and_export_round_trip(big):
    snap = big["store"].open_snapshot()
    taxonomy = big["taxonomy"]
    client = TestClient(create_app(big["store"]))
    coverage_schema = load_schema("coverage")
    grid_schema = load_schema("grid")

    for flt in big_filters(taxonomy, 50, seed=777):
        params = {
            "node": flt.node or "",
            "publishers": ",".join(flt.publishers),
            "from": flt.date_from,
            "to": flt.date_to,
            "article_types": ",".join(
                t.lower().replace(" ", "_") for t in flt.article_types),
            "color_by": flt.color_by,
        }
        body = client.get("/api/v1/coverage", params=params).json()
        jsonschema.validate(body, coverage_schema)
        if flt.color_by in ("lean", "tone"):
            direct = aggregation.label_distribution(snap, flt, flt.color_by, taxonomy)
        else:
            direct = aggregation.coverage_counts(snap, flt, taxonomy)
        api_counts = {pub: {s["key"]: s["count"] for s in payload["segments"]}
                      for pub, payload in body["publishers"].items()}
        assert api_counts == counts_of(direct)

        grid_body = client.get("/api/v1/coverage/grid", params=params).json()
        jsonschema.validate(grid_body, grid_schema)
        direct_grid = aggregation.grid_summary(snap, flt, taxonomy)
        assert grid_body["rows"] == json.loads(json.dumps(direct_grid["rows"]))

        csv_text = client.get("/api/v1/export.csv",
                              params=dict(params, granularity="aggregate")).text
        assert oracles.csv_aggregate_totals(csv_text) == \
            counts_of(aggregation.coverage_counts(snap, flt, taxonomy))


def test_review_audit_over_100_random_sequences(tmp_path):
    store = Store(tmp_path / "store")
    taxonomy = bootstrap_taxonomy(store)
    batch = []
    from .conftest import make_article

    for pub in PUBLISHER_IDS:
        for i in range(12):
            art = make_article(publisher_id=pub,
                               url=f"https://{pub}.example.com/articles/v{i}",
                               body=f"Verdict body {pub} {i}. Second sentence.")
            batch.append(("articles", article_to_record(art)))
            batch.append(("annotations",
                          annotation_to_record(make_annotation(art.id, taxonomy))))
    store.commit(batch)

    rng = random.Random(99)
    override_menu = [
        {"lean": "Democrat"},
        {"tone": "Very Positive"},
        {"article_type": "Opinion"},
        {"lean": "Republican", "tone": "Negative"},
        {"taxonomy": {"subtopic_id": "bus-markets-stocks"}},
    ]
    expected = {week: {dim: 0 for dim in ("taxonomy", "article_type", "tone", "lean")}
                for week in ("2024-W33", "2024-W34")}
    resolved_per_week = {"2024-W33": 0, "2024-W34": 0}
    overrides_done = 0
    double_rejections = 0

    for week in ("2024-W33", "2024-W34"):
        tasks = sample_for_review(store, week, n=50, seed=rng.randint(0, 10**6)).tasks
        for task in tasks:
            before_history = len(
                store.open_snapshot().annotation_history(task["article_id"]))
            if rng.random() < 0.5:
                record_verdict(store, task["id"], {"action": "approve"}, "rev")
            else:
                changes = rng.choice(override_menu)
                record_verdict(store, task["id"],
                               {"action": "override", "changes": changes}, "rev")
                overrides_done += 1
                for dim in changes:
                    expected[week][dim] += 1
                snap = store.open_snapshot()
                history = snap.annotation_history(task["article_id"])
                # exactly one superseded annotation was added
                assert len(history) == before_history + 1
                audits = [r for r in snap.records("review")
                          if r["record"] == "audit" and r["task_id"] == task["id"]]
                assert len(audits) == 1
            resolved_per_week[week] += 1

            if rng.random() < 0.3:  # replayed verdicts must be rejected
                with pytest.raises(TaskAlreadyResolved):
                    record_verdict(store, task["id"], {"action": "approve"}, "rev")
                double_rejections += 1

    assert sum(resolved_per_week.values()) == 100
    assert overrides_done > 0 and double_rejections > 0

    snap = store.open_snapshot()
    all_audits = [r for r in snap.records("review") if r["record"] == "audit"]
    assert len(all_audits) == overrides_done

    for week in ("2024-W33", "2024-W34"):
        report = agreement_report(store, week)
        for dim, count in expected[week].items():
            assert report[dim]["resolved"] == resolved_per_week[week]
            assert report[dim]["overridden"] == count
            assert abs(report[dim]["rate"] - count / resolved_per_week[week]) <= 1e-12
