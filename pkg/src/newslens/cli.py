"""Operator command line: pipeline stages, review, taxonomy, fixtures, serving.

Each subcommand is a thin wrapper over one module operation. Logs go to
stderr; data goes to stdout or the path given with --out. Exit codes:
0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import aggregation, annotate, events, ingestion, review, store as store_mod, synth
from .aggregation import CoverageFilter
from .core import PUBLISHER_IDS, dump_taxonomy_text
from .errors import NewslensError
from .providers import HttpChatProvider, MockProvider
from .ratelimit import RateLimitPolicy

log = logging.getLogger("newslens")


def _open_store(args) -> store_mod.Store:
    return store_mod.Store(Path(args.store))


def _emit(payload: dict, out: str = "-"):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out in ("-", "", None):
        print(text)
    else:
        Path(out).write_text(text + "\n")


def _build_provider(args):
    if args.provider == "mock":
        lexicon = {}
        if getattr(args, "lexicon", None):
            with open(args.lexicon) as f:
                lexicon = json.load(f)
        return MockProvider(lexicon)
    if not args.endpoint:
        raise SystemExit("--endpoint is required with --provider http")
    return HttpChatProvider(endpoint=args.endpoint, model_id=args.model)


def _add_provider_flags(p):
    p.add_argument("--provider", choices=("mock", "http"), default="mock")
    p.add_argument("--lexicon", help="keyword table for the mock provider (JSON)")
    p.add_argument("--endpoint", help="chat-completion endpoint for --provider http")
    p.add_argument("--model", default="gpt-4o", help="model id for --provider http")


def cmd_ingest(args) -> int:
    store = _open_store(args)
    store_mod.bootstrap_taxonomy(store)
    if args.fixtures:
        fixtures_dir = Path(args.fixtures)
        if not fixtures_dir.is_dir():
            log.error("fixtures directory not found: %s", fixtures_dir)
            return 1
    else:
        fixtures_dir = None
    if args.adapters:
        configs = ingestion.load_adapter_configs(Path(args.adapters))
    else:
        configs = ingestion.default_adapter_configs(PUBLISHER_IDS)
    report = ingestion.run_ingestion_cycle(configs, args.interval, store,
                                           fixtures_dir=fixtures_dir,
                                           collected_at=args.collected_at)
    _emit(report.to_dict(), args.out)
    failures = report.totals()["failure"]
    if failures > args.tolerate_failures:
        log.error("ingestion finished with %d failures", failures)
        return 1
    return 0


def cmd_annotate(args) -> int:
    store = _open_store(args)
    taxonomy = store_mod.bootstrap_taxonomy(store)
    snap = store.open_snapshot()
    done = set(snap.current_annotations())
    pending = [a for a in snap.articles() if a.id not in done]
    pending.sort(key=lambda a: a.id)
    if args.limit:
        pending = pending[: args.limit]
    provider = _build_provider(args)
    policy = RateLimitPolicy(max_requests_per_minute=args.rpm,
                             max_in_flight=args.in_flight)
    report = annotate.run_annotation_batch(pending, provider, taxonomy, store, policy)
    _emit(report.to_dict(), args.out)
    return 0 if report.failed == 0 else 1


def cmd_events_recompute(args) -> int:
    store = _open_store(args)
    provider = _build_provider(args)
    record = events.recompute_window(store, args.date, provider, k_facts=args.top_facts)
    _emit(
        {
            "window_date": record["window_date"],
            "events": len(record["events"]),
            "facts": len(record["facts"]),
        },
        args.out,
    )
    return 0


def cmd_review_sample(args) -> int:
    store = _open_store(args)
    result = review.sample_for_review(store, args.week, args.n, args.seed)
    _emit({"week": args.week, "tasks": result.tasks, "shortfall": result.shortfall},
          args.out)
    if result.shortfall:
        log.warning("population smaller than requested sample size")
    return 0


def cmd_review_apply(args) -> int:
    store = _open_store(args)
    if args.approve == bool(args.override):
        raise SystemExit("exactly one of --approve or --override is required")
    if args.approve:
        verdict = {"action": "approve"}
    else:
        verdict = {"action": "override", "changes": json.loads(args.override)}
    try:
        resolution = review.record_verdict(store, args.task, verdict, args.reviewer)
    except KeyError as e:
        log.error("%s", e)
        return 1
    _emit(resolution, args.out)
    return 0


def cmd_review_report(args) -> int:
    store = _open_store(args)
    _emit(review.agreement_report(store, args.week), args.out)
    return 0


def cmd_taxonomy_show(args) -> int:
    store = _open_store(args)
    snap = store.open_snapshot()
    taxonomy = snap.taxonomy(args.version)
    if taxonomy is None:
        log.error("no taxonomy version %s", args.version)
        return 1
    sys.stdout.write(f"# version {taxonomy.version}\n")
    sys.stdout.write(dump_taxonomy_text(taxonomy))
    if taxonomy.tombstones:
        sys.stdout.write("# tombstones: " + ", ".join(taxonomy.tombstones) + "\n")
    return 0


def cmd_taxonomy_propose(args) -> int:
    store = _open_store(args)
    with open(args.file) as f:
        proposal = json.load(f)
    proposal.setdefault("status", "open")
    if "id" not in proposal:
        raise SystemExit("proposal file must carry an 'id' field")
    if "base_version" not in proposal:
        snap = store.open_snapshot()
        proposal["base_version"] = snap.taxonomy().version
    store.commit([("proposals", proposal)])
    _emit(proposal, args.out)
    return 0


def cmd_taxonomy_apply(args) -> int:
    store = _open_store(args)
    snap = store.open_snapshot()
    latest = None
    for r in snap.records("proposals"):
        if r.get("id") == args.id:
            latest = r
    if latest is None:
        log.error("no proposal %s", args.id)
        return 1
    taxonomy = review.apply_taxonomy_proposal(store, latest)
    _emit({"applied": args.id, "new_version": taxonomy.version}, args.out)
    return 0


def cmd_export(args) -> int:
    store = _open_store(args)
    snap = store.open_snapshot()
    taxonomy = snap.taxonomy()
    if taxonomy is None:
        log.error("store has no taxonomy; run ingest or taxonomy bootstrap first")
        return 1
    flt = CoverageFilter(
        node=args.node,
        publishers=tuple(args.publishers.split(",")) if args.publishers else tuple(PUBLISHER_IDS),
        date_from=args.date_from,
        date_to=args.date_to,
    )
    text = aggregation.export_csv(snap, flt, taxonomy, args.granularity)
    if args.out in ("-", "", None):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    store = _open_store(args)
    store_mod.bootstrap_taxonomy(store)
    host, _, port = args.addr.rpartition(":")
    app = create_app(store, review_token=args.token,
                     static_dir=args.static or None)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


def cmd_fixture_generate(args) -> int:
    store = _open_store(args)
    taxonomy = store_mod.bootstrap_taxonomy(store)
    if args.reference_day:
        corpus = synth.generate_reference_day(taxonomy, day=args.reference_day)
    else:
        corpus = synth.generate_corpus(args.articles, args.seed, taxonomy,
                                       start_date=args.start_date, days=args.days)
    counts = synth.write_fixtures(corpus, Path(args.dir))
    _emit({"articles": len(corpus.articles), "layout": counts, "dir": str(args.dir)},
          args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newslens")
    parser.add_argument("--store", default="./newslens-store",
                        help="store directory (created on first write)")
    parser.add_argument("--out", default="-", help="write command output here instead of stdout")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="run one top-article fetch cycle")
    p.add_argument("--interval", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--fixtures", help="read pages from this fixture tree")
    group.add_argument("--live", action="store_true", help="fetch over HTTP")
    p.add_argument("--adapters", help="publisher adapter config file (JSON)")
    p.add_argument("--collected-at", help="override the collection timestamp (ISO 8601)")
    p.add_argument("--tolerate-failures", type=int, default=0)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("annotate", help="label unannotated articles")
    _add_provider_flags(p)
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--rpm", type=int, default=500, help="max provider requests per minute")
    p.add_argument("--in-flight", type=int, default=32, help="max concurrent provider requests")
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("events", help="event clustering operations")
    events_sub = p.add_subparsers(dest="events_command", required=True)
    p = events_sub.add_parser("recompute", help="recluster one day's articles")
    p.add_argument("--date", required=True, help="UTC window date, YYYY-MM-DD")
    p.add_argument("--top-facts", type=int, default=events.TOP_FACTS_DEFAULT)
    _add_provider_flags(p)
    p.set_defaults(fn=cmd_events_recompute)

    p = sub.add_parser("review", help="sampling, verdicts, and agreement reports")
    review_sub = p.add_subparsers(dest="review_command", required=True)
    ps = review_sub.add_parser("sample")
    ps.add_argument("--week", required=True, help="ISO week label, e.g. 2024-W34")
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--seed", type=int, default=0)
    ps.set_defaults(fn=cmd_review_sample)
    pa = review_sub.add_parser("apply")
    pa.add_argument("--task", required=True)
    pa.add_argument("--approve", action="store_true")
    pa.add_argument("--override", help='JSON changes, e.g. \'{"lean": "Leaning Republican"}\'')
    pa.add_argument("--reviewer", default="")
    pa.set_defaults(fn=cmd_review_apply)
    pr = review_sub.add_parser("report")
    pr.add_argument("--week")
    pr.set_defaults(fn=cmd_review_report)

    p = sub.add_parser("taxonomy", help="inspect and evolve the topic hierarchy")
    tax_sub = p.add_subparsers(dest="taxonomy_command", required=True)
    pt = tax_sub.add_parser("show")
    pt.add_argument("--version", type=int)
    pt.set_defaults(fn=cmd_taxonomy_show)
    pp = tax_sub.add_parser("propose")
    pp.add_argument("--file", required=True, help="proposal JSON file")
    pp.set_defaults(fn=cmd_taxonomy_propose)
    pap = tax_sub.add_parser("apply")
    pap.add_argument("--id", required=True, help="proposal id to apply")
    pap.set_defaults(fn=cmd_taxonomy_apply)

    p = sub.add_parser("export", help="write article or aggregate rows as CSV")
    p.add_argument("--granularity", choices=("article", "aggregate"), default="article")
    p.add_argument("--node")
    p.add_argument("--publishers", help="comma-separated publisher ids")
    p.add_argument("--date-from", default=aggregation.DEFAULT_DATE_FROM)
    p.add_argument("--date-to", default="9999-12-31")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.add_argument("--token", default="", help="bearer token required for review writes")
    p.add_argument("--static", help="serve a built dashboard from this directory")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("fixture", help="synthetic corpora with planted ground truth")
    fix_sub = p.add_subparsers(dest="fixture_command", required=True)
    pg = fix_sub.add_parser("generate")
    pg.add_argument("--articles", type=int, default=100)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--dir", required=True, help="fixture output directory")
    pg.add_argument("--start-date", default="2024-08-19")
    pg.add_argument("--days", type=int, default=3)
    pg.add_argument("--reference-day", nargs="?", const="2024-08-21", default=None,
                    help="emit the fixed 33/7 two-event day instead of a random corpus")
    pg.set_defaults(fn=cmd_fixture_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )
    try:
        return args.fn(args)
    except NewslensError as e:
        log.error("%s: %s", e.code, e)
        return 1
    except OSError as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
