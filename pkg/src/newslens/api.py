"""Versioned HTTP interface: coverage, events, taxonomy, export, review."""

from __future__ import annotations

import datetime as dt
from typing import Optional

from fastapi import Depends, FastAPI, Header, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from . import __version__, aggregation, events as events_mod, review
from .aggregation import CoverageFilter
from .core import ArticleType, PUBLISHER_IDS
from .errors import (
    EmptyPeriod,
    InvalidOverrideLabel,
    NewslensError,
    TaskAlreadyResolved,
    UnknownNode,
)
from .store import Store

ARTICLE_TYPE_TOKENS = {
    "news_report": ArticleType.NEWS_REPORT,
    "news_analysis": ArticleType.NEWS_ANALYSIS,
    "opinion": ArticleType.OPINION,
}

EVENTS_DEFAULT_RANGE_DAYS = 3


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _parse_date(value: str, name: str) -> str:
    value = value.strip()
    if len(value) == 8 and value.isdigit():  # ISO basic form
        value = f"{value[:4]}-{value[4:6]}-{value[6:]}"
    try:
        dt.date.fromisoformat(value)
    except ValueError:
        raise ApiError(400, "bad_parameter", f"malformed date {name}={value!r}")
    return value


def _parse_filter(request: Request) -> CoverageFilter:
    q = request.query_params
    publishers = tuple(p for p in q.get("publishers", "").split(",") if p) or tuple(PUBLISHER_IDS)
    for p in publishers:
        if p not in PUBLISHER_IDS:
            raise ApiError(400, "bad_parameter", f"unknown publisher {p!r}")
    raw_types = [t for t in q.get("article_types", "").split(",") if t]
    types = []
    for t in raw_types:
        if t not in ARTICLE_TYPE_TOKENS:
            raise ApiError(400, "bad_parameter", f"unknown article type {t!r}")
        types.append(ARTICLE_TYPE_TOKENS[t].value)
    date_from = _parse_date(q.get("from", aggregation.DEFAULT_DATE_FROM), "from")
    date_to = _parse_date(q.get("to", "9999-12-31"), "to")
    color_by = q.get("color_by", "category")
    if color_by not in ("category", "lean", "tone"):
        raise ApiError(400, "bad_parameter", f"bad color_by {color_by!r}")
    normalized = q.get("normalized", "false").lower() in ("1", "true", "yes")
    try:
        return CoverageFilter(
            node=q.get("node") or None,
            publishers=publishers,
            date_from=date_from,
            date_to=date_to,
            article_types=tuple(types) or tuple(t.value for t in ArticleType),
            color_by=color_by,
            normalized=normalized,
        )
    except ValueError as e:
        raise ApiError(400, "bad_parameter", str(e))


def create_app(store: Store, review_token: str = "", static_dir=None) -> FastAPI:
    app = FastAPI(title="newslens", version=__version__)

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(NewslensError)
    async def _domain_error(request, exc: NewslensError):
        status = {"unknown_node": 404}.get(exc.code, 500)
        return JSONResponse(
            status_code=status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    def snapshot():
        return store.open_snapshot()

    def taxonomy_for(snap, version=None):
        taxonomy = snap.taxonomy(version)
        if taxonomy is None:
            raise ApiError(404, "unknown_taxonomy_version", f"no taxonomy version {version}")
        return taxonomy

    def require_token(authorization: Optional[str]):
        if not review_token:
            return
        if authorization != f"Bearer {review_token}":
            raise ApiError(401, "unauthorized", "missing or invalid bearer token")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__, "store_seq": store.seq}

    @app.get("/api/v1/taxonomy")
    def taxonomy_endpoint(version: Optional[int] = None):
        snap = snapshot()
        taxonomy = taxonomy_for(snap, version)
        return {
            "version": taxonomy.version,
            "nodes": [
                {"id": n.id, "name": n.name, "level": n.level, "parent_id": n.parent_id}
                for n in taxonomy.nodes
            ],
            "tombstones": list(taxonomy.tombstones),
        }

    @app.get("/api/v1/coverage")
    def coverage_endpoint(request: Request):
        flt = _parse_filter(request)
        snap = snapshot()
        taxonomy = taxonomy_for(snap)
        if flt.color_by in ("lean", "tone"):
            slice_ = aggregation.label_distribution(snap, flt, flt.color_by, taxonomy)
        else:
            slice_ = aggregation.coverage_counts(snap, flt, taxonomy)
        if flt.normalized and not slice_.normalized:
            slice_ = aggregation.normalize(slice_)
        body = slice_.to_dict()
        body["filter"] = _filter_echo(flt)
        return body

    @app.get("/api/v1/coverage/grid")
    def grid_endpoint(request: Request):
        flt = _parse_filter(request)
        snap = snapshot()
        taxonomy = taxonomy_for(snap)
        body = aggregation.grid_summary(snap, flt, taxonomy)
        body["filter"] = _filter_echo(flt)
        return body

    def _load_events(snap, date_from, date_to):
        out = []
        for window_date, record in sorted(snap.event_sets().items()):
            if date_from <= window_date <= date_to:
                out.append(record)
        return out

    @app.get("/api/v1/events")
    def events_endpoint(request: Request):
        q = request.query_params
        today = dt.date.today()
        default_from = (today - dt.timedelta(days=EVENTS_DEFAULT_RANGE_DAYS - 1)).isoformat()
        date_from = _parse_date(q.get("from", default_from), "from")
        date_to = _parse_date(q.get("to", today.isoformat()), "to")
        if date_from > date_to:
            raise ApiError(400, "bad_parameter", "from > to")
        publishers = [p for p in q.get("publishers", "").split(",") if p] or list(PUBLISHER_IDS)
        for p in publishers:
            if p not in PUBLISHER_IDS:
                raise ApiError(400, "bad_parameter", f"unknown publisher {p!r}")
        snap = snapshot()
        article_map = snap.article_map()
        rows = []
        event_objs = []
        for record in _load_events(snap, date_from, date_to):
            for ev in record["events"]:
                event_objs.append(
                    events_mod.Event(
                        id=ev["id"],
                        window_date=ev["window_date"],
                        article_ids=ev["article_ids"],
                        short_title=ev["short_title"],
                    )
                )
        ranked = events_mod.rank_events(event_objs, article_map)
        matrix = events_mod.coverage_matrix(ranked, publishers, article_map)
        for ev in ranked:
            rows.append(
                {
                    "id": ev.id,
                    "window_date": ev.window_date,
                    "short_title": ev.short_title,
                    "importance": ev.importance,
                    "cells": matrix[ev.id],
                }
            )
        return {"from": date_from, "to": date_to, "publishers": publishers, "events": rows}

    def _find_event(snap, event_id):
        for record in snap.event_sets().values():
            for ev in record["events"]:
                if ev["id"] == event_id:
                    facts = [f for f in record["facts"] if f["event_id"] == event_id]
                    return ev, facts
        raise ApiError(404, "unknown_event", f"no event {event_id}")

    @app.get("/api/v1/events/{event_id}")
    def event_detail(event_id: str):
        snap = snapshot()
        ev, facts = _find_event(snap, event_id)
        article_map = snap.article_map()
        members = sorted(ev["article_ids"])
        publishers = sorted(
            {article_map[a].publisher_id for a in members if a in article_map}
        )
        return {
            "id": ev["id"],
            "window_date": ev["window_date"],
            "short_title": ev["short_title"],
            "description": ev["description"],
            "importance": ev["importance"],
            "degraded_summary": ev.get("degraded_summary", False),
            "sentence_stats": ev["sentence_stats"],
            "publishers": publishers,
            "article_ids": members,
            "top_facts": [
                {
                    "id": f["id"],
                    "canonical_text": f["canonical_text"],
                    "variation_count": len(f["variations"]),
                    "publisher_mentions": f["publisher_mentions"],
                }
                for f in facts
            ],
        }

    @app.get("/api/v1/events/{event_id}/facts/{fact_id}")
    def fact_detail(event_id: str, fact_id: str):
        snap = snapshot()
        ev, facts = _find_event(snap, event_id)
        match = [f for f in facts if f["id"] == fact_id]
        if not match:
            raise ApiError(404, "unknown_fact", f"no fact {fact_id}")
        fact = match[0]
        article_map = snap.article_map()
        variations = []
        for v in fact["variations"]:
            article = article_map.get(v["article_id"])
            variations.append(
                {
                    "article_id": v["article_id"],
                    "sentence_index": v["sentence_index"],
                    "text": v["text"],
                    "url": article.url if article else None,
                    "publisher_id": article.publisher_id if article else None,
                }
            )
        return {
            "id": fact["id"],
            "event_id": event_id,
            "canonical_text": fact["canonical_text"],
            "publisher_mentions": fact["publisher_mentions"],
            "variations": variations,
        }

    @app.get("/api/v1/export.csv")
    def export_endpoint(request: Request, granularity: str = "article"):
        if granularity not in ("article", "aggregate"):
            raise ApiError(400, "bad_parameter", f"bad granularity {granularity!r}")
        flt = _parse_filter(request)
        snap = snapshot()
        taxonomy = taxonomy_for(snap)
        text = aggregation.export_csv(snap, flt, taxonomy, granularity)
        return PlainTextResponse(text, media_type="text/csv")

    @app.get("/api/v1/review/tasks")
    def review_tasks(week: Optional[str] = None):
        snap = snapshot()
        latest = {}
        for r in snap.records("review"):
            if r["record"] in ("task", "resolution"):
                latest[r["id"]] = r
        tasks = [
            r for r in latest.values() if week is None or r["assigned_week"] == week
        ]
        tasks.sort(key=lambda r: r["id"])
        return {"week": week, "tasks": tasks}

    @app.post("/api/v1/review/verdicts")
    def post_verdict(payload: dict, authorization: Optional[str] = Header(default=None)):
        require_token(authorization)
        task_id = payload.get("task_id")
        reviewer_id = payload.get("reviewer_id", "")
        verdict = {"action": payload.get("action")}
        if payload.get("changes"):
            verdict["changes"] = payload["changes"]
        if not task_id or verdict["action"] not in ("approve", "override"):
            raise ApiError(400, "bad_parameter", "task_id and a valid action are required")
        try:
            resolution = review.record_verdict(store, task_id, verdict, reviewer_id)
        except TaskAlreadyResolved:
            snap = snapshot()
            state = review._task_state(snap, task_id)
            if state and state.get("verdict") == _normalize_verdict(verdict):
                return {"resolution": state, "idempotent": True}
            raise ApiError(409, "task_already_resolved", f"task {task_id} already resolved")
        except InvalidOverrideLabel as e:
            raise ApiError(400, "invalid_override", str(e))
        except KeyError as e:
            raise ApiError(404, "unknown_task", str(e))
        except ValueError as e:
            raise ApiError(400, "bad_parameter", str(e))
        return {"resolution": resolution, "idempotent": False}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")

    return app


def _normalize_verdict(verdict: dict) -> dict:
    if verdict.get("action") == "approve":
        return {"action": "approve"}
    return {"action": "override", "changes": verdict.get("changes") or {}}


def _filter_echo(flt: CoverageFilter) -> dict:
    return {
        "node": flt.node,
        "publishers": list(flt.publishers),
        "from": flt.date_from,
        "to": flt.date_to,
        "article_types": list(flt.article_types),
        "color_by": flt.color_by,
        "normalized": flt.normalized,
    }
