"""Human-in-the-loop review: stratified sampling, approve/override verdicts
with audit trails, and taxonomy update proposals."""

from __future__ import annotations

import datetime as dt
import random
import threading
import uuid
from dataclasses import dataclass
from typing import Dict, List, Optional

from .core import ArticleType, LeanLabel, Taxonomy, TaxonomyNode, ToneLabel
from .errors import (
    ConflictingProposal,
    EmptyPeriod,
    InvalidOverrideLabel,
    StaleProposal,
    TaskAlreadyResolved,
)
from .store import Store, annotation_from_record, annotation_to_record, taxonomy_to_record

DIMENSIONS = ("taxonomy", "article_type", "tone", "lean")

_verdict_lock = threading.Lock()


def _utcnow() -> str:
    return dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class SampleResult:
    tasks: List[dict]
    shortfall: bool


def sample_for_review(store: Store, week: str, n: int, seed: int) -> SampleResult:
    """Stratified weekly sample: proportional across publishers, seeded uniform within.

    Never samples an article twice in the same week. Returns all available
    with a shortfall flag when the population is too small.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    snap = store.open_snapshot()
    current = snap.current_annotations()
    already = {
        r["article_id"]
        for r in snap.records("review")
        if r["record"] == "task" and r["assigned_week"] == week
    }
    by_publisher: Dict[str, List[str]] = {}
    article_map = snap.article_map()
    for article_id in sorted(current):
        if article_id in already:
            continue
        article = article_map.get(article_id)
        if article is not None:
            by_publisher.setdefault(article.publisher_id, []).append(article_id)

    population = sum(len(v) for v in by_publisher.values())
    rng = random.Random(seed)
    chosen: List[str] = []
    if population <= n:
        chosen = [aid for pub in sorted(by_publisher) for aid in by_publisher[pub]]
    else:
        publishers = sorted(by_publisher)
        # proportional allocation with largest-remainder rounding
        quotas = {p: n * len(by_publisher[p]) / population for p in publishers}
        alloc = {p: int(quotas[p]) for p in publishers}
        remaining = n - sum(alloc.values())
        by_remainder = sorted(publishers, key=lambda p: (-(quotas[p] - alloc[p]), p))
        while remaining > 0:
            progressed = False
            for p in by_remainder:
                if remaining <= 0:
                    break
                if alloc[p] < len(by_publisher[p]):
                    alloc[p] += 1
                    remaining -= 1
                    progressed = True
            if not progressed:
                break
        for p in publishers:
            take = min(alloc[p], len(by_publisher[p]))
            chosen.extend(rng.sample(by_publisher[p], take))

    tasks = []
    batch = []
    for article_id in chosen:
        task = {
            "record": "task",
            "id": "rt-" + uuid.uuid5(uuid.NAMESPACE_OID, f"{week}:{article_id}").hex[:12],
            "article_id": article_id,
            "annotation": annotation_to_record(current[article_id]),
            "assigned_week": week,
            "status": "pending",
            "reviewer_id": None,
            "verdict_at": None,
        }
        tasks.append(task)
        batch.append(("review", task))
    if batch:
        store.commit(batch)
    return SampleResult(tasks=tasks, shortfall=population < n)


def _task_state(snap, task_id: str) -> Optional[dict]:
    """Latest review record for the task (tasks are superseded by resolution records)."""
    state = None
    for r in snap.records("review"):
        if r["record"] in ("task", "resolution") and r.get("id") == task_id:
            state = r
    return state


def record_verdict(store: Store, task_id: str, verdict: dict, reviewer_id: str) -> dict:
    """Apply approve or override{dimension: new value, ...} to a pending task.

    Override writes a new current annotation (provenance human_override),
    keeps the old one in history, and records one audit entry.
    """
    with _verdict_lock:
        snap = store.open_snapshot()
        state = _task_state(snap, task_id)
        if state is None:
            raise KeyError(f"unknown review task {task_id}")
        if state["status"] != "pending":
            raise TaskAlreadyResolved(task_id)
        now = _utcnow()
        action = verdict.get("action")
        if action == "approve":
            resolution = dict(state, record="resolution", status="approved",
                              reviewer_id=reviewer_id, verdict_at=now,
                              verdict={"action": "approve"})
            store.commit([("review", resolution)])
            return resolution
        if action != "override":
            raise ValueError(f"bad verdict action {action!r}")

        changes = verdict.get("changes") or {}
        if not changes or not set(changes) <= set(DIMENSIONS):
            raise InvalidOverrideLabel(f"bad override dimensions {sorted(changes)}")
        current = snap.current_annotations().get(state["article_id"])
        if current is None:
            raise KeyError(f"no annotation for article {state['article_id']}")
        taxonomy = snap.taxonomy(current.taxonomy_version)
        updates = {}
        try:
            if "lean" in changes:
                updates["lean"] = LeanLabel(changes["lean"])
            if "tone" in changes:
                updates["tone"] = ToneLabel(changes["tone"])
            if "article_type" in changes:
                updates["article_type"] = ArticleType(changes["article_type"])
            if "taxonomy" in changes:
                node = changes["taxonomy"]
                sub = taxonomy.node(node["subtopic_id"])
                if sub.level != "subtopic":
                    raise InvalidOverrideLabel(f"{sub.id} is not a subtopic")
                topic = taxonomy.node(sub.parent_id)
                updates["subtopic_id"] = sub.id
                updates["topic_id"] = topic.id
                updates["category_id"] = topic.parent_id
        except (ValueError, KeyError) as e:
            raise InvalidOverrideLabel(str(e)) from e

        new_annotation = current.with_override(created_at=now, **updates)
        resolution = dict(state, record="resolution", status="overridden",
                          reviewer_id=reviewer_id, verdict_at=now,
                          verdict={"action": "override", "changes": changes})
        audit = {
            "record": "audit",
            "id": f"au-{uuid.uuid5(uuid.NAMESPACE_OID, task_id).hex[:12]}",
            "task_id": task_id,
            "article_id": state["article_id"],
            "reviewer_id": reviewer_id,
            "at": now,
            "dimensions": sorted(changes),
            "before": annotation_to_record(current),
            "after": annotation_to_record(new_annotation),
        }
        store.commit(
            [
                ("annotations", annotation_to_record(new_annotation)),
                ("review", resolution),
                ("review", audit),
            ]
        )
        return resolution


def agreement_report(store: Store, week: Optional[str] = None) -> dict:
    """Per-dimension override rates over resolved tasks in the period."""
    snap = store.open_snapshot()
    resolved = [
        r
        for r in snap.records("review")
        if r["record"] == "resolution" and (week is None or r["assigned_week"] == week)
    ]
    if not resolved:
        raise EmptyPeriod(week or "all")
    audits = {r["task_id"]: r for r in snap.records("review") if r["record"] == "audit"}
    out = {}
    total = len(resolved)
    for dim in DIMENSIONS:
        overridden = sum(
            1
            for r in resolved
            if r["status"] == "overridden" and dim in audits.get(r["id"], {}).get("dimensions", [])
        )
        out[dim] = {"resolved": total, "overridden": overridden, "rate": overridden / total}
    return out


def apply_taxonomy_proposal(store: Store, proposal: dict) -> Taxonomy:
    """Create the next taxonomy version from an open proposal; append-only."""
    snap = store.open_snapshot()
    current = snap.taxonomy()
    if proposal.get("status", "open") != "open":
        raise StaleProposal(f"proposal {proposal.get('id')} is not open")
    if proposal["base_version"] != current.version:
        raise StaleProposal(
            f"proposal based on v{proposal['base_version']}, current is v{current.version}"
        )
    kind = proposal["kind"]
    payload = proposal["payload"]
    nodes = list(current.nodes)
    tombstones = list(current.tombstones)
    if kind in ("add_topic", "add_subtopic"):
        parent = current.node(payload["parent_id"])
        expected_parent_level = "category" if kind == "add_topic" else "topic"
        if parent.level != expected_parent_level:
            raise ConflictingProposal(f"parent {parent.id} is a {parent.level}")
        siblings = {n.name.casefold() for n in current.children(parent.id)}
        if payload["name"].casefold() in siblings:
            raise ConflictingProposal(f"duplicate sibling name {payload['name']!r}")
        if current.has_node(payload["id"]):
            raise ConflictingProposal(f"duplicate node id {payload['id']!r}")
        level = "topic" if kind == "add_topic" else "subtopic"
        nodes.append(TaxonomyNode(id=payload["id"], name=payload["name"],
                                  level=level, parent_id=parent.id))
    elif kind == "rename":
        # renames create a new id; the old id is tombstoned
        old = current.node(payload["node_id"])
        siblings = {
            n.name.casefold() for n in current.children(old.parent_id) if n.id != old.id
        }
        if payload["name"].casefold() in siblings:
            raise ConflictingProposal(f"duplicate sibling name {payload['name']!r}")
        if current.has_node(payload["new_id"]):
            raise ConflictingProposal(f"duplicate node id {payload['new_id']!r}")
        nodes.append(TaxonomyNode(id=payload["new_id"], name=payload["name"],
                                  level=old.level, parent_id=old.parent_id))
        tombstones.append(old.id)
    elif kind == "retire":
        current.node(payload["node_id"])
        tombstones.append(payload["node_id"])
    else:
        raise ValueError(f"bad proposal kind {kind!r}")

    new_taxonomy = Taxonomy(version=current.version + 1, nodes=tuple(nodes),
                            tombstones=tuple(tombstones))
    applied = dict(proposal, status="applied", applied_version=new_taxonomy.version)
    store.commit(
        [
            ("taxonomies", taxonomy_to_record(new_taxonomy)),
            ("proposals", applied),
        ]
    )
    return new_taxonomy
