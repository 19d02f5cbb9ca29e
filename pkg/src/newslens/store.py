"""Durable append-only store with atomic batch commits and snapshot reads.

Layout inside the store directory:
  <kind>.log      one JSON record per line, append-only
  manifest.json   {"format": 1, "seq": N, "offsets": {kind: bytes}}

A commit appends to the segment files first and publishes the new offsets by
atomically replacing the manifest. Bytes past the manifest offset are ignored
on reopen, so a crash mid-commit never exposes a partial batch.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional

from . import core
from .core import Annotation, Article, ArticleType, LeanLabel, Sentence, SentenceType, Taxonomy, TaxonomyNode, ToneLabel
from .errors import IntegrityViolation, InvalidSelector, StoreUnavailable

KINDS = ("articles", "annotations", "sentences", "events", "review", "proposals", "taxonomies")

MANIFEST = "manifest.json"


# --- record codecs -----------------------------------------------------------

def article_to_record(a: Article) -> dict:
    return {
        "id": a.id,
        "publisher_id": a.publisher_id,
        "url": a.url,
        "title": a.title,
        "body": a.body,
        "published_at": a.published_at,
        "collected_at": a.collected_at,
        "interval_rank": a.interval_rank,
        "body_hash": a.body_hash,
        "interval_id": a.interval_id,
        "published_at_fallback": a.published_at_fallback,
    }


def article_from_record(r: dict) -> Article:
    return Article(**r)


def annotation_to_record(a: Annotation) -> dict:
    return {
        "article_id": a.article_id,
        "taxonomy_version": a.taxonomy_version,
        "category_id": a.category_id,
        "topic_id": a.topic_id,
        "subtopic_id": a.subtopic_id,
        "article_type": a.article_type.value,
        "tone": a.tone.value,
        "lean": a.lean.value,
        "provenance": a.provenance,
        "model_id": a.model_id,
        "prompt_version": a.prompt_version,
        "created_at": a.created_at,
    }


def annotation_from_record(r: dict) -> Annotation:
    return Annotation(
        article_id=r["article_id"],
        taxonomy_version=r["taxonomy_version"],
        category_id=r["category_id"],
        topic_id=r["topic_id"],
        subtopic_id=r["subtopic_id"],
        article_type=ArticleType(r["article_type"]),
        tone=ToneLabel(r["tone"]),
        lean=LeanLabel(r["lean"]),
        provenance=r["provenance"],
        model_id=r["model_id"],
        prompt_version=r["prompt_version"],
        created_at=r["created_at"],
    )


def sentence_to_record(s: Sentence) -> dict:
    return {
        "article_id": s.article_id,
        "index": s.index,
        "text": s.text,
        "sentence_type": s.sentence_type.value,
        "start": s.start,
        "end": s.end,
        "degraded": s.degraded,
    }


def sentence_from_record(r: dict) -> Sentence:
    r = dict(r)
    r["sentence_type"] = SentenceType(r["sentence_type"])
    return Sentence(**r)


def taxonomy_to_record(t: Taxonomy) -> dict:
    return {
        "version": t.version,
        "nodes": [
            {"id": n.id, "name": n.name, "level": n.level, "parent_id": n.parent_id}
            for n in t.nodes
        ],
        "tombstones": list(t.tombstones),
    }


def taxonomy_from_record(r: dict) -> Taxonomy:
    return Taxonomy(
        version=r["version"],
        nodes=tuple(TaxonomyNode(**n) for n in r["nodes"]),
        tombstones=tuple(r.get("tombstones", ())),
    )


# --- store -------------------------------------------------------------------

class Store:
    """Single-writer, multi-reader persistent store."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            self.path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StoreUnavailable(str(e)) from e
        self._lock = threading.Lock()
        self._records = {kind: [] for kind in KINDS}
        self._offsets = {kind: 0 for kind in KINDS}
        self.seq = 0
        # side indexes (position lists; snapshots filter by their record count)
        self._articles_by_id = {}
        self._articles_by_url = {}
        self._articles_by_hash = {}
        self._articles_by_publisher = {}
        self._load()

    def _segment(self, kind: str) -> Path:
        return self.path / f"{kind}.log"

    def _load(self):
        manifest_path = self.path / MANIFEST
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text())
            self.seq = manifest["seq"]
            offsets = manifest["offsets"]
        else:
            offsets = {}
        for kind in KINDS:
            limit = offsets.get(kind, 0)
            seg = self._segment(kind)
            if limit and seg.exists():
                with open(seg, "rb") as f:
                    data = f.read(limit)
                for line in data.splitlines():
                    if line.strip():
                        self._add_in_memory(kind, json.loads(line))
            self._offsets[kind] = limit

    def _add_in_memory(self, kind: str, record: dict):
        pos = len(self._records[kind])
        self._records[kind].append(record)
        if kind == "articles":
            self._articles_by_id[record["id"]] = pos
            self._articles_by_url[record["url"]] = pos
            self._articles_by_hash.setdefault(record["body_hash"], pos)
            self._articles_by_publisher.setdefault(record["publisher_id"], []).append(pos)

    def _check_integrity(self, batch):
        batch_article_ids = {
            rec["id"] for kind, rec in batch if kind == "articles"
        }

        def article_known(article_id):
            return article_id in self._articles_by_id or article_id in batch_article_ids

        for kind, rec in batch:
            if kind not in KINDS:
                raise IntegrityViolation(f"unknown record kind {kind!r}")
            if kind == "annotations" and not article_known(rec["article_id"]):
                raise IntegrityViolation(f"annotation references unknown article {rec['article_id']}")
            if kind == "sentences" and not article_known(rec["article_id"]):
                raise IntegrityViolation(f"sentence references unknown article {rec['article_id']}")
            if kind == "events":
                for ev in rec.get("events", []):
                    for aid in ev["article_ids"]:
                        if not article_known(aid):
                            raise IntegrityViolation(f"event references unknown article {aid}")

    def commit(self, batch: Iterable) -> int:
        """Atomically apply a batch of (kind, record) puts; returns the new sequence number."""
        batch = list(batch)
        with self._lock:
            self._check_integrity(batch)
            touched = {}
            for kind, rec in batch:
                touched.setdefault(kind, []).append(rec)
            new_offsets = dict(self._offsets)
            for kind, recs in touched.items():
                payload = "".join(json.dumps(r, sort_keys=True) + "\n" for r in recs).encode("utf-8")
                with open(self._segment(kind), "ab") as f:
                    f.write(payload)
                    f.flush()
                    os.fsync(f.fileno())
                new_offsets[kind] = new_offsets[kind] + len(payload)
            new_seq = self.seq + 1
            self._write_manifest(new_seq, new_offsets)
            self._offsets = new_offsets
            self.seq = new_seq
            for kind, rec in batch:
                self._add_in_memory(kind, rec)
            return new_seq

    def _write_manifest(self, seq, offsets):
        tmp = self.path / (MANIFEST + ".tmp")
        with open(tmp, "w") as f:
            json.dump({"format": 1, "seq": seq, "offsets": offsets}, f)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, self.path / MANIFEST)
        dir_fd = os.open(self.path, os.O_RDONLY)
        try:
            os.fsync(dir_fd)
        finally:
            os.close(dir_fd)

    # test hook: append segment bytes without publishing the manifest,
    # emulating a crash between segment write and manifest replace
    def _append_unpublished(self, kind, record):
        with open(self._segment(kind), "ab") as f:
            f.write((json.dumps(record) + "\n").encode("utf-8"))
            f.flush()
            os.fsync(f.fileno())

    def open_snapshot(self) -> "Snapshot":
        with self._lock:
            counts = {kind: len(self._records[kind]) for kind in KINDS}
            return Snapshot(self, counts, self.seq)

    def has_url(self, url: str) -> bool:
        return url in self._articles_by_url

    def has_body_hash(self, digest: str) -> bool:
        return digest in self._articles_by_hash


@dataclass
class Snapshot:
    """Point-in-time view; sees exactly the commits sequenced before creation."""

    store: Store
    counts: dict
    seq: int

    def records(self, kind: str) -> list:
        if kind not in KINDS:
            raise InvalidSelector(f"unknown kind {kind!r}")
        return self.store._records[kind][: self.counts[kind]]

    # --- typed accessors (lazily cached per snapshot) ---

    def articles(self) -> list:
        if not hasattr(self, "_articles"):
            self._articles = [article_from_record(r) for r in self.records("articles")]
        return self._articles

    def article_map(self) -> dict:
        if not hasattr(self, "_article_map"):
            self._article_map = {a.id: a for a in self.articles()}
        return self._article_map

    def annotations(self) -> list:
        return [annotation_from_record(r) for r in self.records("annotations")]

    def current_annotations(self) -> dict:
        """article_id -> latest annotation visible in this snapshot."""
        if not hasattr(self, "_current"):
            current = {}
            for r in self.records("annotations"):
                current[r["article_id"]] = annotation_from_record(r)
            self._current = current
        return self._current

    def annotation_history(self, article_id: str) -> list:
        return [
            annotation_from_record(r)
            for r in self.records("annotations")
            if r["article_id"] == article_id
        ]

    def sentences_for(self, article_id: str) -> list:
        return sorted(
            (
                sentence_from_record(r)
                for r in self.records("sentences")
                if r["article_id"] == article_id
            ),
            key=lambda s: s.index,
        )

    def sentence_map(self) -> dict:
        if not hasattr(self, "_sentence_map"):
            m = {}
            for r in self.records("sentences"):
                m.setdefault(r["article_id"], []).append(sentence_from_record(r))
            for sentences in m.values():
                sentences.sort(key=lambda s: s.index)
            self._sentence_map = m
        return self._sentence_map

    def taxonomy(self, version: Optional[int] = None) -> Optional[Taxonomy]:
        recs = self.records("taxonomies")
        if not recs:
            return None
        if version is None:
            rec = max(recs, key=lambda r: r["version"])
        else:
            matching = [r for r in recs if r["version"] == version]
            if not matching:
                return None
            rec = matching[-1]
        return taxonomy_from_record(rec)

    def taxonomy_versions(self) -> list:
        return sorted({r["version"] for r in self.records("taxonomies")})

    def event_sets(self) -> dict:
        """window_date -> latest committed event-set record for that window."""
        out = {}
        for r in self.records("events"):
            out[r["window_date"]] = r
        return out

    def query(self, selector: dict) -> Iterator[dict]:
        """Indexed filter over one record kind; results ordered deterministically."""
        if not isinstance(selector, dict) or "kind" not in selector:
            raise InvalidSelector("selector must be a dict with a 'kind' key")
        kind = selector["kind"]
        known = {"kind", "publisher", "date_from", "date_to", "node", "taxonomy",
                 "article_type", "current_only", "article_id"}
        extra = set(selector) - known
        if extra:
            raise InvalidSelector(f"unknown selector keys {sorted(extra)}")
        if kind == "articles":
            yield from self._query_articles(selector)
            return
        records = self.records(kind)
        if kind == "annotations" and selector.get("current_only"):
            records = [annotation_to_record(a) for a in self.current_annotations().values()]
        if selector.get("article_id") is not None:
            records = [r for r in records if r.get("article_id") == selector["article_id"]]
        yield from sorted(records, key=lambda r: json.dumps(r, sort_keys=True))

    def _query_articles(self, selector: dict) -> Iterator[dict]:
        publisher = selector.get("publisher")
        if publisher is not None:
            positions = [
                p
                for p in self.store._articles_by_publisher.get(publisher, [])
                if p < self.counts["articles"]
            ]
            records = [self.store._records["articles"][p] for p in positions]
        else:
            records = self.records("articles")
        date_from, date_to = selector.get("date_from"), selector.get("date_to")
        node, taxonomy = selector.get("node"), selector.get("taxonomy")
        article_type = selector.get("article_type")
        needs_annotation = node is not None or article_type is not None
        current = self.current_annotations() if needs_annotation else {}
        subtree = taxonomy.subtree_ids(node) if node is not None else None

        def keep(rec):
            day = rec["published_at"][:10]
            if date_from and day < date_from:
                return False
            if date_to and day > date_to:
                return False
            if needs_annotation:
                ann = current.get(rec["id"])
                if ann is None:
                    return False
                if subtree is not None and not (
                    {ann.category_id, ann.topic_id, ann.subtopic_id} & subtree
                ):
                    return False
                if article_type is not None and ann.article_type != article_type:
                    return False
            return True

        yield from sorted((r for r in records if keep(r)), key=lambda r: r["id"])


def bootstrap_taxonomy(store: Store, seed_path: Optional[Path] = None) -> Taxonomy:
    """Load the seed taxonomy into an empty store; no-op if one exists."""
    snap = store.open_snapshot()
    existing = snap.taxonomy()
    if existing is not None:
        return existing
    if seed_path is None:
        seed_path = Path(__file__).parent / "data" / "taxonomy_v1.txt"
    taxonomy = core.load_taxonomy_text(Path(seed_path).read_text(), version=1)
    store.commit([("taxonomies", taxonomy_to_record(taxonomy))])
    return taxonomy
