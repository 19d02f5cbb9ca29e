"""Faceted coverage queries over store snapshots: counts, 5-bucket label
distributions, per-cell means, grid summaries, and CSV export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .core import (
    LEAN_ORDER,
    TONE_ORDER,
    Annotation,
    Article,
    ArticleType,
    PUBLISHER_IDS,
    Taxonomy,
    label_to_numeric,
)
from .errors import UnknownNode

DEFAULT_DATE_FROM = "2024-01-01"


@dataclass(frozen=True)
class CoverageFilter:
    node: Optional[str] = None  # node id; None = all-categories root
    publishers: tuple = tuple(PUBLISHER_IDS)
    date_from: str = DEFAULT_DATE_FROM
    date_to: str = "9999-12-31"
    article_types: tuple = tuple(t.value for t in ArticleType)
    color_by: str = "category"  # category | lean | tone
    normalized: bool = False

    def __post_init__(self):
        if self.date_from > self.date_to:
            raise ValueError("date_from must be <= date_to")
        if not self.publishers or not self.article_types:
            raise ValueError("publisher and article-type subsets must be non-empty")
        if self.color_by not in ("category", "lean", "tone"):
            raise ValueError(f"bad color_by {self.color_by!r}")


@dataclass
class CoverageSlice:
    """Per-publisher segment lists for one filter."""

    keys: List[str]
    key_names: Dict[str, str]
    segments: Dict[str, List[dict]]  # publisher -> [{key, count, proportion}]
    normalized: bool = False

    def publisher_total(self, publisher: str) -> int:
        return sum(s["count"] for s in self.segments.get(publisher, []))

    def to_dict(self) -> dict:
        return {
            "keys": self.keys,
            "key_names": self.key_names,
            "normalized": self.normalized,
            "publishers": {
                pub: {
                    "total": self.publisher_total(pub),
                    "empty": self.publisher_total(pub) == 0,
                    "segments": segs,
                }
                for pub, segs in self.segments.items()
            },
        }


def _matching(snapshot, flt: CoverageFilter, taxonomy: Taxonomy):
    """(article, current annotation) pairs passing all filter facets."""
    if flt.node is not None:
        taxonomy.node(flt.node)  # raises UnknownNode
        subtree = taxonomy.subtree_ids(flt.node)
    else:
        subtree = None
    publishers = set(flt.publishers)
    types = set(flt.article_types)
    current = snapshot.current_annotations()
    out = []
    for article in snapshot.articles():
        if article.publisher_id not in publishers:
            continue
        day = article.published_at[:10]
        if not (flt.date_from <= day <= flt.date_to):
            continue
        ann = current.get(article.id)
        if ann is None:
            continue
        if ann.article_type.value not in types:
            continue
        if subtree is not None and ann.subtopic_id not in subtree \
                and ann.topic_id not in subtree and ann.category_id not in subtree:
            continue
        out.append((article, ann))
    return out


def _child_keys(taxonomy: Taxonomy, node: Optional[str]):
    """Segment keys under the filter node: child nodes, or the node itself at subtopic depth."""
    if node is None:
        children = taxonomy.categories()
    else:
        n = taxonomy.node(node)
        children = taxonomy.children(node) if n.level != "subtopic" else [n]
    children = sorted(children, key=lambda n: n.id)
    return [c.id for c in children], {c.id: c.name for c in children}


def _key_for(ann: Annotation, taxonomy: Taxonomy, node: Optional[str]) -> Optional[str]:
    """Which child segment an annotation falls under, or None."""
    chain = [ann.category_id, ann.topic_id, ann.subtopic_id]
    if node is None:
        return ann.category_id
    level = taxonomy.node(node).level
    if level == "category":
        return ann.topic_id if ann.category_id == node else None
    if level == "topic":
        return ann.subtopic_id if ann.topic_id == node else None
    return node if ann.subtopic_id == node else None


def coverage_counts(snapshot, flt: CoverageFilter, taxonomy: Taxonomy) -> CoverageSlice:
    """Article counts per (publisher, child node of filter.node)."""
    keys, names = _child_keys(taxonomy, flt.node)
    counts = {pub: {k: 0 for k in keys} for pub in flt.publishers}
    for article, ann in _matching(snapshot, flt, taxonomy):
        key = _key_for(ann, taxonomy, flt.node)
        if key in counts[article.publisher_id]:
            counts[article.publisher_id][key] += 1
    slice_ = CoverageSlice(
        keys=keys,
        key_names=names,
        segments={
            pub: [{"key": k, "count": counts[pub][k], "proportion": None} for k in keys]
            for pub in flt.publishers
        },
    )
    return normalize(slice_) if flt.normalized else slice_


def label_distribution(snapshot, flt: CoverageFilter, dimension: str,
                       taxonomy: Taxonomy) -> CoverageSlice:
    """5-bucket lean or tone distribution per publisher under the filter."""
    order = LEAN_ORDER if dimension == "lean" else TONE_ORDER
    keys = [m.value for m in order]
    counts = {pub: {k: 0 for k in keys} for pub in flt.publishers}
    for article, ann in _matching(snapshot, flt, taxonomy):
        label = ann.lean if dimension == "lean" else ann.tone
        counts[article.publisher_id][label.value] += 1
    slice_ = CoverageSlice(
        keys=keys,
        key_names={k: k for k in keys},
        segments={
            pub: [{"key": k, "count": counts[pub][k], "proportion": None} for k in keys]
            for pub in flt.publishers
        },
    )
    return normalize(slice_) if flt.normalized else slice_


def mean_label(snapshot, flt: CoverageFilter, dimension: str,
               taxonomy: Taxonomy) -> Dict[str, Dict[str, Optional[float]]]:
    """Per (child node, publisher) arithmetic mean of the numeric label; None for empty cells."""
    keys, _ = _child_keys(taxonomy, flt.node)
    sums = {k: {pub: [0, 0] for pub in flt.publishers} for k in keys}
    for article, ann in _matching(snapshot, flt, taxonomy):
        key = _key_for(ann, taxonomy, flt.node)
        if key in sums and article.publisher_id in sums[key]:
            label = ann.lean if dimension == "lean" else ann.tone
            cell = sums[key][article.publisher_id]
            cell[0] += label_to_numeric(label)
            cell[1] += 1
    return {
        k: {
            pub: (cell[0] / cell[1] if cell[1] else None)
            for pub, cell in sums[k].items()
        }
        for k in keys
    }


def grid_summary(snapshot, flt: CoverageFilter, taxonomy: Taxonomy) -> dict:
    """Per child-node row: per-publisher counts plus the argmax publisher marker.

    Ties break by publisher slug order. Includes mean lean/tone per cell when
    color_by requests it.
    """
    slice_ = coverage_counts(snapshot, flt, taxonomy)
    means = (
        mean_label(snapshot, flt, flt.color_by, taxonomy)
        if flt.color_by in ("lean", "tone")
        else None
    )
    rows = []
    for key in slice_.keys:
        cells = {}
        for pub in flt.publishers:
            count = next(s["count"] for s in slice_.segments[pub] if s["key"] == key)
            cells[pub] = {"count": count}
            if means is not None:
                cells[pub]["mean"] = means[key][pub]
        max_pub = max(sorted(cells), key=lambda p: cells[p]["count"])
        rows.append(
            {
                "key": key,
                "name": slice_.key_names[key],
                "cells": cells,
                "max_publisher": max_pub,
                "max_count": cells[max_pub]["count"],
            }
        )
    return {"rows": rows, "publishers": list(flt.publishers), "color_by": flt.color_by}


def normalize(slice_: CoverageSlice) -> CoverageSlice:
    """Fill proportions = count / publisher total; zero-total publishers flagged empty."""
    for pub, segments in slice_.segments.items():
        total = sum(s["count"] for s in segments)
        for s in segments:
            s["proportion"] = (s["count"] / total) if total else 0.0
    slice_.normalized = True
    return slice_


ARTICLE_CSV_COLUMNS = [
    "article_id", "publisher", "url", "title", "published_at", "interval_rank",
    "taxonomy_version", "category", "topic", "subtopic", "article_type",
    "tone", "lean", "provenance",
]

AGGREGATE_CSV_COLUMNS = ["publisher", "key", "key_name", "count", "proportion"]


def export_csv(snapshot, flt: CoverageFilter, taxonomy: Taxonomy,
               granularity: str = "article") -> str:
    """CSV text: one row per article, or one row per (publisher, key) aggregate."""
    buf = io.StringIO()
    if granularity == "article":
        writer = csv.DictWriter(buf, fieldnames=ARTICLE_CSV_COLUMNS)
        writer.writeheader()
        for article, ann in sorted(_matching(snapshot, flt, taxonomy),
                                   key=lambda pair: pair[0].id):
            writer.writerow(
                {
                    "article_id": article.id,
                    "publisher": article.publisher_id,
                    "url": article.url,
                    "title": article.title,
                    "published_at": article.published_at,
                    "interval_rank": article.interval_rank,
                    "taxonomy_version": ann.taxonomy_version,
                    "category": ann.category_id,
                    "topic": ann.topic_id,
                    "subtopic": ann.subtopic_id,
                    "article_type": ann.article_type.value,
                    "tone": ann.tone.value,
                    "lean": ann.lean.value,
                    "provenance": ann.provenance,
                }
            )
    elif granularity == "aggregate":
        slice_ = normalize(coverage_counts(snapshot, flt, taxonomy))
        writer = csv.DictWriter(buf, fieldnames=AGGREGATE_CSV_COLUMNS)
        writer.writeheader()
        for pub in flt.publishers:
            for seg in slice_.segments[pub]:
                writer.writerow(
                    {
                        "publisher": pub,
                        "key": seg["key"],
                        "key_name": slice_.key_names[seg["key"]],
                        "count": seg["count"],
                        "proportion": seg["proportion"],
                    }
                )
    else:
        raise ValueError(f"bad granularity {granularity!r}")
    return buf.getvalue()
