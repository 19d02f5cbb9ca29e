"""Domain types: publishers, articles, ordinal label scales, and the versioned taxonomy."""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import TaxonomyVersionMismatch, UnknownNode


@dataclass(frozen=True)
class Publisher:
    id: str
    display_name: str
    enabled: bool = True


# Ten publishers tracked by the default configuration.
DEFAULT_PUBLISHERS = [
    Publisher("ap", "Associated Press News"),
    Publisher("breitbart", "Breitbart News"),
    Publisher("cnn", "CNN"),
    Publisher("fox", "Fox News"),
    Publisher("guardian", "The Guardian"),
    Publisher("huffpost", "The Huffington Post"),
    Publisher("nyt", "The New York Times"),
    Publisher("usatoday", "USA Today"),
    Publisher("wsj", "The Wall Street Journal"),
    Publisher("washpost", "The Washington Post"),
]

PUBLISHER_IDS = [p.id for p in DEFAULT_PUBLISHERS]


class LeanLabel(enum.Enum):
    DEMOCRAT = "Democrat"
    NEUTRAL_LEANING_DEMOCRAT = "Neutral Leaning Democrat"
    NEUTRAL = "Neutral"
    NEUTRAL_LEANING_REPUBLICAN = "Neutral Leaning Republican"
    REPUBLICAN = "Republican"


class ToneLabel(enum.Enum):
    VERY_NEGATIVE = "Very Negative"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"
    VERY_POSITIVE = "Very Positive"


class ArticleType(enum.Enum):
    NEWS_REPORT = "News Report"
    NEWS_ANALYSIS = "News Analysis"
    OPINION = "Opinion"


class SentenceType(enum.Enum):
    FACT = "fact"
    QUOTE = "quote"
    OPINION = "opinion"


# Sign convention: Democrat = -2 ... Republican = +2 (internal only; displays use labels).
_LEAN_NUMERIC = {
    LeanLabel.DEMOCRAT: -2,
    LeanLabel.NEUTRAL_LEANING_DEMOCRAT: -1,
    LeanLabel.NEUTRAL: 0,
    LeanLabel.NEUTRAL_LEANING_REPUBLICAN: 1,
    LeanLabel.REPUBLICAN: 2,
}

_TONE_NUMERIC = {
    ToneLabel.VERY_NEGATIVE: -2,
    ToneLabel.NEGATIVE: -1,
    ToneLabel.NEUTRAL: 0,
    ToneLabel.POSITIVE: 1,
    ToneLabel.VERY_POSITIVE: 2,
}

LEAN_ORDER = [l for l, _ in sorted(_LEAN_NUMERIC.items(), key=lambda kv: kv[1])]
TONE_ORDER = [t for t, _ in sorted(_TONE_NUMERIC.items(), key=lambda kv: kv[1])]


def label_to_numeric(label) -> int:
    """Map a lean or tone label onto the shared -2..+2 integer scale."""
    if isinstance(label, LeanLabel):
        return _LEAN_NUMERIC[label]
    if isinstance(label, ToneLabel):
        return _TONE_NUMERIC[label]
    raise TypeError(f"not an ordinal label: {label!r}")


def numeric_to_label(value: int, dimension: str):
    """Inverse of label_to_numeric; dimension is 'lean' or 'tone'."""
    table = _LEAN_NUMERIC if dimension == "lean" else _TONE_NUMERIC
    for label, num in table.items():
        if num == value:
            return label
    raise ValueError(f"no {dimension} label for numeric value {value}")


def parse_scale_label(text: str, dimension: str):
    """Look up a scale member from its display text, case-insensitively."""
    enum_cls = LeanLabel if dimension == "lean" else ToneLabel
    folded = text.strip().casefold()
    for member in enum_cls:
        if member.value.casefold() == folded:
            return member
    raise ValueError(f"unknown {dimension} label: {text!r}")


LEVELS = ("category", "topic", "subtopic")


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    name: str
    level: str  # category | topic | subtopic
    parent_id: Optional[str] = None

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"bad level {self.level!r}")
        if (self.level == "category") != (self.parent_id is None):
            raise ValueError("only categories may lack a parent")


@dataclass(frozen=True)
class Taxonomy:
    """Immutable snapshot of one taxonomy version."""

    version: int
    nodes: tuple = ()
    tombstones: tuple = ()  # node ids retired relative to earlier versions

    def __post_init__(self):
        by_id = {}
        for node in self.nodes:
            if node.id in by_id:
                raise ValueError(f"duplicate node id {node.id}")
            by_id[node.id] = node
        sibling_names = set()
        for node in self.nodes:
            key = (node.parent_id, node.name.casefold())
            if key in sibling_names:
                raise ValueError(f"duplicate sibling name {node.name!r}")
            sibling_names.add(key)
            if node.parent_id is not None:
                parent = by_id.get(node.parent_id)
                if parent is None:
                    raise ValueError(f"node {node.id} has unknown parent {node.parent_id}")
                expected = LEVELS[LEVELS.index(parent.level) + 1]
                if node.level != expected:
                    raise ValueError(f"node {node.id}: level {node.level} under {parent.level}")
        object.__setattr__(self, "_by_id", by_id)

    def node(self, node_id: str) -> TaxonomyNode:
        node = self._by_id.get(node_id)
        if node is None:
            raise UnknownNode(node_id)
        return node

    def has_node(self, node_id: str) -> bool:
        return node_id in self._by_id

    def children(self, node_id: Optional[str]) -> list:
        return [n for n in self.nodes if n.parent_id == node_id]

    def categories(self) -> list:
        return [n for n in self.nodes if n.level == "category"]

    def parent_chain(self, node_id: str) -> list:
        """Node ids from the category down to node_id."""
        chain = []
        node = self.node(node_id)
        while node is not None:
            chain.append(node.id)
            node = self._by_id.get(node.parent_id) if node.parent_id else None
        return list(reversed(chain))

    def subtree_ids(self, node_id: str) -> set:
        """node_id plus all descendant ids."""
        self.node(node_id)
        out = {node_id}
        frontier = [node_id]
        while frontier:
            nxt = []
            for n in self.nodes:
                if n.parent_id in frontier:
                    out.add(n.id)
                    nxt.append(n.id)
            frontier = nxt
        return out

    def resolve_path(self, names: Iterable[str]) -> TaxonomyNode:
        """Follow a chain of names (category[, topic[, subtopic]]) to its deepest node."""
        names = list(names)
        if not names or len(names) > 3:
            raise UnknownNode(f"bad path length {len(names)}")
        parent_id = None
        node = None
        for name in names:
            folded = name.strip().casefold()
            matches = [n for n in self.children(parent_id) if n.name.casefold() == folded]
            if not matches:
                raise UnknownNode(" / ".join(names))
            node = matches[0]
            parent_id = node.id
        return node


def resolve_path(taxonomy: Taxonomy, names: Iterable[str]) -> TaxonomyNode:
    return taxonomy.resolve_path(names)


@dataclass(frozen=True)
class Article:
    id: str
    publisher_id: str
    url: str
    title: str
    body: str
    published_at: str  # ISO-8601 UTC
    collected_at: str
    interval_rank: int
    body_hash: str
    interval_id: str = ""
    published_at_fallback: bool = False

    def __post_init__(self):
        if not (1 <= self.interval_rank <= 20):
            raise ValueError(f"interval_rank {self.interval_rank} outside [1, 20]")
        if not self.body.strip():
            raise ValueError("article body is empty")


def normalize_body(body: str) -> str:
    return re.sub(r"\s+", " ", body).strip()


def body_digest(body: str) -> str:
    return hashlib.sha256(normalize_body(body).encode("utf-8")).hexdigest()


def article_id_for(url: str) -> str:
    """Content-addressed article id from the canonical URL."""
    return "a-" + hashlib.sha256(url.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Annotation:
    article_id: str
    taxonomy_version: int
    category_id: str
    topic_id: str
    subtopic_id: str
    article_type: ArticleType
    tone: ToneLabel
    lean: LeanLabel
    provenance: str  # llm | human_override
    model_id: str
    prompt_version: str
    created_at: str

    def with_override(self, **changes) -> "Annotation":
        return replace(self, provenance="human_override", **changes)


@dataclass(frozen=True)
class Sentence:
    article_id: str
    index: int
    text: str
    sentence_type: SentenceType
    start: int = 0
    end: int = 0
    degraded: bool = False


def validate_annotation(a: Annotation, t: Taxonomy) -> list:
    """Return a list of violation strings; empty means the annotation is well formed."""
    if a.taxonomy_version != t.version:
        raise TaxonomyVersionMismatch(
            f"annotation version {a.taxonomy_version} vs taxonomy {t.version}"
        )
    violations = []
    for node_id, level in (
        (a.category_id, "category"),
        (a.topic_id, "topic"),
        (a.subtopic_id, "subtopic"),
    ):
        if not t.has_node(node_id):
            violations.append(f"unknown {level} {node_id}")
        elif t.node(node_id).level != level:
            violations.append(f"{node_id} is not a {level}")
    if not violations:
        if t.node(a.topic_id).parent_id != a.category_id:
            violations.append(f"topic {a.topic_id} not under category {a.category_id}")
        if t.node(a.subtopic_id).parent_id != a.topic_id:
            violations.append(f"subtopic {a.subtopic_id} not under topic {a.topic_id}")
    if not isinstance(a.article_type, ArticleType):
        violations.append("bad article_type")
    if not isinstance(a.tone, ToneLabel):
        violations.append("bad tone")
    if not isinstance(a.lean, LeanLabel):
        violations.append("bad lean")
    if a.provenance not in ("llm", "human_override"):
        violations.append(f"bad provenance {a.provenance}")
    return violations


# --- taxonomy file format ----------------------------------------------------
# One node per line: id | level | parent_id (or "-") | name
# Lines starting with "#" are comments. Version comes from the filename
# (taxonomy_v<N>.txt) or the explicit argument.

def load_taxonomy_text(text: str, version: int) -> Taxonomy:
    nodes = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 4:
            raise ValueError(f"bad taxonomy line: {raw!r}")
        node_id, level, parent, name = parts
        nodes.append(
            TaxonomyNode(
                id=node_id,
                name=name,
                level=level,
                parent_id=None if parent == "-" else parent,
            )
        )
    return Taxonomy(version=version, nodes=tuple(nodes))


def dump_taxonomy_text(taxonomy: Taxonomy) -> str:
    lines = [
        "# Taxonomy nodes: id | level | parent_id | name",
        "# Lean scale convention: Democrat = -2 ... Republican = +2.",
    ]
    for n in taxonomy.nodes:
        lines.append(f"{n.id} | {n.level} | {n.parent_id or '-'} | {n.name}")
    return "\n".join(lines) + "\n"
