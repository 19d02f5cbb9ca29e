"""Ingestion: fetch each publisher's ranked top stories, extract clean text,
deduplicate, and commit per-publisher batches.

Adapters are declarative configs. Offline-first: every adapter runs against
recorded fixture pages; live HTTP fetch is an optional mode.
"""

from __future__ import annotations

import datetime as dt
import json
import re
import urllib.parse
from dataclasses import dataclass, field
from html import unescape
from pathlib import Path
from typing import List, Optional

from .core import Article, article_id_for, body_digest, normalize_body
from .errors import ExtractionFailed, InvalidUrl, SelectionRuleMismatch, SourceUnreachable
from .store import Store, article_to_record

TOP_ARTICLES_CAP = 20

TRACKING_PARAMS = {
    "utm_source", "utm_medium", "utm_campaign", "utm_term", "utm_content",
    "fbclid", "gclid", "mc_cid", "mc_eid", "ref", "smid", "partner",
}


@dataclass(frozen=True)
class PublisherAdapterConfig:
    publisher_id: str
    front_page_source: str  # URL (live) or filename within the fixture dir
    link_pattern: str  # regex; group 1 captures the story href, in page order
    title_pattern: str = r"<h1[^>]*>(.*?)</h1>"
    body_container_class: str = "article-body"
    time_pattern: str = r'<time[^>]*datetime="([^"]+)"'
    max_articles: int = TOP_ARTICLES_CAP

    def __post_init__(self):
        for pattern in (self.link_pattern, self.title_pattern, self.time_pattern):
            re.compile(pattern, re.S | re.I)  # rules validate at load time
        if not (1 <= self.max_articles <= TOP_ARTICLES_CAP):
            raise ValueError(f"max_articles must be in [1, {TOP_ARTICLES_CAP}]")

    @classmethod
    def from_dict(cls, data: dict) -> "PublisherAdapterConfig":
        return cls(**data)


def load_adapter_configs(path) -> List[PublisherAdapterConfig]:
    """Read a JSON file holding a list of adapter config objects."""
    with open(path) as f:
        return [PublisherAdapterConfig.from_dict(d) for d in json.load(f)]


DEFAULT_LINK_PATTERN = r'<a[^>]*class="story-link"[^>]*href="([^"]+)"'


def default_adapter_configs(publisher_ids) -> List[PublisherAdapterConfig]:
    return [
        PublisherAdapterConfig(
            publisher_id=pid,
            front_page_source="frontpage.html",
            link_pattern=DEFAULT_LINK_PATTERN,
        )
        for pid in publisher_ids
    ]


@dataclass
class RawDocument:
    url: str
    rank: int
    html: str


@dataclass
class ParsedArticle:
    title: str
    body: str
    published_at: Optional[str]  # None -> fallback to collected_at


@dataclass
class IngestReport:
    interval_id: str
    started_at: str = ""
    finished_at: str = ""
    per_publisher: dict = field(default_factory=dict)

    def add(self, publisher_id: str, fetched: int, new: int, duplicate: int, failure: int,
            error: Optional[str] = None):
        assert fetched == new + duplicate + failure
        self.per_publisher[publisher_id] = {
            "fetched": fetched,
            "new": new,
            "duplicate": duplicate,
            "failure": failure,
            "error": error,
        }

    def totals(self) -> dict:
        keys = ("fetched", "new", "duplicate", "failure")
        return {k: sum(p[k] for p in self.per_publisher.values()) for k in keys}

    def to_dict(self) -> dict:
        return {
            "interval_id": self.interval_id,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "publishers": self.per_publisher,
            "totals": self.totals(),
        }


def canonicalize_url(url: str, tracking_params=TRACKING_PARAMS) -> str:
    """Lowercase scheme/host, drop tracking params and fragment, trim trailing slash."""
    parts = urllib.parse.urlsplit(url.strip())
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise InvalidUrl(url)
    query = [
        (k, v)
        for k, v in urllib.parse.parse_qsl(parts.query, keep_blank_values=True)
        if k.lower() not in tracking_params
    ]
    path = parts.path or "/"
    if path != "/" and path.endswith("/"):
        path = path.rstrip("/")
    return urllib.parse.urlunsplit(
        (
            parts.scheme.lower(),
            parts.netloc.lower(),
            path,
            urllib.parse.urlencode(query),
            "",
        )
    )


def _strip_tags(html: str) -> str:
    text = re.sub(r"<br\s*/?>|</p>|</div>", "\n", html, flags=re.I)
    text = re.sub(r"<[^>]+>", " ", text)
    text = unescape(text)
    lines = [re.sub(r"\s+", " ", line).strip() for line in text.splitlines()]
    return "\n".join(l for l in lines if l)


def _extract_container(html: str, css_class: str) -> Optional[str]:
    """Inner HTML of the first element carrying css_class, nesting-aware."""
    open_re = re.compile(
        rf'<(\w+)[^>]*class="[^"]*\b{re.escape(css_class)}\b[^"]*"[^>]*>', re.I
    )
    m = open_re.search(html)
    if not m:
        return None
    tag = m.group(1)
    depth = 1
    pos = m.end()
    token = re.compile(rf"<{tag}\b[^>]*>|</{tag}>", re.I)
    for tk in token.finditer(html, pos):
        if tk.group(0).startswith("</"):
            depth -= 1
            if depth == 0:
                return html[pos : tk.start()]
        else:
            depth += 1
    return html[pos:]


def _read_source(source: str, fixtures_dir: Optional[Path]) -> str:
    if source.startswith(("http://", "https://")):
        import urllib.request

        try:
            with urllib.request.urlopen(source, timeout=30) as resp:
                return resp.read().decode("utf-8", errors="replace")
        except OSError as e:
            raise SourceUnreachable(source) from e
    path = Path(source) if fixtures_dir is None else fixtures_dir / source
    try:
        return path.read_text()
    except OSError as e:
        raise SourceUnreachable(str(path)) from e


def _fixture_path_for(url: str, fixtures_dir: Path) -> Path:
    slug = urllib.parse.urlsplit(url).path.rstrip("/").rsplit("/", 1)[-1]
    return fixtures_dir / f"{slug}.html"


def fetch_top_articles(
    config: PublisherAdapterConfig,
    interval_id: str,
    fixtures_dir: Optional[Path] = None,
) -> List[RawDocument]:
    """At most `max_articles` ranked raw documents in front-page order."""
    if fixtures_dir is not None:
        fixtures_dir = Path(fixtures_dir) / config.publisher_id / interval_id
    front = _read_source(config.front_page_source, fixtures_dir)
    hrefs = re.findall(config.link_pattern, front, flags=re.S | re.I)
    seen = set()
    ordered = []
    for href in hrefs:
        if href not in seen:
            seen.add(href)
            ordered.append(href)
    if not ordered:
        raise SelectionRuleMismatch(f"{config.publisher_id}: selection rules matched no links")
    docs = []
    for rank, href in enumerate(ordered[: config.max_articles], start=1):
        if fixtures_dir is not None:
            html = _read_source(str(_fixture_path_for(href, fixtures_dir)), None)
        else:
            html = _read_source(href, None)
        docs.append(RawDocument(url=href, rank=rank, html=html))
    return docs


def parse_article(raw: RawDocument, config: PublisherAdapterConfig) -> ParsedArticle:
    """Extract title, plain-text body, and the published timestamp (UTC)."""
    if not raw.html.strip():
        raise ExtractionFailed("empty raw document")
    title_m = re.search(config.title_pattern, raw.html, flags=re.S | re.I)
    container = _extract_container(raw.html, config.body_container_class)
    if title_m is None or container is None:
        raise ExtractionFailed(f"title or body rules matched nothing for {raw.url}")
    title = re.sub(r"\s+", " ", _strip_tags(title_m.group(1))).strip()
    body = _strip_tags(container)
    if not title or not body.strip():
        raise ExtractionFailed(f"empty title or body for {raw.url}")
    published_at = None
    time_m = re.search(config.time_pattern, raw.html, flags=re.S | re.I)
    if time_m:
        try:
            parsed = dt.datetime.fromisoformat(time_m.group(1).replace("Z", "+00:00"))
            published_at = parsed.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        except ValueError:
            published_at = None
    return ParsedArticle(title=title, body=body, published_at=published_at)


def deduplicate(parsed_batch: List[Article], store: Store):
    """Split into (new, duplicates) by canonical URL or body hash against the store."""
    new, duplicates = [], []
    seen_urls, seen_hashes = set(), set()
    for article in parsed_batch:
        if (
            store.has_url(article.url)
            or store.has_body_hash(article.body_hash)
            or article.url in seen_urls
            or article.body_hash in seen_hashes
        ):
            duplicates.append(article)
        else:
            seen_urls.add(article.url)
            seen_hashes.add(article.body_hash)
            new.append(article)
    return new, duplicates


def run_ingestion_cycle(
    configs: List[PublisherAdapterConfig],
    interval_id: str,
    store: Store,
    fixtures_dir: Optional[Path] = None,
    collected_at: Optional[str] = None,
) -> IngestReport:
    """One fetch cycle over all adapters; failures isolated per publisher."""
    collected_at = collected_at or dt.datetime.now(dt.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )
    report = IngestReport(interval_id=interval_id, started_at=collected_at)
    for config in configs:
        try:
            docs = fetch_top_articles(config, interval_id, fixtures_dir)
        except (SourceUnreachable, SelectionRuleMismatch) as e:
            report.add(config.publisher_id, 1, 0, 0, 1, error=str(e))
            continue
        candidates, failures = [], 0
        for doc in docs:
            try:
                parsed = parse_article(doc, config)
                url = canonicalize_url(doc.url)
                candidates.append(
                    Article(
                        id=article_id_for(url),
                        publisher_id=config.publisher_id,
                        url=url,
                        title=parsed.title,
                        body=parsed.body,
                        published_at=parsed.published_at or collected_at,
                        collected_at=collected_at,
                        interval_rank=doc.rank,
                        body_hash=body_digest(parsed.body),
                        interval_id=interval_id,
                        published_at_fallback=parsed.published_at is None,
                    )
                )
            except (ExtractionFailed, InvalidUrl, ValueError):
                failures += 1
        new, duplicates = deduplicate(candidates, store)
        if new:
            store.commit([("articles", article_to_record(a)) for a in new])
        report.add(config.publisher_id, len(docs), len(new), len(duplicates), failures)
    report.finished_at = dt.datetime.now(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return report
