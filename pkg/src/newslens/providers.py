"""Chat-completion providers: generic HTTP client and the deterministic mock."""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from typing import Optional


@dataclass(frozen=True)
class ProviderRequest:
    model_id: str
    prompt: str
    max_output_tokens: int = 1024
    temperature: float = 0.0  # fixed at 0 for all classification tasks


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    input_tokens: int = 0
    output_tokens: int = 0
    latency_s: float = 0.0
    status: str = "ok"


class HttpChatProvider:
    """Speaks a generic chat-completion wire contract; key from an env var."""

    def __init__(self, endpoint: str, model_id: str, api_key_env: str = "NEWSLENS_PROVIDER_KEY",
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.model_id = model_id
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        import urllib.request

        key = os.environ.get(self.api_key_env, "")
        payload = json.dumps(
            {
                "model": request.model_id or self.model_id,
                "messages": [{"role": "user", "content": request.prompt}],
                "temperature": request.temperature,
                "max_tokens": request.max_output_tokens,
            }
        ).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint,
            data=payload,
            headers={
                "Content-Type": "application/json",
                "Authorization": f"Bearer {key}",
            },
        )
        started = time.monotonic()
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            body = json.loads(resp.read().decode("utf-8"))
        text = body["choices"][0]["message"]["content"]
        usage = body.get("usage", {})
        return ProviderResponse(
            text=text,
            input_tokens=usage.get("prompt_tokens", 0),
            output_tokens=usage.get("completion_tokens", 0),
            latency_s=time.monotonic() - started,
        )


def _extract_section(prompt: str, header: str) -> str:
    """Text between 'HEADER:' and the next ALL-CAPS header line (or end)."""
    pattern = re.compile(
        rf"^{header}:?\s*\n?(.*?)(?=^\s*[A-Z][A-Z _]+:|\Z)", re.S | re.M
    )
    m = pattern.search(prompt)
    return m.group(1).strip() if m else ""


def _count_hits(text: str, keywords: list) -> int:
    folded = text.casefold()
    hits = 0
    for kw in keywords:
        hits += len(re.findall(r"(?<!\w)" + re.escape(kw.casefold()) + r"(?!\w)", folded))
    return hits


class MockProvider:
    """Deterministic lexicon-scoring provider for offline runs and tests.

    The lexicon maps task names to ordered {label: [keywords]} tables. The
    highest-scoring label wins; ties break by lexicon order. Taxonomy
    candidates are restricted to those listed in the prompt.
    """

    DEFAULTS = {"article_type": "News Report", "tone": "Neutral", "lean": "Neutral"}

    def __init__(self, lexicon: dict, latency_s: float = 0.0, model_id: str = "mock"):
        self.lexicon = lexicon
        self.latency_s = latency_s
        self.model_id = model_id
        self.calls = 0

    @classmethod
    def from_file(cls, path) -> "MockProvider":
        with open(path) as f:
            return cls(json.load(f))

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        prompt = request.prompt
        first = prompt.splitlines()[0] if prompt else ""
        task = first.split(":", 1)[1].strip() if first.startswith("TASK:") else ""
        if task == "sentence_types":
            text = self._sentence_types(prompt)
        elif task == "event_summary":
            text = self._event_summary(prompt)
        elif task == "taxonomy_classify":
            text = self._classify_taxonomy(prompt)
        elif task in ("article_type", "tone", "lean"):
            text = self._classify_scale(prompt, task)
        else:
            text = ""
        return ProviderResponse(text=text, latency_s=self.latency_s)

    def _article_text(self, prompt: str) -> str:
        return (
            _extract_section(prompt, "ARTICLE TITLE")
            + "\n"
            + _extract_section(prompt, "ARTICLE BODY")
        )

    def _candidate_keys(self, prompt: str) -> list:
        block = _extract_section(prompt, "CANDIDATES")
        keys = []
        for line in block.splitlines():
            line = line.strip()
            if line:
                keys.append(line.split(":", 1)[0].strip())
        return keys

    def _classify_taxonomy(self, prompt: str) -> str:
        article = self._article_text(prompt)
        candidates = self._candidate_keys(prompt)
        table = self.lexicon.get("taxonomy", {})
        best_key, best_score = None, -1
        # lexicon order breaks ties; candidates missing from the lexicon score 0
        ordered = [k for k in table if k in candidates]
        ordered += [k for k in candidates if k not in table]
        for key in ordered:
            score = _count_hits(article, table.get(key, []))
            if score > best_score:
                best_key, best_score = key, score
        return best_key or (candidates[0] if candidates else "")

    def _classify_scale(self, prompt: str, task: str) -> str:
        article = self._article_text(prompt)
        table = self.lexicon.get(task, {})
        best_label, best_score = None, 0
        for label, keywords in table.items():
            score = _count_hits(article, keywords)
            if score > best_score:
                best_label, best_score = label, score
        return best_label or self.DEFAULTS.get(task, "")

    def _sentence_types(self, prompt: str) -> str:
        block = _extract_section(prompt, "SENTENCES")
        markers = [m.casefold() for m in self.lexicon.get("opinion_markers", [])]
        lines = []
        for line in block.splitlines():
            line = line.strip()
            if not line or ":" not in line:
                continue
            left, text = line.split(":", 1)
            try:
                idx = int(left.strip())
            except ValueError:
                continue
            folded = text.casefold()
            if '"' in text or "“" in text or "”" in text:
                label = "quote"
            elif any(re.search(r"(?<!\w)" + re.escape(m) + r"(?!\w)", folded) for m in markers):
                label = "opinion"
            else:
                label = "fact"
            lines.append(f"{idx}: {label}")
        return "\n".join(lines)

    def _event_summary(self, prompt: str) -> str:
        block = _extract_section(prompt, "TITLES")
        titles = [l.strip("- ").strip() for l in block.splitlines() if l.strip()]
        top = titles[0] if titles else "Untitled event"
        short = " ".join(top.split()[:12])
        description = (
            f"{top}. Covered from multiple angles by {len(titles)} related articles."
        )
        return short + "\n" + description


class FlakyProvider:
    """Test helper: emits scripted garbage before delegating (or never succeeding)."""

    def __init__(self, inner=None, garbage_responses=None):
        self.inner = inner
        self.garbage = list(garbage_responses or [])
        self.calls = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        if self.garbage:
            return ProviderResponse(text=self.garbage.pop(0))
        if self.inner is None:
            return ProviderResponse(text="### completely malformed response with many words ###")
        return self.inner.complete(request)
