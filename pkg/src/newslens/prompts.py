"""Prompt templates and strict response parsing for classification tasks."""

from __future__ import annotations

import hashlib
import string
from dataclasses import dataclass

from .errors import InvalidLabel, MissingPlaceholder, UnparsableResponse

TASKS = (
    "taxonomy_classify",
    "article_type",
    "tone",
    "lean",
    "sentence_types",
    "event_summary",
    "fact_grouping",
)

LEAN_DEFINITION = (
    "Political lean is the extent to which an article aligns with the "
    "viewpoints, policies, or concerns of Republicans versus Democrats, "
    "either explicitly or implicitly."
)

TONE_DEFINITION = (
    "Tone is the emotional slant of coverage, from very negative to very positive."
)


@dataclass(frozen=True)
class PromptTemplate:
    task: str
    version: str
    template_text: str

    @property
    def prompt_version(self) -> str:
        digest = hashlib.sha256(self.template_text.encode("utf-8")).hexdigest()[:8]
        return f"{self.task}-{self.version}+{digest}"

    def render(self, **values) -> str:
        try:
            return self.template_text.format(**values)
        except (KeyError, IndexError) as e:
            raise MissingPlaceholder(str(e)) from e

    def placeholders(self) -> set:
        return {
            name
            for _, name, _, _ in string.Formatter().parse(self.template_text)
            if name
        }


_CLASSIFY_TEXT = """TASK: {task}
You classify one news article. {definitions}
Choose exactly one answer from the candidates below.
CANDIDATES:
{candidates}
ARTICLE TITLE: {title}
ARTICLE BODY:
{body}
Respond with exactly one candidate {answer_kind} on the final line, nothing else.
"""

_SENTENCE_TEXT = """TASK: sentence_types
Label each numbered sentence as fact, quote, or opinion.
A quote reproduces someone's spoken or written words. An opinion expresses a
judgment or recommendation of the author. Everything else is fact.
SENTENCES:
{sentences}
Respond with one line per sentence, formatted "index: fact|quote|opinion".
"""

_EVENT_SUMMARY_TEXT = """TASK: event_summary
The following article titles and opening sentences all cover one news event.
Titles are ordered from most central to least central.
TITLES:
{titles}
OPENING SENTENCES:
{first_sentences}
Respond with a short event title of at most 12 words on the first line,
then a description of 2 to 4 sentences on the following lines.
"""


def default_templates() -> dict:
    """Built-in template per task, keyed by task name."""
    return {
        "taxonomy_classify": PromptTemplate(
            "taxonomy_classify", "1.0.0",
            _CLASSIFY_TEXT.replace("{task}", "taxonomy_classify")
            .replace("{definitions}", "Pick the node that best matches the article's subject.")
            .replace("{answer_kind}", "id"),
        ),
        "article_type": PromptTemplate(
            "article_type", "1.0.0",
            _CLASSIFY_TEXT.replace("{task}", "article_type")
            .replace("{definitions}",
                     "Article type is News Report (reporting events), News Analysis "
                     "(interpreting events), or Opinion (arguing a viewpoint).")
            .replace("{answer_kind}", "label"),
        ),
        "tone": PromptTemplate(
            "tone", "1.0.0",
            _CLASSIFY_TEXT.replace("{task}", "tone")
            .replace("{definitions}", TONE_DEFINITION)
            .replace("{answer_kind}", "label"),
        ),
        "lean": PromptTemplate(
            "lean", "1.0.0",
            _CLASSIFY_TEXT.replace("{task}", "lean")
            .replace("{definitions}", LEAN_DEFINITION)
            .replace("{answer_kind}", "label"),
        ),
        "sentence_types": PromptTemplate("sentence_types", "1.0.0", _SENTENCE_TEXT),
        "event_summary": PromptTemplate("event_summary", "1.0.0", _EVENT_SUMMARY_TEXT),
    }


def render_classify_prompt(template: PromptTemplate, title: str, body: str,
                           candidates: list) -> str:
    """Candidates are (key, display) pairs; each key appears exactly once."""
    candidate_block = "\n".join(
        f"{key}: {display}" if display and display != key else str(key)
        for key, display in candidates
    )
    return template.render(candidates=candidate_block, title=title, body=body)


CORRECTIVE_SUFFIX = (
    "\nYour previous answer was not a valid candidate. "
    "Respond with exactly one candidate from the list, nothing else."
)


def _final_answer_token(raw_text: str) -> str:
    lines = [l.strip() for l in raw_text.strip().splitlines() if l.strip()]
    if not lines:
        raise UnparsableResponse("empty response")
    token = lines[-1]
    if ":" in token:
        token = token.rsplit(":", 1)[1]
    return token.strip().strip("\"'.,!` ")


def parse_label_response(raw_text: str, task: str, candidates: list) -> str:
    """Strictly match the response against the candidate keys.

    Exact match after trimming and case-folding; otherwise a final-line
    extraction rule is applied once. Non-candidate answers raise InvalidLabel;
    responses with no extractable answer raise UnparsableResponse.
    """
    by_fold = {str(c).casefold(): c for c in candidates}
    whole = raw_text.strip().casefold()
    if whole in by_fold:
        return by_fold[whole]
    token = _final_answer_token(raw_text)
    folded = token.casefold()
    if folded in by_fold:
        return by_fold[folded]
    if token and len(token.split()) <= 5:
        raise InvalidLabel(f"{token!r} is not a candidate for task {task}")
    raise UnparsableResponse(f"no candidate answer found for task {task}")


def parse_sentence_type_response(raw_text: str, expected_indices: list) -> dict:
    """Parse "index: type" lines; returns {index: type} for valid lines only."""
    out = {}
    valid = {"fact", "quote", "opinion"}
    expected = set(expected_indices)
    for line in raw_text.splitlines():
        line = line.strip()
        if not line or ":" not in line:
            continue
        left, right = line.split(":", 1)
        try:
            idx = int(left.strip())
        except ValueError:
            continue
        label = right.strip().casefold()
        if idx in expected and label in valid:
            out[idx] = label
    return out
