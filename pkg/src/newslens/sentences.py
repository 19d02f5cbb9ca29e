"""Rule-based sentence segmentation.

Splits on terminal punctuation with an abbreviation exception list and
quote-aware pairing. Spans partition the body exactly (trailing whitespace
attaches to the preceding span) and every segment is non-empty.
"""

from __future__ import annotations

import re
from typing import List, Tuple

ABBREVIATIONS = frozenset(
    """dr mr mrs ms prof sen gov rep gen col lt sgt st mt jr sr inc corp co ltd
    vs etc e.g i.e no u.s u.k u.n d.c a.m p.m jan feb mar apr jun jul aug sep
    sept oct nov dec""".split()
)

_TERMINALS = ".!?"
_OPEN_QUOTES = "“"  # left curly double quote
_CLOSE_QUOTES = "”"
_STRAIGHT = '"'


def _word_before(text: str, i: int) -> str:
    """The token immediately preceding position i (letters and internal dots)."""
    j = i
    while j > 0 and (text[j - 1].isalpha() or text[j - 1] == "."):
        j -= 1
    return text[j:i].strip(".").lower()


def _is_boundary(text: str, end: int) -> bool:
    """True if the position right after `end` starts a new sentence."""
    k = end
    while k < len(text) and text[k] in "'\")”":
        k += 1
    if k >= len(text):
        return True
    if not text[k].isspace():
        return False
    while k < len(text) and text[k].isspace():
        k += 1
    if k >= len(text):
        return True
    ch = text[k]
    return ch.isupper() or ch.isdigit() or ch in _OPEN_QUOTES + _STRAIGHT


def split_points(text: str) -> List[int]:
    """Indices (exclusive) where sentences end, not counting the final end."""
    points = []
    in_quote = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == _STRAIGHT:
            in_quote = not in_quote
        elif ch in _OPEN_QUOTES:
            in_quote = True
        elif ch in _CLOSE_QUOTES:
            in_quote = False
        elif ch in _TERMINALS:
            end = i + 1
            # punctuation immediately before a closing quote ends the quote too
            if in_quote and end < n and text[end] in _CLOSE_QUOTES + _STRAIGHT:
                end += 1
                effective_in_quote = False
            else:
                effective_in_quote = in_quote
            if not effective_in_quote:
                if ch == "." and _word_before(text, i) in ABBREVIATIONS:
                    i += 1
                    continue
                # consume any remaining closing quote marks
                while end < n and text[end] in "'\")" + _CLOSE_QUOTES:
                    end += 1
                if _is_boundary(text, i + 1) and end < n:
                    points.append(end)
                    if end > i + 1:
                        in_quote = False
                    i = end
                    continue
        i += 1
    return points


def segment_sentences(body: str) -> List[Tuple[int, int]]:
    """Return (start, end) spans partitioning the body; always >= 1 span."""
    if not body:
        raise ValueError("empty body")
    points = split_points(body)
    spans = []
    start = 0
    for p in points:
        # attach trailing whitespace to the preceding span
        end = p
        while end < len(body) and body[end].isspace():
            end += 1
        if body[start:p].strip():
            spans.append((start, end))
            start = end
    if start < len(body) and body[start:].strip():
        spans.append((start, len(body)))
    elif spans:
        # trailing whitespace-only remainder folds into the last span
        spans[-1] = (spans[-1][0], len(body))
    if not spans:
        spans = [(0, len(body))]
    return spans


def sentence_texts(body: str, spans: List[Tuple[int, int]]) -> List[str]:
    return [body[s:e].strip() for s, e in spans]


def reconstructs_body(body: str, spans: List[Tuple[int, int]]) -> bool:
    """Concatenated sentence texts equal the body modulo whitespace normalization."""
    joined = " ".join(sentence_texts(body, spans))
    return re.sub(r"\s+", " ", joined).strip() == re.sub(r"\s+", " ", body).strip()
