"""The three retrieval paths used by the completion pipeline.

Similar-code retrieval scores sliding windows by Jaccard overlap with the
query and returns each match's subsequent window (the continuation a
developer would want to see). Usage retrieval matches a draft line against
the knowledge base's call forms; semantic retrieval matches the draft's
docstring against stored docstrings. Ranking ties break lexicographically
so every run is reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import CodeWindow, count_tokens
from .kb import KbEntry, KnowledgeBase
from .lexer import lex
from .providers import EmbedderPort, ProviderError, SummarizerPort, cosine, fallback_docstring

log = logging.getLogger(__name__)

SOURCE_USAGE = "usage"
SOURCE_SEMANTIC = "semantic"


@dataclass(frozen=True)
class SnippetHit:
    query_window_score: float  # Jaccard of the query against the matched window
    snippet: CodeWindow  # the window subsequent to the matched one
    matched: CodeWindow


@dataclass(frozen=True)
class ApiHit:
    entry: KbEntry
    score: float
    source: str  # SOURCE_USAGE | SOURCE_SEMANTIC
    best_example_form: str | None = None


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> float:
    """|A n B| / |A u B|; two empty sets score 0.0."""
    if not a and not b:
        return 0.0
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


def similar_code(
    query_text: str,
    corpus: list[CodeWindow],
    budget_tokens: int | None,
    *,
    language: str | None = None,
    slide: int = 10,
    exclude_file: str | None = None,
    exclude_line: int | None = None,
) -> list[SnippetHit]:
    """Rank corpus windows against ``query_text`` and emit subsequent windows.

    Hits come sorted by score descending with (file, start_line) breaking
    ties. Accumulation stops as soon as the next snippet would push the
    total past ``budget_tokens`` (None means unbounded). Windows of
    ``exclude_file`` overlapping ``exclude_line`` never match: that is the
    query's own enclosing window.
    """
    if not corpus:
        return []
    query_tokens = frozenset(t.text for t in lex(query_text, language))

    by_file: dict[str, dict[int, CodeWindow]] = {}
    file_last_line: dict[str, int] = {}
    for window in corpus:
        by_file.setdefault(window.file, {})[window.start_line] = window
        file_last_line[window.file] = max(file_last_line.get(window.file, 0), window.end_line)

    scored: list[tuple[float, CodeWindow]] = []
    for window in corpus:
        if (
            exclude_file is not None
            and exclude_line is not None
            and window.file == exclude_file
            and window.start_line <= exclude_line <= window.end_line
        ):
            continue
        scored.append((jaccard(query_tokens, window.token_set), window))
    scored.sort(key=lambda pair: (-pair[0], pair[1].file, pair[1].start_line))

    hits: list[SnippetHit] = []
    used = 0
    for score, matched in scored:
        snippet = _subsequent_window(matched, by_file, file_last_line, slide)
        if budget_tokens is not None:
            cost = count_tokens(snippet.text, language)
            if used + cost > budget_tokens:
                break
            used += cost
        hits.append(SnippetHit(query_window_score=score, snippet=snippet, matched=matched))
    return hits


def _subsequent_window(
    matched: CodeWindow,
    by_file: dict[str, dict[int, CodeWindow]],
    file_last_line: dict[str, int],
    slide: int,
) -> CodeWindow:
    """The window one slide after ``matched``, clipped at the file end."""
    target_start = matched.start_line + slide
    sibling = by_file.get(matched.file, {}).get(target_start)
    if sibling is not None:
        return sibling
    # Past the last window start: clip to the file tail inside the match.
    last_line = file_last_line.get(matched.file, matched.end_line)
    start = min(target_start, last_line)
    offset = start - matched.start_line
    lines = matched.text.split("\n")[offset:]
    text = "\n".join(lines)
    return CodeWindow(
        file=matched.file,
        start_line=start,
        end_line=matched.end_line,
        text=text,
        token_set=frozenset(t.text for t in lex(text, None)),
    )


def retrieve_by_usage(
    draft_line: str,
    kb: KnowledgeBase,
    embedder: EmbedderPort,
    k: int,
) -> list[ApiHit]:
    """Top-k entries whose best usage-example vector matches the draft line."""
    if not draft_line.strip() or not kb.entries:
        return []
    query = embedder.embed([draft_line])[0]
    hits: list[ApiHit] = []
    for entry in kb.entries:
        if entry.example_embeddings.shape[0] == 0:
            continue
        scores = [cosine(query, vec) for vec in entry.example_embeddings]
        best = int(np.argmax(scores))
        hits.append(
            ApiHit(
                entry=entry,
                score=float(scores[best]),
                source=SOURCE_USAGE,
                best_example_form=entry.usage_examples[best].form_id,
            )
        )
    hits.sort(key=lambda h: (-h.score, h.entry.qualified_name))
    return hits[: max(k, 0)]


def retrieve_by_semantics(
    draft_block: str,
    kb: KnowledgeBase,
    summarizer: SummarizerPort,
    embedder: EmbedderPort,
    k: int,
    on_fallback=None,
) -> list[ApiHit]:
    """Top-k entries whose docstring matches a summary of the draft block.

    Degraded entries carry no docstring and are skipped. If the summarizer
    fails, the deterministic fallback summary is used and ``on_fallback``
    (when given) is called with the error so callers can flag the result.
    """
    if not draft_block.strip() or not kb.entries:
        return []
    try:
        docstring = summarizer.summarize(draft_block)
    except ProviderError as exc:
        log.warning("summarizer failed for draft block, using fallback: %s", exc)
        if on_fallback is not None:
            on_fallback(exc)
        docstring = fallback_docstring(draft_block)
    query = embedder.embed([docstring])[0]
    hits = [
        ApiHit(entry=entry, score=cosine(query, entry.doc_embedding), source=SOURCE_SEMANTIC)
        for entry in kb.entries
        if not entry.degraded
    ]
    hits.sort(key=lambda h: (-h.score, h.entry.qualified_name))
    return hits[: max(k, 0)]
