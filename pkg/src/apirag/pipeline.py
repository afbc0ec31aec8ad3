"""Three-stage completion: draft, project-knowledge retrieval, regeneration.

The draft stage prompts the model with similar code plus the in-file tail
and keeps the raw output. That draft then drives retrieval: its first line
queries the knowledge base by usage form, the whole draft queries it by
summarized semantics, and the draft text re-queries the sliding-window
corpus. The final prompt lays out similar snippets, then API info blocks,
then the unfinished code, inside a fixed token budget split half/half
between retrieved context and in-file context.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .config import RunConfig
from .corpus import CorpusIndex, CodeWindow, count_tokens
from .kb import KbEntry, KnowledgeBase
from .lexer import JAVA, lex
from .providers import CompletionPort, EmbedderPort, ProviderError, SummarizerPort
from .retrieval import (
    ApiHit,
    SnippetHit,
    SOURCE_SEMANTIC,
    SOURCE_USAGE,
    retrieve_by_semantics,
    retrieve_by_usage,
    similar_code,
)

log = logging.getLogger(__name__)

MODE_INFILE = "infile"
MODE_DRAFT_ONLY = "draft_only"
MODE_BASE = "base"
MODE_PLUS_USAGE = "plus_usage"
MODE_PLUS_SEMANTIC = "plus_semantic"
MODE_FULL = "full"
MODE_AUGMENT = "augment_external_draft"

MODES = (
    MODE_INFILE,
    MODE_DRAFT_ONLY,
    MODE_BASE,
    MODE_PLUS_USAGE,
    MODE_PLUS_SEMANTIC,
    MODE_FULL,
    MODE_AUGMENT,
)

BLOCK_SNIPPET = "similar_snippet"
BLOCK_API = "api_info"


@dataclass(frozen=True)
class CompletionTask:
    task_id: str
    repo_root: str
    file: str
    prefix: str  # unfinished code up to the cursor, imports already masked
    ground_truth: str  # cursor to end of line
    masked_import_lines: tuple[tuple[int, str], ...] = ()
    language: str = "python"

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "repo_root": self.repo_root,
            "file": self.file,
            "prefix": self.prefix,
            "ground_truth": self.ground_truth,
            "masked_import_lines": [list(pair) for pair in self.masked_import_lines],
            "language": self.language,
        }

    @classmethod
    def from_json(cls, data: dict) -> "CompletionTask":
        return cls(
            task_id=data["task_id"],
            repo_root=data["repo_root"],
            file=data["file"],
            prefix=data["prefix"],
            ground_truth=data["ground_truth"],
            masked_import_lines=tuple(
                (int(no), text) for no, text in data.get("masked_import_lines", [])
            ),
            language=data.get("language", "python"),
        )


@dataclass
class PromptBlock:
    kind: str  # BLOCK_SNIPPET | BLOCK_API
    file: str
    text: str
    score: float
    source: str = ""  # usage | semantic for API blocks
    tokens: int = 0


@dataclass
class PromptPlan:
    blocks: list[PromptBlock]
    infile_context: str
    total_budget: int
    retrieved_budget: int

    @property
    def retrieved_tokens(self) -> int:
        return sum(b.tokens for b in self.blocks)


@dataclass
class ProviderBundle:
    embedder: EmbedderPort
    summarizer: SummarizerPort
    llm: CompletionPort


@dataclass
class RetrievedKnowledge:
    usage_hits: list[ApiHit] = field(default_factory=list)
    semantic_hits: list[ApiHit] = field(default_factory=list)
    snippet_hits: list[SnippetHit] = field(default_factory=list)


@dataclass
class TaskResult:
    task_id: str
    prediction: str
    raw_output: str
    trace: dict


def render_api_info(entry: KbEntry) -> str:
    """Class header (when present) plus the signature line; never the body."""
    api = entry.api
    if api.enclosing_class_decl:
        return f"{api.enclosing_class_decl}\n    {api.signature}"
    return api.signature


def first_line(text: str) -> str:
    return text.split("\n", 1)[0]


def prefix_last_line(prefix: str) -> str:
    return prefix.rsplit("\n", 1)[-1]


def usage_query_line(task: CompletionTask, draft: str) -> str:
    """The line being completed: prefix tail merged with the draft's first line."""
    head = first_line(draft)
    merged = prefix_last_line(task.prefix) + head
    return merged if merged.strip() else prefix_last_line(task.prefix)


def infile_tail(prefix: str, budget: int, language: str | None) -> str:
    """Longest suffix of whole prefix lines that fits the token budget.

    If even the cursor line alone is over budget it is trimmed from the
    left at a token boundary so the rendered prompt can never overflow.
    """
    if budget <= 0:
        return ""
    lines = prefix.split("\n")
    counts = [count_tokens(line, language) for line in lines]
    total = 0
    start = len(lines)
    while start > 0 and total + counts[start - 1] <= budget:
        total += counts[start - 1]
        start -= 1
    if start == len(lines):  # cursor line alone exceeds the budget
        return _trim_line_left(lines[-1], budget, language)
    return "\n".join(lines[start:])


def _trim_line_left(line: str, budget: int, language: str | None) -> str:
    tokens = lex(line, language)
    if budget <= 0 or not tokens:
        return ""
    keep = tokens[-budget:]
    return line[keep[0].offset :]


def comment_prefix(language: str) -> str:
    return "// " if language == JAVA else "# "


def generate_draft(
    task: CompletionTask,
    corpus: list[CodeWindow],
    llm: CompletionPort,
    cfg: RunConfig,
) -> tuple[str, PromptPlan, str]:
    """First-pass completion from similar code plus the in-file tail.

    Returns the raw draft (no post-processing), the prompt plan, and the
    rendered prompt. An LLM failure yields an empty draft so the pipeline
    can continue with prefix-derived queries.
    """
    query = _tail_window_text(task.prefix, cfg.window_len)
    snippet_hits = similar_code(
        query,
        corpus,
        cfg.retrieved_budget,
        language=task.language,
        slide=cfg.slide,
        exclude_file=task.file,
        exclude_line=_cursor_line(task.prefix),
    )
    plan = assemble_prompt(task, snippet_hits, [], [], cfg)
    prompt = render_prompt(plan, task)
    try:
        draft = llm.complete(prompt, cfg.max_new_tokens)
    except ProviderError as exc:
        log.warning("draft generation failed for %s: %s", task.task_id, exc)
        draft = ""
    return draft, plan, prompt


def retrieve_knowledge(
    task: CompletionTask,
    draft: str,
    kb: KnowledgeBase,
    corpus: list[CodeWindow],
    providers: ProviderBundle,
    cfg: RunConfig,
    *,
    include_usage: bool = True,
    include_semantic: bool = True,
    include_snippets: bool = True,
    on_summarizer_fallback=None,
) -> RetrievedKnowledge:
    """Draft-guided retrieval over the knowledge base and the window corpus.

    API hits are deduplicated across the two paths by qualified name,
    keeping the higher score, so at most 2k API blocks remain. With an
    empty draft the usage query falls back to the prefix's last line and
    the semantic path is skipped.
    """
    out = RetrievedKnowledge()
    if include_usage:
        out.usage_hits = retrieve_by_usage(
            usage_query_line(task, draft), kb, providers.embedder, cfg.k
        )
    if include_semantic and draft.strip():
        out.semantic_hits = retrieve_by_semantics(
            draft, kb, providers.summarizer, providers.embedder, cfg.k,
            on_fallback=on_summarizer_fallback,
        )
    _dedup_api_hits(out)

    if include_snippets:
        query = draft if draft.strip() else _tail_window_text(task.prefix, cfg.window_len)
        api_tokens = sum(
            count_tokens(render_api_info(h.entry), task.language)
            for h in out.usage_hits + out.semantic_hits
        )
        budget = max(cfg.retrieved_budget - api_tokens, 0)
        out.snippet_hits = similar_code(
            query,
            corpus,
            budget,
            language=task.language,
            slide=cfg.slide,
            exclude_file=task.file,
            exclude_line=_cursor_line(task.prefix),
        )
    return out


def _dedup_api_hits(knowledge: RetrievedKnowledge) -> None:
    usage = {h.entry.qualified_name: h for h in knowledge.usage_hits}
    semantic = {h.entry.qualified_name: h for h in knowledge.semantic_hits}
    for name in set(usage) & set(semantic):
        if semantic[name].score > usage[name].score:
            del usage[name]
        else:
            del semantic[name]
    knowledge.usage_hits = [h for h in knowledge.usage_hits if h.entry.qualified_name in usage]
    knowledge.semantic_hits = [
        h for h in knowledge.semantic_hits if h.entry.qualified_name in semantic
    ]


def assemble_prompt(
    task: CompletionTask,
    snippet_hits: list[SnippetHit],
    usage_hits: list[ApiHit],
    semantic_hits: list[ApiHit],
    cfg: RunConfig,
) -> PromptPlan:
    """Order blocks, enforce the retrieved-half budget, fill the in-file half.

    Block order: similar snippets by score, then API info blocks (usage
    path first by default), each score-descending. When over budget the
    lowest-scoring API block is dropped first; whole blocks only.
    """
    blocks: list[PromptBlock] = []
    for hit in snippet_hits:
        blocks.append(
            PromptBlock(
                kind=BLOCK_SNIPPET,
                file=hit.snippet.file,
                text=hit.snippet.text,
                score=hit.query_window_score,
                tokens=count_tokens(hit.snippet.text, task.language),
            )
        )
    api_lists = (
        (usage_hits, semantic_hits) if cfg.usage_before_semantic else (semantic_hits, usage_hits)
    )
    for hits in api_lists:
        for hit in hits:
            text = render_api_info(hit.entry)
            blocks.append(
                PromptBlock(
                    kind=BLOCK_API,
                    file=hit.entry.api.file,
                    text=text,
                    score=hit.score,
                    source=hit.source,
                    tokens=count_tokens(text, task.language),
                )
            )

    retrieved_budget = cfg.retrieved_budget
    while blocks and sum(b.tokens for b in blocks) > retrieved_budget:
        victim = _drop_victim(blocks)
        blocks.remove(victim)

    used = sum(b.tokens for b in blocks)
    infile_budget = cfg.total_budget - cfg.generation_headroom - used
    context = infile_tail(task.prefix, infile_budget, task.language)
    return PromptPlan(
        blocks=blocks,
        infile_context=context,
        total_budget=cfg.total_budget,
        retrieved_budget=retrieved_budget,
    )


def _drop_victim(blocks: list[PromptBlock]) -> PromptBlock:
    api_blocks = [b for b in blocks if b.kind == BLOCK_API]
    pool = api_blocks if api_blocks else blocks
    # semantic blocks drop before usage blocks at equal scores
    def key(block: PromptBlock):
        return (block.score, 0 if block.source == SOURCE_SEMANTIC else 1, -block.tokens)

    return min(pool, key=key)


def render_prompt(plan: PromptPlan, task: CompletionTask) -> str:
    comment = comment_prefix(task.language)
    parts: list[str] = []
    for block in plan.blocks:
        parts.append(f"{comment}{block.file}\n{block.text.rstrip()}\n")
    parts.append(f"{comment}{task.file}\n{plan.infile_context}")
    return "\n".join(parts)


def complete_task(
    task: CompletionTask,
    mode: str,
    kb: KnowledgeBase | None,
    corpus_index: CorpusIndex,
    providers: ProviderBundle,
    cfg: RunConfig,
    external_draft: str | None = None,
) -> TaskResult:
    """Run one completion task in the given mode and record a full trace.

    The prediction is the final output's first line (line-level task); the
    raw output is preserved so it can seed retrieval for other runs.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    needs_kb = mode in (MODE_PLUS_USAGE, MODE_PLUS_SEMANTIC, MODE_FULL, MODE_AUGMENT)
    if needs_kb and kb is None:
        raise ValueError(f"mode {mode!r} needs a knowledge base")

    trace: dict = {
        "task_id": task.task_id,
        "mode": mode,
        "config": cfg.to_json(),
        "stages": [],
        "usage_hits": [],
        "semantic_hits": [],
        "snippet_hits": [],
        "errors": [],
    }
    corpus = corpus_index.with_replaced_file(
        task.file, task.prefix, task.language
    ).all_windows()

    if mode == MODE_INFILE:
        plan = assemble_prompt(task, [], [], [], cfg)
        raw = _final_call(plan, task, providers, cfg, trace)
        return _result(task, raw, trace)

    def note_fallback(exc):
        trace["errors"].append(f"summarizer fallback: {exc}")

    if mode == MODE_AUGMENT:
        draft = external_draft or ""
        knowledge = retrieve_knowledge(
            task, draft, kb, corpus, providers, cfg, include_snippets=False,
            on_summarizer_fallback=note_fallback,
        )
        _record_hits(trace, knowledge)
        plan = assemble_prompt(task, [], knowledge.usage_hits, knowledge.semantic_hits, cfg)
        raw = _final_call(plan, task, providers, cfg, trace)
        return _result(task, raw, trace)

    draft, draft_plan, draft_prompt = generate_draft(task, corpus, providers.llm, cfg)
    trace["stages"].append(_stage_record("draft", draft_prompt, draft_plan, draft, task))
    if mode == MODE_DRAFT_ONLY:
        return _result(task, draft, trace)

    rounds = max(cfg.refine_rounds, 1)
    raw = draft
    for _ in range(rounds):
        knowledge = retrieve_knowledge(
            task,
            raw,
            kb,
            corpus,
            providers,
            cfg,
            include_usage=mode in (MODE_PLUS_USAGE, MODE_FULL),
            include_semantic=mode in (MODE_PLUS_SEMANTIC, MODE_FULL),
            include_snippets=True,
            on_summarizer_fallback=note_fallback,
        )
        _record_hits(trace, knowledge)
        plan = assemble_prompt(
            task, knowledge.snippet_hits, knowledge.usage_hits, knowledge.semantic_hits, cfg
        )
        raw = _final_call(plan, task, providers, cfg, trace)
    return _result(task, raw, trace)


def _final_call(
    plan: PromptPlan,
    task: CompletionTask,
    providers: ProviderBundle,
    cfg: RunConfig,
    trace: dict,
) -> str:
    prompt = render_prompt(plan, task)
    try:
        raw = providers.llm.complete(prompt, cfg.max_new_tokens)
    except ProviderError as exc:
        log.warning("completion failed for %s: %s", task.task_id, exc)
        trace["errors"].append(str(exc))
        raw = ""
    trace["stages"].append(_stage_record("final", prompt, plan, raw, task))
    return raw


def _stage_record(
    name: str, prompt: str, plan: PromptPlan, output: str, task: CompletionTask
) -> dict:
    return {
        "name": name,
        "prompt": prompt,
        "prompt_tokens": count_tokens(prompt, task.language),
        "retrieved_tokens": plan.retrieved_tokens,
        "block_count": len(plan.blocks),
        "output": output,
    }


def _record_hits(trace: dict, knowledge: RetrievedKnowledge) -> None:
    trace["usage_hits"] = [
        {
            "qualified_name": h.entry.qualified_name,
            "score": h.score,
            "best_example_form": h.best_example_form,
        }
        for h in knowledge.usage_hits
    ]
    trace["semantic_hits"] = [
        {"qualified_name": h.entry.qualified_name, "score": h.score}
        for h in knowledge.semantic_hits
    ]
    trace["snippet_hits"] = [
        {
            "file": h.snippet.file,
            "start_line": h.snippet.start_line,
            "end_line": h.snippet.end_line,
            "matched_start_line": h.matched.start_line,
            "score": h.query_window_score,
        }
        for h in knowledge.snippet_hits
    ]


def _result(task: CompletionTask, raw: str, trace: dict) -> TaskResult:
    prediction = first_line(raw)
    trace["prediction"] = prediction
    trace["raw_output"] = raw
    return TaskResult(
        task_id=task.task_id, prediction=prediction, raw_output=raw, trace=trace
    )


def _cursor_line(prefix: str) -> int:
    return len(prefix.split("\n"))


def _tail_window_text(prefix: str, window_len: int) -> str:
    lines = prefix.split("\n")
    return "\n".join(lines[-window_len:])
