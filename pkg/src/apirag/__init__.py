"""Repository-level code completion with an internal-API knowledge base.

The package builds a per-repository knowledge base of internal APIs
(usage examples plus docstrings, both embedded), runs a draft -> retrieve
-> regenerate completion pipeline around a pluggable black-box code LLM,
and ships an import-masked benchmark harness with code-match and
identifier-match metrics.
"""

from .api_extract import ApiRecord, extract_apis, internal_filter
from .bench import TaskSet, load_taskset, mine_tasks, save_taskset
from .config import RunConfig
from .corpus import CodeWindow, CorpusIndex, SourceFile, scan_repo, windows
from .kb import KbEntry, KnowledgeBase, build_kb, load_kb, save_kb
from .metrics import MetricsReport, compare_runs, edit_similarity, id_match, score_run
from .pipeline import CompletionTask, PromptPlan, complete_task
from .providers import (
    CompletionPort,
    EmbedderPort,
    HashEmbedder,
    MockCompletion,
    SummarizerPort,
    TemplateSummarizer,
)
from .retrieval import jaccard, retrieve_by_semantics, retrieve_by_usage, similar_code
from .usage_examples import UsageExample, synth_usage_examples

__version__ = "0.1.0"

__all__ = [
    "ApiRecord",
    "CodeWindow",
    "CompletionPort",
    "CompletionTask",
    "CorpusIndex",
    "EmbedderPort",
    "HashEmbedder",
    "KbEntry",
    "KnowledgeBase",
    "MetricsReport",
    "MockCompletion",
    "PromptPlan",
    "RunConfig",
    "SourceFile",
    "SummarizerPort",
    "TaskSet",
    "TemplateSummarizer",
    "UsageExample",
    "build_kb",
    "compare_runs",
    "complete_task",
    "edit_similarity",
    "extract_apis",
    "id_match",
    "internal_filter",
    "jaccard",
    "load_kb",
    "load_taskset",
    "mine_tasks",
    "retrieve_by_semantics",
    "retrieve_by_usage",
    "save_kb",
    "save_taskset",
    "scan_repo",
    "score_run",
    "similar_code",
    "synth_usage_examples",
    "windows",
]
