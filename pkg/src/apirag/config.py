"""Run configuration shared by the pipeline, the benchmark, and the CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field


@dataclass
class RunConfig:
    """Knobs for one completion run; defaults match the evaluated setup.

    Budgets are measured in this artifact's lexical tokens, not provider
    tokens; when targeting a real model, scale ``total_budget`` by your
    provider's tokens-per-lexical-token factor.
    """

    repo_root: str = "."
    language: str = "auto"  # python | java | auto (scan both)
    excludes: list[str] = field(default_factory=list)  # glob patterns to skip
    window_len: int = 20
    slide: int = 10
    k: int = 4  # top-k per retrieval path, so up to 2k API info blocks
    total_budget: int = 4096
    max_new_tokens: int = 128
    generation_headroom: int = 0  # reserved lexical tokens never given to the prompt
    mode: str = "full"
    seed: int = 0
    workers: int = 1
    refine_rounds: int = 1  # draft -> final passes; 1 matches the evaluated pipeline
    usage_before_semantic: bool = True  # API block ordering inside the prompt
    id_match_multiset: bool = True  # identifier EM compares multisets, not sequences

    # provider selection: "hash" / "template" / "mock:<oracle.json>" or http URLs
    embedder: str = "hash"
    embed_dim: int = 256
    summarizer: str = "template"
    llm: str = "mock:"
    embed_url: str = ""
    summarize_url: str = ""
    complete_url: str = ""
    http_timeout: float = 30.0
    http_retries: int = 2
    summarize_char_budget: int = 4000

    @property
    def retrieved_budget(self) -> int:
        return self.total_budget // 2

    def to_json(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
