"""Sidecar configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class SidecarConfig:
    """Model selection and service limits.

    Model ids starting with ``local/`` load built-in offline models; any
    other id is resolved through the transformers library at startup.
    The reported embedding dimension is constant for the process lifetime.
    """

    embedding_model_id: str = "local/seeded-encoder"
    summarizer_model_id: str = "local/heuristic-summarizer"
    completion_model_id: str | None = None
    device: str = "cpu"
    max_batch_size: int = 32
    port: int = 8765
    max_input_chars: int = 100_000
    embedding_dim: int = 256  # local encoder only; HF models report their own
