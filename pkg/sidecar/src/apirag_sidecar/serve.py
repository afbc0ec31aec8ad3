"""Service entry point."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import SidecarConfig


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="apirag model sidecar")
    parser.add_argument("--embedding-model", default="local/seeded-encoder")
    parser.add_argument("--summarizer-model", default="local/heuristic-summarizer")
    parser.add_argument("--completion-model", default=None)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--max-batch-size", type=int, default=32)
    args = parser.parse_args(argv)

    config = SidecarConfig(
        embedding_model_id=args.embedding_model,
        summarizer_model_id=args.summarizer_model,
        completion_model_id=args.completion_model,
        device=args.device,
        max_batch_size=args.max_batch_size,
        port=args.port,
    )
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
