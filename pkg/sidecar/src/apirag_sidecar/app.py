"""HTTP service exposing /embed, /summarize, /complete, and /healthz.

Request bodies are validated by hand so malformed input yields a plain
400 payload ``{"error": ...}`` and oversized input a 413 ``{"error":
"too_long"}``, independent of framework defaults. Batches are processed
in stable input order, chunked to the configured batch size.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .config import SidecarConfig
from .models import ModelBundle, load_models

PROTOCOL_VERSION = 1


def create_app(config: SidecarConfig | None = None, models: ModelBundle | None = None) -> FastAPI:
    config = config or SidecarConfig()
    bundle = models or load_models(config)
    app = FastAPI(title="apirag-sidecar")
    lock = threading.Lock()  # model access is serialized; requests queue here

    def bad_request(detail: str) -> JSONResponse:
        return JSONResponse({"error": "bad_request", "detail": detail}, status_code=400)

    def too_long() -> JSONResponse:
        return JSONResponse({"error": "too_long"}, status_code=413)

    async def read_body(request: Request) -> dict | JSONResponse:
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return bad_request("body is not valid JSON")
        if not isinstance(body, dict):
            return bad_request("body must be a JSON object")
        if body.get("v") != PROTOCOL_VERSION:
            return bad_request(f"unsupported protocol version {body.get('v')!r}")
        return body

    @app.get("/healthz")
    async def healthz():
        return {
            "dim": bundle.dim,
            "models": {
                "embedding": bundle.embedding_model_id,
                "summarizer": bundle.summarizer_model_id,
                "completion": bundle.completion_model_id,
            },
        }

    @app.post("/embed")
    async def embed(request: Request):
        body = await read_body(request)
        if isinstance(body, JSONResponse):
            return body
        texts = body.get("texts")
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            return bad_request("texts must be a list of strings")
        if any(len(t) > config.max_input_chars for t in texts):
            return too_long()
        vectors: list[list[float]] = []
        with lock:
            for start in range(0, len(texts), config.max_batch_size):
                vectors.extend(bundle.encoder.encode(texts[start : start + config.max_batch_size]))
        return {"dim": bundle.dim, "vectors": vectors}

    @app.post("/summarize")
    async def summarize(request: Request):
        body = await read_body(request)
        if isinstance(body, JSONResponse):
            return body
        code = body.get("code")
        if not isinstance(code, str):
            return bad_request("code must be a string")
        if len(code) > config.max_input_chars:
            return too_long()
        language = body.get("language")
        with lock:
            docstring = bundle.summarizer.summarize(code, language)
        return {"docstring": docstring}

    @app.post("/complete")
    async def complete(request: Request):
        body = await read_body(request)
        if isinstance(body, JSONResponse):
            return body
        prompt = body.get("prompt")
        max_new_tokens = body.get("max_new_tokens")
        if not isinstance(prompt, str) or not isinstance(max_new_tokens, int):
            return bad_request("prompt must be a string and max_new_tokens an integer")
        if len(prompt) > config.max_input_chars:
            return too_long()
        if bundle.completion is None:
            return JSONResponse({"error": "no_completion_model"}, status_code=501)
        with lock:
            text = bundle.completion.complete(prompt, max_new_tokens)
        return {"text": text}

    return app
