"""Provider ports for embedding, summarization, and completion.

Three interchangeable roles sit behind small protocols so the pipeline can
run against deterministic offline implementations, a scripted test double,
or an HTTP sidecar speaking the JSON protocol documented in
``PROTOCOL_SCHEMAS``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
from typing import Protocol, Sequence, runtime_checkable

import httpx
import numpy as np

from .lexer import lex
from .usage_examples import snake_case

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1

# Wire protocol shared with the model sidecar. Each request carries a
# version field "v"; all vectors are unit-normalized server side.
PROTOCOL_SCHEMAS = {
    "embed_request": {
        "type": "object",
        "required": ["v", "texts"],
        "properties": {
            "v": {"type": "integer"},
            "texts": {"type": "array", "items": {"type": "string"}},
        },
    },
    "embed_response": {
        "type": "object",
        "required": ["dim", "vectors"],
        "properties": {
            "dim": {"type": "integer", "minimum": 1},
            "vectors": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}},
            },
        },
    },
    "summarize_request": {
        "type": "object",
        "required": ["v", "code"],
        "properties": {
            "v": {"type": "integer"},
            "code": {"type": "string"},
            "language": {"type": ["string", "null"]},
        },
    },
    "summarize_response": {
        "type": "object",
        "required": ["docstring"],
        "properties": {"docstring": {"type": "string"}},
    },
    "complete_request": {
        "type": "object",
        "required": ["v", "prompt", "max_new_tokens"],
        "properties": {
            "v": {"type": "integer"},
            "prompt": {"type": "string"},
            "max_new_tokens": {"type": "integer", "minimum": 1},
        },
    },
    "complete_response": {
        "type": "object",
        "required": ["text"],
        "properties": {"text": {"type": "string"}},
    },
}


class ProviderError(RuntimeError):
    """A provider call failed after exhausting retries."""


@runtime_checkable
class EmbedderPort(Protocol):
    id: str

    @property
    def dim(self) -> int: ...

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@runtime_checkable
class SummarizerPort(Protocol):
    id: str

    def summarize(self, code: str) -> str: ...


@runtime_checkable
class CompletionPort(Protocol):
    id: str

    def complete(self, prompt: str, max_new_tokens: int) -> str: ...


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero vectors compare as 0 so rankings stay total."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    return vec / norm if norm > 0.0 else vec


class HashEmbedder:
    """Bag-of-tokens hashing embedder: deterministic and offline.

    Each lexical token adds weight 1 to a stable hash bucket; the vector is
    L2-normalized. Empty text yields the all-zero vector, which cosine
    treats as similarity 0 against everything.
    """

    def __init__(self, dim: int = 256):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self._dim = dim
        self.id = f"hash-{dim}"

    @property
    def dim(self) -> int:
        return self._dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self._dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for tok in lex(text, None):
                out[row, _bucket(tok.text, self._dim)] += 1.0
            norm = np.linalg.norm(out[row])
            if norm > 0.0:
                out[row] /= norm
        return out


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


# ---------------------------------------------------------------------------
# Summarization

SUMMARY_EXEMPLARS = [
    (
        "def reverse_words(sentence):\n"
        '    return " ".join(reversed(sentence.split()))',
        "Reverses the order of words in a sentence.",
    ),
    (
        "def clamp(value, low, high):\n"
        "    return max(low, min(high, value))",
        "Clamps a value to the inclusive range between low and high.",
    ),
]

_PY_DEF_RE = re.compile(r"def\s+([A-Za-z_]\w*)\s*\(([^)]*)\)")
_JAVA_HEADER_RE = re.compile(r"([A-Za-z_$][\w$]*)\s*\(([^)]*)\)\s*\{")
_CALL_RE = re.compile(r"([A-Za-z_]\w*)\s*\(([^)]*)\)")


def render_summary_prompt(code: str, exemplars=None) -> str:
    """Few-shot docstring prompt: exemplar code/docstring pairs, target code last."""
    pairs = exemplars if exemplars is not None else SUMMARY_EXEMPLARS
    parts = ["Write a one-sentence docstring for the given code.", ""]
    for example_code, docstring in pairs:
        parts += ["### Code:", example_code, "### Docstring:", docstring, ""]
    parts += ["### Code:", code, "### Docstring:"]
    return "\n".join(parts)


def fallback_docstring(code: str) -> str:
    """Deterministic docstring: "Performs <name words> given <params>."

    The subject is the first function definition in ``code``, else the
    first call expression, else the first identifier.
    """
    name, params = _find_subject(code)
    if name is None:
        return ""
    words = " ".join(w for w in snake_case(name).split("_") if w)
    if params:
        return f"Performs {words} given {', '.join(params)}."
    return f"Performs {words}."


def _find_subject(code: str) -> tuple[str | None, list[str]]:
    m = _PY_DEF_RE.search(code)
    if m:
        return m.group(1), _python_param_idents(m.group(2))
    m = _JAVA_HEADER_RE.search(code)
    if m:
        return m.group(1), _java_param_idents(m.group(2))
    m = _CALL_RE.search(code)
    if m:
        return m.group(1), _python_param_idents(m.group(2))
    for tok in lex(code, None):
        if tok.kind == "identifier":
            return tok.text, []
    return None, []


def _split_params(raw: str) -> list[str]:
    chunks: list[str] = []
    depth = 0
    current = ""
    for ch in raw:
        if ch in "([{<":
            depth += 1
        elif ch in ")]}>":
            depth -= 1
        if ch == "," and depth == 0:
            chunks.append(current)
            current = ""
        else:
            current += ch
    if current.strip():
        chunks.append(current)
    return chunks


def _python_param_idents(raw: str) -> list[str]:
    names: list[str] = []
    for chunk in _split_params(raw):
        head = chunk.split(":", 1)[0].split("=", 1)[0].strip().lstrip("*")
        if head and re.fullmatch(r"[A-Za-z_]\w*", head):
            names.append(head)
    return [n for n in names if n not in ("self", "cls")]


def _java_param_idents(raw: str) -> list[str]:
    names: list[str] = []
    for chunk in _split_params(raw):
        idents = re.findall(r"[A-Za-z_$][\w$]*", chunk)
        if idents:
            names.append(idents[-1])
    return names


class TemplateSummarizer:
    """Few-shot docstring generation over a completion provider.

    Without a backing model this degrades to the deterministic sentence
    pattern, which keeps knowledge-base builds and retrieval fully offline.
    With a model, provider failures propagate as ProviderError so callers
    can decide between degrading the entry and falling back.
    """

    def __init__(self, llm: CompletionPort | None = None, *, char_budget: int = 4000,
                 max_new_tokens: int = 64):
        self._llm = llm
        self._char_budget = char_budget
        self._max_new_tokens = max_new_tokens
        self.id = "template-fallback" if llm is None else f"template+{llm.id}"

    def summarize(self, code: str) -> str:
        if not code.strip():
            return ""
        if self._llm is None:
            return fallback_docstring(code)
        prompt = render_summary_prompt(code[: self._char_budget])
        text = self._llm.complete(prompt, self._max_new_tokens)
        cleaned = _clean_docstring(text)
        return cleaned or fallback_docstring(code)


def _clean_docstring(text: str) -> str:
    body = text.split("### ", 1)[0].split("\n\n", 1)[0]
    return body.strip().strip('"').strip()


class ScriptedSummarizer:
    """Exact-match docstring table with a deterministic fallback; test double."""

    def __init__(self, table: dict[str, str], provider_id: str = "scripted"):
        self._table = dict(table)
        self.id = provider_id

    def summarize(self, code: str) -> str:
        if code in self._table:
            return self._table[code]
        return fallback_docstring(code)


# ---------------------------------------------------------------------------
# Completion test double


class MockCompletion:
    """Evidence-gated completion double.

    The oracle maps a task marker (a string unique to that task's prompt)
    to a ground truth, a distractor, and the evidence strings that gate
    them: the ground truth comes back only when some evidence string is
    present in the prompt. Prompts matching no marker yield "".
    """

    def __init__(self, oracle: dict[str, dict], provider_id: str = "mock"):
        # oracle: task_id -> {"marker":…, "evidence":[…], "truth":…, "distractor":…}
        self._oracle = dict(sorted(oracle.items()))
        self.id = provider_id

    @classmethod
    def from_file(cls, path) -> "MockCompletion":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(data["tasks"], provider_id=f"mock:{path}")

    def complete(self, prompt: str, max_new_tokens: int) -> str:
        entry = None
        for rule in self._oracle.values():
            if rule["marker"] in prompt:
                entry = rule
                break
        if entry is None:
            return ""
        if any(evidence in prompt for evidence in entry.get("evidence", [])):
            text = entry["truth"]
        else:
            text = entry["distractor"]
        return _truncate_tokens(text, max_new_tokens)


def _truncate_tokens(text: str, max_tokens: int) -> str:
    if max_tokens < 1:
        return ""
    spans = [m.span() for m in re.finditer(r"\S+", text)]
    if len(spans) <= max_tokens:
        return text
    return text[: spans[max_tokens - 1][1]]


# ---------------------------------------------------------------------------
# HTTP providers (sidecar protocol)


class HttpProviderClient:
    """Minimal JSON-over-HTTP client with bounded retries."""

    def __init__(self, base_url: str, *, timeout: float = 30.0, retries: int = 2,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)
        self._lock = threading.Lock()

    def post_json(self, path: str, payload: dict) -> dict:
        url = f"{self.base_url}{path}"
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                with self._lock:
                    response = self._client.post(url, json=payload, timeout=self.timeout)
                if response.status_code != 200:
                    last_error = ProviderError(
                        f"{url} returned {response.status_code}: {response.text[:200]}"
                    )
                    continue
                return response.json()
            except (httpx.HTTPError, ValueError) as exc:
                last_error = exc
        raise ProviderError(f"provider call failed: {url}: {last_error}")


class HttpEmbedder:
    def __init__(self, client: HttpProviderClient):
        self._client = client
        self._dim: int | None = None
        self.id = f"http:{client.base_url}/embed"

    @property
    def dim(self) -> int:
        if self._dim is None:
            data = self._client.post_json("/embed", {"v": PROTOCOL_VERSION, "texts": []})
            self._dim = int(data["dim"])
        return self._dim

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        data = self._client.post_json(
            "/embed", {"v": PROTOCOL_VERSION, "texts": list(texts)}
        )
        dim = int(data["dim"])
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise ProviderError(f"embedder changed dim from {self._dim} to {dim}")
        vectors = np.asarray(data["vectors"], dtype=np.float64)
        if vectors.size == 0:
            vectors = np.zeros((0, dim), dtype=np.float64)
        if vectors.shape != (len(texts), dim):
            raise ProviderError(f"bad /embed shape {vectors.shape}")
        return vectors


class HttpSummarizer:
    def __init__(self, client: HttpProviderClient, language: str | None = None):
        self._client = client
        self._language = language
        self.id = f"http:{client.base_url}/summarize"

    def summarize(self, code: str) -> str:
        data = self._client.post_json(
            "/summarize",
            {"v": PROTOCOL_VERSION, "code": code, "language": self._language},
        )
        return str(data["docstring"])


class HttpCompletion:
    def __init__(self, client: HttpProviderClient):
        self._client = client
        self.id = f"http:{client.base_url}/complete"

    def complete(self, prompt: str, max_new_tokens: int) -> str:
        data = self._client.post_json(
            "/complete",
            {"v": PROTOCOL_VERSION, "prompt": prompt, "max_new_tokens": max_new_tokens},
        )
        return str(data["text"])
