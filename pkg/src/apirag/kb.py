"""The per-repository API knowledge base: build, persist, load.

One entry per internal API record, carrying the synthesized usage
examples, a docstring summarizing the body, and unit-norm embedding
vectors for both. Persistence is JSON-Lines with a header line so a
knowledge base can be streamed, diffed, and appended.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .api_extract import ApiRecord, extract_apis, internal_filter
from .corpus import SourceFile
from .providers import EmbedderPort, ProviderError, SummarizerPort
from .usage_examples import UsageExample, synth_usage_examples

log = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6


class KbFormatError(ValueError):
    """A knowledge-base file failed validation; message names the line."""


@dataclass
class KbEntry:
    api: ApiRecord
    usage_examples: tuple[UsageExample, ...]
    example_embeddings: np.ndarray  # shape (n_examples, dim)
    docstring: str
    doc_embedding: np.ndarray  # shape (dim,)
    qualified_name: str
    degraded: bool = False  # provider failure: empty docstring, zero doc vector


@dataclass
class KnowledgeBase:
    dim: int
    embedder_id: str
    summarizer_id: str
    repo_fingerprint: str
    entries: list[KbEntry] = field(default_factory=list)


def qualified_name(record: ApiRecord) -> str:
    sig_hash = hashlib.sha256(record.signature.encode("utf-8")).hexdigest()[:8]
    return f"{record.file}::{record.class_name or ''}::{record.name}::{sig_hash}"


def repo_fingerprint(files: list[SourceFile]) -> str:
    digest = hashlib.sha256()
    for f in sorted(files, key=lambda s: s.path):
        content_hash = hashlib.sha256(f.text.encode("utf-8")).hexdigest()
        digest.update(f"{f.path}\0{content_hash}\n".encode("utf-8"))
    return digest.hexdigest()


def build_kb(
    repo: list[SourceFile],
    embedder: EmbedderPort,
    summarizer: SummarizerPort,
) -> KnowledgeBase:
    """Extract, expand, and embed every internal API of ``repo``.

    A provider failure degrades the affected entry (empty docstring, zero
    vectors, degraded flag) instead of aborting the build.
    """
    repo_paths = {f.path for f in repo}
    records: list[ApiRecord] = []
    for f in repo:
        if f.parse_failed:
            log.warning("skipping unparseable file %s", f.path)
            continue
        records.extend(extract_apis(f))
    records = internal_filter(records, repo_paths)

    dim = embedder.dim
    kb = KnowledgeBase(
        dim=dim,
        embedder_id=embedder.id,
        summarizer_id=summarizer.id,
        repo_fingerprint=repo_fingerprint(repo),
    )
    seen_names: dict[str, int] = {}
    for record in records:
        entry = _build_entry(record, embedder, summarizer, dim)
        # Qualified names must be unique; disambiguate exact re-definitions.
        count = seen_names.get(entry.qualified_name, 0)
        seen_names[entry.qualified_name] = count + 1
        if count:
            entry.qualified_name = f"{entry.qualified_name}#{count + 1}"
        kb.entries.append(entry)
    return kb


def _build_entry(
    record: ApiRecord,
    embedder: EmbedderPort,
    summarizer: SummarizerPort,
    dim: int,
) -> KbEntry:
    examples = tuple(synth_usage_examples(record))
    degraded = False
    try:
        example_vectors = (
            embedder.embed([e.text for e in examples])
            if examples
            else np.zeros((0, dim), dtype=np.float64)
        )
    except ProviderError as exc:
        log.warning("embedder failed for %s: %s", record.name, exc)
        degraded = True
        example_vectors = np.zeros((len(examples), dim), dtype=np.float64)
    try:
        docstring = summarizer.summarize(record.body)
        doc_vector = embedder.embed([docstring])[0]
    except ProviderError as exc:
        log.warning("summarization failed for %s: %s", record.name, exc)
        degraded = True
        docstring = ""
        doc_vector = np.zeros(dim, dtype=np.float64)
    return KbEntry(
        api=record,
        usage_examples=examples,
        example_embeddings=example_vectors,
        docstring=docstring,
        doc_embedding=doc_vector,
        qualified_name=qualified_name(record),
        degraded=degraded,
    )


def save_kb(kb: KnowledgeBase, path) -> None:
    header = {
        "dim": kb.dim,
        "embedder_id": kb.embedder_id,
        "summarizer_id": kb.summarizer_id,
        "repo_fingerprint": kb.repo_fingerprint,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, ensure_ascii=False) + "\n")
        for entry in kb.entries:
            fh.write(json.dumps(_entry_to_json(entry), ensure_ascii=False) + "\n")


def load_kb(path) -> KnowledgeBase:
    """Load a knowledge base; diagnostics name the offending line number."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise KbFormatError(f"{path}: empty file, no header at line 1")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise KbFormatError(f"{path}: invalid header at line 1: {exc}") from exc
    for key in ("dim", "embedder_id", "summarizer_id", "repo_fingerprint"):
        if key not in header:
            raise KbFormatError(f"{path}: header at line 1 missing field {key!r}")
    dim = int(header["dim"])
    kb = KnowledgeBase(
        dim=dim,
        embedder_id=header["embedder_id"],
        summarizer_id=header["summarizer_id"],
        repo_fingerprint=header["repo_fingerprint"],
    )
    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            data = json.loads(raw)
            kb.entries.append(_entry_from_json(data, dim))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise KbFormatError(
                f"{path}: corrupt entry at line {line_no}"
                f" (last valid line {line_no - 1}): {exc}"
            ) from exc
    return kb


def check_normalization(kb: KnowledgeBase) -> list[str]:
    """Qualified names of entries holding a non-unit, non-zero vector."""
    bad: list[str] = []
    for entry in kb.entries:
        vectors = [entry.doc_embedding] + list(entry.example_embeddings)
        for vec in vectors:
            norm = float(np.linalg.norm(vec))
            if norm != 0.0 and abs(norm - 1.0) > NORM_TOLERANCE:
                bad.append(entry.qualified_name)
                break
    return bad


def kb_equal(a: KnowledgeBase, b: KnowledgeBase) -> bool:
    if (a.dim, a.embedder_id, a.summarizer_id, a.repo_fingerprint) != (
        b.dim,
        b.embedder_id,
        b.summarizer_id,
        b.repo_fingerprint,
    ):
        return False
    if len(a.entries) != len(b.entries):
        return False
    for ea, eb in zip(a.entries, b.entries):
        if (
            ea.api != eb.api
            or ea.usage_examples != eb.usage_examples
            or ea.docstring != eb.docstring
            or ea.qualified_name != eb.qualified_name
            or ea.degraded != eb.degraded
            or ea.example_embeddings.shape != eb.example_embeddings.shape
            or not np.array_equal(ea.example_embeddings, eb.example_embeddings)
            or not np.array_equal(ea.doc_embedding, eb.doc_embedding)
        ):
            return False
    return True


def _entry_to_json(entry: KbEntry) -> dict:
    api = entry.api
    return {
        "qualified_name": entry.qualified_name,
        "api": {
            "name": api.name,
            "signature": api.signature,
            "class_name": api.class_name,
            "enclosing_class_decl": api.enclosing_class_decl,
            "body": api.body,
            "file": api.file,
            "language": api.language,
            "kind": api.kind,
            "is_static": api.is_static,
            "param_names": list(api.param_names),
            "return_type": api.return_type,
            "outer_classes": list(api.outer_classes),
        },
        "usage_examples": [
            {"text": e.text, "form_id": e.form_id} for e in entry.usage_examples
        ],
        "example_embeddings": [vec.tolist() for vec in entry.example_embeddings],
        "docstring": entry.docstring,
        "doc_embedding": entry.doc_embedding.tolist(),
        "degraded": entry.degraded,
    }


def _entry_from_json(data: dict, dim: int) -> KbEntry:
    api_data = data["api"]
    record = ApiRecord(
        name=api_data["name"],
        signature=api_data["signature"],
        class_name=api_data["class_name"],
        enclosing_class_decl=api_data["enclosing_class_decl"],
        body=api_data["body"],
        file=api_data["file"],
        language=api_data["language"],
        kind=api_data["kind"],
        is_static=api_data["is_static"],
        param_names=tuple(api_data["param_names"]),
        return_type=api_data["return_type"],
        outer_classes=tuple(api_data.get("outer_classes", ())),
    )
    examples = tuple(
        UsageExample(text=e["text"], form_id=e["form_id"])
        for e in data["usage_examples"]
    )
    example_vectors = np.asarray(data["example_embeddings"], dtype=np.float64)
    if example_vectors.size == 0:
        example_vectors = np.zeros((0, dim), dtype=np.float64)
    if example_vectors.ndim != 2 or example_vectors.shape[1] != dim:
        raise ValueError(f"usage-example vectors have dim {example_vectors.shape}, expected {dim}")
    if example_vectors.shape[0] != len(examples):
        raise ValueError("usage-example count does not match vector count")
    doc_vector = np.asarray(data["doc_embedding"], dtype=np.float64)
    if doc_vector.shape != (dim,):
        raise ValueError(f"doc vector has dim {doc_vector.shape}, expected ({dim},)")
    return KbEntry(
        api=record,
        usage_examples=examples,
        example_embeddings=example_vectors,
        docstring=data["docstring"],
        doc_embedding=doc_vector,
        qualified_name=data["qualified_name"],
        degraded=bool(data.get("degraded", False)),
    )
