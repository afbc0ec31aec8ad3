"""Model backends: a seeded offline encoder plus optional HF-backed models.

The local encoder is a real torch module (hash-bucket embedding table,
mean pooling, L2 normalization) whose weights come from a fixed-seed
generator, so any process serves identical vectors for identical inputs
without downloading anything.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import torch

_SEED = 0x5EED_C0DE
_VOCAB_BUCKETS = 4096
_TOKEN_RE = re.compile(r"[A-Za-z_]\w*|\d+|[^\sA-Za-z0-9_]")


def _bucket(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % _VOCAB_BUCKETS


class SeededTextEncoder(torch.nn.Module):
    """Deterministic text encoder: bucket embeddings, mean pool, unit norm."""

    def __init__(self, dim: int, device: str = "cpu"):
        super().__init__()
        generator = torch.Generator().manual_seed(_SEED)
        weights = torch.randn(_VOCAB_BUCKETS, dim, generator=generator)
        self.table = torch.nn.Embedding.from_pretrained(weights, freeze=True)
        self.dim = dim
        self.to(device)
        self.eval()

    @torch.no_grad()
    def encode(self, texts: list[str]) -> list[list[float]]:
        out: list[list[float]] = []
        for text in texts:
            ids = [_bucket(tok) for tok in _TOKEN_RE.findall(text)]
            if not ids:
                out.append([0.0] * self.dim)
                continue
            vectors = self.table(torch.tensor(ids, dtype=torch.long))
            pooled = vectors.mean(dim=0)
            norm = torch.linalg.norm(pooled)
            if norm > 0:
                pooled = pooled / norm
            out.append(pooled.tolist())
        return out


class HfTextEncoder:
    """Mean-pooled transformer encoder loaded through the transformers library."""

    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import AutoModel, AutoTokenizer  # heavyweight, import lazily

        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModel.from_pretrained(model_id).to(device).eval()
        self.device = device
        self.dim = int(self.model.config.hidden_size)

    @torch.no_grad()
    def encode(self, texts: list[str]) -> list[list[float]]:
        batch = self.tokenizer(
            texts, padding=True, truncation=True, max_length=512, return_tensors="pt"
        ).to(self.device)
        hidden = self.model(**batch).last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
        pooled = torch.nn.functional.normalize(pooled, dim=-1)
        return pooled.cpu().tolist()


_DEF_RE = re.compile(r"def\s+([A-Za-z_]\w*)\s*\(([^)]*)\)")
_JAVA_RE = re.compile(r"([A-Za-z_$][\w$]*)\s*\(([^)]*)\)\s*\{")
_CALL_RE = re.compile(r"([A-Za-z_]\w*)\s*\(([^)]*)\)")
_IDENT_RE = re.compile(r"[A-Za-z_]\w*")


class HeuristicSummarizer:
    """Docstring from the code's subject name and parameter names."""

    def summarize(self, code: str, language: str | None = None) -> str:
        match = _DEF_RE.search(code) or _JAVA_RE.search(code) or _CALL_RE.search(code)
        if match:
            name, raw_params = match.group(1), match.group(2)
            params = []
            for chunk in raw_params.split(","):
                idents = _IDENT_RE.findall(chunk.split("=")[0])
                pick = idents[0] if language != "java" and idents else (idents[-1] if idents else None)
                if pick and pick not in ("self", "cls"):
                    params.append(pick)
            words = " ".join(w for w in _split_words(name) if w)
            if params:
                return f"Performs {words} given {', '.join(params)}."
            return f"Performs {words}."
        ident = _IDENT_RE.search(code)
        if ident:
            return f"Performs {' '.join(_split_words(ident.group()))}."
        return ""


def _split_words(name: str) -> list[str]:
    s = re.sub(r"([A-Z]+)([A-Z][a-z])", r"\1_\2", name)
    s = re.sub(r"([a-z0-9])([A-Z])", r"\1_\2", s)
    return s.lower().split("_")


class HfSummarizer:
    """Instruction-model summarization with a few-shot code/docstring prompt."""

    PROMPT = (
        "Write a one-sentence docstring for the given code.\n\n"
        "### Code:\ndef reverse_words(sentence):\n"
        '    return " ".join(reversed(sentence.split()))\n'
        "### Docstring:\nReverses the order of words in a sentence.\n\n"
        "### Code:\n{code}\n### Docstring:\n"
    )

    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import pipeline

        self.generator = pipeline("text-generation", model=model_id, device=device)

    def summarize(self, code: str, language: str | None = None) -> str:
        prompt = self.PROMPT.format(code=code)
        output = self.generator(prompt, max_new_tokens=64, do_sample=False)
        text = output[0]["generated_text"][len(prompt):]
        return text.split("###", 1)[0].split("\n\n", 1)[0].strip().strip('"')


class HfCompletion:
    def __init__(self, model_id: str, device: str = "cpu"):
        from transformers import pipeline

        self.generator = pipeline("text-generation", model=model_id, device=device)

    def complete(self, prompt: str, max_new_tokens: int) -> str:
        output = self.generator(
            prompt, max_new_tokens=max_new_tokens, do_sample=False,
            return_full_text=False,
        )
        return output[0]["generated_text"]


@dataclass
class ModelBundle:
    encoder: object
    summarizer: object
    completion: object | None
    embedding_model_id: str
    summarizer_model_id: str
    completion_model_id: str | None

    @property
    def dim(self) -> int:
        return self.encoder.dim


def load_models(config) -> ModelBundle:
    if config.embedding_model_id.startswith("local/"):
        encoder = SeededTextEncoder(config.embedding_dim, config.device)
    else:
        encoder = HfTextEncoder(config.embedding_model_id, config.device)

    if config.summarizer_model_id.startswith("local/"):
        summarizer = HeuristicSummarizer()
    else:
        summarizer = HfSummarizer(config.summarizer_model_id, config.device)

    completion = None
    if config.completion_model_id:
        completion = HfCompletion(config.completion_model_id, config.device)

    return ModelBundle(
        encoder=encoder,
        summarizer=summarizer,
        completion=completion,
        embedding_model_id=config.embedding_model_id,
        summarizer_model_id=config.summarizer_model_id,
        completion_model_id=config.completion_model_id,
    )
