from pathlib import Path

import numpy as np
import pytest

from apirag.corpus import scan_repo
from apirag.kb import (
    KbFormatError,
    build_kb,
    check_normalization,
    kb_equal,
    load_kb,
    save_kb,
)
from apirag.providers import HashEmbedder, ProviderError, TemplateSummarizer


FIVE_FUNCTIONS = """\
def one(a):
    return a

def two(b):
    return b

def three(c):
    return c

def four(d):
    return d

def five(e):
    return e
"""


@pytest.fixture
def five_fn_repo(tmp_path):
    (tmp_path / "funcs.py").write_text(FIVE_FUNCTIONS, encoding="utf-8")
    return tmp_path


def make_kb(root):
    return build_kb(scan_repo(root), HashEmbedder(64), TemplateSummarizer(None))


def test_entry_per_internal_record(five_fn_repo):
    kb = make_kb(five_fn_repo)
    assert len(kb.entries) == 5
    assert sorted(e.api.name for e in kb.entries) == ["five", "four", "one", "three", "two"]


def test_entry_contents(five_fn_repo):
    kb = make_kb(five_fn_repo)
    entry = next(e for e in kb.entries if e.api.name == "one")
    assert entry.docstring == "Performs one given a."
    assert entry.example_embeddings.shape == (len(entry.usage_examples), kb.dim)
    assert entry.qualified_name.startswith("funcs.py::")
    assert not entry.degraded


def test_build_deterministic(five_fn_repo, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_kb(make_kb(five_fn_repo), a)
    save_kb(make_kb(five_fn_repo), b)
    assert a.read_bytes() == b.read_bytes()


class _FaultySummarizer:
    """Fails on exactly one function body."""

    id = "faulty"

    def __init__(self, poison):
        self.poison = poison
        self.fallback = TemplateSummarizer(None)

    def summarize(self, code):
        if self.poison in code:
            raise ProviderError("injected failure")
        return self.fallback.summarize(code)


def test_provider_failure_degrades_single_entry(five_fn_repo):
    kb = build_kb(
        scan_repo(five_fn_repo), HashEmbedder(64), _FaultySummarizer("def three")
    )
    assert len(kb.entries) == 5
    degraded = [e for e in kb.entries if e.degraded]
    assert [e.api.name for e in degraded] == ["three"]
    assert degraded[0].docstring == ""
    assert not degraded[0].doc_embedding.any()


def test_round_trip(five_fn_repo, tmp_path):
    kb = make_kb(five_fn_repo)
    path = tmp_path / "kb.jsonl"
    save_kb(kb, path)
    loaded = load_kb(path)
    assert kb_equal(kb, loaded)
    for original, reloaded in zip(kb.entries, loaded.entries):
        assert np.max(np.abs(original.doc_embedding - reloaded.doc_embedding)) <= 1e-9


def test_empty_kb_round_trip(tmp_path):
    kb = build_kb([], HashEmbedder(16), TemplateSummarizer(None))
    path = tmp_path / "empty.jsonl"
    save_kb(kb, path)
    loaded = load_kb(path)
    assert loaded.entries == []
    assert loaded.dim == 16


def test_truncated_file_names_line(five_fn_repo, tmp_path):
    path = tmp_path / "kb.jsonl"
    save_kb(make_kb(five_fn_repo), path)
    raw = path.read_text(encoding="utf-8").splitlines()
    truncated = "\n".join(raw[:3] + [raw[4][:40]])
    broken = tmp_path / "broken.jsonl"
    broken.write_text(truncated, encoding="utf-8")
    with pytest.raises(KbFormatError, match=r"line 4.*last valid line 3"):
        load_kb(broken)


def test_dim_mismatch_names_line(five_fn_repo, tmp_path):
    path = tmp_path / "kb.jsonl"
    save_kb(make_kb(five_fn_repo), path)
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[2] = lines[2].replace('"doc_embedding": [', '"doc_embedding": [9.0, ', 1)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(KbFormatError, match="line 3"):
        load_kb(bad)


def test_missing_header_field(tmp_path):
    path = tmp_path / "noheader.jsonl"
    path.write_text('{"dim": 4}\n', encoding="utf-8")
    with pytest.raises(KbFormatError, match="line 1"):
        load_kb(path)


def test_normalization_scan(five_fn_repo):
    kb = make_kb(five_fn_repo)
    assert check_normalization(kb) == []
    kb.entries[0].doc_embedding = kb.entries[0].doc_embedding * 2.0
    assert check_normalization(kb) == [kb.entries[0].qualified_name]


def test_qualified_names_unique(py_repo):
    kb = make_kb(py_repo)
    names = [e.qualified_name for e in kb.entries]
    assert len(names) == len(set(names))


def test_fingerprint_tracks_content(five_fn_repo):
    kb1 = make_kb(five_fn_repo)
    (Path(five_fn_repo) / "funcs.py").write_text("def changed(x):\n    return x\n", encoding="utf-8")
    kb2 = make_kb(five_fn_repo)
    assert kb1.repo_fingerprint != kb2.repo_fingerprint
