import os

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from apirag.corpus import (
    CorpusIndex,
    scan_repo,
    source_file_from_text,
    window_at,
    windows,
)


def make_file(n_lines, path="x.py"):
    text = "\n".join(f"v{i} = {i}" for i in range(1, n_lines + 1))
    return source_file_from_text(path, text)


def window_starts_oracle(total_lines, slide):
    """Enumerate window starts by hand: 1, 1+s, 1+2s, ... while <= L."""
    starts = []
    start = 1
    while start <= total_lines:
        starts.append(start)
        start += slide
    return starts


def test_windows_40_lines():
    ws = windows(make_file(40), 20, 10)
    assert [(w.start_line, w.end_line) for w in ws] == [(1, 20), (11, 30), (21, 40), (31, 40)]


def test_windows_short_file_single_window():
    ws = windows(make_file(5), 20, 10)
    assert [(w.start_line, w.end_line) for w in ws] == [(1, 5)]


def test_windows_exact_length():
    ws = windows(make_file(20), 20, 10)
    assert [(w.start_line, w.end_line) for w in ws] == [(1, 20), (11, 20)]


def test_windows_empty_file():
    assert windows(source_file_from_text("e.py", ""), 20, 10) == []


def test_windows_rejects_bad_config():
    with pytest.raises(ValueError):
        windows(make_file(3), 0, 1)
    with pytest.raises(ValueError):
        windows(make_file(3), 5, 0)


@given(
    n_lines=st.integers(min_value=1, max_value=120),
    window_len=st.integers(min_value=1, max_value=30),
    slide_offset=st.integers(min_value=0, max_value=29),
)
@settings(max_examples=60)
def test_window_enumeration_and_coverage(n_lines, window_len, slide_offset):
    slide = min(window_len, 1 + slide_offset)  # coverage needs slide <= window_len
    f = make_file(n_lines)
    ws = windows(f, window_len, slide)
    assert [w.start_line for w in ws] == window_starts_oracle(n_lines, slide)
    covered = set()
    for w in ws:
        assert w.end_line - w.start_line + 1 <= window_len
        covered.update(range(w.start_line, w.end_line + 1))
    assert covered == set(range(1, n_lines + 1))


def test_window_token_set_matches_text():
    f = source_file_from_text("t.py", "a = b\nc = a\n")
    w = window_at(f, 1, 2)
    assert w.token_set == {"a", "=", "b", "c"}
    assert w.text == "a = b\nc = a"


def test_scan_repo_extension_filter(py_repo):
    files = scan_repo(py_repo)
    assert len(files) == 4  # three .py modules plus the package __init__
    assert all(f.path.endswith(".py") for f in files)


def test_scan_repo_empty_dir(tmp_path):
    assert scan_repo(tmp_path) == []


def test_scan_repo_missing_root(tmp_path):
    with pytest.raises(NotADirectoryError):
        scan_repo(tmp_path / "nope")


def test_scan_repo_parse_failure_flagged(tmp_path):
    (tmp_path / "broken.py").write_text("def broken(:\n", encoding="utf-8")
    files = scan_repo(tmp_path)
    assert len(files) == 1
    assert files[0].parse_failed
    assert all(not tokens for tokens in files[0].token_lines)


def test_scan_repo_unbalanced_java_flagged(tmp_path):
    (tmp_path / "Bad.java").write_text("class Bad { void f() {}", encoding="utf-8")
    files = scan_repo(tmp_path)
    assert files[0].parse_failed


def test_scan_repo_deterministic(py_repo):
    first = scan_repo(py_repo)
    second = scan_repo(py_repo)
    assert first == second


def test_scan_repo_excludes(py_repo):
    files = scan_repo(py_repo, ("utils/*",))
    assert {f.path for f in files} == {"app.py", "core/trainer.py"}


def test_scan_repo_skips_hidden_dirs(tmp_path):
    hidden = tmp_path / ".git"
    hidden.mkdir()
    (hidden / "hook.py").write_text("x = 1\n", encoding="utf-8")
    (tmp_path / "real.py").write_text("y = 2\n", encoding="utf-8")
    assert [f.path for f in scan_repo(tmp_path)] == ["real.py"]


def test_scan_repo_skips_symlinks(tmp_path):
    (tmp_path / "real.py").write_text("x = 1\n", encoding="utf-8")
    try:
        os.symlink(tmp_path / "real.py", tmp_path / "link.py")
    except OSError:
        pytest.skip("symlinks unavailable")
    assert [f.path for f in scan_repo(tmp_path)] == ["real.py"]


def test_corpus_index_replaced_file(py_repo):
    files = scan_repo(py_repo)
    index = CorpusIndex.build(files, 20, 10)
    replaced = index.with_replaced_file("app.py", "only = 1", "python")
    app_windows = [w for w in replaced.all_windows() if w.file == "app.py"]
    assert len(app_windows) == 1
    assert app_windows[0].text == "only = 1"
    # the original index is untouched
    assert index.files["app.py"].lines != ("only = 1",)
