"""Repository scanning, per-file token records, and sliding line windows."""

from __future__ import annotations

import ast
import fnmatch
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .lexer import JAVA, PYTHON, LexToken, lex

log = logging.getLogger(__name__)

EXTENSION_LANGUAGES = {".py": PYTHON, ".java": JAVA}

DEFAULT_EXCLUDES = ()


@dataclass(frozen=True)
class SourceFile:
    """One lexed repository file, addressable by 1-based line number."""

    path: str  # repo-relative posix path
    language: str
    lines: tuple[str, ...]
    token_lines: tuple[tuple[LexToken, ...], ...]  # tokens grouped by start line
    parse_failed: bool = False

    @property
    def text(self) -> str:
        return "\n".join(self.lines)

    def line_count(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class CodeWindow:
    """A window of consecutive source lines plus its deduplicated token set."""

    file: str
    start_line: int  # 1-based, inclusive
    end_line: int  # 1-based, inclusive
    text: str
    token_set: frozenset[str]


def source_file_from_text(path: str, text: str, language: str | None = None) -> SourceFile:
    """Build a SourceFile from in-memory text (parse check included)."""
    if language is None:
        language = EXTENSION_LANGUAGES.get(Path(path).suffix.lower(), PYTHON)
    raw_lines = text.split("\n")
    if raw_lines and raw_lines[-1] == "":  # trailing newline is not an extra line
        raw_lines.pop()
    lines = tuple(raw_lines)
    parse_failed = not _parses(text, language)
    if parse_failed:
        token_lines: tuple[tuple[LexToken, ...], ...] = tuple(() for _ in lines)
        return SourceFile(path, language, lines, token_lines, parse_failed=True)
    per_line: list[list[LexToken]] = [[] for _ in lines]
    for tok in lex(text, language):
        per_line[tok.line - 1].append(tok)
    return SourceFile(path, language, lines, tuple(tuple(ts) for ts in per_line))


def scan_repo(root: str | os.PathLike, excludes: list[str] | tuple[str, ...] = DEFAULT_EXCLUDES) -> list[SourceFile]:
    """Scan a repository for Python/Java files and lex each one.

    Hidden directories are skipped and symbolic links are not followed.
    ``excludes`` are glob patterns matched against repo-relative posix paths.
    Files that fail to parse come back flagged with empty token lines;
    unreadable files are skipped with a warning.
    """
    root_path = Path(root)
    if not root_path.is_dir():
        raise NotADirectoryError(f"repository root is not a directory: {root_path}")

    results: list[SourceFile] = []
    for dirpath, dirnames, filenames in os.walk(root_path, followlinks=False):
        dirnames[:] = sorted(d for d in dirnames if not d.startswith("."))
        for name in sorted(filenames):
            suffix = Path(name).suffix.lower()
            if suffix not in EXTENSION_LANGUAGES:
                continue
            full = Path(dirpath) / name
            rel = full.relative_to(root_path).as_posix()
            if full.is_symlink() or _excluded(rel, excludes):
                continue
            try:
                text = full.read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                log.warning("skipping unreadable file %s: %s", rel, exc)
                continue
            results.append(source_file_from_text(rel, text, EXTENSION_LANGUAGES[suffix]))
    results.sort(key=lambda f: f.path)
    return results


def windows(file: SourceFile, window_len: int, slide: int) -> list[CodeWindow]:
    """Sliding windows over a file: starts at lines 1, 1+slide, 1+2*slide, ...

    The trailing windows may be shorter than ``window_len``; an empty file
    has no windows.
    """
    if window_len < 1 or slide < 1:
        raise ValueError("window_len and slide must be >= 1")
    total = file.line_count()
    if total == 0:
        return []
    out: list[CodeWindow] = []
    start = 1
    while start <= total:
        end = min(start + window_len - 1, total)
        out.append(window_at(file, start, end))
        start += slide
    return out


def window_at(file: SourceFile, start_line: int, end_line: int) -> CodeWindow:
    """Materialize the window [start_line..end_line] of ``file``."""
    text = "\n".join(file.lines[start_line - 1 : end_line])
    tokens = frozenset(
        tok.text
        for line_tokens in file.token_lines[start_line - 1 : end_line]
        for tok in line_tokens
    )
    return CodeWindow(file.path, start_line, end_line, text, tokens)


def count_tokens(text: str, language: str | None) -> int:
    """Lexical token count used for all context budgets."""
    return len(lex(text, language))


@dataclass
class CorpusIndex:
    """Window index over a set of source files for one window configuration."""

    window_len: int
    slide: int
    files: dict[str, SourceFile] = field(default_factory=dict)

    @classmethod
    def build(cls, files: list[SourceFile], window_len: int, slide: int) -> "CorpusIndex":
        index = cls(window_len=window_len, slide=slide)
        for f in files:
            index.files[f.path] = f
        return index

    def with_replaced_file(self, path: str, text: str, language: str) -> "CorpusIndex":
        """Copy of this index where ``path`` holds ``text`` (e.g. an unfinished file)."""
        clone = CorpusIndex(window_len=self.window_len, slide=self.slide, files=dict(self.files))
        clone.files[path] = source_file_from_text(path, text, language)
        return clone

    def all_windows(self) -> list[CodeWindow]:
        out: list[CodeWindow] = []
        for path in sorted(self.files):
            out.extend(windows(self.files[path], self.window_len, self.slide))
        return out


def _excluded(rel_path: str, excludes) -> bool:
    return any(fnmatch.fnmatch(rel_path, pattern) for pattern in excludes)


def _parses(text: str, language: str) -> bool:
    if language == PYTHON:
        try:
            ast.parse(text)
        except (SyntaxError, ValueError, RecursionError):
            return False
        return True
    # Java: brace balance over the lexed stream is the structural sanity check.
    depth = 0
    for tok in lex(text, JAVA):
        if tok.text == "{":
            depth += 1
        elif tok.text == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0
