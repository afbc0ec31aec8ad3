"""Benchmark construction: mining import-masked completion tasks from a repo.

A task is a line that uses a symbol imported from another file in the same
repository. When that line is the symbol's first use in the file, the
corresponding import statement is deleted from the prefix, so the model
must infer the dependency rather than read it off the imports. The cursor
lands on a seeded-random token boundary before the cross-file token and
the ground truth runs from the cursor to the end of the line.
"""

from __future__ import annotations

import ast
import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import SourceFile, scan_repo
from .kb import repo_fingerprint
from .lexer import JAVA, PYTHON
from .pipeline import CompletionTask

log = logging.getLogger(__name__)

_JAVA_IMPORT_RE = re.compile(
    r"^\s*import\s+(static\s+)?([A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*)(\.\*)?\s*;"
)
_JAVA_PACKAGE_RE = re.compile(r"^\s*package\s+([A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*)\s*;")


@dataclass(frozen=True)
class ImportBinding:
    symbol: str  # the name whose occurrences mark cross-file usage
    lines: tuple[int, ...]  # 1-based lines of the import statement
    statement: str


@dataclass
class TaskSet:
    repo_fingerprint: str
    tasks: list[CompletionTask] = field(default_factory=list)
    construction_log: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class _Candidate:
    file: str
    line_no: int  # 1-based
    cross_col: int  # 0-based column of the cross-file token
    cursor_candidates: tuple[int, ...]  # candidate cursor columns
    mask_lines: tuple[int, ...]  # import lines to delete (first-use only)
    symbols: tuple[str, ...]  # symbols first used on this line
    language: str


def mine_tasks(
    repo_root,
    n_per_repo: int,
    seed: int,
    excludes: tuple[str, ...] = (),
) -> TaskSet:
    """Mine up to ``n_per_repo`` import-masked tasks from the repository."""
    if n_per_repo < 1:
        raise ValueError("n_per_repo must be >= 1")
    files = scan_repo(repo_root, excludes)
    taskset = TaskSet(repo_fingerprint=repo_fingerprint(files))
    parsed = [f for f in files if not f.parse_failed]

    candidates: list[_Candidate] = []
    for f in parsed:
        if f.language == PYTHON:
            bindings, import_lines = _python_bindings(f, parsed)
        else:
            bindings, import_lines = _java_bindings(f, parsed)
        if bindings:
            candidates.extend(_file_candidates(f, bindings, import_lines))

    if not candidates:
        log.warning("repository has no cross-file usages; task set is empty")
        taskset.construction_log.append({"note": "no cross-file usages found"})
        return taskset

    candidates.sort(key=lambda c: (c.file, c.line_no))
    rng = random.Random(seed)
    rng.shuffle(candidates)

    texts_by_file = {f.path: f.text for f in files}
    accepted: list[tuple[_Candidate, int]] = []
    for cand in candidates:
        if len(accepted) >= n_per_repo:
            break
        cursor_col = rng.choice(cand.cursor_candidates)
        ground_truth = _line_text(texts_by_file[cand.file], cand.line_no)[cursor_col:]
        if not ground_truth.strip():
            continue
        if _appears_elsewhere(ground_truth, cand.file, texts_by_file):
            continue
        accepted.append((cand, cursor_col))

    accepted.sort(key=lambda pair: (pair[0].file, pair[0].line_no, pair[1]))
    repo_name = Path(repo_root).name or "repo"
    for idx, (cand, cursor_col) in enumerate(accepted):
        task = _build_task(cand, cursor_col, texts_by_file[cand.file],
                           f"{repo_name}-{idx:04d}", str(repo_root))
        taskset.tasks.append(task)
        taskset.construction_log.append(
            {
                "task_id": task.task_id,
                "file": cand.file,
                "line": cand.line_no,
                "cursor_col": cursor_col,
                "masked_lines": [list(p) for p in task.masked_import_lines],
                "symbols": list(cand.symbols),
            }
        )
    return taskset


def _build_task(
    cand: _Candidate, cursor_col: int, text: str, task_id: str, repo_root: str
) -> CompletionTask:
    lines = text.split("\n")
    masked = sorted(set(cand.mask_lines))
    prefix_lines = [
        line for no, line in enumerate(lines[: cand.line_no - 1], start=1) if no not in masked
    ]
    cursor_line = lines[cand.line_no - 1]
    prefix = "\n".join(prefix_lines + [cursor_line[:cursor_col]])
    return CompletionTask(
        task_id=task_id,
        repo_root=repo_root,
        file=cand.file,
        prefix=prefix,
        ground_truth=cursor_line[cursor_col:],
        masked_import_lines=tuple((no, lines[no - 1]) for no in masked),
        language=cand.language,
    )


def _line_text(text: str, line_no: int) -> str:
    return text.split("\n")[line_no - 1]


def _appears_elsewhere(ground_truth: str, own_file: str, texts_by_file: dict[str, str]) -> bool:
    needle = ground_truth.strip()
    return any(
        needle in other_text
        for path, other_text in texts_by_file.items()
        if path != own_file
    )


def _file_candidates(
    f: SourceFile,
    bindings: list[ImportBinding],
    import_lines: set[int],
) -> list[_Candidate]:
    symbol_bindings: dict[str, ImportBinding] = {}
    for binding in bindings:
        symbol_bindings.setdefault(binding.symbol, binding)

    # symbol -> sorted usage lines outside any import statement
    usages: dict[str, list[int]] = {}
    occurrences: dict[tuple[int, str], int] = {}  # (line, symbol) -> column
    for line_no, tokens in enumerate(f.token_lines, start=1):
        if line_no in import_lines:
            continue
        for tok in tokens:
            if tok.kind != "identifier" or tok.text not in symbol_bindings:
                continue
            usages.setdefault(tok.text, []).append(line_no)
            occurrences.setdefault((line_no, tok.text), tok.col)
    first_use = {symbol: lines[0] for symbol, lines in usages.items()}

    candidates: list[_Candidate] = []
    usage_lines = sorted({line for lines in usages.values() for line in lines})
    for line_no in usage_lines:
        on_line = sorted(
            (col, symbol)
            for (ln, symbol), col in occurrences.items()
            if ln == line_no
        )
        cross_col = on_line[0][0]
        first_here = tuple(sym for _, sym in on_line if first_use[sym] == line_no)
        mask: list[int] = []
        for sym in first_here:
            mask.extend(symbol_bindings[sym].lines)
        cursor_cols = _cursor_candidates(f, line_no, cross_col)
        if not cursor_cols:
            continue
        candidates.append(
            _Candidate(
                file=f.path,
                line_no=line_no,
                cross_col=cross_col,
                cursor_candidates=cursor_cols,
                mask_lines=tuple(sorted(set(mask))),
                symbols=first_here or tuple(sym for _, sym in on_line[:1]),
                language=f.language,
            )
        )
    return candidates


def _cursor_candidates(f: SourceFile, line_no: int, cross_col: int) -> tuple[int, ...]:
    """Cursor columns: the line start plus each token boundary before the token."""
    cols = [0]
    for tok in f.token_lines[line_no - 1]:
        end = tok.col + len(tok.text)
        if end <= cross_col:
            cols.append(end)
    return tuple(sorted(set(cols)))


# ---------------------------------------------------------------------------
# Python import analysis


def _python_module_index(files: list[SourceFile]) -> tuple[set[str], set[str]]:
    modules: set[str] = set()
    prefixes: set[str] = set()
    for f in files:
        if f.language != PYTHON:
            continue
        parts = list(Path(f.path).with_suffix("").parts)
        if parts and parts[-1] == "__init__":
            parts = parts[:-1]
        if not parts:
            continue
        modules.add(".".join(parts))
        for i in range(1, len(parts) + 1):
            prefixes.add(".".join(parts[:i]))
    return modules, prefixes


def _python_bindings(
    f: SourceFile, repo_files: list[SourceFile]
) -> tuple[list[ImportBinding], set[int]]:
    modules, prefixes = _python_module_index(repo_files)
    try:
        tree = ast.parse(f.text)
    except SyntaxError:
        return [], set()

    bindings: list[ImportBinding] = []
    import_lines: set[int] = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            lines = tuple(range(node.lineno, (node.end_lineno or node.lineno) + 1))
            import_lines.update(lines)
            for alias in node.names:
                if alias.name in modules or alias.name in prefixes:
                    symbol = alias.asname or alias.name.split(".")[0]
                    bindings.append(
                        ImportBinding(symbol=symbol, lines=lines, statement=f"import {alias.name}")
                    )
        elif isinstance(node, ast.ImportFrom):
            lines = tuple(range(node.lineno, (node.end_lineno or node.lineno) + 1))
            import_lines.update(lines)
            module = _resolve_relative(f.path, node.module, node.level)
            if module is None or (module not in modules and module not in prefixes):
                continue
            for alias in node.names:
                if alias.name == "*":
                    continue
                symbol = alias.asname or alias.name
                bindings.append(
                    ImportBinding(
                        symbol=symbol,
                        lines=lines,
                        statement=f"from {module} import {alias.name}",
                    )
                )
    return bindings, import_lines


def _resolve_relative(path: str, module: str | None, level: int) -> str | None:
    if level == 0:
        return module
    package_parts = list(Path(path).parent.parts)
    drop = level - 1
    if drop > len(package_parts):
        return None
    base = package_parts[: len(package_parts) - drop]
    tail = module.split(".") if module else []
    parts = base + tail
    return ".".join(parts) if parts else None


# ---------------------------------------------------------------------------
# Java import analysis


def _java_package_index(files: list[SourceFile]) -> tuple[dict[str, str], dict[str, list[str]]]:
    fqn_to_file: dict[str, str] = {}
    package_classes: dict[str, list[str]] = {}
    for f in files:
        if f.language != JAVA:
            continue
        package = ""
        for line in f.lines[:20]:
            m = _JAVA_PACKAGE_RE.match(line)
            if m:
                package = m.group(1)
                break
        class_name = Path(f.path).stem
        fqn = f"{package}.{class_name}" if package else class_name
        fqn_to_file[fqn] = f.path
        package_classes.setdefault(package, []).append(class_name)
    return fqn_to_file, package_classes


def _java_bindings(
    f: SourceFile, repo_files: list[SourceFile]
) -> tuple[list[ImportBinding], set[int]]:
    fqn_to_file, package_classes = _java_package_index(repo_files)
    bindings: list[ImportBinding] = []
    import_lines: set[int] = set()
    for line_no, line in enumerate(f.lines, start=1):
        m = _JAVA_IMPORT_RE.match(line)
        if not m:
            continue
        import_lines.add(line_no)
        is_static, dotted, wildcard = bool(m.group(1)), m.group(2), bool(m.group(3))
        if wildcard:
            for class_name in sorted(package_classes.get(dotted, [])):
                defining = fqn_to_file.get(f"{dotted}.{class_name}" if dotted else class_name)
                if defining and defining != f.path:
                    bindings.append(
                        ImportBinding(symbol=class_name, lines=(line_no,), statement=line.strip())
                    )
            continue
        if is_static:
            owner = dotted.rsplit(".", 1)[0] if "." in dotted else dotted
            member = dotted.rsplit(".", 1)[1] if "." in dotted else dotted
            if owner in fqn_to_file and fqn_to_file[owner] != f.path:
                bindings.append(
                    ImportBinding(symbol=member, lines=(line_no,), statement=line.strip())
                )
            continue
        if dotted in fqn_to_file and fqn_to_file[dotted] != f.path:
            symbol = dotted.rsplit(".", 1)[-1]
            bindings.append(
                ImportBinding(symbol=symbol, lines=(line_no,), statement=line.strip())
            )
    return bindings, import_lines


# ---------------------------------------------------------------------------
# Task set persistence


def save_taskset(taskset: TaskSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task in taskset.tasks:
            fh.write(json.dumps(task.to_json(), ensure_ascii=False) + "\n")
    meta = {
        "repo_fingerprint": taskset.repo_fingerprint,
        "construction_log": taskset.construction_log,
    }
    with open(f"{path}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_taskset(path) -> TaskSet:
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                tasks.append(CompletionTask.from_json(json.loads(line)))
    fingerprint = ""
    construction_log: list[dict] = []
    meta_path = Path(f"{path}.meta.json")
    if meta_path.exists():
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
        fingerprint = meta.get("repo_fingerprint", "")
        construction_log = meta.get("construction_log", [])
    return TaskSet(
        repo_fingerprint=fingerprint, tasks=tasks, construction_log=construction_log
    )
