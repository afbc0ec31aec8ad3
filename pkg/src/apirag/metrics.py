"""Scoring: code match (EM, edit similarity) and identifier match (EM, F1)."""

from __future__ import annotations

import ast
import json
import re
from collections import Counter
from dataclasses import dataclass, field

from .lexer import PYTHON, identifier_tokens
from .pipeline import CompletionTask

_WS_RUN = re.compile(r"\s+")


def normalize_code(text: str) -> str:
    """Strip the ends and collapse internal whitespace runs to single spaces."""
    return _WS_RUN.sub(" ", text.strip())


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def edit_similarity(a: str, b: str) -> float:
    """1 - lev(a, b) / max(|a|, |b|); two empty strings score 1.0."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def extract_identifiers(text: str, language: str) -> list[str]:
    """Identifier tokens of a code fragment.

    Python fragments that parse are walked as an AST (so identifiers inside
    f-strings count); anything else falls back to the lexer's identifier
    tokens.
    """
    if language == PYTHON:
        try:
            tree = ast.parse(text)
        except (SyntaxError, ValueError, RecursionError):
            pass
        else:
            return _ast_identifiers(tree)
    return identifier_tokens(text, language)


def _ast_identifiers(tree: ast.AST) -> list[str]:
    found: list[tuple[int, int, str]] = []

    def position(node: ast.AST) -> tuple[int, int]:
        return (getattr(node, "lineno", 0), getattr(node, "col_offset", 0))

    for node in ast.walk(tree):
        if isinstance(node, ast.Name):
            found.append((*position(node), node.id))
        elif isinstance(node, ast.Attribute):
            line, col = position(node)
            found.append((line, col + 1, node.attr))
        elif isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            found.append((*position(node), node.name))
        elif isinstance(node, ast.arg):
            found.append((*position(node), node.arg))
        elif isinstance(node, ast.keyword) and node.arg:
            line, col = position(node.value)
            found.append((line, max(col - 1, 0), node.arg))
        elif isinstance(node, ast.alias):
            line, col = position(node)
            for idx, part in enumerate(node.name.split(".")):
                found.append((line, col + idx, part))
            if node.asname:
                found.append((line, col + len(node.name), node.asname))
    found.sort()
    return [name for _, _, name in found]


def id_match(pred: str, gold: str, language: str, *, multiset: bool = True) -> tuple[int, float]:
    """Identifier EM and F1 between two fragments.

    EM compares identifier multisets by default (sequences when
    ``multiset`` is off); F1 is the harmonic mean of multiset precision
    and recall. Two fragments with no identifiers match exactly.
    """
    pred_ids = extract_identifiers(pred, language)
    gold_ids = extract_identifiers(gold, language)
    if not pred_ids and not gold_ids:
        return 1, 1.0
    pred_counts = Counter(pred_ids)
    gold_counts = Counter(gold_ids)
    if multiset:
        em = int(pred_counts == gold_counts)
    else:
        em = int(pred_ids == gold_ids)
    overlap = sum((pred_counts & gold_counts).values())
    if overlap == 0:
        return em, 0.0
    precision = overlap / sum(pred_counts.values())
    recall = overlap / sum(gold_counts.values())
    return em, 2 * precision * recall / (precision + recall)


@dataclass
class TaskScore:
    task_id: str
    code_em: int
    code_es: float
    id_em: int
    id_f1: float
    missing: bool = False


@dataclass
class MetricsReport:
    mode: str
    per_task: list[TaskScore] = field(default_factory=list)
    timing: dict = field(default_factory=lambda: {"kb_build_s": 0.0, "mean_inference_s": 0.0})

    @property
    def aggregate(self) -> dict:
        n = len(self.per_task)
        if n == 0:
            return {"code_em": 0.0, "code_es": 0.0, "id_em": 0.0, "id_f1": 0.0}
        return {
            "code_em": 100.0 * sum(t.code_em for t in self.per_task) / n,
            "code_es": 100.0 * sum(t.code_es for t in self.per_task) / n,
            "id_em": 100.0 * sum(t.id_em for t in self.per_task) / n,
            "id_f1": 100.0 * sum(t.id_f1 for t in self.per_task) / n,
        }

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "aggregate": self.aggregate,
            "timing": self.timing,
            "per_task": [
                {
                    "task_id": t.task_id,
                    "code_em": t.code_em,
                    "code_es": t.code_es,
                    "id_em": t.id_em,
                    "id_f1": t.id_f1,
                    "missing": t.missing,
                }
                for t in self.per_task
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MetricsReport":
        report = cls(mode=data["mode"], timing=data.get("timing", {}))
        for row in data["per_task"]:
            report.per_task.append(
                TaskScore(
                    task_id=row["task_id"],
                    code_em=row["code_em"],
                    code_es=row["code_es"],
                    id_em=row["id_em"],
                    id_f1=row["id_f1"],
                    missing=row.get("missing", False),
                )
            )
        return report


def score_task(prediction: str, task: CompletionTask, *, multiset: bool = True) -> TaskScore:
    pred_norm = normalize_code(prediction)
    gold_norm = normalize_code(task.ground_truth)
    em = int(pred_norm == gold_norm)
    es = edit_similarity(pred_norm, gold_norm)
    id_em, id_f1 = id_match(prediction, task.ground_truth, task.language, multiset=multiset)
    return TaskScore(
        task_id=task.task_id, code_em=em, code_es=es, id_em=id_em, id_f1=id_f1
    )


def score_run(
    predictions: dict[str, str],
    tasks: list[CompletionTask],
    *,
    mode: str = "",
    timing: dict | None = None,
    multiset: bool = True,
) -> MetricsReport:
    """Score a prediction set against its task set.

    Tasks with no prediction are scored as empty strings and flagged.
    """
    report = MetricsReport(mode=mode)
    if timing:
        report.timing = timing
    for task in tasks:
        if task.task_id in predictions:
            score = score_task(predictions[task.task_id], task, multiset=multiset)
        else:
            score = score_task("", task, multiset=multiset)
            score.missing = True
        report.per_task.append(score)
    return report


def compare_runs(reports: list[MetricsReport]) -> dict:
    """Cross-mode comparison: aggregates, unique-correct counts, EM deltas.

    A task counts as uniquely correct for a mode when that mode is the only
    one in the comparison that got it exactly right.
    """
    correct: dict[str, set[str]] = {
        r.mode: {t.task_id for t in r.per_task if t.code_em == 1} for r in reports
    }
    unique: dict[str, int] = {}
    for mode, ids in correct.items():
        others = set().union(*(v for m, v in correct.items() if m != mode)) if len(correct) > 1 else set()
        unique[mode] = len(ids - others)
    deltas = {}
    for i, a in enumerate(reports):
        for b in reports[i + 1 :]:
            deltas[f"{b.mode}-{a.mode}"] = round(
                b.aggregate["code_em"] - a.aggregate["code_em"], 4
            )
    return {
        "modes": [
            {"mode": r.mode, **{k: round(v, 4) for k, v in r.aggregate.items()},
             "unique_correct": unique[r.mode]}
            for r in reports
        ],
        "em_deltas": deltas,
    }


def render_comparison(comparison: dict) -> str:
    headers = ["Mode", "Code EM", "Code ES", "ID EM", "ID F1", "Unique"]
    rows = [
        [
            row["mode"],
            f"{row['code_em']:.2f}",
            f"{row['code_es']:.2f}",
            f"{row['id_em']:.2f}",
            f"{row['id_f1']:.2f}",
            str(row["unique_correct"]),
        ]
        for row in comparison["modes"]
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    lines.extend("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))) for r in rows)
    return "\n".join(lines)


def save_report(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_report(path) -> MetricsReport:
    with open(path, encoding="utf-8") as fh:
        return MetricsReport.from_json(json.load(fh))
