"""Deterministic mock-oracle benchmark suite.

Builds a synthetic repository plus 40 completion tasks whose solvability
is controlled by construction: 14 tasks are solvable from similar-code
snippets alone, 14 only when usage retrieval surfaces the right API, and
12 only when semantic retrieval does. An evidence-gated completion double
returns each task's ground truth exactly when the required evidence
string reaches the prompt, so mode comparisons measure retrieval quality
and nothing else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .bench import TaskSet, save_taskset
from .pipeline import CompletionTask

N_BASE = 14
N_USAGE = 14
N_SEMANTIC = 12
TOTAL_TASKS = N_BASE + N_USAGE + N_SEMANTIC


@dataclass
class SuitePaths:
    root: Path
    repo_dir: Path
    tasks_path: Path
    oracle_path: Path
    summaries_path: Path


def _decoys_source() -> str:
    lines = []
    for word, arg in (("one", "q1"), ("two", "q2"), ("three", "q3"), ("four", "q4")):
        lines += [f"def aaa_decoy_{word}({arg}):", f"    return {arg}"]
    return "\n".join(lines) + "\n"


def _base_api_source(i: int) -> str:
    return (
        f"def base_helper_{i:02d}(x{i}, y{i}):\n"
        f"    combined = x{i} + y{i}\n"
        f"    return combined\n"
    )


def _usage_api_body(i: int) -> str:
    return f"def usage_api_{i:02d}(alpha, beta):\n    return {i}"


def _sem_api_source(i: int) -> str:
    return f"def sem_api_{i:02d}(db{i}, tbl{i}):\n    return None\n"


def _pattern_source(i: int) -> str:
    bait = f"res = base_helper_{i:02d}(src{i}, dst{i})"
    evidence = _base_evidence(i)
    lines = []
    for ln in range(1, 41):
        if 11 <= ln <= 20:
            lines.append(bait)
        elif ln == 23:
            lines.append(evidence)
        else:
            lines.append(f"filler_{i}_{ln} = {ln}")
    return "\n".join(lines) + "\n"


def _base_evidence(i: int) -> str:
    return f"val = base_helper_{i:02d}(src{i}, dst{i})"


def _usage_evidence(i: int) -> str:
    return f"def usage_api_{i:02d}(alpha, beta)"  # the rendered API info block


def _sem_evidence(i: int) -> str:
    return f"def sem_api_{i:02d}(db{i}, tbl{i})"


def _prefix(gid: int, assign: str) -> str:
    return "\n".join(
        [
            f"junk_{gid}_a = 1",
            f"junk_{gid}_b = 2",
            f"probe_{gid:03d} = {gid}",
            f"{assign}{gid} = ",
        ]
    )


def build_suite(out_dir) -> SuitePaths:
    """Write the synthetic repo, task set, oracle, and summary table."""
    root = Path(out_dir)
    repo_dir = root / "repo"
    repo_dir.mkdir(parents=True, exist_ok=True)

    (repo_dir / "a_decoys.py").write_text(_decoys_source(), encoding="utf-8")
    for i in range(N_BASE):
        (repo_dir / f"apis_base_{i:02d}.py").write_text(_base_api_source(i), encoding="utf-8")
        (repo_dir / f"patterns_{i:02d}.py").write_text(_pattern_source(i), encoding="utf-8")
    for i in range(N_USAGE):
        (repo_dir / f"apis_usage_{i:02d}.py").write_text(
            _usage_api_body(i) + "\n", encoding="utf-8"
        )
    for i in range(N_SEMANTIC):
        (repo_dir / f"apis_sem_{i:02d}.py").write_text(_sem_api_source(i), encoding="utf-8")

    tasks: list[CompletionTask] = []
    oracle: dict[str, dict] = {}
    gid = 0
    for i in range(N_BASE):
        task_id = f"mock-{gid:04d}"
        tasks.append(
            CompletionTask(
                task_id=task_id,
                repo_root=str(repo_dir),
                file=f"tasks/task_{gid:03d}.py",
                prefix=_prefix(gid, "out"),
                ground_truth=f"base_helper_{i:02d}(a{i}, b{i})",
                language="python",
            )
        )
        oracle[task_id] = {
            "marker": f"probe_{gid:03d}",
            "evidence": [_base_evidence(i)],
            "truth": f"base_helper_{i:02d}(a{i}, b{i})",
            "distractor": f"res = base_helper_{i:02d}(src{i}, dst{i})",
        }
        gid += 1
    for i in range(N_USAGE):
        task_id = f"mock-{gid:04d}"
        tasks.append(
            CompletionTask(
                task_id=task_id,
                repo_root=str(repo_dir),
                file=f"tasks/task_{gid:03d}.py",
                prefix=_prefix(gid, "cfg"),
                ground_truth=f"usage_api_{i:02d}(val{i}, flag{i})",
                language="python",
            )
        )
        oracle[task_id] = {
            "marker": f"probe_{gid:03d}",
            "evidence": [_usage_evidence(i)],
            "truth": f"usage_api_{i:02d}(val{i}, flag{i})",
            "distractor": f"usage_api_{i:02d}(alpha, beta)",
        }
        gid += 1
    for i in range(N_SEMANTIC):
        task_id = f"mock-{gid:04d}"
        tasks.append(
            CompletionTask(
                task_id=task_id,
                repo_root=str(repo_dir),
                file=f"tasks/task_{gid:03d}.py",
                prefix=_prefix(gid, "ans"),
                ground_truth=f"sem_api_{i:02d}(conn{i}, table{i})",
                language="python",
            )
        )
        oracle[task_id] = {
            "marker": f"probe_{gid:03d}",
            "evidence": [_sem_evidence(i)],
            "truth": f"sem_api_{i:02d}(conn{i}, table{i})",
            "distractor": (
                f"stub{gid} = 0\n"
                f"def sem_api_{i:02d}(db{i}, tbl{i}):\n"
                f"    return None"
            ),
        }
        gid += 1

    tasks_path = root / "tasks.jsonl"
    taskset = TaskSet(repo_fingerprint="", tasks=tasks)
    save_taskset(taskset, tasks_path)

    oracle_path = root / "oracle.json"
    oracle_path.write_text(
        json.dumps({"tasks": oracle}, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    # Usage-target docstrings are scripted to opaque text so only the
    # usage path can surface those APIs; everything else summarizes
    # through the deterministic fallback.
    summaries = {
        _usage_api_body(i): f"opaque gadget routine {i:02d}" for i in range(N_USAGE)
    }
    summaries_path = root / "scripted_summaries.json"
    summaries_path.write_text(
        json.dumps(summaries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return SuitePaths(
        root=root,
        repo_dir=repo_dir,
        tasks_path=tasks_path,
        oracle_path=oracle_path,
        summaries_path=summaries_path,
    )
