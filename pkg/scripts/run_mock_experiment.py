#!/usr/bin/env python3
"""Directional experiment on the deterministic mock-oracle suite.

Builds the synthetic 40-task suite, runs every pipeline mode plus the
augment-over-infile bolt-on, and prints the mode comparison table. All
providers are offline and seeded, so the numbers are reproducible
bit-for-bit.

Usage:
    python scripts/run_mock_experiment.py [--workdir DIR]
"""

import argparse
import json
import sys
import tempfile
import time
from pathlib import Path

from apirag.bench import load_taskset
from apirag.config import RunConfig
from apirag.corpus import CorpusIndex, scan_repo
from apirag.kb import build_kb
from apirag.metrics import compare_runs, render_comparison, score_run
from apirag.mocksuite import build_suite
from apirag.pipeline import ProviderBundle, complete_task
from apirag.providers import HashEmbedder, MockCompletion, ScriptedSummarizer

MODES = ("infile", "draft_only", "base", "plus_usage", "plus_semantic", "full")


def run_mode(mode, taskset, kb, corpus_index, providers, cfg, external=None):
    predictions, raw = {}, {}
    for task in taskset.tasks:
        result = complete_task(
            task, mode, kb, corpus_index, providers, cfg,
            external_draft=(external or {}).get(task.task_id),
        )
        predictions[task.task_id] = result.prediction
        raw[task.task_id] = result.raw_output
    return score_run(predictions, taskset.tasks, mode=mode), raw


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", help="suite directory (default: a temp dir)")
    args = parser.parse_args(argv)

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="mocksuite-"))
    suite = build_suite(workdir)
    print(f"suite: {suite.root}")

    files = scan_repo(suite.repo_dir)
    embedder = HashEmbedder(256)
    summarizer = ScriptedSummarizer(
        json.loads(suite.summaries_path.read_text(encoding="utf-8"))
    )
    llm = MockCompletion(json.loads(suite.oracle_path.read_text(encoding="utf-8"))["tasks"])
    providers = ProviderBundle(embedder, summarizer, llm)

    started = time.monotonic()
    kb = build_kb(files, embedder, summarizer)
    print(f"knowledge base: {len(kb.entries)} entries in {time.monotonic() - started:.2f}s")

    taskset = load_taskset(suite.tasks_path)
    cfg = RunConfig(repo_root=str(suite.repo_dir))
    corpus_index = CorpusIndex.build(files, cfg.window_len, cfg.slide)

    reports = []
    infile_raw = None
    for mode in MODES:
        mode_started = time.monotonic()
        report, raw = run_mode(mode, taskset, kb, corpus_index, providers, cfg)
        reports.append(report)
        if mode == "infile":
            infile_raw = raw
        print(f"  {mode:15s} EM={report.aggregate['code_em']:6.2f}  "
              f"({time.monotonic() - mode_started:.2f}s)")

    augment_report, _ = run_mode(
        "augment_external_draft", taskset, kb, corpus_index, providers, cfg,
        external=infile_raw,
    )
    augment_report.mode = "infile+augment"
    reports.append(augment_report)

    print()
    print(render_comparison(compare_runs(reports)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
