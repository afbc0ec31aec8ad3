"""Command-line entry points: build-kb, mine-tasks, run, score, compare."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bench import load_taskset, mine_tasks, save_taskset
from .config import RunConfig
from .corpus import CorpusIndex, scan_repo
from .kb import build_kb, load_kb, repo_fingerprint, save_kb
from .metrics import (
    MetricsReport,
    compare_runs,
    load_report,
    render_comparison,
    save_report,
    score_run,
)
from .pipeline import MODES, ProviderBundle, complete_task
from .providers import (
    HashEmbedder,
    HttpCompletion,
    HttpEmbedder,
    HttpProviderClient,
    HttpSummarizer,
    MockCompletion,
    ScriptedSummarizer,
    TemplateSummarizer,
)

log = logging.getLogger(__name__)


def build_providers(cfg: RunConfig) -> ProviderBundle:
    if cfg.embedder == "hash":
        embedder = HashEmbedder(cfg.embed_dim)
    elif cfg.embedder == "http":
        embedder = HttpEmbedder(_client(cfg.embed_url, cfg))
    else:
        raise ValueError(f"unknown embedder {cfg.embedder!r} (expected hash|http)")

    if cfg.summarizer == "template":
        summarizer = TemplateSummarizer(None, char_budget=cfg.summarize_char_budget)
    elif cfg.summarizer.startswith("scripted:"):
        path = cfg.summarizer.split(":", 1)[1]
        with open(path, encoding="utf-8") as fh:
            summarizer = ScriptedSummarizer(json.load(fh), provider_id=f"scripted:{Path(path).name}")
    elif cfg.summarizer == "http":
        summarizer = HttpSummarizer(_client(cfg.summarize_url, cfg))
    else:
        raise ValueError(
            f"unknown summarizer {cfg.summarizer!r} (expected template|scripted:<path>|http)"
        )

    if cfg.llm.startswith("mock:"):
        path = cfg.llm.split(":", 1)[1]
        if not path:
            llm = MockCompletion({})
        else:
            llm = MockCompletion.from_file(path)
    elif cfg.llm == "http":
        llm = HttpCompletion(_client(cfg.complete_url, cfg))
    else:
        raise ValueError(f"unknown llm {cfg.llm!r} (expected mock:<oracle.json>|http)")
    return ProviderBundle(embedder=embedder, summarizer=summarizer, llm=llm)


def _client(url: str, cfg: RunConfig) -> HttpProviderClient:
    if not url:
        raise ValueError("http provider selected but no endpoint URL configured")
    return HttpProviderClient(url, timeout=cfg.http_timeout, retries=cfg.http_retries)


ENDPOINT_ENV_VARS = {
    "embed_url": "APIRAG_EMBED_URL",
    "summarize_url": "APIRAG_SUMMARIZE_URL",
    "complete_url": "APIRAG_COMPLETE_URL",
}


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    """Precedence: flags > environment (endpoints only) > config file > defaults."""
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    for field_name, env_var in ENDPOINT_ENV_VARS.items():
        if os.environ.get(env_var):
            setattr(cfg, field_name, os.environ[env_var])
    for field in dataclasses.fields(RunConfig):
        value = getattr(args, field.name, None)
        if value is not None:
            setattr(cfg, field.name, value)
    return cfg


def _effective_excludes(cfg: RunConfig, args: argparse.Namespace) -> tuple[str, ...]:
    excludes = list(cfg.excludes) + list(getattr(args, "exclude", None) or ())
    if cfg.language == "python":
        excludes.append("*.java")
    elif cfg.language == "java":
        excludes.append("*.py")
    return tuple(excludes)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its fields")
    parser.add_argument("--language", choices=["python", "java", "auto"])
    parser.add_argument("--window-len", dest="window_len", type=int)
    parser.add_argument("--slide", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--total-budget", dest="total_budget", type=int)
    parser.add_argument("--max-new-tokens", dest="max_new_tokens", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--embedder", help="hash | http")
    parser.add_argument("--embed-dim", dest="embed_dim", type=int)
    parser.add_argument("--summarizer", help="template | scripted:<path> | http")
    parser.add_argument("--llm", help="mock:<oracle.json> | http")
    parser.add_argument("--embed-url", dest="embed_url")
    parser.add_argument("--summarize-url", dest="summarize_url")
    parser.add_argument("--complete-url", dest="complete_url")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def cmd_build_kb(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    cfg.repo_root = args.repo
    providers = build_providers(cfg)
    started = time.monotonic()
    files = scan_repo(args.repo, _effective_excludes(cfg, args))
    kb = build_kb(files, providers.embedder, providers.summarizer)
    elapsed = time.monotonic() - started
    save_kb(kb, args.out)
    _atomic_write(
        Path(f"{args.out}.meta.json"),
        json.dumps({"kb_build_s": elapsed, "entries": len(kb.entries)}, indent=2) + "\n",
    )
    log.info("built knowledge base: %d entries in %.2fs -> %s", len(kb.entries), elapsed, args.out)
    return 0


def cmd_mine_tasks(args: argparse.Namespace) -> int:
    taskset = mine_tasks(args.repo, args.n, args.seed, tuple(args.exclude or ()))
    save_taskset(taskset, args.out)
    log.info("mined %d tasks -> %s", len(taskset.tasks), args.out)
    if not taskset.tasks:
        log.warning("task set is empty; repository has no usable cross-file usages")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    cfg.repo_root = args.repo
    cfg.mode = args.mode
    kb = None
    if args.kb:
        if not Path(args.kb).exists():
            print(
                f"error: knowledge base not found at {args.kb}; "
                f"build it first with: apirag build-kb --repo {args.repo} --out {args.kb}",
                file=sys.stderr,
            )
            return 1
        kb = load_kb(args.kb)
    elif cfg.mode not in ("infile", "draft_only", "base"):
        print(
            f"error: mode {cfg.mode!r} needs --kb; "
            f"build one with: apirag build-kb --repo {args.repo} --out kb.jsonl",
            file=sys.stderr,
        )
        return 1

    taskset = load_taskset(args.tasks)
    files = scan_repo(args.repo, _effective_excludes(cfg, args))
    if kb is not None:
        current = repo_fingerprint(files)
        if kb.repo_fingerprint != current:
            log.warning(
                "knowledge base fingerprint %s does not match the repository (%s); "
                "results may be stale, consider rebuilding with build-kb",
                kb.repo_fingerprint[:12], current[:12],
            )
    corpus_index = CorpusIndex.build(files, cfg.window_len, cfg.slide)
    providers = build_providers(cfg)

    external_drafts: dict[str, str] = {}
    if args.external_drafts:
        with open(args.external_drafts, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    external_drafts[row["task_id"]] = row.get(
                        "raw_output", row.get("prediction", "")
                    )

    out_dir = Path(args.out)
    traces_dir = out_dir / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    def run_one(task):
        return complete_task(
            task,
            cfg.mode,
            kb,
            corpus_index,
            providers,
            cfg,
            external_draft=external_drafts.get(task.task_id),
        )

    started = time.monotonic()
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_one, taskset.tasks))
    else:
        results = [run_one(task) for task in taskset.tasks]
    elapsed = time.monotonic() - started

    lines = [
        json.dumps(
            {"task_id": r.task_id, "prediction": r.prediction, "raw_output": r.raw_output},
            ensure_ascii=False,
        )
        for r in results
    ]
    _atomic_write(out_dir / "predictions.jsonl", "\n".join(lines) + ("\n" if lines else ""))
    for result in results:
        _atomic_write(
            traces_dir / f"{result.task_id}.json",
            json.dumps(result.trace, ensure_ascii=False, indent=2) + "\n",
        )
    cfg.save(out_dir / "config.json")
    mean_inference = elapsed / len(results) if results else 0.0
    _atomic_write(
        out_dir / "run_meta.json",
        json.dumps(
            {"mean_inference_s": mean_inference, "total_s": elapsed, "n_tasks": len(results)},
            indent=2,
        )
        + "\n",
    )
    log.info("ran %d tasks in mode %s -> %s", len(results), cfg.mode, out_dir)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    taskset = load_taskset(args.tasks)
    predictions: dict[str, str] = {}
    with open(args.predictions, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                row = json.loads(line)
                predictions[row["task_id"]] = row["prediction"]
    timing = None
    if args.run_meta:
        with open(args.run_meta, encoding="utf-8") as fh:
            meta = json.load(fh)
        timing = {
            "kb_build_s": meta.get("kb_build_s", 0.0),
            "mean_inference_s": meta.get("mean_inference_s", 0.0),
        }
    report = score_run(
        predictions,
        taskset.tasks,
        mode=args.mode or "",
        timing=timing,
        multiset=args.id_match != "sequence",
    )
    save_report(report, args.out)
    aggregate = report.aggregate
    line = (
        f"mode={report.mode or '-'} code_em={aggregate['code_em']:.2f} "
        f"code_es={aggregate['code_es']:.2f} id_em={aggregate['id_em']:.2f} "
        f"id_f1={aggregate['id_f1']:.2f}"
    )
    print(line)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    reports = [load_report(path) for path in args.reports]
    comparison = compare_runs(reports)
    table = render_comparison(comparison)
    print(table)
    if args.out:
        _atomic_write(
            Path(args.out),
            json.dumps(comparison, indent=2, sort_keys=True) + "\n" + table + "\n",
        )
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="apirag",
        description="Repository-level code completion with an internal-API knowledge base",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kb", help="extract, summarize, and embed a repo's APIs")
    p.add_argument("--repo", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--exclude", action="append", help="glob of paths to skip (repeatable)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_build_kb)

    p = sub.add_parser("mine-tasks", help="mine import-masked completion tasks from a repo")
    p.add_argument("--repo", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exclude", action="append")
    p.set_defaults(func=cmd_mine_tasks)

    p = sub.add_parser("run", help="run completion over a task set in one mode")
    p.add_argument("--repo", required=True)
    p.add_argument("--tasks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kb")
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--external-drafts", dest="external_drafts",
                   help="predictions.jsonl whose raw outputs seed retrieval (augment mode)")
    p.add_argument("--exclude", action="append")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("score", help="score a predictions file against its task set")
    p.add_argument("--tasks", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", help="label recorded in the report")
    p.add_argument("--run-meta", dest="run_meta",
                   help="optional run_meta.json whose timing lands in the report")
    p.add_argument("--id-match", dest="id_match", choices=["multiset", "sequence"],
                   default="multiset", help="identifier EM comparison form")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("compare", help="compare score reports across modes")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
