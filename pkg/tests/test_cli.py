import json

import pytest

from apirag.cli import main
from apirag.metrics import load_report


@pytest.fixture
def suite_args(mock_suite):
    return [
        "--embedder", "hash",
        "--summarizer", f"scripted:{mock_suite.paths.summaries_path}",
        "--llm", f"mock:{mock_suite.paths.oracle_path}",
    ]


def run_mode(mock_suite, suite_args, out_dir, kb_path, mode):
    run_dir = out_dir / mode
    assert main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", mode, "--out", str(run_dir), *suite_args,
    ]) == 0
    report_path = run_dir / "report.json"
    assert main([
        "score", "--tasks", str(mock_suite.paths.tasks_path),
        "--predictions", str(run_dir / "predictions.jsonl"),
        "--out", str(report_path), "--mode", mode,
    ]) == 0
    return load_report(report_path)


def test_cli_flow_end_to_end(mock_suite, suite_args, tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    assert main([
        "build-kb", "--repo", str(mock_suite.paths.repo_dir),
        "--out", str(kb_path), *suite_args,
    ]) == 0
    assert kb_path.exists()

    full = run_mode(mock_suite, suite_args, tmp_path, kb_path, "full")
    infile = run_mode(mock_suite, suite_args, tmp_path, kb_path, "infile")
    assert full.aggregate["code_em"] == 100.0
    assert infile.aggregate["code_em"] == 0.0

    assert main([
        "compare",
        "--reports", str(tmp_path / "infile" / "report.json"),
        str(tmp_path / "full" / "report.json"),
        "--out", str(tmp_path / "table.txt"),
    ]) == 0
    assert (tmp_path / "table.txt").exists()


def test_missing_kb_error_names_build_command(mock_suite, suite_args, tmp_path, capsys):
    rc = main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(tmp_path / "absent.jsonl"), "--mode", "full",
        "--out", str(tmp_path / "out"), *suite_args,
    ])
    assert rc == 1
    assert "build-kb" in capsys.readouterr().err


def test_run_without_kb_flag_in_api_mode(mock_suite, suite_args, tmp_path, capsys):
    rc = main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--mode", "full", "--out", str(tmp_path / "out"), *suite_args,
    ])
    assert rc == 1
    assert "build-kb" in capsys.readouterr().err


def test_config_file_and_flag_override(mock_suite, tmp_path):
    config_path = tmp_path / "cfg.json"
    config_path.write_text(json.dumps({"window_len": 8, "k": 2}), encoding="utf-8")
    kb_path = tmp_path / "kb.jsonl"
    assert main([
        "build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path),
        "--config", str(config_path),
        "--summarizer", f"scripted:{mock_suite.paths.summaries_path}",
        "--llm", f"mock:{mock_suite.paths.oracle_path}",
    ]) == 0
    run_dir = tmp_path / "run"
    assert main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", "infile", "--out", str(run_dir),
        "--config", str(config_path), "--k", "3",
        "--summarizer", f"scripted:{mock_suite.paths.summaries_path}",
        "--llm", f"mock:{mock_suite.paths.oracle_path}",
    ]) == 0
    resolved = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    assert resolved["window_len"] == 8  # from file
    assert resolved["k"] == 3  # flag wins


def test_mine_tasks_cli(py_repo, tmp_path):
    out = tmp_path / "mined.jsonl"
    assert main(["mine-tasks", "--repo", str(py_repo), "--out", str(out),
                 "--n", "5", "--seed", "1"]) == 0
    lines = [l for l in out.read_text(encoding="utf-8").splitlines() if l.strip()]
    assert 1 <= len(lines) <= 5
    assert (tmp_path / "mined.jsonl.meta.json").exists()


def test_run_meta_timing_lands_in_report(mock_suite, suite_args, tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    main(["build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path), *suite_args])
    run_dir = tmp_path / "timed"
    main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", "infile", "--out", str(run_dir), *suite_args,
    ])
    report_path = tmp_path / "timed.json"
    main([
        "score", "--tasks", str(mock_suite.paths.tasks_path),
        "--predictions", str(run_dir / "predictions.jsonl"),
        "--out", str(report_path), "--mode", "infile",
        "--run-meta", str(run_dir / "run_meta.json"),
    ])
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["timing"]["mean_inference_s"] > 0.0


def test_invalid_provider_errors_cleanly(mock_suite, tmp_path, capsys):
    rc = main([
        "build-kb", "--repo", str(mock_suite.paths.repo_dir),
        "--out", str(tmp_path / "kb.jsonl"), "--embedder", "quantum",
    ])
    assert rc == 1
    assert "embedder" in capsys.readouterr().err


def test_stale_kb_fingerprint_warns(mock_suite, suite_args, tmp_path, caplog):
    kb_path = tmp_path / "kb.jsonl"
    main(["build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path), *suite_args])
    extra = mock_suite.paths.repo_dir / "late_addition.py"
    extra.write_text("def late(x):\n    return x\n", encoding="utf-8")
    try:
        import logging

        with caplog.at_level(logging.WARNING):
            main([
                "run", "--repo", str(mock_suite.paths.repo_dir),
                "--tasks", str(mock_suite.paths.tasks_path),
                "--kb", str(kb_path), "--mode", "infile",
                "--out", str(tmp_path / "stale"), *suite_args,
            ])
        assert "stale" in caplog.text
    finally:
        extra.unlink()


def test_endpoint_env_var_override(monkeypatch, tmp_path, mock_suite, suite_args):
    monkeypatch.setenv("APIRAG_EMBED_URL", "http://from-env:1234")
    kb_path = tmp_path / "kb.jsonl"
    run_dir = tmp_path / "envrun"
    main(["build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path), *suite_args])
    main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", "infile", "--out", str(run_dir), *suite_args,
    ])
    resolved = json.loads((run_dir / "config.json").read_text(encoding="utf-8"))
    assert resolved["embed_url"] == "http://from-env:1234"


def test_workers_do_not_change_outputs(mock_suite, suite_args, tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    main(["build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path), *suite_args])
    outputs = {}
    for label, workers in (("serial", "1"), ("parallel", "3")):
        run_dir = tmp_path / label
        assert main([
            "run", "--repo", str(mock_suite.paths.repo_dir),
            "--tasks", str(mock_suite.paths.tasks_path),
            "--kb", str(kb_path), "--mode", "full", "--out", str(run_dir),
            "--workers", workers, *suite_args,
        ]) == 0
        outputs[label] = (run_dir / "predictions.jsonl").read_text(encoding="utf-8")
    # worker count must not leak into predictions (config.json legitimately differs)
    assert outputs["serial"] == outputs["parallel"]


def test_augment_mode_via_cli(mock_suite, suite_args, tmp_path):
    kb_path = tmp_path / "kb.jsonl"
    main(["build-kb", "--repo", str(mock_suite.paths.repo_dir), "--out", str(kb_path), *suite_args])
    infile_dir = tmp_path / "infile"
    main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", "infile", "--out", str(infile_dir), *suite_args,
    ])
    augment_dir = tmp_path / "augment"
    assert main([
        "run", "--repo", str(mock_suite.paths.repo_dir),
        "--tasks", str(mock_suite.paths.tasks_path),
        "--kb", str(kb_path), "--mode", "augment_external_draft",
        "--external-drafts", str(infile_dir / "predictions.jsonl"),
        "--out", str(augment_dir), *suite_args,
    ]) == 0
    for mode_dir, label in ((infile_dir, "infile"), (augment_dir, "augment")):
        main([
            "score", "--tasks", str(mock_suite.paths.tasks_path),
            "--predictions", str(mode_dir / "predictions.jsonl"),
            "--out", str(tmp_path / f"{label}.json"), "--mode", label,
        ])
    infile_report = load_report(tmp_path / "infile.json")
    augment_report = load_report(tmp_path / "augment.json")
    assert augment_report.aggregate["code_em"] > infile_report.aggregate["code_em"]


def test_score_sequence_id_match_flag(mock_suite, tmp_path):
    predictions = tmp_path / "p.jsonl"
    rows = []
    for task in mock_suite.taskset.tasks:
        rows.append(json.dumps({"task_id": task.task_id, "prediction": task.ground_truth}))
    predictions.write_text("\n".join(rows) + "\n", encoding="utf-8")
    out = tmp_path / "seq.json"
    assert main([
        "score", "--tasks", str(mock_suite.paths.tasks_path),
        "--predictions", str(predictions), "--out", str(out),
        "--id-match", "sequence",
    ]) == 0
    assert load_report(out).aggregate["id_em"] == 100.0


def test_language_filter_excludes_other_extension(tmp_path):
    (tmp_path / "a.py").write_text("def f():\n    return 1\n", encoding="utf-8")
    (tmp_path / "B.java").write_text("class B { int g() { return 1; } }\n", encoding="utf-8")
    kb_path = tmp_path / "kb.jsonl"
    assert main(["build-kb", "--repo", str(tmp_path), "--out", str(kb_path),
                 "--language", "python"]) == 0
    from apirag.kb import load_kb

    kb = load_kb(kb_path)
    assert [e.api.file for e in kb.entries] == ["a.py"]
