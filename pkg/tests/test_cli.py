"""End-to-end command line behavior, driven in process via main(argv)."""

import hashlib
import json
import shutil
import subprocess
import sys

import pytest

from govshapes import corpus
from govshapes.cli import main
from govshapes.rdf import EX, SH, parse_turtle
from govshapes.shacl import load_shapes, read_report


def write_case(tmp_path, case_id, name=None):
    path = tmp_path / (name or f"case_{case_id}.ttl")
    path.write_text(corpus.case_source(case_id), "utf-8")
    return path


def write_block(tmp_path, name):
    path = tmp_path / f"{name}.ir.yaml"
    path.write_text(corpus.block_source(name), "utf-8")
    return path


# ---------------------------------------------------------------------------
# compile
# ---------------------------------------------------------------------------

def test_compile_writes_canonical_block(tmp_path, capsys):
    src = write_block(tmp_path, "fairness")
    out = tmp_path / "fairness.ttl"
    assert main(["compile", str(src), "-o", str(out)]) == 0
    assert capsys.readouterr().out == f"4 shapes -> {out}\n"
    shapes = load_shapes(parse_turtle(out.read_text("utf-8")))
    assert [s.iri for s in shapes] == [EX.B2Shape, EX.B3Shape,
                                       EX.B4Shape, EX.B5Shape]


def test_compile_of_empty_source(tmp_path, capsys):
    src = write_block(tmp_path, "empty")
    out = tmp_path / "empty.ttl"
    assert main(["compile", str(src), "-o", str(out)]) == 0
    assert capsys.readouterr().out == f"0 shapes -> {out}\n"
    assert out.read_text("utf-8") == ""


def test_compile_rejects_duplicate_ids(tmp_path, capsys):
    src = tmp_path / "dup.ir.yaml"
    src.write_text(corpus.block_source("logging")
                   + corpus.block_source("logging"), "utf-8")
    out = tmp_path / "dup.ttl"
    assert main(["compile", str(src), "-o", str(out)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("error: duplicate obligation_id 'A1'")
    assert not out.exists()


def test_compile_missing_input_file(tmp_path, capsys):
    assert main(["compile", str(tmp_path / "nope.ir.yaml"),
                 "-o", str(tmp_path / "out.ttl")]) == 2
    assert capsys.readouterr().err.startswith("error: ")


def test_compile_appends_run_record(tmp_path, capsys):
    src = write_block(tmp_path, "accountability")
    out = tmp_path / "acct.ttl"
    log = tmp_path / "runs.jsonl"
    argv = ["compile", str(src), "-o", str(out), "--run-log", str(log)]
    assert main(argv) == 0
    assert main(argv) == 0  # appends, never truncates
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert len(records) == 2
    record = records[0]
    assert sorted(record) == ["command", "inputs", "report_hash", "timestamp"]
    assert record["command"] == " ".join(argv)
    assert record["inputs"] == {
        str(src): hashlib.sha256(src.read_bytes()).hexdigest()}
    assert record["report_hash"] == \
        hashlib.sha256(out.read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# compose
# ---------------------------------------------------------------------------

def test_compose_to_stdout_is_parseable_turtle(capsys):
    assert main(["compose", "logging", "provenance"]) == 0
    out = capsys.readouterr().out
    shapes = load_shapes(parse_turtle(out))
    assert [s.iri for s in shapes] == [EX.A1Shape, EX.A2Shape, EX.A3Shape,
                                       EX.A4Shape, EX.A5Shape]


def test_compose_to_file_reports_shape_count(tmp_path, capsys):
    out = tmp_path / "combined.ttl"
    assert main(["compose", "accountability", "fairness_transparency",
                 "-o", str(out)]) == 0
    assert capsys.readouterr().out == \
        f"10 shapes (accountability+fairness_transparency) -> {out}\n"
    assert len(load_shapes(parse_turtle(out.read_text("utf-8")))) == 10


def test_compose_unknown_block(capsys):
    assert main(["compose", "nope"]) == 2
    assert "error: unknown block 'nope'" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def test_validate_conforming_case_exits_zero(tmp_path, capsys):
    case = write_case(tmp_path, "conform")
    assert main(["validate", str(case), "--profile", "Combined"]) == 0
    assert capsys.readouterr().out == ""


def test_validate_text_lines_name_shape_focus_message(tmp_path, capsys):
    case = write_case(tmp_path, "exp1_violate")
    assert main(["validate", str(case), "--profile", "US"]) == 1
    assert capsys.readouterr().out == \
        "ex:A2Shape\tex:log001\tUsage log must carry a dateTime timestamp.\n"


def test_validate_turtle_format_round_trips(tmp_path, capsys):
    case = write_case(tmp_path, "disparity_exceeds")
    assert main(["validate", str(case), "--profile", "Fairness",
                 "--format", "turtle"]) == 1
    report = read_report(parse_turtle(capsys.readouterr().out))
    assert not report.conforms
    (violation,) = report.violations
    assert violation.source_shape == EX.B5Shape
    assert violation.focus_node == EX.decision001


def test_validate_run_log_hashes_the_report_graph(tmp_path, capsys):
    case = write_case(tmp_path, "conform")
    log = tmp_path / "runs.jsonl"
    assert main(["validate", str(case), "--profile", "Fairness",
                 "--format", "turtle", "--run-log", str(log)]) == 0
    report_text = capsys.readouterr().out
    (record,) = [json.loads(line) for line in log.read_text().splitlines()]
    assert record["report_hash"] == \
        hashlib.sha256(report_text.encode("utf-8")).hexdigest()
    assert record["inputs"] == {
        str(case): hashlib.sha256(case.read_bytes()).hexdigest()}
    assert record["command"].startswith("validate ")


def test_validate_unknown_profile(tmp_path, capsys):
    case = write_case(tmp_path, "conform")
    assert main(["validate", str(case), "--profile", "Nope"]) == 2
    assert "error: unknown profile 'Nope'" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# refine
# ---------------------------------------------------------------------------

def test_refine_default_matrix_output(capsys):
    assert main(["refine"]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "Accountability refines Fairness: does not hold "
        "(2 counterexample(s), e.g. case missing_explanation: ex:B1Shape)",
        "Accountability refines Combined: does not hold "
        "(2 counterexample(s), e.g. case missing_explanation: ex:B1Shape)",
        "Fairness refines Accountability: does not hold "
        "(1 counterexample(s), e.g. case missing_model_artifact: ex:A5Shape)",
        "Fairness refines Combined: does not hold "
        "(1 counterexample(s), e.g. case missing_model_artifact: ex:A5Shape)",
        "Combined refines Accountability: holds",
        "Combined refines Fairness: holds",
        "2 hold, 4 do not hold",
        "no equivalent pairs",
    ]


def test_refine_reports_equivalent_profiles(capsys):
    assert main(["refine", "US", "China"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "US refines China: holds",
        "China refines US: holds",
        "2 hold, 0 do not hold",
        "equivalent: US == China",
    ]


def test_refine_with_external_corpus_directory(tmp_path, capsys):
    # case ids come from the file names, with any case_ prefix stripped
    write_case(tmp_path, "conform")
    write_case(tmp_path, "missing_explanation")
    assert main(["refine", "Combined", "Accountability",
                 "--corpus", str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "Combined refines Accountability: holds",
        "Accountability refines Combined: does not hold "
        "(1 counterexample(s), e.g. case missing_explanation: ex:B1Shape)",
        "1 hold, 1 do not hold",
        "no equivalent pairs",
    ]


def test_refine_equivalence_is_corpus_relative(tmp_path, capsys):
    # on evidence where only the shared A5 obligation can fire, the two
    # profiles become indistinguishable
    write_case(tmp_path, "missing_model_artifact")
    assert main(["refine", "Combined", "Accountability",
                 "--corpus", str(tmp_path)]) == 0
    assert capsys.readouterr().out.splitlines() == [
        "Combined refines Accountability: holds",
        "Accountability refines Combined: holds",
        "2 hold, 0 do not hold",
        "equivalent: Combined == Accountability",
    ]


def test_refine_empty_corpus_directory(tmp_path, capsys):
    assert main(["refine", "--corpus", str(tmp_path)]) == 2
    assert "no .ttl case files under" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def test_bench_rows_and_header(capsys):
    assert main(["bench", "--profiles", "Fairness", "--cases", "conform",
                 "--samples", "30"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ("# 30 warm samples per pair; graphs parsed and "
                        "profiles composed before timing (validation only)")
    assert lines[1].split() == ["profile", "case", "samples",
                                "min_ms", "median_ms", "max_ms"]
    (row,) = lines[2:]
    fields = row.split()
    assert fields[:3] == ["Fairness", "conform", "30"]
    low, mid, high = (float(x) for x in fields[3:])
    assert 0.0 <= low <= mid <= high


def test_bench_rejects_too_few_samples(capsys):
    assert main(["bench", "--samples", "29"]) == 2
    assert "at least 30 samples" in capsys.readouterr().err


def test_bench_rejects_unknown_case(capsys):
    assert main(["bench", "--cases", "nope", "--samples", "30"]) == 2
    assert "cases not in corpus: nope" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# hash-manifest
# ---------------------------------------------------------------------------

def test_hash_manifest_is_sorted_and_content_addressed(tmp_path, capsys):
    a = tmp_path / "a.ttl"
    b = tmp_path / "b.ttl"
    a.write_text("x", "utf-8")
    b.write_text("y", "utf-8")
    assert main(["hash-manifest", str(b), str(a)]) == 0
    first = capsys.readouterr().out
    lines = first.splitlines()
    assert lines == sorted(lines, key=lambda ln: ln.split("  ", 1)[1])
    assert lines[0] == f"{hashlib.sha256(b'x').hexdigest()}  {a}"

    a.write_text("x2", "utf-8")
    assert main(["hash-manifest", str(b), str(a)]) == 0
    assert capsys.readouterr().out != first


def test_hash_manifest_to_file_and_directory_error(tmp_path, capsys):
    a = tmp_path / "a.ttl"
    a.write_text("x", "utf-8")
    out = tmp_path / "manifest.txt"
    assert main(["hash-manifest", str(a), "-o", str(out)]) == 0
    assert out.read_text("utf-8").endswith(f"  {a}\n")
    assert main(["hash-manifest", str(tmp_path)]) == 2
    assert "not a file" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def setup_external_artifacts(tmp_path):
    blocks = tmp_path / "blocks"
    profiles = tmp_path / "profiles"
    blocks.mkdir()
    profiles.mkdir()
    for name in ("logging", "provenance"):
        (blocks / f"{name}.ir.yaml").write_text(corpus.block_source(name), "utf-8")
    (profiles / "Mini.profile").write_text(
        "profile: Mini\nlogging\nprovenance\n", "utf-8")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"blocks_dir": str(blocks),
                                  "profiles_dir": str(profiles)}), "utf-8")
    return config


def test_config_switches_to_external_directories(tmp_path, capsys):
    config = setup_external_artifacts(tmp_path)
    case = write_case(tmp_path, "exp1_violate")
    assert main(["validate", str(case), "--profile", "Mini",
                 "--config", str(config)]) == 1
    assert capsys.readouterr().out.startswith("ex:A2Shape\t")
    # the bundled profiles are gone once a config takes over
    assert main(["validate", str(case), "--profile", "Combined",
                 "--config", str(config)]) == 2


def test_config_rejects_unknown_keys(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"blocks_dir": ".", "extra": 1}), "utf-8")
    assert main(["compose", "logging", "--config", str(config)]) == 2
    assert "unknown config keys: extra" in capsys.readouterr().err


def test_config_rejects_bad_json(tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text("{not json", "utf-8")
    assert main(["compose", "logging", "--config", str(config)]) == 2
    assert "bad JSON config" in capsys.readouterr().err


def test_config_cases_dir_feeds_refine(tmp_path, capsys):
    write_case(tmp_path, "missing_model_artifact")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"cases_dir": str(tmp_path)}), "utf-8")
    assert main(["refine", "Combined", "Fairness", "--config", str(config)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "Combined refines Fairness: holds"
    assert lines[1] == ("Fairness refines Combined: does not hold "
                        "(1 counterexample(s), e.g. case "
                        "missing_model_artifact: ex:A5Shape)")


# ---------------------------------------------------------------------------
# argparse surface and the installed script
# ---------------------------------------------------------------------------

def test_missing_subcommand_and_missing_output_flag(capsys):
    with pytest.raises(SystemExit):
        main([])
    with pytest.raises(SystemExit):
        main(["compile", "x.ir.yaml"])  # -o is required


def test_installed_script_smoke(tmp_path):
    src = write_block(tmp_path, "fairness")
    out = tmp_path / "fairness.ttl"
    script = shutil.which("govshapes")
    cmd = ([script] if script else [sys.executable, "-m", "govshapes.cli"])
    result = subprocess.run([*cmd, "compile", str(src), "-o", str(out)],
                            capture_output=True, text=True, timeout=120)
    assert result.returncode == 0
    assert result.stdout == f"4 shapes -> {out}\n"
    assert out.exists()
