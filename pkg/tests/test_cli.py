from __future__ import annotations

import json

import pytest

from chunkforge.cli import build_parser, main
from chunkforge.fileio import read_jsonl

from conftest import write_keyed_jsonl


def run_cli(capsys, *argv: str) -> tuple[int, dict]:
    code = main(list(argv))
    captured = capsys.readouterr()
    lines = [line for line in captured.out.splitlines() if line]
    assert len(lines) == 1, f"stdout must carry exactly one JSON document: {lines!r}"
    return code, json.loads(lines[0])


class TestParser:
    def test_stages_parsing(self):
        args = build_parser().parse_args([
            "build-dataset", "--root", "r", "--out", "o", "--stages", "30,15,1",
        ])
        assert args.stages == [30, 15, 1]

    def test_stages_reject_garbage(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([
                "build-dataset", "--root", "r", "--out", "o",
                "--stages", "30,fifteen",
            ])

    def test_strip_separator_negation(self):
        args = build_parser().parse_args([
            "evaluate", "--ref", "r", "--hyp", "h", "--out", "o",
            "--no-strip-separator",
        ])
        assert args.strip_separator is False

    def test_command_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestBuildCommand:
    def test_full_build(self, capsys, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(out), "--seed", "42",
        )
        assert code == 0
        assert doc["pages"] == 3
        assert doc["global_seed"] == 42
        assert [s["L"] for s in doc["stages"]] == [30, 15, 7, 4, 2, 1]
        assert [s["records"] for s in doc["stages"]] == [60, 60, 60, 60, 60, 3]
        for stage in doc["stages"]:
            assert (out / stage["shard_path"]).exists()

    def test_single_stage_flag(self, capsys, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(out),
            "--stages", "15", "--samples-per-image", "4",
        )
        assert code == 0
        assert [s["records"] for s in doc["stages"]] == [12]

    def test_rerun_byte_identical(self, capsys, fixture_dataset, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            code, _ = run_cli(
                capsys, "build-dataset",
                "--root", str(fixture_dataset), "--out", str(out),
                "--seed", "7", "--stages", "8,2",
            )
            assert code == 0
            outs.append(out)
        a, b = outs
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()
        for shard in sorted((a / "shards").iterdir()):
            assert shard.read_bytes() == (b / "shards" / shard.name).read_bytes()

    def test_seed_env_fallback(self, capsys, fixture_dataset, tmp_path, monkeypatch):
        monkeypatch.setenv("CHUNKFORGE_SEED", "1234")
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(tmp_path / "out"),
            "--stages", "2",
        )
        assert code == 0
        assert doc["global_seed"] == 1234
        manifest = json.loads(
            (tmp_path / "out" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["global_seed"] == 1234

    def test_seed_flag_beats_env(self, capsys, fixture_dataset, tmp_path, monkeypatch):
        monkeypatch.setenv("CHUNKFORGE_SEED", "1234")
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(tmp_path / "out"),
            "--stages", "2", "--seed", "9",
        )
        assert code == 0
        assert doc["global_seed"] == 9

    def test_bad_stages_exit_2(self, capsys, fixture_dataset, tmp_path):
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(tmp_path / "out"),
            "--stages", "15,30",
        )
        assert code == 2
        assert doc["error"]["type"] == "InvalidStageSpec"

    def test_missing_root_exit_2(self, capsys, tmp_path):
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(tmp_path / "nowhere"), "--out", str(tmp_path / "out"),
        )
        assert code == 2
        assert doc["error"]["exit_code"] == 2

    def test_tiled_mode(self, capsys, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        code, doc = run_cli(
            capsys, "build-dataset",
            "--root", str(fixture_dataset), "--out", str(out),
            "--mode", "tiled", "--stages", "4,2",
        )
        assert code == 0
        # tiling yields L records per page
        assert [s["records"] for s in doc["stages"]] == [12, 6]


class TestAnalyzeCommand:
    def test_median_and_artifacts(self, capsys, fixture_dataset, tmp_path):
        out = tmp_path / "report"
        code, doc = run_cli(
            capsys, "analyze",
            "--root", str(fixture_dataset), "--out", str(out), "--svg",
        )
        assert code == 0
        assert doc["median"] == 3
        assert doc["histogram"] == {"2": 1, "3": 1, "4": 1}
        assert (out / "line_histogram.csv").exists()
        assert (out / "line_histogram.svg").exists()


class TestEvaluateCommand:
    def test_perfect_match(self, capsys, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"k": "AæB"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"k": "AæB"})
        out = tmp_path / "report.json"
        code, doc = run_cli(
            capsys, "evaluate",
            "--ref", str(ref), "--hyp", str(hyp), "--out", str(out),
        )
        assert code == 0
        assert doc["corpus"]["cer"] == 0.0
        assert doc["corpus"]["f1"] == 1.0
        assert out.exists()

    def test_separator_mode_changes_cer(self, capsys, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"k": "AæB"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"k": "A B"})
        _, stripped = run_cli(
            capsys, "evaluate", "--ref", str(ref), "--hyp", str(hyp),
            "--out", str(tmp_path / "a.json"),
        )
        _, raw = run_cli(
            capsys, "evaluate", "--ref", str(ref), "--hyp", str(hyp),
            "--out", str(tmp_path / "b.json"), "--no-strip-separator",
        )
        assert stripped["corpus"]["cer"] == 0.0
        assert raw["corpus"]["cer"] == pytest.approx(1 / 3)

    def test_key_mismatch_exit_1(self, capsys, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "x", "b": "y"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"a": "x"})
        code, doc = run_cli(
            capsys, "evaluate",
            "--ref", str(ref), "--hyp", str(hyp),
            "--out", str(tmp_path / "r.json"),
        )
        assert code == 1
        assert doc["error"]["type"] == "KeyMismatch"
        assert doc["error"]["details"]["missing_in_hyp"] == ["b"]

    def test_unreadable_input_exit_2(self, capsys, tmp_path):
        bad = tmp_path / "hyp.jsonl"
        bad.write_text("{not json}\n", encoding="utf-8")
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "x"})
        code, doc = run_cli(
            capsys, "evaluate",
            "--ref", str(ref), "--hyp", str(bad),
            "--out", str(tmp_path / "r.json"),
        )
        assert code == 2
        assert doc["error"]["type"] == "IoError"

    def test_macro_flag(self, capsys, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "aaaa", "b": "ab"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"a": "aaaa", "b": "xy"})
        code, doc = run_cli(
            capsys, "evaluate",
            "--ref", str(ref), "--hyp", str(hyp),
            "--out", str(tmp_path / "r.json"), "--average", "macro",
        )
        assert code == 0
        assert doc["corpus"]["cer"] == pytest.approx(0.5)


class TestPostprocessCommand:
    def test_round_trip(self, capsys, tmp_path):
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"a": "XæYæ Z"})
        out = tmp_path / "lines.jsonl"
        code, doc = run_cli(
            capsys, "postprocess", "--hyp", str(hyp), "--out", str(out),
        )
        assert code == 0
        assert doc["records"] == 1
        assert read_jsonl(out) == [{"key": "a", "lines": ["X", "Y", "Z"]}]


class TestOutputDiscipline:
    def test_stdout_is_json_only_on_error(self, capsys, tmp_path):
        code = main([
            "evaluate", "--ref", str(tmp_path / "none.jsonl"),
            "--hyp", str(tmp_path / "none.jsonl"),
            "--out", str(tmp_path / "r.json"),
        ])
        captured = capsys.readouterr()
        assert code == 2
        doc = json.loads(captured.out)
        assert doc["error"]["exit_code"] == 2

    def test_connection_error_exit_2(self, capsys, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "x"})
        code = main([
            "--server", "http://127.0.0.1:1",
            "evaluate", "--ref", str(ref), "--hyp", str(ref),
            "--out", str(tmp_path / "r.json"),
        ])
        captured = capsys.readouterr()
        assert code == 2
        doc = json.loads(captured.out)
        assert doc["error"]["type"] == "ConnectionError"
