from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from chunkforge import __version__
from chunkforge.service.app import create_app

from conftest import write_keyed_jsonl


@pytest.fixture
def client() -> TestClient:
    # raise_server_exceptions off: toolkit errors must surface as HTTP 400
    return TestClient(create_app(), raise_server_exceptions=False)


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        assert response.json() == {"status": "ok", "version": __version__}


class TestBuildEndpoint:
    def test_happy_path(self, client, fixture_dataset, tmp_path):
        out = tmp_path / "out"
        response = client.post("/build", json={
            "root": str(fixture_dataset), "out": str(out), "seed": 5,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["pages"] == 3
        assert body["global_seed"] == 5
        assert [s["L"] for s in body["stages"]] == [30, 15, 7, 4, 2, 1]
        assert body["stages"][0]["records"] == 60
        assert body["stages"][-1]["records"] == 3
        assert (out / "manifest.json").exists()
        for stage in body["stages"]:
            assert (out / stage["shard_path"]).exists()

    def test_empty_root_is_toolkit_error(self, client, tmp_path):
        empty = tmp_path / "nothing"
        empty.mkdir()
        response = client.post("/build", json={
            "root": str(empty), "out": str(tmp_path / "out"),
        })
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["type"] == "EmptyDataset"
        assert error["exit_code"] == 2

    def test_bad_stage_spec(self, client, fixture_dataset, tmp_path):
        response = client.post("/build", json={
            "root": str(fixture_dataset), "out": str(tmp_path / "out"),
            "stages": [7, 15],
        })
        assert response.status_code == 400
        assert response.json()["error"]["type"] == "InvalidStageSpec"

    def test_schema_validation_is_http_422(self, client, fixture_dataset, tmp_path):
        response = client.post("/build", json={
            "root": str(fixture_dataset), "out": str(tmp_path / "out"),
            "mode": "sideways",
        })
        assert response.status_code == 422


class TestAnalyzeEndpoint:
    def test_histogram(self, client, fixture_dataset, tmp_path):
        out = tmp_path / "report"
        response = client.post("/analyze", json={
            "root": str(fixture_dataset), "out": str(out), "svg": True,
        })
        assert response.status_code == 200
        body = response.json()
        assert body["pages"] == 3
        assert body["median"] == 3
        assert body["histogram"] == {"2": 1, "3": 1, "4": 1}
        csv_text = (out / "line_histogram.csv").read_text(encoding="utf-8")
        assert csv_text == "line_count,pages\n2,1\n3,1\n4,1\n"
        assert (out / "line_histogram.svg").read_text(encoding="utf-8").startswith("<svg")


class TestEvaluateEndpoint:
    def test_identical_corpus(self, client, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl",
                                {"a": "HELLOæWORLD", "b": "FOO BAR"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl",
                                {"a": "HELLOæWORLD", "b": "FOO BAR"})
        out = tmp_path / "report.json"
        response = client.post("/evaluate", json={
            "ref_path": str(ref), "hyp_path": str(hyp), "out": str(out),
        })
        assert response.status_code == 200
        corpus = response.json()["corpus"]
        assert corpus["cer"] == 0.0
        assert corpus["f1"] == 1.0
        assert corpus["pairs"] == 2
        report = json.loads(out.read_text(encoding="utf-8"))
        assert [p["key"] for p in report["pairs"]] == ["a", "b"]
        assert report["config"]["average"] == "micro"

    def test_key_mismatch(self, client, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "x", "b": "y"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"a": "x", "c": "z"})
        response = client.post("/evaluate", json={
            "ref_path": str(ref), "hyp_path": str(hyp),
            "out": str(tmp_path / "r.json"),
        })
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["type"] == "KeyMismatch"
        assert error["exit_code"] == 1
        assert error["details"] == {"missing_in_hyp": ["b"],
                                    "missing_in_ref": ["c"]}

    def test_missing_file(self, client, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "x"})
        response = client.post("/evaluate", json={
            "ref_path": str(ref), "hyp_path": str(tmp_path / "absent.jsonl"),
            "out": str(tmp_path / "r.json"),
        })
        assert response.status_code == 400
        error = response.json()["error"]
        assert error["type"] == "IoError"
        assert error["exit_code"] == 2

    def test_csv_export(self, client, tmp_path):
        ref = write_keyed_jsonl(tmp_path / "ref.jsonl", {"a": "abc"})
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl", {"a": "axc"})
        out = tmp_path / "report.json"
        response = client.post("/evaluate", json={
            "ref_path": str(ref), "hyp_path": str(hyp), "out": str(out),
            "csv_export": True,
        })
        assert response.status_code == 200
        csv_path = response.json()["csv_path"]
        lines = open(csv_path, encoding="utf-8").read().splitlines()
        assert lines[0].startswith("key,S,D,I,C,cer")
        assert lines[1].startswith("a,1,0,0,2,")


class TestPostprocessEndpoint:
    def test_lines(self, client, tmp_path):
        hyp = write_keyed_jsonl(tmp_path / "hyp.jsonl",
                                {"a": "HELLO WORLDæ FOO æ", "b": "plain"})
        out = tmp_path / "lines.jsonl"
        response = client.post("/postprocess", json={
            "hyp_path": str(hyp), "out": str(out),
        })
        assert response.status_code == 200
        assert response.json() == {"out_path": str(out), "records": 2}
        rows = [json.loads(line) for line in
                out.read_text(encoding="utf-8").splitlines()]
        assert rows == [
            {"key": "a", "lines": ["HELLO WORLD", "FOO"]},
            {"key": "b", "lines": ["plain"]},
        ]
