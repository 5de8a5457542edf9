"""End-to-end operations behind the service endpoints.

Each function takes plain values, performs one subcommand's work, writes
its artifacts atomically, and returns the JSON-ready summary the caller
prints or serves.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

from .errors import IoError, KeyMismatch
from .fileio import atomic_write_text, read_jsonl, write_jsonl
from .ingest import load_dataset
from .labeler import LabelerConfig
from .metrics import (
    evaluate_corpus,
    histogram_svg,
    line_count_distribution,
    split_output_lines,
)
from .sampler import build_curriculum

log = logging.getLogger(__name__)


def build_dataset(*, root: str, split: str, out: str,
                  theta: float, delta: float, separator: str, joiner: str,
                  stages: list[int], samples_per_image: int, epochs: int,
                  seed: int, mode: str, materialize_crops: bool,
                  strict: bool, resample_empty: bool,
                  workers: int | None) -> dict:
    config = LabelerConfig(theta=theta, delta=delta, separator=separator,
                           intra_line_joiner=joiner)
    pages = load_dataset(root, split, strict=strict, workers=workers)
    result = build_curriculum(
        pages, stages, config, out,
        root=root,
        global_seed=seed,
        samples_per_image=samples_per_image,
        epochs=epochs,
        mode=mode,
        materialize_crops=materialize_crops,
        resample_empty=resample_empty,
        workers=workers,
    )
    stage_summaries = []
    for entry in result.manifest.stages:
        records = sum(
            result.shard_records[(entry.stage.L, epoch)]
            for epoch in range(entry.stage.epochs)
        )
        stage_summaries.append({
            "L": entry.stage.L,
            "N": entry.stage.N,
            "mode": entry.stage.mode,
            "seed": entry.stage.seed,
            "epochs": entry.stage.epochs,
            "records": records,
            "shard_path": entry.shard_path,
        })
    warnings = sum(len(page.warnings) for page in pages)
    return {
        "manifest_path": str(result.manifest_path),
        "root": root,
        "split": split,
        "out": out,
        "pages": result.pages,
        "global_seed": seed,
        "warnings": warnings,
        "stages": stage_summaries,
    }


def analyze(*, root: str, split: str, out: str,
            theta: float, delta: float, separator: str, joiner: str,
            svg: bool, strict: bool, workers: int | None) -> dict:
    config = LabelerConfig(theta=theta, delta=delta, separator=separator,
                           intra_line_joiner=joiner)
    pages = load_dataset(root, split, strict=strict, workers=workers)
    histogram = line_count_distribution(pages, config)
    out_dir = Path(out)
    csv_path = out_dir / "line_histogram.csv"
    atomic_write_text(csv_path, histogram.to_csv())
    svg_path = None
    if svg:
        svg_path = out_dir / "line_histogram.svg"
        atomic_write_text(svg_path, histogram_svg(histogram))
    return {
        "root": root,
        "split": split,
        "pages": histogram.total_pages,
        "median": histogram.median,
        "histogram": histogram.to_json()["counts"],
        "csv_path": str(csv_path),
        "svg_path": str(svg_path) if svg_path else None,
    }


def _read_keyed_texts(path: Path, role: str) -> dict[str, str]:
    records = read_jsonl(path)
    texts: dict[str, str] = {}
    duplicates = []
    for record in records:
        if "key" not in record or "text" not in record:
            raise IoError(f"{path}: {role} records need 'key' and 'text' fields")
        key = str(record["key"])
        if key in texts:
            duplicates.append(key)
        texts[key] = str(record["text"])
    if duplicates:
        raise KeyMismatch(
            f"duplicate keys in {role} file {path}",
            duplicates=sorted(set(duplicates)),
        )
    return texts


def evaluate_files(*, ref_path: str, hyp_path: str, out: str,
                   separator: str, strip_separator: bool, average: str,
                   csv_export: bool = False) -> dict:
    refs = _read_keyed_texts(Path(ref_path), "reference")
    hyps = _read_keyed_texts(Path(hyp_path), "hypothesis")
    missing_in_hyp = sorted(set(refs) - set(hyps))
    missing_in_ref = sorted(set(hyps) - set(refs))
    if missing_in_hyp or missing_in_ref:
        raise KeyMismatch(
            "reference and hypothesis files cover different keys",
            missing_in_hyp=missing_in_hyp,
            missing_in_ref=missing_in_ref,
        )
    keys = list(refs)  # reference file order
    report = evaluate_corpus(
        [(refs[k], hyps[k]) for k in keys],
        keys=keys,
        separator=separator,
        strip_separator=strip_separator,
        average=average,
    )
    payload = report.to_json()
    payload["config"] = {
        "separator": separator,
        "strip_separator": strip_separator,
        "average": average,
        "ref_path": ref_path,
        "hyp_path": hyp_path,
    }
    out_path = Path(out)
    atomic_write_text(out_path, json.dumps(payload, indent=2,
                                           ensure_ascii=False) + "\n")
    csv_path = None
    if csv_export:
        csv_path = out_path.with_suffix(".csv")
        atomic_write_text(csv_path, _pairs_csv(payload["pairs"]))
    return {
        "report_path": str(out_path),
        "csv_path": str(csv_path) if csv_path else None,
        "corpus": payload["corpus"],
    }


def _pairs_csv(pairs: list[dict]) -> str:
    columns = ["key", "S", "D", "I", "C", "cer", "precision", "recall", "f1",
               "matched", "ref_count", "hyp_count", "hyp_length",
               "empty_reference"]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction="ignore")
    writer.writeheader()
    for pair in pairs:
        writer.writerow(pair)
    return buffer.getvalue()


def postprocess_file(*, hyp_path: str, out: str, separator: str) -> dict:
    records = read_jsonl(Path(hyp_path))
    rows = []
    for record in records:
        if "key" not in record or "text" not in record:
            raise IoError(f"{hyp_path}: records need 'key' and 'text' fields")
        rows.append({
            "key": str(record["key"]),
            "lines": split_output_lines(str(record["text"]), separator),
        })
    count = write_jsonl(Path(out), rows)
    return {"out_path": out, "records": count}
