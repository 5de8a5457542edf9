"""Request/response models for the chunkforge service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..labeler import DEFAULT_DELTA, DEFAULT_JOINER, DEFAULT_SEPARATOR, DEFAULT_THETA
from ..sampler import DEFAULT_SAMPLES_PER_IMAGE, DEFAULT_STAGES


class BuildRequest(BaseModel):
    root: str
    split: str = "train"
    out: str
    theta: float = DEFAULT_THETA
    delta: float = DEFAULT_DELTA
    separator: str = DEFAULT_SEPARATOR
    joiner: str = DEFAULT_JOINER
    stages: list[int] = Field(default_factory=lambda: list(DEFAULT_STAGES))
    samples_per_image: int = DEFAULT_SAMPLES_PER_IMAGE
    epochs: int = 1
    seed: int = 0
    mode: Literal["random", "tiled"] = "random"
    materialize_crops: bool = False
    strict: bool = False
    resample_empty: bool = False
    workers: int | None = None


class StageSummary(BaseModel):
    L: int
    N: int
    mode: str
    seed: int
    epochs: int
    records: int
    shard_path: str


class BuildResponse(BaseModel):
    manifest_path: str
    root: str
    split: str
    out: str
    pages: int
    global_seed: int
    warnings: int
    stages: list[StageSummary]


class AnalyzeRequest(BaseModel):
    root: str
    split: str = "train"
    out: str
    theta: float = DEFAULT_THETA
    delta: float = DEFAULT_DELTA
    separator: str = DEFAULT_SEPARATOR
    joiner: str = DEFAULT_JOINER
    svg: bool = False
    strict: bool = False
    workers: int | None = None


class AnalyzeResponse(BaseModel):
    root: str
    split: str
    pages: int
    median: int
    histogram: dict[str, int]
    csv_path: str
    svg_path: str | None


class CorpusStats(BaseModel):
    pairs: int
    average: str
    precision: float
    recall: float
    f1: float
    cer: float | None
    S: int
    D: int
    I: int
    C: int
    matched: int
    ref_count: int
    hyp_count: int
    avg_hyp_len: float


class EvaluateRequest(BaseModel):
    ref_path: str
    hyp_path: str
    out: str
    separator: str = DEFAULT_SEPARATOR
    strip_separator: bool = True
    average: Literal["micro", "macro"] = "micro"
    csv_export: bool = False


class EvaluateResponse(BaseModel):
    report_path: str
    csv_path: str | None
    corpus: CorpusStats


class PostprocessRequest(BaseModel):
    hyp_path: str
    out: str
    separator: str = DEFAULT_SEPARATOR


class PostprocessResponse(BaseModel):
    out_path: str
    records: int


class HealthResponse(BaseModel):
    status: str
    version: str
