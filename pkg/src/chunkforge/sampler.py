"""Chunk sampling, evaluation tiling, and curriculum shard building.

Training chunks are full-width strips of height floor(H/L) with a start
row drawn uniformly from [0, H-h]; evaluation chunks tile the page
sequentially, the final tile absorbing the integer-division remainder so
coverage is exact. The curriculum builder writes one JSONL shard per
(stage, epoch) plus a manifest, with all randomness derived from the
global seed so reruns are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from PIL import Image

from .errors import (
    InvalidStageSpec,
    PageTooShort,
    SeparatorCollision,
    UnreadableImage,
)
from .fileio import atomic_write_text, write_jsonl
from .geometry import BandSpan
from .ingest import ReceiptPage
from .labeler import ChunkLabel, LabelerConfig, build_chunk_label

log = logging.getLogger(__name__)

DEFAULT_STAGES = (30, 15, 7, 4, 2, 1)
DEFAULT_SAMPLES_PER_IMAGE = 20
EMPTY_RESAMPLE_LIMIT = 10

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


def derive_seed(*parts: object) -> int:
    """Stable 48-bit seed from the given parts (order-sensitive).

    48 bits keeps manifests exact for JSON consumers limited to doubles.
    """
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:6], "big")


@dataclass(frozen=True)
class CurriculumStage:
    L: int
    N: int
    mode: str  # "random" or "tiled"
    seed: int
    epochs: int = 1

    def __post_init__(self):
        if self.L < 1 or self.N < 1 or self.epochs < 1:
            raise ValueError("L, N and epochs must be >= 1")
        if self.mode not in ("random", "tiled"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class ChunkSample:
    page_id: str
    band: BandSpan
    label: ChunkLabel
    stage_L: int
    sample_index: int
    crop_path: str | None = None

    def to_record(self) -> dict:
        return {
            "page_id": self.page_id,
            "y_start": self.band.y_start,
            "y_end": self.band.y_end,
            "label": self.label.joined,
            "stage_L": self.stage_L,
            "sample_index": self.sample_index,
            "crop_path": self.crop_path,
        }


@dataclass(frozen=True)
class StageEntry:
    stage: CurriculumStage
    shard_path: str
    epoch_shard_paths: tuple[str, ...]

    def to_json(self) -> dict:
        data = {
            "L": self.stage.L,
            "N": self.stage.N,
            "mode": self.stage.mode,
            "seed": self.stage.seed,
            "shard_path": self.shard_path,
            "epochs": self.stage.epochs,
        }
        if self.stage.epochs > 1:
            data["epoch_shard_paths"] = list(self.epoch_shard_paths)
        return data


@dataclass(frozen=True)
class Manifest:
    version: int
    root: str
    global_seed: int
    config: LabelerConfig
    stages: tuple[StageEntry, ...]

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "root": self.root,
            "global_seed": self.global_seed,
            "config": {
                "theta": self.config.theta,
                "delta": self.config.delta,
                "separator": self.config.separator,
                "joiner": self.config.intra_line_joiner,
            },
            "stages": [entry.to_json() for entry in self.stages],
        }


def load_manifest(path: Path | str) -> Manifest:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    config = LabelerConfig(
        theta=data["config"]["theta"],
        delta=data["config"]["delta"],
        separator=data["config"]["separator"],
        intra_line_joiner=data["config"]["joiner"],
    )
    stages = []
    for item in data["stages"]:
        stage = CurriculumStage(
            L=item["L"], N=item["N"], mode=item["mode"],
            seed=item["seed"], epochs=item["epochs"],
        )
        epoch_paths = tuple(item.get("epoch_shard_paths", [item["shard_path"]]))
        stages.append(StageEntry(stage, item["shard_path"], epoch_paths))
    return Manifest(
        version=data["version"],
        root=data["root"],
        global_seed=data["global_seed"],
        config=config,
        stages=tuple(stages),
    )


def _chunk_height(page: ReceiptPage, L: int) -> int:
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if page.height < L:
        raise PageTooShort(
            f"page {page.page_id}: height {page.height} < L={L}"
        )
    return page.height // L


def sample_training_chunks(page: ReceiptPage, L: int, N: int,
                           rng: random.Random, config: LabelerConfig, *,
                           resample_empty: bool = False) -> list[ChunkSample]:
    """Draw N random chunks of height floor(H/L) with their labels.

    With ``resample_empty``, a chunk whose retained-box set is empty is
    redrawn up to EMPTY_RESAMPLE_LIMIT times; the last draw is kept either
    way, so the record count is always N.
    """
    h = _chunk_height(page, L)
    highest_start = page.height - h
    samples = []
    for index in range(N):
        band, label = _draw(page, h, highest_start, rng, config)
        if resample_empty:
            retries = 0
            while not label.lines and retries < EMPTY_RESAMPLE_LIMIT:
                band, label = _draw(page, h, highest_start, rng, config)
                retries += 1
        samples.append(ChunkSample(page.page_id, band, label, L, index))
    return samples


def _draw(page: ReceiptPage, h: int, highest_start: int, rng: random.Random,
          config: LabelerConfig) -> tuple[BandSpan, ChunkLabel]:
    s = rng.randint(0, highest_start)
    band = BandSpan(s, s + h)
    return band, build_chunk_label(page, band, config)


def tile_eval_chunks(page: ReceiptPage, L: int,
                     config: LabelerConfig) -> list[ChunkSample]:
    """Sequential bands covering the page exactly; the last tile may be taller."""
    h = _chunk_height(page, L)
    samples = []
    for k in range(L):
        y_start = k * h
        y_end = (k + 1) * h if k < L - 1 else page.height
        band = BandSpan(y_start, y_end)
        label = build_chunk_label(page, band, config)
        samples.append(ChunkSample(page.page_id, band, label, L, k))
    return samples


def crop_chunk_image(page: ReceiptPage, band: BandSpan,
                     out_path: Path | str) -> Path:
    """Write the pixel rows [y_start, y_end) of the page as a PNG."""
    if page.image_path is None:
        raise UnreadableImage(f"page {page.page_id} has no image file")
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with Image.open(page.image_path) as img:
            crop = img.crop((0, band.y_start, img.width, band.y_end))
            crop.save(out_path, format="PNG")
    except OSError as exc:
        raise UnreadableImage(
            f"cannot crop {page.image_path}: {exc}"
        ) from exc
    return out_path


def crop_name(page_id: str, stage_L: int, sample_index: int) -> str:
    return f"{page_id}_L{stage_L}_k{sample_index}.png"


@dataclass(frozen=True)
class BuildResult:
    manifest: Manifest
    manifest_path: Path
    pages: int
    # (L, epoch) -> record count, in emission order
    shard_records: dict[tuple[int, int], int]


def validate_separator_free(pages: list[ReceiptPage], separator: str) -> None:
    for page in pages:
        for inst in page.instances:
            if separator in inst.text:
                raise SeparatorCollision(
                    f"separator {separator!r} occurs in a transcript on page "
                    f"{page.page_id}",
                    page_id=page.page_id,
                    text=inst.text,
                )


def build_curriculum(pages: list[ReceiptPage], stage_ls: list[int],
                     config: LabelerConfig, out_dir: Path | str, *,
                     root: str = "",
                     global_seed: int = 0,
                     samples_per_image: int = DEFAULT_SAMPLES_PER_IMAGE,
                     epochs: int = 1,
                     mode: str = "random",
                     materialize_crops: bool = False,
                     resample_empty: bool = False,
                     workers: int | None = None) -> BuildResult:
    """Write per-stage shards plus manifest.json under out_dir.

    Stage L values must be strictly decreasing (growing chunk curriculum).
    Randomness is a pure function of (global_seed, L, epoch, page_id), so
    page-level work can run in any order without affecting output.
    """
    if not stage_ls:
        raise InvalidStageSpec("stage list is empty")
    if any(nxt >= prev for nxt, prev in zip(stage_ls[1:], stage_ls)):
        raise InvalidStageSpec(
            f"stage L values must be strictly decreasing, got {stage_ls}"
        )
    if mode not in ("random", "tiled"):
        raise InvalidStageSpec(f"unknown mode {mode!r}")
    if samples_per_image < 1 or epochs < 1:
        raise InvalidStageSpec(
            f"samples_per_image and epochs must be >= 1, got "
            f"{samples_per_image} and {epochs}"
        )
    validate_separator_free(pages, config.separator)

    out_dir = Path(out_dir)
    shards_dir = out_dir / "shards"
    entries = []
    shard_records: dict[tuple[int, int], int] = {}
    for L in stage_ls:
        # Tiled shards are identical across epochs; emit one.
        stage_epochs = 1 if mode == "tiled" else epochs
        stage = CurriculumStage(
            L=L, N=samples_per_image, mode=mode,
            seed=derive_seed(global_seed, "stage", L), epochs=stage_epochs,
        )
        epoch_paths = []
        for epoch in range(stage_epochs):
            samples = _stage_epoch_samples(
                pages, stage, epoch, global_seed, config,
                resample_empty=resample_empty,
            )
            if materialize_crops:
                crops_dir = out_dir / "crops"
                if stage_epochs > 1:
                    crops_dir = crops_dir / f"e{epoch}"
                samples = _materialize(pages, samples, crops_dir, out_dir, workers)
            shard_path = shards_dir / f"L{L}_e{epoch}.jsonl"
            count = write_jsonl(shard_path, (s.to_record() for s in samples))
            shard_records[(L, epoch)] = count
            epoch_paths.append(shard_path.relative_to(out_dir).as_posix())
            log.info("stage L=%d epoch %d: %d records -> %s", L, epoch, count, shard_path)
        entries.append(StageEntry(stage, epoch_paths[0], tuple(epoch_paths)))

    manifest = Manifest(
        version=MANIFEST_VERSION,
        root=root,
        global_seed=global_seed,
        config=config,
        stages=tuple(entries),
    )
    manifest_path = out_dir / MANIFEST_NAME
    atomic_write_text(manifest_path, json.dumps(manifest.to_json(), indent=2,
                                                ensure_ascii=False) + "\n")
    return BuildResult(
        manifest=manifest,
        manifest_path=manifest_path,
        pages=len(pages),
        shard_records=shard_records,
    )


def _stage_epoch_samples(pages: list[ReceiptPage], stage: CurriculumStage,
                         epoch: int, global_seed: int, config: LabelerConfig,
                         *, resample_empty: bool) -> list[ChunkSample]:
    samples: list[ChunkSample] = []
    for page in pages:
        if stage.mode == "tiled":
            samples.extend(tile_eval_chunks(page, stage.L, config))
            continue
        rng = random.Random(
            derive_seed(global_seed, "stage", stage.L, "epoch", epoch,
                        "page", page.page_id)
        )
        # All L=1 draws are the full page; one sample per page is enough.
        n = 1 if stage.L == 1 else stage.N
        samples.extend(
            sample_training_chunks(page, stage.L, n, rng, config,
                                   resample_empty=resample_empty)
        )
    return samples


def _materialize(pages: list[ReceiptPage], samples: list[ChunkSample],
                 crops_dir: Path, out_dir: Path,
                 workers: int | None) -> list[ChunkSample]:
    """Crop every sample's band to a PNG; one image open per page."""
    crops_dir.mkdir(parents=True, exist_ok=True)
    by_page = {page.page_id: page for page in pages}
    grouped: dict[str, list[int]] = {}
    for idx, sample in enumerate(samples):
        grouped.setdefault(sample.page_id, []).append(idx)

    out: list[ChunkSample | None] = [None] * len(samples)

    def crop_page(page_id: str) -> None:
        page = by_page[page_id]
        if page.image_path is None:
            raise UnreadableImage(f"page {page_id} has no image file")
        with Image.open(page.image_path) as img:
            for idx in grouped[page_id]:
                sample = samples[idx]
                name = crop_name(page_id, sample.stage_L, sample.sample_index)
                path = crops_dir / name
                band = sample.band
                img.crop((0, band.y_start, img.width, band.y_end)).save(
                    path, format="PNG"
                )
                out[idx] = ChunkSample(
                    page_id=sample.page_id,
                    band=sample.band,
                    label=sample.label,
                    stage_L=sample.stage_L,
                    sample_index=sample.sample_index,
                    crop_path=path.relative_to(out_dir).as_posix(),
                )

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(crop_page, grouped))
    return [s for s in out if s is not None]
