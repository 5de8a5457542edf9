"""Parse SROIE-style receipt annotations into validated page records.

An annotation file holds one text instance per line: eight comma-separated
integer quad coordinates followed by the transcript (which may itself
contain commas and is rejoined verbatim). Quads are reduced to axis-aligned
rects on ingest; downstream geometry only needs vertical/areal extents.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .errors import (
    EmptyAnnotation,
    EmptyDataset,
    MalformedLine,
    MissingFile,
    UnreadableImage,
)

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box in pixel coordinates, y growing downward."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self):
        if min(self.x_min, self.y_min) < 0:
            raise ValueError(f"negative coordinate in {self}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted extent in {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    @property
    def area(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class TextInstance:
    """One annotated box + transcript pair (a word or line fragment)."""

    box: Rect
    text: str

    def __post_init__(self):
        if self.box.area <= 0:
            raise ValueError(f"box {self.box} has no area")
        if not self.text.strip():
            raise ValueError("empty transcript")


@dataclass(frozen=True)
class ReceiptPage:
    """One annotated receipt image; immutable and safe to share."""

    page_id: str
    width: int
    height: int
    image_path: Path | None
    instances: tuple[TextInstance, ...]
    warnings: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"page {self.page_id}: non-positive dimensions")
        for inst in self.instances:
            b = inst.box
            if b.x_max > self.width or b.y_max > self.height:
                raise ValueError(
                    f"page {self.page_id}: box {b} outside {self.width}x{self.height}"
                )


def parse_annotation_line(line: str) -> TextInstance:
    """Parse one annotation line into a TextInstance.

    The rect is the axis-aligned bounding box of the quad; the transcript is
    everything after the eighth comma with interior commas restored.
    Raises MalformedLine when the line cannot yield a valid instance.
    """
    fields = line.rstrip("\n").split(",")
    if len(fields) < 9:
        raise MalformedLine(f"expected >= 9 comma-separated fields, got {len(fields)}")
    try:
        coords = [int(f) for f in fields[:8]]
    except ValueError:
        raise MalformedLine(f"non-integer coordinate in {fields[:8]!r}") from None
    text = ",".join(fields[8:]).strip()
    if not text:
        raise MalformedLine("empty transcript")
    xs = coords[0::2]
    ys = coords[1::2]
    # Negative annotation coordinates are clipped at the image origin.
    box = Rect(max(0, min(xs)), max(0, min(ys)), max(0, max(xs)), max(0, max(ys)))
    if box.area <= 0:
        raise MalformedLine(f"degenerate box {box}")
    return TextInstance(box=box, text=text)


def _read_image_size(image_path: Path) -> tuple[int, int]:
    try:
        with Image.open(image_path) as img:
            return img.size
    except (UnidentifiedImageError, OSError) as exc:
        raise UnreadableImage(f"cannot read image {image_path}: {exc}") from exc


def _clamp_instance(inst: TextInstance, width: int, height: int) -> TextInstance | None:
    """Clamp a box to the page; None when clamping kills its area."""
    b = inst.box
    clamped = Rect(
        min(b.x_min, width), min(b.y_min, height),
        min(b.x_max, width), min(b.y_max, height),
    )
    if clamped == b:
        return inst
    if clamped.area <= 0:
        return None
    return replace(inst, box=clamped)


def load_page(image_path: Path | str, annotation_path: Path | str, *,
              strict: bool = False) -> ReceiptPage:
    """Load one image/annotation pair into a ReceiptPage.

    Malformed lines are skipped with a recorded warning unless ``strict``,
    in which case the MalformedLine propagates.
    """
    image_path = Path(image_path)
    annotation_path = Path(annotation_path)
    if not image_path.is_file():
        raise MissingFile(f"image not found: {image_path}")
    if not annotation_path.is_file():
        raise MissingFile(f"annotation not found: {annotation_path}")

    width, height = _read_image_size(image_path)
    warnings: list[str] = []
    instances: list[TextInstance] = []
    raw = annotation_path.read_text(encoding="utf-8-sig")
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            inst = parse_annotation_line(line)
        except MalformedLine as exc:
            if strict:
                raise MalformedLine(
                    f"{annotation_path}:{lineno}: {exc.message}"
                ) from None
            warnings.append(f"line {lineno} skipped: {exc.message}")
            continue
        clamped = _clamp_instance(inst, width, height)
        if clamped is None:
            warnings.append(f"line {lineno} skipped: box entirely outside page")
            continue
        if clamped is not inst:
            warnings.append(f"line {lineno}: box clamped to page bounds")
        instances.append(clamped)

    if not instances:
        raise EmptyAnnotation(f"{annotation_path}: no valid instances")
    for w in warnings:
        log.warning("%s: %s", annotation_path.name, w)
    return ReceiptPage(
        page_id=image_path.stem,
        width=width,
        height=height,
        image_path=image_path,
        instances=tuple(instances),
        warnings=tuple(warnings),
    )


def _pair_by_stem(base: Path) -> list[tuple[str, Path, Path]]:
    images: dict[str, Path] = {}
    annotations: dict[str, Path] = {}
    for path in sorted(base.rglob("*")):
        if not path.is_file():
            continue
        suffix = path.suffix.lower()
        if suffix in IMAGE_SUFFIXES:
            images.setdefault(path.stem, path)
        elif suffix == ".txt":
            annotations.setdefault(path.stem, path)
    stems = sorted(set(images) & set(annotations))
    return [(stem, images[stem], annotations[stem]) for stem in stems]


def load_dataset(root_dir: Path | str, split: str, *, strict: bool = False,
                 workers: int | None = None) -> list[ReceiptPage]:
    """Load every image/annotation pair under ``root_dir/split``.

    Pairs are matched by filename stem anywhere below the split directory
    (flat, or img/ + box/ style layouts). Output order is the lexicographic
    stem order regardless of filesystem enumeration.
    """
    root_dir = Path(root_dir)
    base = root_dir / split
    if not base.is_dir():
        base = root_dir
    if not base.is_dir():
        raise EmptyDataset(f"dataset directory not found: {base}")
    pairs = _pair_by_stem(base)
    if not pairs:
        raise EmptyDataset(f"no image/annotation pairs under {base}")

    def one(pair: tuple[str, Path, Path]) -> ReceiptPage:
        _, image_path, annotation_path = pair
        return load_page(image_path, annotation_path, strict=strict)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        pages = list(pool.map(one, pairs))
    log.info("loaded %d pages from %s", len(pages), base)
    return pages


def page_to_json(page: ReceiptPage) -> dict:
    return {
        "page_id": page.page_id,
        "width": page.width,
        "height": page.height,
        "image_path": str(page.image_path) if page.image_path else None,
        "warnings": list(page.warnings),
        "instances": [
            {
                "box": [i.box.x_min, i.box.y_min, i.box.x_max, i.box.y_max],
                "text": i.text,
            }
            for i in page.instances
        ],
    }


def page_from_json(data: dict) -> ReceiptPage:
    return ReceiptPage(
        page_id=data["page_id"],
        width=data["width"],
        height=data["height"],
        image_path=Path(data["image_path"]) if data.get("image_path") else None,
        instances=tuple(
            TextInstance(box=Rect(*item["box"]), text=item["text"])
            for item in data["instances"]
        ),
        warnings=tuple(data.get("warnings", ())),
    )


def dump_page(page: ReceiptPage) -> str:
    return json.dumps(page_to_json(page), ensure_ascii=False)


def parse_page(serialized: str) -> ReceiptPage:
    return page_from_json(json.loads(serialized))
