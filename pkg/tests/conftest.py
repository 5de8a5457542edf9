"""Shared fixtures: in-memory synthetic pages and on-disk fixture datasets."""

from __future__ import annotations

import random
from pathlib import Path

import pytest
from PIL import Image

from chunkforge.ingest import ReceiptPage, Rect, TextInstance

ALPHABET = "ABCDEFGH"


def make_instance(x0: int, y0: int, x1: int, y1: int, text: str) -> TextInstance:
    return TextInstance(box=Rect(x0, y0, x1, y1), text=text)


def make_page(page_id: str, width: int, height: int,
              instances: list[TextInstance],
              image_path: Path | None = None) -> ReceiptPage:
    return ReceiptPage(page_id=page_id, width=width, height=height,
                       image_path=image_path, instances=tuple(instances))


# Three layouts with unambiguous merge outcomes: 3, 4 and 2 text lines.
FIXTURE_PAGES: dict[str, tuple[int, int, list[tuple[int, int, int, int, str]]]] = {
    "r1": (120, 300, [
        (10, 10, 110, 30, "HELLO WORLD"),
        (10, 60, 60, 80, "FOO"),
        (70, 60, 110, 80, "BAR"),
        (10, 200, 110, 220, "TOTAL 9.99"),
    ]),
    "r2": (100, 310, [
        (5, 5, 95, 25, "RECEIPT"),
        (5, 40, 40, 60, "A1"),
        (50, 42, 95, 58, "B2"),
        (5, 100, 95, 120, "SUM"),
        (5, 250, 95, 270, "END"),
    ]),
    "r3": (80, 305, [
        (5, 30, 75, 50, "ONE"),
        (5, 90, 75, 110, "TWO"),
    ]),
}

FIXTURE_LINE_COUNTS = {"r1": 3, "r2": 4, "r3": 2}
FIXTURE_DOC_LABELS = {
    "r1": "HELLO WORLDæFOO BARæTOTAL 9.99",
    "r2": "RECEIPTæA1 B2æSUMæEND",
    "r3": "ONEæTWO",
}


def write_fixture_dataset(root: Path, split: str = "train") -> Path:
    """Materialize FIXTURE_PAGES as PNG + txt pairs under root/split."""
    base = root / split
    base.mkdir(parents=True, exist_ok=True)
    for stem, (width, height, boxes) in FIXTURE_PAGES.items():
        Image.new("RGB", (width, height), (250, 250, 245)).save(base / f"{stem}.png")
        lines = []
        for x0, y0, x1, y1, text in boxes:
            lines.append(f"{x0},{y0},{x1},{y0},{x1},{y1},{x0},{y1},{text}")
        (base / f"{stem}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return root


@pytest.fixture
def fixture_dataset(tmp_path: Path) -> Path:
    return write_fixture_dataset(tmp_path / "data")


@pytest.fixture
def fixture_pages() -> list[ReceiptPage]:
    pages = []
    for stem, (width, height, boxes) in FIXTURE_PAGES.items():
        instances = [make_instance(x0, y0, x1, y1, text)
                     for x0, y0, x1, y1, text in boxes]
        pages.append(make_page(stem, width, height, instances))
    return pages


def write_keyed_jsonl(path: Path, items: dict[str, str]) -> Path:
    """Write {key, text} records, one JSON object per line."""
    import json

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for key, text in items.items():
            fh.write(json.dumps({"key": key, "text": text}, ensure_ascii=False) + "\n")
    return path


def random_layout(rng: random.Random, max_boxes: int = 12) -> ReceiptPage:
    """Random synthetic page; transcripts may contain interior spaces."""
    width = rng.randint(40, 200)
    height = rng.randint(30, 400)
    count = rng.randint(0, max_boxes)
    instances = []
    for _ in range(count):
        y0 = rng.randint(0, height - 2)
        y1 = rng.randint(y0 + 1, min(height, y0 + 40))
        x0 = rng.randint(0, width - 2)
        x1 = rng.randint(x0 + 1, width)
        length = rng.randint(1, 6)
        text = "".join(rng.choice(ALPHABET) for _ in range(length))
        if length > 2 and rng.random() < 0.3:
            cut = rng.randint(1, length - 1)
            text = text[:cut] + " " + text[cut:]
        instances.append(make_instance(x0, y0, x1, y1, text))
    return make_page(f"synth{rng.randint(0, 10**9)}", width, height, instances)
