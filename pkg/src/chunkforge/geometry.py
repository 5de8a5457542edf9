"""Overlap and ordering primitives for chunk-label construction.

A band is a full-width horizontal strip of the page, half-open on the
y-axis so that tilings partition the page exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .ingest import Rect, TextInstance


@dataclass(frozen=True)
class BandSpan:
    """Half-open vertical span [y_start, y_end) of a full-width crop."""

    y_start: int
    y_end: int

    def __post_init__(self):
        if self.y_start < 0 or self.y_start >= self.y_end:
            raise ValueError(f"invalid band [{self.y_start}, {self.y_end})")

    @property
    def height(self) -> int:
        return self.y_end - self.y_start


def overlap_fraction(box: Rect, band: BandSpan) -> float:
    """Fraction of the box area inside the band strip.

    Bands span the full page width, so this reduces to the vertical-extent
    intersection over the box height. Requires a positive-area box.
    """
    intersection = min(box.y_max, band.y_end) - max(box.y_min, band.y_start)
    if intersection <= 0:
        return 0.0
    return intersection / box.height


def v_overlap(a: Rect, b: Rect) -> float:
    """Vertical intersection length over the smaller box height.

    Min-height normalization lets a short word nested in a tall line reach
    the merge threshold from either side.
    """
    intersection = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if intersection <= 0:
        return 0.0
    return intersection / min(a.height, b.height)


def sort_reading_order(instances: Iterable[TextInstance]) -> list[TextInstance]:
    """Stable sort by the y coordinate of the top-left anchor."""
    return sorted(instances, key=lambda inst: inst.box.y_min)


def sort_by_x(instances: Sequence[TextInstance]) -> list[TextInstance]:
    """Stable sort by the x coordinate of the top-left anchor."""
    return sorted(instances, key=lambda inst: inst.box.x_min)
