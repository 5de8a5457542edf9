"""Chunk-level label construction.

Given a band of a page, the label is built in four steps: drop boxes whose
in-band area fraction does not exceed theta, sort the survivors into
reading order, group them into text lines by vertical overlap against the
line seed, then join words with the intra-line joiner and lines with the
separator character.

Line grouping is seed-anchored: a single pass over the reading-order list
in which each unassigned instance seeds a line and pulls in every later
unassigned instance whose v_overlap against the seed reaches delta. All
members are marked assigned, so no transcript is ever emitted twice. This
differs from transitive closure on chains of partially overlapping boxes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SeparatorCollision
from .geometry import BandSpan, overlap_fraction, sort_by_x, sort_reading_order, v_overlap
from .ingest import ReceiptPage, TextInstance

DEFAULT_THETA = 0.3
DEFAULT_DELTA = 0.5
DEFAULT_SEPARATOR = "æ"  # "æ", absent from receipt transcripts
DEFAULT_JOINER = " "


@dataclass(frozen=True)
class LabelerConfig:
    theta: float = DEFAULT_THETA
    delta: float = DEFAULT_DELTA
    separator: str = DEFAULT_SEPARATOR
    intra_line_joiner: str = DEFAULT_JOINER

    def __post_init__(self):
        if not 0 <= self.theta < 1:
            raise ValueError(f"theta must be in [0, 1), got {self.theta}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if len(self.separator) != 1:
            raise ValueError("separator must be a single character")


@dataclass(frozen=True)
class ChunkLabel:
    """Ordered text-line labels plus their separator-joined form."""

    lines: tuple[str, ...]
    joined: str

    @classmethod
    def from_lines(cls, lines: list[str], separator: str) -> "ChunkLabel":
        for line in lines:
            if not line:
                raise ValueError("empty text-line label")
            if separator in line:
                raise SeparatorCollision(
                    f"separator {separator!r} occurs inside a text-line label",
                    line=line,
                )
        return cls(lines=tuple(lines), joined=separator.join(lines))


def filter_boxes(instances: list[TextInstance], band: BandSpan,
                 theta: float) -> list[TextInstance]:
    """Retain instances whose in-band area fraction strictly exceeds theta."""
    return [i for i in instances if overlap_fraction(i.box, band) > theta]


def merge_lines(instances: list[TextInstance],
                delta: float) -> list[list[TextInstance]]:
    """Group reading-order instances into x-sorted text lines.

    Expects the input already sorted by y_min ascending.
    """
    lines: list[list[TextInstance]] = []
    assigned = [False] * len(instances)
    for i, seed in enumerate(instances):
        if assigned[i]:
            continue
        assigned[i] = True
        members = [seed]
        for j in range(i + 1, len(instances)):
            if assigned[j]:
                continue
            if v_overlap(seed.box, instances[j].box) >= delta:
                assigned[j] = True
                members.append(instances[j])
        lines.append(sort_by_x(members))
    return lines


def build_chunk_label(page: ReceiptPage, band: BandSpan,
                      config: LabelerConfig) -> ChunkLabel:
    """Construct the ordered, separator-joined label for one band."""
    retained = filter_boxes(list(page.instances), band, config.theta)
    ordered = sort_reading_order(retained)
    groups = merge_lines(ordered, config.delta)
    lines = [config.intra_line_joiner.join(i.text for i in group) for group in groups]
    return ChunkLabel.from_lines(lines, config.separator)


def document_label(page: ReceiptPage, config: LabelerConfig) -> ChunkLabel:
    """Full-page label: the degenerate single-chunk case."""
    return build_chunk_label(page, BandSpan(0, page.height), config)
