"""Character error rate, unordered word-level PRF, and dataset statistics.

CER counts substitutions, deletions, insertions and correct characters
from a minimum-cost unit-weight edit alignment over Unicode scalar values:
cer = (S + D + I) / (S + D + C), the denominator being the reference
length. When several minimum-cost alignments exist the decomposition
follows the backtrace preference match > substitution > deletion >
insertion; the rate itself is alignment-invariant.

Word-level precision/recall/F1 ignores word order: tokens are matched as
multisets after replacing the line separator with a space and splitting on
whitespace runs (case-sensitive, no punctuation stripping).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, EmptyReference
from .ingest import ReceiptPage
from .labeler import DEFAULT_SEPARATOR, LabelerConfig, document_label


@dataclass(frozen=True)
class EditStats:
    substitutions: int
    deletions: int
    insertions: int
    correct: int

    @property
    def reference_length(self) -> int:
        return self.substitutions + self.deletions + self.correct

    @property
    def hypothesis_length(self) -> int:
        return self.substitutions + self.insertions + self.correct

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def cer(self) -> float:
        if self.reference_length == 0:
            raise EmptyReference("CER undefined: reference length is zero")
        return self.distance / self.reference_length

    def add(self, other: "EditStats") -> "EditStats":
        return EditStats(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.correct + other.correct,
        )

    def to_json(self) -> dict:
        return {
            "S": self.substitutions,
            "D": self.deletions,
            "I": self.insertions,
            "C": self.correct,
            "cer": self.cer if self.reference_length else None,
        }


@dataclass(frozen=True)
class PrfStats:
    matched: int
    ref_count: int
    hyp_count: int

    @property
    def precision(self) -> float:
        return self.matched / self.hyp_count if self.hyp_count else 0.0

    @property
    def recall(self) -> float:
        return self.matched / self.ref_count if self.ref_count else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def add(self, other: "PrfStats") -> "PrfStats":
        return PrfStats(
            self.matched + other.matched,
            self.ref_count + other.ref_count,
            self.hyp_count + other.hyp_count,
        )

    def to_json(self) -> dict:
        return {
            "matched": self.matched,
            "ref_count": self.ref_count,
            "hyp_count": self.hyp_count,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _edit_matrix(ref: str, hyp: str) -> np.ndarray:
    """Full unit-cost edit-distance table, row-vectorized.

    The left-neighbor dependency inside a row is resolved with a running
    minimum of (candidate - column), which is exact for unit insertions.
    """
    rows, cols = len(ref) + 1, len(hyp) + 1
    ref_codes = np.fromiter((ord(c) for c in ref), dtype=np.int64, count=len(ref))
    hyp_codes = np.fromiter((ord(c) for c in hyp), dtype=np.int64, count=len(hyp))
    table = np.empty((rows, cols), dtype=np.int32)
    table[0, :] = np.arange(cols, dtype=np.int32)
    table[:, 0] = np.arange(rows, dtype=np.int32)
    col_idx = np.arange(cols, dtype=np.int32)
    base = np.empty(cols, dtype=np.int32)
    for i in range(1, rows):
        base[0] = i
        np.minimum(
            table[i - 1, :-1] + (hyp_codes != ref_codes[i - 1]),
            table[i - 1, 1:] + 1,
            out=base[1:],
        )
        table[i, :] = np.minimum.accumulate(base - col_idx) + col_idx
    return table


def _backtrace(table: np.ndarray, ref: str, hyp: str) -> EditStats:
    subs = dels = ins = correct = 0
    i, j = len(ref), len(hyp)
    while i > 0 or j > 0:
        here = table[i, j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and table[i - 1, j - 1] == here:
            correct += 1
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and table[i - 1, j - 1] + 1 == here:
            subs += 1
            i -= 1
            j -= 1
        elif i > 0 and table[i - 1, j] + 1 == here:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditStats(subs, dels, ins, correct)


def edit_alignment(reference: str, hypothesis: str) -> EditStats:
    """S/D/I/C decomposition of a minimum edit alignment (empty ref allowed)."""
    if not reference:
        return EditStats(0, 0, len(hypothesis), 0)
    if not hypothesis:
        return EditStats(0, len(reference), 0, 0)
    table = _edit_matrix(reference, hypothesis)
    return _backtrace(table, reference, hypothesis)


def cer(reference: str, hypothesis: str) -> EditStats:
    """Edit stats for one pair; raises EmptyReference when ref is empty."""
    if not reference:
        raise EmptyReference(
            "CER undefined for empty reference",
            hypothesis_length=len(hypothesis),
        )
    return edit_alignment(reference, hypothesis)


def tokenize(text: str, separator: str = DEFAULT_SEPARATOR) -> list[str]:
    return text.replace(separator, " ").split()


def word_prf(reference: str, hypothesis: str, *,
             separator: str = DEFAULT_SEPARATOR) -> PrfStats:
    """Order-free word match counts between reference and hypothesis."""
    ref_tokens = Counter(tokenize(reference, separator))
    hyp_tokens = Counter(tokenize(hypothesis, separator))
    matched = sum((ref_tokens & hyp_tokens).values())
    return PrfStats(
        matched=matched,
        ref_count=sum(ref_tokens.values()),
        hyp_count=sum(hyp_tokens.values()),
    )


@dataclass(frozen=True)
class PairResult:
    key: str | None
    edit: EditStats
    prf: PrfStats
    hyp_length: int
    empty_reference: bool

    def to_json(self) -> dict:
        data = {"key": self.key} if self.key is not None else {}
        data.update(self.edit.to_json())
        data.update(self.prf.to_json())
        data["hyp_length"] = self.hyp_length
        data["empty_reference"] = self.empty_reference
        return data


@dataclass(frozen=True)
class CorpusReport:
    pairs: tuple[PairResult, ...]
    average: str  # "micro" or "macro"

    @property
    def edit(self) -> EditStats:
        total = EditStats(0, 0, 0, 0)
        for pair in self.pairs:
            total = total.add(pair.edit)
        return total

    @property
    def prf(self) -> PrfStats:
        total = PrfStats(0, 0, 0)
        for pair in self.pairs:
            total = total.add(pair.prf)
        return total

    @property
    def avg_hyp_len(self) -> float:
        return sum(p.hyp_length for p in self.pairs) / len(self.pairs)

    def corpus_json(self) -> dict:
        if self.average == "macro":
            scored = [p for p in self.pairs if not p.empty_reference]
            cer_value = (
                sum(p.edit.cer for p in scored) / len(scored) if scored else None
            )
            precision = sum(p.prf.precision for p in self.pairs) / len(self.pairs)
            recall = sum(p.prf.recall for p in self.pairs) / len(self.pairs)
            f1 = sum(p.prf.f1 for p in self.pairs) / len(self.pairs)
        else:
            edit = self.edit
            cer_value = edit.cer if edit.reference_length else None
            prf = self.prf
            precision, recall, f1 = prf.precision, prf.recall, prf.f1
        edit = self.edit
        return {
            "pairs": len(self.pairs),
            "average": self.average,
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "cer": cer_value,
            "S": edit.substitutions,
            "D": edit.deletions,
            "I": edit.insertions,
            "C": edit.correct,
            "matched": self.prf.matched,
            "ref_count": self.prf.ref_count,
            "hyp_count": self.prf.hyp_count,
            "avg_hyp_len": self.avg_hyp_len,
        }

    def to_json(self) -> dict:
        return {
            "corpus": self.corpus_json(),
            "pairs": [p.to_json() for p in self.pairs],
        }


def evaluate_pair(reference: str, hypothesis: str, *,
                  key: str | None = None,
                  separator: str = DEFAULT_SEPARATOR,
                  strip_separator: bool = True) -> PairResult:
    if strip_separator:
        cer_ref = reference.replace(separator, " ")
        cer_hyp = hypothesis.replace(separator, " ")
    else:
        cer_ref, cer_hyp = reference, hypothesis
    return PairResult(
        key=key,
        edit=edit_alignment(cer_ref, cer_hyp),
        prf=word_prf(reference, hypothesis, separator=separator),
        hyp_length=len(hypothesis),
        empty_reference=not cer_ref,
    )


def evaluate_corpus(pairs: Sequence[tuple[str, str]], *,
                    keys: Sequence[str] | None = None,
                    separator: str = DEFAULT_SEPARATOR,
                    strip_separator: bool = True,
                    average: str = "micro") -> CorpusReport:
    """Score (reference, hypothesis) pairs; micro-aggregated by default.

    Pairs with an empty reference contribute their hypothesis length as
    insertions and are flagged per pair instead of failing the corpus.
    """
    if not pairs:
        raise EmptyCorpus("no (reference, hypothesis) pairs to evaluate")
    if average not in ("micro", "macro"):
        raise ValueError(f"unknown averaging mode {average!r}")
    results = []
    for idx, (reference, hypothesis) in enumerate(pairs):
        key = keys[idx] if keys is not None else None
        results.append(
            evaluate_pair(reference, hypothesis, key=key, separator=separator,
                          strip_separator=strip_separator)
        )
    return CorpusReport(pairs=tuple(results), average=average)


def split_output_lines(generated: str,
                       separator: str = DEFAULT_SEPARATOR) -> list[str]:
    """Split generated text on the separator, trimming and dropping empties."""
    return [piece.strip() for piece in generated.split(separator) if piece.strip()]


@dataclass(frozen=True)
class LineHistogram:
    counts: dict[int, int]  # text-line count -> number of pages
    median: int
    total_pages: int

    def to_csv(self) -> str:
        rows = ["line_count,pages"]
        rows.extend(f"{k},{self.counts[k]}" for k in sorted(self.counts))
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "median": self.median,
            "total_pages": self.total_pages,
            "counts": {str(k): self.counts[k] for k in sorted(self.counts)},
        }


def lower_median(values: Sequence[int]) -> int:
    if not values:
        raise ValueError("median of empty sequence")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def line_count_distribution(pages: Iterable[ReceiptPage],
                            config: LabelerConfig) -> LineHistogram:
    """Per-page merged text-line counts over the full page band."""
    counts: list[int] = []
    for page in pages:
        counts.append(len(document_label(page, config).lines))
    if not counts:
        raise EmptyCorpus("no pages to analyze")
    histogram = Counter(counts)
    return LineHistogram(
        counts=dict(histogram),
        median=lower_median(counts),
        total_pages=len(counts),
    )


def histogram_svg(histogram: LineHistogram, *, width: int = 640,
                  height: int = 360) -> str:
    """Minimal deterministic bar chart of the line-count distribution."""
    margin = 40
    keys = sorted(histogram.counts)
    max_count = max(histogram.counts.values())
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    bar_w = plot_w / max(len(keys), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">'
        f"text lines per page (median {histogram.median})</text>",
    ]
    for pos, key in enumerate(keys):
        count = histogram.counts[key]
        bar_h = plot_h * count / max_count
        x = margin + pos * bar_w
        y = height - margin - bar_h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{max(bar_w - 1, 1):.2f}" '
            f'height="{bar_h:.2f}" fill="#4878a8"/>'
        )
        parts.append(
            f'<text x="{x + bar_w / 2:.2f}" y="{height - margin + 14}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="9">'
            f"{key}</text>"
        )
    parts.append(
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
