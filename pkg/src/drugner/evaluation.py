"""IOB tag/span conversion and strict entity-level scoring.

A predicted entity counts as a true positive only when its class, start
token and end token all match a gold entity in the same sentence. Precision,
recall and F1 are reported as percentages with two decimals; micro metrics
pool TP/FP/FN counts over all classes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import DataError

ENTITY_CLASSES = ("brand", "drug", "drug_n", "group")

# O first, then B-/I- pairs alphabetically by class. Argmax ties therefore
# fall back to O.
TAGS = ("O",) + tuple(
    f"{prefix}-{cls}" for cls in ENTITY_CLASSES for prefix in ("B", "I")
)
TAG_INDEX = {tag: i for i, tag in enumerate(TAGS)}

# Row order used when rendering per-entity report tables.
REPORT_CLASS_ORDER = ("group", "drug", "brand", "drug_n")


class EntitySpan(NamedTuple):
    """Inclusive token span of one entity mention."""

    cls: str
    start: int
    end: int


def iob_to_spans(tags: Sequence[str]) -> list[EntitySpan]:
    """Maximal entity spans from an IOB tag sequence.

    An orphan I-X (not preceded by B-X or I-X of the same class) is repaired
    as a span start, matching conlleval's handling, so output from untrained
    models never crashes the scorer.
    """
    spans: list[EntitySpan] = []
    open_cls: str | None = None
    open_start = -1

    def close(end: int) -> None:
        nonlocal open_cls
        if open_cls is not None:
            spans.append(EntitySpan(open_cls, open_start, end))
            open_cls = None

    for i, tag in enumerate(tags):
        if tag not in TAG_INDEX:
            raise ValueError(f"unknown IOB tag {tag!r} at position {i}")
        if tag == "O":
            close(i - 1)
            continue
        prefix, cls = tag.split("-", 1)
        if prefix == "B" or open_cls != cls:
            close(i - 1)
            open_cls = cls
            open_start = i
    close(len(tags) - 1)
    return spans


def spans_to_iob(spans: Iterable[EntitySpan], length: int) -> list[str]:
    """Inverse of iob_to_spans: B-X at span starts, I-X inside, O elsewhere."""
    tags = ["O"] * length
    occupied = [False] * length
    for span in spans:
        if span.cls not in ENTITY_CLASSES:
            raise ValueError(f"unknown entity class {span.cls!r}")
        if not 0 <= span.start <= span.end < length:
            raise ValueError(f"span {span} out of bounds for length {length}")
        for i in range(span.start, span.end + 1):
            if occupied[i]:
                raise ValueError(f"span {span} overlaps an earlier span at token {i}")
            occupied[i] = True
        tags[span.start] = f"B-{span.cls}"
        for i in range(span.start + 1, span.end + 1):
            tags[i] = f"I-{span.cls}"
    return tags


@dataclass(frozen=True)
class ClassMetrics:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return 100.0 * self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return 100.0 * self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2.0 * p * r / (p + r) if p + r else 0.0


@dataclass(frozen=True)
class EvalReport:
    """Per-class and micro-averaged strict precision/recall/F1."""

    per_class: dict[str, ClassMetrics]
    micro: ClassMetrics


def evaluate_strict(
    gold: Sequence[Iterable[EntitySpan]],
    predicted: Sequence[Iterable[EntitySpan]],
) -> EvalReport:
    """Strict entity-level evaluation over parallel per-sentence span lists."""
    if len(gold) != len(predicted):
        raise DataError(
            f"sentence count mismatch: {len(gold)} gold vs {len(predicted)} predicted"
        )
    counts = {cls: [0, 0, 0] for cls in ENTITY_CLASSES}  # tp, fp, fn
    for gold_spans, pred_spans in zip(gold, predicted):
        g, p = set(gold_spans), set(pred_spans)
        for span in g & p:
            counts[span.cls][0] += 1
        for span in p - g:
            counts[span.cls][1] += 1
        for span in g - p:
            counts[span.cls][2] += 1
    per_class = {cls: ClassMetrics(*counts[cls]) for cls in ENTITY_CLASSES}
    micro = ClassMetrics(
        tp=sum(m.tp for m in per_class.values()),
        fp=sum(m.fp for m in per_class.values()),
        fn=sum(m.fn for m in per_class.values()),
    )
    return EvalReport(per_class=per_class, micro=micro)


def render_report(report: EvalReport, title: str = "strict evaluation") -> str:
    """Plain-text table: one row per entity class plus the micro average."""
    lines = [title, f"{'entity':<10} {'Precision':>10} {'Recall':>10} {'F1':>10}"]
    for cls in REPORT_CLASS_ORDER:
        m = report.per_class[cls]
        lines.append(f"{cls:<10} {m.precision:>10.2f} {m.recall:>10.2f} {m.f1:>10.2f}")
    m = report.micro
    lines.append(f"{'micro':<10} {m.precision:>10.2f} {m.recall:>10.2f} {m.f1:>10.2f}")
    return "\n".join(lines) + "\n"


def report_rows(report: EvalReport) -> list[tuple[str, ClassMetrics]]:
    """(name, metrics) rows in report order, micro last."""
    rows = [(cls, report.per_class[cls]) for cls in REPORT_CLASS_ORDER]
    rows.append(("micro", report.micro))
    return rows


def render_report_tsv(report: EvalReport) -> str:
    """Machine-readable report: tab-separated, same fields as the text table."""
    lines = ["entity\ttp\tfp\tfn\tprecision\trecall\tf1"]
    for name, m in report_rows(report):
        lines.append(
            f"{name}\t{m.tp}\t{m.fp}\t{m.fn}\t{m.precision:.2f}\t{m.recall:.2f}\t{m.f1:.2f}"
        )
    return "\n".join(lines) + "\n"
