"""Figure rendering for reports and training records.

Every CLI report path writes a PNG next to its delimited output. Uses the
Agg backend so batch runs never need a display.
"""
from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import EvalReport, report_rows  # noqa: E402
from .fileio import atomic_write_bytes  # noqa: E402
from .training import TrainRecord, TrialRecord  # noqa: E402


def _save(fig, path: str | Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=120)
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def save_training_curves(record: TrainRecord, path: str | Path) -> None:
    """Training loss and validation F1 per epoch, best epoch marked."""
    epochs = [r.epoch for r in record.epochs]
    fig, (ax_loss, ax_f1) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [r.train_loss for r in record.epochs], color="tab:blue")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("mean training loss")
    ax_f1.plot(epochs, [r.val_f1 for r in record.epochs], color="tab:green")
    ax_f1.axvline(record.best_epoch, color="tab:red", linestyle="--", linewidth=1)
    ax_f1.set_xlabel("epoch")
    ax_f1.set_ylabel("validation micro-F1 (%)")
    ax_f1.set_title(f"best epoch {record.best_epoch}", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def save_report_figure(report: EvalReport, path: str | Path, title: str = "") -> None:
    """Grouped P/R/F1 bars per entity class plus the micro average."""
    rows = report_rows(report)
    names = [name for name, _ in rows]
    x = range(len(rows))
    width = 0.27
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar([i - width for i in x], [m.precision for _, m in rows], width, label="precision")
    ax.bar(list(x), [m.recall for _, m in rows], width, label="recall")
    ax.bar([i + width for i in x], [m.f1 for _, m in rows], width, label="F1")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylim(0, 105)
    ax.set_ylabel("%")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_search_figure(trials: list[TrialRecord], best_index: int, path: str | Path) -> None:
    """Per-trial validation F1, best trial highlighted."""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    xs = [t.index for t in trials]
    ys = [t.val_f1 for t in trials]
    ax.bar(xs, ys, color="tab:blue")
    best = trials[best_index]
    ax.bar([best.index], [best.val_f1], color="tab:red")
    ax.set_xlabel("trial")
    ax.set_ylabel("validation micro-F1 (%)")
    fig.tight_layout()
    _save(fig, path)
