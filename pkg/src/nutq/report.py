"""Statistics reports: delimited exports plus rendered bar charts.

Rebuilds the attempt history from stored session documents, aggregates it
into per-learner per-class statistics, and writes CSV/JSON exports together
with PNG charts (one bar group per phoneme class, one bar per learner).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .feedback import (
    ClassStats,
    PhonemeClass,
    WordItem,
    aggregate_stats,
    feedback_from_dict,
    stats_csv,
    stats_json,
)
from .store import DocumentStore

__all__ = ["rebuild_history", "learner_class_stats", "render_success_chart",
           "render_attempts_chart", "write_report"]


def rebuild_history(store: DocumentStore, learner_id: str | None = None):
    """(learner_id, WordItem, Feedback) triples from stored sessions."""
    history = []
    for session_id in store.list_ids("sessions"):
        session = store.load("sessions", session_id)
        if session is None:
            continue
        if learner_id is not None and session["learner_id"] != learner_id:
            continue
        for attempt in session["attempts"]:
            item = WordItem.from_word(attempt["word"], attempt["level"])
            feedback = feedback_from_dict(attempt["response"])
            history.append((session["learner_id"], item, feedback))
    return history


def learner_class_stats(store: DocumentStore,
                        learner_id: str | None = None) -> list[ClassStats]:
    return aggregate_stats(rebuild_history(store, learner_id))


def _grouped_bars(ax, rows: list[ClassStats], value_of, value_label: str):
    classes = [c.value for c in PhonemeClass
               if any(r.phoneme_class is c for r in rows)]
    learners = sorted({r.learner_id for r in rows})
    if not classes:
        ax.text(0.5, 0.5, "no attempts yet", ha="center", va="center",
                transform=ax.transAxes)
        ax.set_xticks([])
        return
    lookup = {(r.learner_id, r.phoneme_class.value): value_of(r) for r in rows}
    x = np.arange(len(classes), dtype=float)
    width = 0.8 / len(learners)
    for k, learner in enumerate(learners):
        heights = [lookup.get((learner, c), 0.0) for c in classes]
        ax.bar(x + k * width, heights, width, label=learner)
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(classes)
    ax.set_xlabel("phoneme class")
    ax.set_ylabel(value_label)
    ax.legend(title="learner", fontsize="small")


def render_success_chart(rows: list[ClassStats], path) -> Path:
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    _grouped_bars(ax, rows, lambda r: r.success_rate, "accepted [%]")
    ax.set_ylim(0.0, 100.0)
    ax.set_title("Pronunciation acceptance rate by phoneme class")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_attempts_chart(rows: list[ClassStats], path) -> Path:
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    _grouped_bars(ax, rows, lambda r: r.attempts, "attempts")
    ax.set_title("Attempt volume by phoneme class")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def write_report(rows: list[ClassStats], out_dir) -> list[Path]:
    """Write stats.csv, stats.json, and the two PNG charts; return the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "stats.csv"
    csv_path.write_text(stats_csv(rows), encoding="utf-8")
    json_path = out / "stats.json"
    json_path.write_text(stats_json(rows), encoding="utf-8")
    charts = [render_success_chart(rows, out / "success_rates.png"),
              render_attempts_chart(rows, out / "attempt_counts.png")]
    return [csv_path, json_path, *charts]
