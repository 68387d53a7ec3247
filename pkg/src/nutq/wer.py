"""Label error-rate scoring via minimal edit distance.

Aligns a hypothesis label sequence against a reference with unit costs for
deletions, substitutions, and insertions (hits are free) and reports

    percent_correct = 100 * (N - D - S) / N
    wer             = 100 - percent_correct

where N is the reference length.  Insertions do not enter percent_correct;
they are counted and reported separately.  Labels can come from any alphabet
(words, phonemes, ...).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyReference

__all__ = [
    "EditOps", "WerReport", "align_labels", "compute_wer",
    "parse_transcript_file", "evaluate_transcripts", "report_text",
]


@dataclass(frozen=True)
class EditOps:
    """Operation counts from one or more reference/hypothesis alignments."""

    hits: int
    deletions: int
    substitutions: int
    insertions: int

    def __post_init__(self):
        counts = (self.hits, self.deletions, self.substitutions, self.insertions)
        if any(c < 0 for c in counts):
            raise ValueError("operation counts must be non-negative")

    @property
    def reference_count(self) -> int:
        """N: every reference label is hit, deleted, or substituted."""
        return self.hits + self.deletions + self.substitutions

    def __add__(self, other: "EditOps") -> "EditOps":
        return EditOps(self.hits + other.hits,
                       self.deletions + other.deletions,
                       self.substitutions + other.substitutions,
                       self.insertions + other.insertions)


@dataclass(frozen=True)
class WerReport:
    ops: EditOps
    percent_correct: float
    wer: float

    def to_dict(self) -> dict:
        return {
            "reference_count": self.ops.reference_count,
            "hits": self.ops.hits,
            "deletions": self.ops.deletions,
            "substitutions": self.ops.substitutions,
            "insertions": self.ops.insertions,
            "percent_correct": self.percent_correct,
            "wer": self.wer,
        }


def align_labels(reference, hypothesis) -> EditOps:
    """Count edit operations of a minimal-cost alignment.

    Among minimal alignments a substitution is preferred over an
    insertion-plus-deletion pair.  Raises EmptyReference when there is
    nothing to score against.
    """
    ref = tuple(reference)
    hyp = tuple(hypothesis)
    if not ref:
        raise EmptyReference("reference label sequence is empty")

    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        for j in range(1, m + 1):
            step = 0 if ref[i - 1] == hyp[j - 1] else 1
            row[j] = min(prev[j - 1] + step, prev[j] + 1, row[j - 1] + 1)

    hits = deletions = substitutions = insertions = 0
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0:
            step = 0 if ref[i - 1] == hyp[j - 1] else 1
            if dist[i - 1][j - 1] + step == here:
                if step:
                    substitutions += 1
                else:
                    hits += 1
                i -= 1
                j -= 1
                continue
        # no diagonal move: prefer the op that shrinks the longer remainder,
        # so swapping the inputs mirrors deletions and insertions
        take_deletion = i > 0 and dist[i - 1][j] + 1 == here and (
            j == 0 or dist[i][j - 1] + 1 != here or i >= j)
        if take_deletion:
            deletions += 1
            i -= 1
        else:
            insertions += 1
            j -= 1
    return EditOps(hits, deletions, substitutions, insertions)


def compute_wer(ops: EditOps) -> WerReport:
    """Score operation counts with insertions excluded from percent_correct."""
    n = ops.reference_count
    if n == 0:
        raise EmptyReference("no reference labels to score")
    percent_correct = 100.0 * (n - ops.deletions - ops.substitutions) / n
    return WerReport(ops=ops, percent_correct=percent_correct,
                     wer=100.0 - percent_correct)


def parse_transcript_file(text: str) -> dict:
    """Parse `utt-id label label ...` lines into an ordered mapping.

    Blank lines and lines starting with # are skipped.  A line holding only
    an utterance id maps to an empty label sequence.
    """
    utterances: dict[str, tuple[str, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        utt_id, *labels = line.split()
        if utt_id in utterances:
            raise ValueError(f"line {lineno}: duplicate utterance id {utt_id!r}")
        utterances[utt_id] = tuple(labels)
    return utterances


def evaluate_transcripts(reference: dict, hypothesis: dict) -> WerReport:
    """Aggregate edit operations across utterances and score the total.

    Utterances missing from the hypothesis count as empty hypotheses (all
    deletions).  Hypothesis utterances without a reference are an error.
    """
    if not reference:
        raise EmptyReference("no reference utterances")
    extra = sorted(set(hypothesis) - set(reference))
    if extra:
        raise ValueError(f"hypothesis utterances without a reference: {extra}")
    total = EditOps(0, 0, 0, 0)
    for utt_id, ref_labels in reference.items():
        if not ref_labels:
            raise EmptyReference(f"utterance {utt_id!r} has an empty reference")
        hyp_labels = hypothesis.get(utt_id, ())
        total = total + align_labels(ref_labels, hyp_labels)
    return compute_wer(total)


def report_text(report: WerReport) -> str:
    """Human-readable scoring summary."""
    ops = report.ops
    return "\n".join([
        f"labels        {ops.reference_count}",
        f"hits          {ops.hits}",
        f"deletions     {ops.deletions}",
        f"substitutions {ops.substitutions}",
        f"insertions    {ops.insertions}",
        f"correct       {report.percent_correct:.1f}%",
        f"wer           {report.wer:.1f}%",
    ])
