"""Corpus-level Precision / Recall / F0.5 scoring.

The scorer walks the corpus in order keeping running totals of correct,
proposed and gold edit counts. Gold files carry several annotators per
sentence; for each sentence the scorer evaluates every annotator's edit
set against the hypothesis edits and keeps the one that maximizes the
cumulative corpus (F0.5, n_correct, -n_proposed), lexicographically,
breaking remaining ties toward the lowest annotator id. This sequential
most-favorable-annotator rule is greedy, not a global optimum; it matches
the reference scorer's behavior.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, NamedTuple, Sequence

from .align import extract_edits
from .corpus import Edit, GoldSentence, SystemOutput, ValidationError


class SentenceCounts(NamedTuple):
    """Edit-match counts for one sentence against one annotation."""

    n_correct: int
    n_proposed: int
    n_gold: int

    def plus(self, other: "SentenceCounts") -> "SentenceCounts":
        return SentenceCounts(
            self.n_correct + other.n_correct,
            self.n_proposed + other.n_proposed,
            self.n_gold + other.n_gold,
        )


@dataclass(frozen=True)
class ScoreReport:
    """Corpus totals plus the per-sentence annotator choices behind them.

    ``precision``, ``recall`` and ``f05`` are fractions in [0, 1]; use
    :func:`report_table` / :func:`report_tsv` for the conventional
    x100, one-decimal presentation.
    """

    precision: float
    recall: float
    f05: float
    totals: SentenceCounts
    per_sentence: tuple[tuple[int, SentenceCounts], ...]


def f_beta(p: float, r: float, beta: float = 0.5) -> float:
    """Weighted F-measure; 0.0 whenever either input is 0.

    >>> f_beta(0.5, 0.5)
    0.5
    """
    if p * r == 0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * p * r / (b2 * p + r)


def sentence_counts(hyp_edits: Iterable[Edit], gold_edits: Iterable[Edit]) -> SentenceCounts:
    """Count exact (start, end, replacement) matches between edit sets."""
    hyp = set(hyp_edits)
    gold = set(gold_edits)
    return SentenceCounts(len(hyp & gold), len(hyp), len(gold))


def _prf(totals: SentenceCounts, beta: float) -> tuple[float, float, float]:
    # Zero-denominator conventions: no proposals means perfect precision,
    # no gold edits means perfect recall.
    p = totals.n_correct / totals.n_proposed if totals.n_proposed else 1.0
    r = totals.n_correct / totals.n_gold if totals.n_gold else 1.0
    return p, r, f_beta(p, r, beta)


def score_corpus(
    hypothesis: SystemOutput, gold: Sequence[GoldSentence], beta: float = 0.5
) -> ScoreReport:
    """Score a system against a multi-annotator gold corpus.

    Hypothesis edits are recovered with :func:`geckit.align.extract_edits`
    against each gold source. Raises :class:`ValidationError` when the
    hypothesis and gold corpus lengths differ.
    """
    if len(hypothesis.sentences) != len(gold):
        raise ValidationError(
            f"hypothesis {hypothesis.name!r} has {len(hypothesis.sentences)} sentences, "
            f"gold corpus has {len(gold)}"
        )
    totals = SentenceCounts(0, 0, 0)
    chosen: list[tuple[int, SentenceCounts]] = []
    for gs, hyp_sentence in zip(gold, hypothesis.sentences):
        hyp_edits = extract_edits(gs.source, hyp_sentence)
        best_key: tuple[float, int, int] | None = None
        best: tuple[int, SentenceCounts] | None = None
        for ann_id, ann in enumerate(gs.annotations):
            counts = sentence_counts(hyp_edits, ann)
            candidate = totals.plus(counts)
            _, _, f = _prf(candidate, beta)
            key = (f, candidate.n_correct, -candidate.n_proposed)
            # Strict comparison: the lowest annotator id wins full ties.
            if best_key is None or key > best_key:
                best_key = key
                best = (ann_id, counts)
        assert best is not None  # GoldSentence guarantees >= 1 annotation
        totals = totals.plus(best[1])
        chosen.append(best)
    p, r, f = _prf(totals, beta)
    return ScoreReport(p, r, f, totals, tuple(chosen))


# ---------------------------------------------------------------------------
# Presentation

_REPORT_COLUMNS = ("P", "R", "F0.5", "n_correct", "n_proposed", "n_gold")


def round_score(fraction: float) -> float:
    """Scale a [0,1] fraction to x100 and round half-up to 1 decimal."""
    return float((Decimal(repr(fraction)) * 100).quantize(Decimal("0.1"), ROUND_HALF_UP))


def _report_row(report: ScoreReport) -> tuple[str, ...]:
    return (
        f"{round_score(report.precision):.1f}",
        f"{round_score(report.recall):.1f}",
        f"{round_score(report.f05):.1f}",
        str(report.totals.n_correct),
        str(report.totals.n_proposed),
        str(report.totals.n_gold),
    )


def report_tsv(report: ScoreReport) -> str:
    row = _report_row(report)
    return "\t".join(_REPORT_COLUMNS) + "\n" + "\t".join(row) + "\n"


def report_table(report: ScoreReport) -> str:
    row = _report_row(report)
    widths = [max(len(h), len(v)) for h, v in zip(_REPORT_COLUMNS, row)]
    head = "  ".join(h.rjust(w) for h, w in zip(_REPORT_COLUMNS, widths))
    body = "  ".join(v.rjust(w) for v, w in zip(row, widths))
    return head + "\n" + body + "\n"
