"""Gold-informed upper-bound baselines.

Two oracles bound what ensembling and ranking could ever achieve:

* Oracle-ensembling pools every member's edits and keeps those present in
  the gold annotation with the largest pool intersection, thinned so the
  applied set survives scoring re-extraction verbatim. Every edit the
  scorer sees is then a gold edit, keeping precision at 100.
* Oracle-ranking picks, per sentence, the member output with the best
  (F0.5, n_correct, -n_proposed) against its most favorable annotator.

Both emit audit records of what they chose for offline inspection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .align import apply_edits, extract_edits
from .corpus import Edit, GoldSentence, SystemOutput, TokenSentence, ValidationError
from .scoring import f_beta, sentence_counts


@dataclass(frozen=True)
class OracleChoice:
    """One oracle decision: which annotator and what was selected."""

    sentence_index: int
    method: str  # "oracle-ensemble" | "oracle-rank"
    annotator: int
    system: str | None  # ranking only
    n_selected: int


def oracle_ensemble(
    source: TokenSentence,
    outputs: Sequence[tuple[str, TokenSentence]],
    gold: GoldSentence,
) -> TokenSentence:
    """Apply the largest pool-and-annotation edit intersection."""
    sentence, _, _ = _ensemble_choice(source, outputs, gold)
    return sentence


def _stable_subset(source: TokenSentence, edits: tuple[Edit, ...]) -> tuple[Edit, ...]:
    """Greedily keep (in position order) edits whose application re-extracts
    verbatim.

    Canonical extraction merges touching spans back into one edit, so an
    intersection holding two adjacent gold edits would be scored as a single
    unknown edit and cost precision. Dropping the later edit of such a pair
    trades a little recall for the precision guarantee.
    """
    kept: list[Edit] = []
    for edit in edits:
        trial = kept + [edit]
        if extract_edits(source, apply_edits(source, trial)) == trial:
            kept.append(edit)
    return tuple(kept)


def _ensemble_choice(
    source: TokenSentence,
    outputs: Sequence[tuple[str, TokenSentence]],
    gold: GoldSentence,
) -> tuple[TokenSentence, int, tuple[Edit, ...]]:
    pool: set[Edit] = set()
    for _, sentence in outputs:
        pool.update(extract_edits(source, sentence))
    best_id = 0
    best: set[Edit] = set()
    for ann_id, ann in enumerate(gold.annotations):
        selected = pool & set(ann)
        # Strictly larger wins; the lowest annotator id keeps ties.
        if ann_id == 0 or len(selected) > len(best):
            best_id, best = ann_id, selected
    chosen = tuple(sorted(best))
    applied = apply_edits(source, chosen)
    if extract_edits(source, applied) != list(chosen):
        chosen = _stable_subset(source, chosen)
        applied = apply_edits(source, chosen)
    return applied, best_id, chosen


def _candidate_key(
    source: TokenSentence, sentence: TokenSentence, gold: GoldSentence
) -> tuple[tuple[float, int, int], int]:
    """Best per-annotator (f05, n_correct, -n_proposed) for one candidate."""
    edits = extract_edits(source, sentence)
    best_key: tuple[float, int, int] | None = None
    best_ann = 0
    for ann_id, ann in enumerate(gold.annotations):
        c = sentence_counts(edits, ann)
        p = c.n_correct / c.n_proposed if c.n_proposed else 1.0
        r = c.n_correct / c.n_gold if c.n_gold else 1.0
        key = (f_beta(p, r), c.n_correct, -c.n_proposed)
        if best_key is None or key > best_key:
            best_key, best_ann = key, ann_id
    assert best_key is not None
    return best_key, best_ann


def oracle_rank(
    source: TokenSentence,
    outputs: Sequence[tuple[str, TokenSentence]],
    gold: GoldSentence,
) -> tuple[str, TokenSentence]:
    """Select the candidate with the best score against its best annotator.

    Full ties keep the earliest candidate in input order.
    """
    if not outputs:
        raise ValidationError("oracle_rank needs at least one candidate")
    best = max(
        outputs,
        key=lambda cand: _candidate_key(source, cand[1], gold)[0],
    )
    return best


def oracle_ensemble_corpus(
    gold: Sequence[GoldSentence],
    outputs: Sequence[SystemOutput],
    name: str = "oracle-ensemble",
) -> tuple[SystemOutput, list[OracleChoice]]:
    """Corpus-level oracle ensembling with an audit trail."""
    _check_aligned(gold, outputs)
    sentences = []
    choices = []
    for i, gs in enumerate(gold):
        per_system = [(out.name, out.sentences[i]) for out in outputs]
        sentence, ann_id, selected = _ensemble_choice(gs.source, per_system, gs)
        sentences.append(sentence)
        choices.append(OracleChoice(i, "oracle-ensemble", ann_id, None, len(selected)))
    return SystemOutput(name, tuple(sentences)), choices


def oracle_rank_corpus(
    gold: Sequence[GoldSentence],
    outputs: Sequence[SystemOutput],
    name: str = "oracle-rank",
) -> tuple[SystemOutput, list[OracleChoice]]:
    """Corpus-level oracle ranking with an audit trail."""
    _check_aligned(gold, outputs)
    sentences = []
    choices = []
    for i, gs in enumerate(gold):
        per_system = [(out.name, out.sentences[i]) for out in outputs]
        sys_name, sentence = oracle_rank(gs.source, per_system, gs)
        key, ann_id = _candidate_key(gs.source, sentence, gs)
        sentences.append(sentence)
        choices.append(OracleChoice(i, "oracle-rank", ann_id, sys_name, key[1]))
    return SystemOutput(name, tuple(sentences)), choices


def choices_tsv(choices: Sequence[OracleChoice]) -> str:
    """Audit log: sentence index, method, annotator, system, n_selected."""
    lines = ["sentence_index\tmethod\tannotator\tsystem\tn_selected"]
    for ch in choices:
        lines.append(
            f"{ch.sentence_index}\t{ch.method}\t{ch.annotator}\t{ch.system or '-'}\t{ch.n_selected}"
        )
    return "\n".join(lines) + "\n"


def _check_aligned(gold: Sequence[GoldSentence], outputs: Sequence[SystemOutput]) -> None:
    for out in outputs:
        if len(out.sentences) != len(gold):
            raise ValidationError(
                f"system {out.name!r} has {len(out.sentences)} sentences, "
                f"gold corpus has {len(gold)}"
            )
