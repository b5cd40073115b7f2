"""Majority-vote ensembling over edit spans.

Every member system's output is reduced to an edit set against the shared
source; identical edits (same span, same replacement) pool their votes.
Edits surviving the vote threshold are applied greedily in decreasing-vote
order, skipping anything that conflicts with an edit already applied.
Second-order ensembling is the same operation with ensemble outputs as the
members; there is no separate code path.

All tie-breaking depends only on edit content, so results are invariant
under reordering of the member systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .align import _nested_insertion, apply_edits, extract_edits, overlaps
from .corpus import Edit, SystemOutput, TokenSentence, ValidationError


@dataclass(frozen=True)
class VotedEdit:
    """An edit plus the members that proposed it."""

    edit: Edit
    votes: int
    systems: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "systems", frozenset(self.systems))
        if self.votes != len(self.systems):
            raise ValidationError(
                f"vote count {self.votes} != {len(self.systems)} proposing systems"
            )


def pool_edits(
    source: TokenSentence, outputs: Sequence[tuple[str, TokenSentence]]
) -> list[VotedEdit]:
    """Extract and pool all member edits for one sentence.

    Returns one :class:`VotedEdit` per distinct (start, end, replacement)
    key, sorted by position.
    """
    by_edit: dict[Edit, set[str]] = {}
    for name, sentence in outputs:
        for edit in extract_edits(source, sentence):
            by_edit.setdefault(edit, set()).add(name)
    return [
        VotedEdit(edit, len(names), frozenset(names))
        for edit, names in sorted(by_edit.items())
    ]


def majority_vote(
    source: TokenSentence,
    outputs: Sequence[tuple[str, TokenSentence]],
    n_min: int,
) -> TokenSentence:
    """Apply the edits proposed by strictly more than ``n_min`` members.

    Surviving edits are applied in decreasing-vote order (vote ties by
    (start, end, replacement)); an edit conflicting with one already
    applied is skipped.
    """
    kept = voted_edits(source, outputs, n_min)
    return apply_edits(source, kept)


def voted_edits(
    source: TokenSentence,
    outputs: Sequence[tuple[str, TokenSentence]],
    n_min: int,
) -> list[Edit]:
    """The edit set majority_vote applies, in application order."""
    survivors = [ve for ve in pool_edits(source, outputs) if ve.votes > n_min]
    survivors.sort(key=lambda ve: (-ve.votes, ve.edit))
    kept: list[Edit] = []
    for ve in survivors:
        edit = ve.edit
        # overlaps() is the contract predicate; the nested-insertion guard
        # additionally drops zero-width edits falling strictly inside an
        # applied span, which the predicate leaves unflagged but which no
        # application order could honor.
        if any(overlaps(edit, k) or _nested_insertion(edit, k) for k in kept):
            continue
        kept.append(edit)
    return kept


def majority_vote_corpus(
    sources: Sequence[TokenSentence],
    outputs: Sequence[SystemOutput],
    n_min: int,
    name: str | None = None,
) -> SystemOutput:
    """Per-sentence majority vote over aligned member systems.

    The ensemble's name records the members and the threshold unless an
    explicit ``name`` is given.
    """
    for out in outputs:
        if len(out.sentences) != len(sources):
            raise ValidationError(
                f"system {out.name!r} has {len(out.sentences)} sentences, "
                f"expected {len(sources)}"
            )
    if not (0 <= n_min <= len(outputs)):
        raise ValidationError(f"n_min must be within 0..{len(outputs)}, got {n_min}")
    members = [out.name for out in outputs]
    sentences = []
    for i, source in enumerate(sources):
        per_system = [(out.name, out.sentences[i]) for out in outputs]
        try:
            sentences.append(majority_vote(source, per_system, n_min))
        except ValidationError as err:
            raise ValidationError(f"sentence {i}: {err}") from None
    label = name or f"majority-vote(n_min={n_min})[{'+'.join(members)}]"
    return SystemOutput(label, tuple(sentences))
