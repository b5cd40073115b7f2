"""Corpus data model and file formats.

Three file formats are handled here:

* M2 gold files: stanzas of one ``S`` source line followed by ``A`` edit
  lines, blank-line separated. Each ``A`` line carries a token span, an
  error type (parsed, then discarded), a replacement, two flag fields
  (ignored) and an annotator id.
* Parallel text: one tokenized sentence per line, aligned by line number
  across files.
* Score files: TSV with a ``system<TAB>sentence_index<TAB>score`` header,
  one row per (system, sentence) pair.

Tokenization is whitespace-only throughout and comparisons are
case-sensitive. All writes go through :func:`atomic_write_text` so readers
never observe a half-written file.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence


class M2ParseError(ValueError):
    """A structurally malformed M2 file (bad prefix, field count, span)."""


class ValidationError(ValueError):
    """Structurally valid input that violates a data invariant."""


# M2 spelling of an empty replacement.
_M2_EMPTY = "-NONE-"


class TokenSentence(tuple):
    """A tokenized sentence: an immutable sequence of tokens.

    Tokens are non-empty and contain no whitespace, so joining with single
    spaces and re-splitting is an exact roundtrip.

    >>> s = TokenSentence.parse("I likes turtles .")
    >>> s[1]
    'likes'
    >>> TokenSentence.parse(s.text) == s
    True
    """

    __slots__ = ()

    def __new__(cls, tokens: Iterable[str] = ()) -> "TokenSentence":
        toks = tuple(tokens)
        for t in toks:
            if not isinstance(t, str) or not t:
                raise ValidationError(f"empty or non-string token: {t!r}")
            if any(c.isspace() for c in t):
                raise ValidationError(f"token contains whitespace: {t!r}")
        return super().__new__(cls, toks)

    @classmethod
    def parse(cls, text: str) -> "TokenSentence":
        """Split ``text`` on whitespace. The empty string gives zero tokens."""
        return cls(text.split())

    @property
    def text(self) -> str:
        """Tokens joined by single spaces."""
        return " ".join(self)


class Edit(NamedTuple):
    """A span replacement on a tokenized source sentence.

    Replaces ``source[start:end]`` with ``replacement``. ``start == end``
    is an insertion before position ``start``. An edit bound to a source
    must satisfy ``0 <= start <= end <= len(source)`` and must not be a
    no-op (``replacement != source[start:end]``).

    Edits compare and hash by value, so identical corrections proposed by
    different systems collapse to one key.
    """

    start: int
    end: int
    replacement: tuple[str, ...]


def check_edit(edit: Edit, source: Sequence[str]) -> None:
    """Raise :class:`ValidationError` unless ``edit`` is valid on ``source``."""
    if not (0 <= edit.start <= edit.end <= len(source)):
        raise ValidationError(
            f"edit span ({edit.start},{edit.end}) out of bounds for "
            f"{len(source)}-token sentence"
        )
    if tuple(edit.replacement) == tuple(source[edit.start : edit.end]):
        raise ValidationError(
            f"no-op edit at ({edit.start},{edit.end}): replacement equals source span"
        )


def _check_annotation(source: Sequence[str], edits: Sequence[Edit]) -> None:
    # Deferred import: align needs Edit from this module.
    from .align import _nested_insertion, overlaps

    for e in edits:
        check_edit(e, source)
    for i, a in enumerate(edits):
        for b in edits[i + 1 :]:
            # an annotation is one coherent correction, so it must also be
            # applicable: reject insertions nested inside a replaced span,
            # which overlaps() alone does not flag
            if overlaps(a, b) or _nested_insertion(a, b):
                raise ValidationError(f"overlapping edits in one annotation: {a} / {b}")


@dataclass(frozen=True)
class GoldSentence:
    """A source sentence with one edit set per annotator.

    ``annotations[k]`` is annotator ``k``'s complete correction of the
    source, kept sorted by (start, end). An empty set is a valid annotation
    meaning "needs no correction". Annotator ids are the positions in the
    tuple, contiguous from 0.
    """

    source: TokenSentence
    annotations: tuple[tuple[Edit, ...], ...]

    def __post_init__(self) -> None:
        anns = tuple(
            tuple(sorted(ann, key=lambda e: (e.start, e.end))) for ann in self.annotations
        )
        object.__setattr__(self, "annotations", anns)
        if not isinstance(self.source, TokenSentence):
            object.__setattr__(self, "source", TokenSentence(self.source))
        if not anns:
            raise ValidationError("a gold sentence needs at least one annotation set")
        for ann in anns:
            _check_annotation(self.source, ann)

    def corrected(self, annotator: int) -> TokenSentence:
        """The source with annotator's edits applied."""
        from .align import apply_edits

        return apply_edits(self.source, self.annotations[annotator])


@dataclass(frozen=True)
class SystemOutput:
    """One system's corrected sentences, aligned 1:1 with the corpus."""

    name: str
    sentences: tuple[TokenSentence, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("system name must be non-empty")
        sents = tuple(
            s if isinstance(s, TokenSentence) else TokenSentence(s) for s in self.sentences
        )
        object.__setattr__(self, "sentences", sents)


# ---------------------------------------------------------------------------
# M2 gold files


def parse_m2(text: str) -> list[GoldSentence]:
    """Parse M2 text into gold sentences.

    Edit type strings are discarded: edit identity is (start, end,
    replacement). A ``-1 -1`` span marks an annotator's explicit "no
    correction needed" and yields an empty edit set for that annotator.
    A stanza with no ``A`` lines gets a single empty annotation set.
    Annotator ids are compacted to contiguous integers from 0, in
    ascending order of the ids found in the file.

    Raises :class:`M2ParseError` (with the 1-based line number) on
    malformed lines, :class:`ValidationError` on out-of-bounds spans or
    overlapping edits within one annotator.
    """
    sentences: list[GoldSentence] = []
    source: TokenSentence | None = None
    by_annotator: dict[int, list[Edit]] = {}
    stanza_line = 0

    def flush() -> None:
        nonlocal source, by_annotator
        if source is None:
            return
        if by_annotator:
            anns = tuple(tuple(by_annotator[k]) for k in sorted(by_annotator))
        else:
            anns = ((),)
        try:
            sentences.append(GoldSentence(source, anns))
        except ValidationError as err:
            raise ValidationError(f"stanza at line {stanza_line}: {err}") from None
        source, by_annotator = None, {}

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            flush()
            continue
        if line.startswith("S ") or line == "S":
            if source is not None:
                raise M2ParseError(f"line {lineno}: stanza has a second S line")
            source = TokenSentence.parse(line[2:])
            stanza_line = lineno
            if not source:
                raise M2ParseError(f"line {lineno}: empty source sentence")
        elif line.startswith("A "):
            if source is None:
                raise M2ParseError(f"line {lineno}: A line before any S line")
            fields = line[2:].split("|||")
            if len(fields) != 6:
                raise M2ParseError(
                    f"line {lineno}: expected 6 |||-separated fields, got {len(fields)}"
                )
            span = fields[0].split()
            if len(span) != 2:
                raise M2ParseError(f"line {lineno}: span must be two integers")
            try:
                start, end = int(span[0]), int(span[1])
            except ValueError:
                raise M2ParseError(f"line {lineno}: non-integer span {fields[0]!r}") from None
            try:
                annotator = int(fields[5])
            except ValueError:
                raise M2ParseError(
                    f"line {lineno}: non-integer annotator id {fields[5]!r}"
                ) from None
            edits = by_annotator.setdefault(annotator, [])
            if start == -1 and end == -1:
                continue  # noop marker: annotator registered, no edit
            repl_field = fields[2].strip()
            replacement = () if repl_field == _M2_EMPTY else tuple(repl_field.split())
            edits.append(Edit(start, end, replacement))
        else:
            raise M2ParseError(f"line {lineno}: expected S or A prefix: {line!r}")
    flush()
    return sentences


def serialize_m2(sentences: Sequence[GoldSentence]) -> str:
    """Render gold sentences as M2 text; inverse of :func:`parse_m2`.

    Types are emitted as ``UNK`` (they are not modeled), empty replacements
    as ``-NONE-``, and explicit empty annotation sets as ``noop`` lines, so
    ``parse_m2(serialize_m2(xs)) == xs``.
    """
    chunks: list[str] = []
    for gs in sentences:
        lines = [f"S {gs.source.text}"]
        for ann_id, ann in enumerate(gs.annotations):
            if not ann:
                lines.append(f"A -1 -1|||noop|||{_M2_EMPTY}|||REQUIRED|||{_M2_EMPTY}|||{ann_id}")
                continue
            for e in ann:
                repl = " ".join(e.replacement) if e.replacement else _M2_EMPTY
                lines.append(
                    f"A {e.start} {e.end}|||UNK|||{repl}|||REQUIRED|||{_M2_EMPTY}|||{ann_id}"
                )
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def load_m2(path: str | Path) -> list[GoldSentence]:
    return parse_m2(Path(path).read_text(encoding="utf-8"))


def save_m2(path: str | Path, sentences: Sequence[GoldSentence]) -> None:
    atomic_write_text(path, serialize_m2(sentences))


# ---------------------------------------------------------------------------
# Parallel text files


def load_parallel(path: str | Path, expected_len: int | None = None) -> list[TokenSentence]:
    """Read one sentence per line.

    Raises :class:`ValidationError` on empty lines (a sentence must have at
    least one token) or when the file does not have ``expected_len`` lines.
    """
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    lines = text.split("\n") if text else []
    sentences = []
    for lineno, line in enumerate(lines, start=1):
        s = TokenSentence.parse(line.rstrip("\r"))
        if not s:
            raise ValidationError(f"{path}: line {lineno} is empty")
        sentences.append(s)
    if expected_len is not None and len(sentences) != expected_len:
        raise ValidationError(
            f"{path}: expected {expected_len} sentences, found {len(sentences)}"
        )
    return sentences


def save_parallel(path: str | Path, sentences: Iterable[TokenSentence]) -> None:
    atomic_write_text(path, serialize_parallel(sentences))


def serialize_parallel(sentences: Iterable[TokenSentence]) -> str:
    return "".join(s.text + "\n" for s in sentences)


def load_system_output(
    path: str | Path, name: str | None = None, expected_len: int | None = None
) -> SystemOutput:
    """Read a parallel text file as a named system; name defaults to the file stem."""
    p = Path(path)
    return SystemOutput(name or p.stem, tuple(load_parallel(p, expected_len)))


# ---------------------------------------------------------------------------
# Score files

SCORE_FILE_HEADER = "system\tsentence_index\tscore"


@dataclass
class ScoreFile:
    """Per-sentence quality scores keyed by (system name, sentence index)."""

    scores: dict[tuple[str, int], float]

    def get(self, system: str, index: int) -> float:
        try:
            return self.scores[(system, index)]
        except KeyError:
            raise KeyError(f"no score for system {system!r}, sentence {index}") from None

    @property
    def systems(self) -> tuple[str, ...]:
        return tuple(sorted({sys for sys, _ in self.scores}))


def parse_score_file(text: str) -> ScoreFile:
    """Parse score TSV. Requires the exact header; rejects duplicate keys."""
    lines = text.rstrip("\n").split("\n")
    if not lines or lines[0].rstrip("\r") != SCORE_FILE_HEADER:
        raise ValidationError(f"score file must start with header {SCORE_FILE_HEADER!r}")
    scores: dict[tuple[str, int], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValidationError(f"score file line {lineno}: expected 3 columns")
        try:
            key = (parts[0], int(parts[1]))
            value = float(parts[2])
        except ValueError:
            raise ValidationError(f"score file line {lineno}: bad index or score") from None
        if key in scores:
            raise ValidationError(f"score file line {lineno}: duplicate entry for {key}")
        scores[key] = value
    return ScoreFile(scores)


def load_score_file(path: str | Path) -> ScoreFile:
    return parse_score_file(Path(path).read_text(encoding="utf-8"))


def serialize_score_file(scores: ScoreFile) -> str:
    lines = [SCORE_FILE_HEADER]
    for (system, index), value in sorted(scores.scores.items()):
        lines.append(f"{system}\t{index}\t{value!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file and rename, so partial output is never visible."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
