"""Corpus scoring vs. an independent brute-force oracle, plus pinned values."""

import math

import pytest
from hypothesis import given, settings

from bruteforce import brute_force_score
from conftest import corpora_with_hypotheses
from geckit.corpus import Edit, GoldSentence, SystemOutput, TokenSentence, ValidationError
from geckit.scoring import (
    f_beta,
    report_table,
    round_score,
    score_corpus,
    sentence_counts,
)


def gs(src: str, *anns):
    return GoldSentence(
        TokenSentence(src.split()), tuple(tuple(a) for a in anns) or ((),)
    )


def as_output(*sentences):
    return SystemOutput("hyp", tuple(TokenSentence(s.split()) for s in sentences))


def test_f_beta_values():
    assert f_beta(1.0, 1.0) == 1.0
    assert f_beta(0.0, 1.0) == 0.0
    assert f_beta(1.0, 0.0) == 0.0
    # precision 1, recall 1/2: (1 + 0.25) * 0.5 / (0.25 + 0.5)
    assert math.isclose(f_beta(1.0, 0.5), 0.625 / 0.75)
    assert math.isclose(f_beta(0.5, 0.5), 0.5)


def test_f_beta_weights_precision_over_recall():
    assert f_beta(0.8, 0.4) > f_beta(0.4, 0.8)


def test_sentence_counts_example():
    gold = [Edit(1, 2, ("like",)), Edit(3, 5, ("a", "lot"))]
    proposed = [Edit(1, 2, ("like",)), Edit(0, 1, ("X",))]
    c = sentence_counts(proposed, gold)
    assert (c.n_correct, c.n_proposed, c.n_gold) == (1, 2, 2)


def test_perfect_hypothesis_scores_one():
    gold = [gs("I likes turtles .", [Edit(1, 2, ("like",))])]
    report = score_corpus(as_output("I like turtles ."), gold)
    assert (report.precision, report.recall, report.f05) == (1.0, 1.0, 1.0)


def test_unedited_hypothesis_has_perfect_precision_zero_recall():
    gold = [gs("I likes turtles .", [Edit(1, 2, ("like",))])]
    report = score_corpus(as_output("I likes turtles ."), gold)
    assert report.precision == 1.0  # proposed nothing, broke nothing
    assert report.recall == 0.0
    assert report.f05 == 0.0


def test_single_annotator_closed_form():
    gold = [
        gs("a b c d", [Edit(0, 1, ("x",)), Edit(2, 3, ("y",))]),
        gs("e f g", [Edit(1, 2, ("z",))]),
    ]
    # hyp gets one of two edits right in sentence 0, proposes a wrong one in 1
    report = score_corpus(as_output("x b c d", "e q g"), gold)
    assert report.totals == (1, 2, 3)
    assert math.isclose(report.precision, 0.5)
    assert math.isclose(report.recall, 1 / 3)
    assert math.isclose(report.f05, f_beta(0.5, 1 / 3))


def test_annotator_choice_maximizes_f():
    # annotator 0 matches nothing, annotator 1 matches the proposal
    gold = [
        gs(
            "a b c",
            [Edit(0, 1, ("q",))],
            [Edit(0, 1, ("x",))],
        )
    ]
    report = score_corpus(as_output("x b c"), gold)
    assert report.f05 == 1.0
    assert report.per_sentence[0][0] == 1  # chosen annotator id


def test_tie_goes_to_lowest_annotator_id():
    gold = [gs("a b c", [Edit(0, 1, ("x",))], [Edit(0, 1, ("x",))])]
    report = score_corpus(as_output("x b c"), gold)
    assert report.per_sentence[0][0] == 0


def test_length_mismatch_rejected():
    gold = [gs("a b", [Edit(0, 1, ("x",))])]
    with pytest.raises(ValidationError):
        score_corpus(as_output("x b", "extra sentence"), gold)


@settings(max_examples=300, deadline=None)
@given(corpora_with_hypotheses())
def test_matches_brute_force(corpus):
    """The running-totals shortcut equals per-step re-summation from scratch."""
    gold, hyps = corpus
    report = score_corpus(SystemOutput("h", tuple(hyps)), gold)
    p, r, f, c, np_, g, assignment = brute_force_score(hyps, gold)
    assert tuple(report.totals) == (c, np_, g)
    assert abs(report.f05 - f) < 1e-12
    assert abs(report.precision - p) < 1e-12
    assert abs(report.recall - r) < 1e-12
    assert [ann for ann, _ in report.per_sentence] == assignment


@settings(max_examples=150, deadline=None)
@given(corpora_with_hypotheses())
def test_identity_hypothesis_never_loses_precision(corpus):
    gold, _ = corpus
    hyps = [g.source for g in gold]
    report = score_corpus(SystemOutput("h", tuple(hyps)), gold)
    assert report.precision == 1.0
    assert report.totals.n_proposed == 0


def test_round_score_is_half_up_one_decimal():
    assert round_score(0.7185) == 71.9
    assert round_score(0.87249) == 87.2
    assert round_score(0.8725) == 87.3
    assert round_score(1.0) == 100.0
    assert round_score(0.0) == 0.0


def test_report_table_shows_rounded_percentages():
    gold = [gs("I likes turtles .", [Edit(1, 2, ("like",))])]
    table = report_table(score_corpus(as_output("I like turtles ."), gold))
    assert "100.0" in table
    assert "F0.5" in table
