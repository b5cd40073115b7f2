"""Config loading, experiment dispatch, ablations, and rerun determinism."""

import json

import pytest

from geckit.corpus import ValidationError, load_parallel
from geckit.experiment import (
    ExperimentConfig,
    ablation_remove_one,
    load_config,
    run_experiment,
    sweep_n_min,
)

GOLD = """S I likes turtles very much .
A 1 2|||SVA|||like|||REQUIRED|||-NONE-|||0

S She go to school yesterday .
A 1 2|||Vt|||went|||REQUIRED|||-NONE-|||0

S Nothing wrong here .
A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0
"""

SYSTEMS = {
    "a": ["I like turtles very much .", "She went to school yesterday .", "Nothing wrong here ."],
    "b": ["I like turtles very much .", "She go to school yesterday .", "Nothing wrong here ."],
    "c": ["I likes turtles very much .", "She went to school yesterday .", "Nothing wrong here ."],
    # proposes only edits nobody else does
    "noise": ["I likes turtles very miau .", "She go to miau yesterday .", "Nothing miau here ."],
}


def write_fixture(tmp_path, systems=("a", "b", "c")):
    (tmp_path / "gold.m2").write_text(GOLD, encoding="utf-8")
    for name in systems:
        (tmp_path / f"{name}.txt").write_text(
            "\n".join(SYSTEMS[name]) + "\n", encoding="utf-8"
        )
    return {
        "name": "fixture",
        "method": "vote",
        "gold": "gold.m2",
        "n_min": 1,
        "output_dir": "results",
        "systems": [f"{n}.txt" for n in systems],
    }


def write_config(tmp_path, payload):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_load_config_resolves_paths_relative_to_config(tmp_path):
    payload = write_fixture(tmp_path)
    config = load_config(write_config(tmp_path, payload))
    assert config.gold_path == tmp_path / "gold.m2"
    assert config.systems[0] == ("a", tmp_path / "a.txt")
    assert config.output_dir == tmp_path / "results"


def test_load_config_rejects_unknown_keys(tmp_path):
    payload = write_fixture(tmp_path)
    payload["typo_key"] = 1
    with pytest.raises(ValidationError) as exc:
        load_config(write_config(tmp_path, payload))
    assert "typo_key" in str(exc.value)


def test_load_config_requires_core_keys(tmp_path):
    payload = write_fixture(tmp_path)
    del payload["method"]
    with pytest.raises(ValidationError):
        load_config(write_config(tmp_path, payload))


def test_config_validation_rules(tmp_path):
    payload = write_fixture(tmp_path)
    base = load_config(write_config(tmp_path, payload))
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**base.__dict__, "method": "sorcery"})
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**base.__dict__, "method": "rank"})  # no scores
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**base.__dict__, "method": "aggr-rank"})  # needs 2
    with pytest.raises(ValidationError):
        ExperimentConfig(**{**base.__dict__, "systems": ()})
    with pytest.raises(ValidationError):
        ExperimentConfig(
            **{**base.__dict__, "systems": (("x", tmp_path / "a.txt"),) * 2}
        )


def test_system_entries_accept_name_equals_path_and_dicts(tmp_path):
    payload = write_fixture(tmp_path)
    payload["systems"] = [
        "alpha=a.txt",
        {"name": "beta", "path": "b.txt"},
        "c.txt",
    ]
    config = load_config(write_config(tmp_path, payload))
    assert [name for name, _ in config.systems] == ["alpha", "beta", "c"]


def test_vote_experiment_end_to_end(tmp_path):
    config = load_config(write_config(tmp_path, write_fixture(tmp_path)))
    result = run_experiment(config)
    # 2-of-3 agreement fixes both errors
    out = load_parallel(tmp_path / "results" / "fixture.out.txt")
    assert out[0].text == "I like turtles very much ."
    assert out[1].text == "She went to school yesterday ."
    assert out[2].text == "Nothing wrong here ."
    assert result.report.f05 == 1.0
    for suffix in ("out.txt", "report.txt", "row.tsv"):
        assert (tmp_path / "results" / f"fixture.{suffix}").exists()


def test_rerun_is_bit_identical(tmp_path):
    config = load_config(write_config(tmp_path, write_fixture(tmp_path)))
    run_experiment(config)
    artifacts = sorted((tmp_path / "results").iterdir())
    first = {p.name: p.read_bytes() for p in artifacts}
    run_experiment(config)
    second = {p.name: p.read_bytes() for p in sorted((tmp_path / "results").iterdir())}
    assert first == second


def test_llm_rank_experiment_runs_and_reruns_identically(tmp_path):
    payload = write_fixture(tmp_path)
    payload.update(method="llm-rank", runs=3, seed=17, backend="mock-lexmin")
    del payload["n_min"]
    config = load_config(write_config(tmp_path, payload))
    result = run_experiment(config)
    assert len(result.reports) == 3
    assert result.spread_f05() >= 0.0
    files = {p.name for p in (tmp_path / "results").iterdir()}
    assert {"fixture.run0.txt", "fixture.run1.txt", "fixture.run2.txt"} <= files
    snapshot = {
        p.name: p.read_bytes() for p in (tmp_path / "results").iterdir()
    }
    run_experiment(config)
    assert snapshot == {
        p.name: p.read_bytes() for p in (tmp_path / "results").iterdir()
    }


def test_rank_experiment_uses_score_file(tmp_path):
    payload = write_fixture(tmp_path)
    payload.update(method="rank", scores="scores.tsv")
    del payload["n_min"]
    rows = ["system\tsentence_index\tscore"]
    for name in ("a", "b", "c"):
        for i in range(3):
            rows.append(f"{name}\t{i}\t{1.0 if name == 'a' else 0.1}")
    (tmp_path / "scores.tsv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    config = load_config(write_config(tmp_path, payload))
    result = run_experiment(config)
    assert result.outputs[0].sentences == tuple(
        load_parallel(tmp_path / "a.txt")
    )


def test_rank_experiment_reports_score_holes_with_sentence(tmp_path):
    payload = write_fixture(tmp_path)
    payload.update(method="rank", scores="scores.tsv")
    (tmp_path / "scores.tsv").write_text(
        "system\tsentence_index\tscore\na\t0\t1\nb\t0\t1\nc\t0\t1\n",
        encoding="utf-8",
    )
    config = load_config(write_config(tmp_path, payload))
    with pytest.raises(ValidationError) as exc:
        run_experiment(config)
    assert "sentence 1" in str(exc.value)


def test_aggr_rank_experiment_names_both_sides(tmp_path):
    payload = write_fixture(tmp_path, systems=("a", "b"))
    payload.update(method="aggr-rank")
    del payload["n_min"]
    config = load_config(write_config(tmp_path, payload))
    result = run_experiment(config)
    assert result.outputs[0].name == "aggr-rank[a|b]"


def test_source_file_mismatch_is_reported_per_sentence(tmp_path):
    payload = write_fixture(tmp_path)
    (tmp_path / "src.txt").write_text(
        "I likes turtles very much .\nWRONG LINE HERE .\nNothing wrong here .\n",
        encoding="utf-8",
    )
    payload["source"] = "src.txt"
    config = load_config(write_config(tmp_path, payload))
    with pytest.raises(ValidationError) as exc:
        run_experiment(config)
    assert "sentence 1" in str(exc.value)


def test_ablation_needs_three_systems(tmp_path):
    payload = write_fixture(tmp_path, systems=("a", "b"))
    config = load_config(write_config(tmp_path, payload))
    with pytest.raises(ValidationError):
        ablation_remove_one(config)


def test_ablation_rows_and_noise_system_is_harmless(tmp_path):
    """Edits proposed by one system alone never clear n_min=1, so removing
    the noise member cannot change the vote output."""
    payload = write_fixture(tmp_path, systems=("a", "b", "c", "noise"))
    config = load_config(write_config(tmp_path, payload))
    rows = ablation_remove_one(config)
    assert [label for label, _ in rows] == [
        "full", "w/o a", "w/o b", "w/o c", "w/o noise",
    ]
    by_label = dict(rows)
    full = by_label["full"]
    without_noise = by_label["w/o noise"]
    assert full.outputs[0].sentences == without_noise.outputs[0].sentences
    assert (tmp_path / "results" / "fixture.ablation.tsv").exists()


def test_sweep_covers_all_thresholds(tmp_path):
    config = load_config(write_config(tmp_path, write_fixture(tmp_path)))
    rows = sweep_n_min(config)
    assert [n for n, _ in rows] == [0, 1, 2, 3]
    # at n_min = N_sys nothing can win the vote, so output equals source
    saturated = rows[-1][1]
    assert saturated.report.totals.n_proposed == 0
    sweep = (tmp_path / "results" / "fixture.sweep.tsv").read_text(encoding="utf-8")
    assert sweep.splitlines()[0] == "n_min\tP\tR\tF0.5"
    assert len(sweep.splitlines()) == 5


def test_sweep_rejects_non_vote_methods(tmp_path):
    payload = write_fixture(tmp_path, systems=("a", "b"))
    payload.update(method="aggr-rank")
    del payload["n_min"]
    config = load_config(write_config(tmp_path, payload))
    with pytest.raises(ValidationError):
        sweep_n_min(config)
