"""Config-driven reproduction experiments.

A JSON config names the gold corpus, the member system outputs, a
combination method and its parameters; running it produces the combined
output file, its score report, and a one-row machine-readable TSV, all
deterministic given the config and seeds. Remove-one ablations and
vote-threshold sweeps reuse the same runner.

Config schema (JSON object):

    name          experiment id; prefixes all artifact filenames
    gold          path to the gold M2 file
    systems       list of member outputs: "path", "name=path", or
                  {"name": ..., "path": ...}
    method        vote | second-order-vote | oracle-ensemble | oracle-rank
                  | rank | rank-w | aggr-rank | llm-rank
    source        optional parallel source file (defaults to M2 sources;
                  validated against them when given)
    output_dir    artifact directory (default "results")
    n_min         vote threshold (vote methods)
    scores        score TSV path (rank, rank-w)
    variant       llm prompt variant "a" | "b" (default "a")
    runs          llm run count (default 1)
    seed          root seed (default 0); per-run seeds derive from it
    seeds         explicit per-run seed list (overrides seed derivation)
    backend       llm backend: mock-lexmin | mock-label-a | http
    base_url      chat-completions endpoint (http backend)
    model         model name (http backend)
    jobs          request concurrency for llm-rank (default 1)

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .corpus import (
    GoldSentence,
    ScoreFile,
    SystemOutput,
    ValidationError,
    atomic_write_text,
    load_m2,
    load_parallel,
    load_score_file,
    load_system_output,
    serialize_parallel,
)
from .llm import llm_rank_corpus, make_backend
from .oracle import choices_tsv, oracle_ensemble_corpus, oracle_rank_corpus
from .ranking import aggr_rank, rank_by_score, rank_weighted
from .scoring import ScoreReport, report_table, round_score, score_corpus
from .seeds import derive_seed
from .vote import majority_vote_corpus

METHODS = (
    "vote",
    "second-order-vote",
    "oracle-ensemble",
    "oracle-rank",
    "rank",
    "rank-w",
    "aggr-rank",
    "llm-rank",
)

_KNOWN_KEYS = {
    "name", "gold", "systems", "method", "source", "output_dir", "n_min",
    "scores", "variant", "runs", "seed", "seeds", "backend", "base_url",
    "model", "jobs",
}


@dataclass
class ExperimentConfig:
    name: str
    gold_path: Path
    systems: tuple[tuple[str, Path], ...]  # (name, path)
    method: str
    source_path: Path | None = None
    output_dir: Path = Path("results")
    n_min: int = 0
    score_path: Path | None = None
    variant: str = "a"
    runs: int = 1
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    backend: str = "mock-lexmin"
    base_url: str | None = None
    model: str | None = None
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValidationError(
                f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}"
            )
        if not self.systems:
            raise ValidationError("config needs at least one member system")
        if self.method in ("rank", "rank-w") and self.score_path is None:
            raise ValidationError(f"method {self.method} needs a score file")
        if self.method == "aggr-rank" and len(self.systems) != 2:
            raise ValidationError(
                "aggr-rank takes exactly 2 systems: primary, then alternative"
            )
        if self.method == "llm-rank" and self.variant not in ("a", "b"):
            raise ValidationError(f"unknown prompt variant {self.variant!r}")
        names = [name for name, _ in self.systems]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate system names: {names}")


@dataclass
class ExperimentResult:
    """Everything one experiment produced, before presentation."""

    config: ExperimentConfig
    outputs: tuple[SystemOutput, ...]  # one per run (one except llm-rank)
    reports: tuple[ScoreReport, ...]  # aligned with outputs
    artifacts: tuple[Path, ...] = field(default_factory=tuple)

    @property
    def report(self) -> ScoreReport:
        return self.reports[0]

    def mean_f05(self) -> float:
        return statistics.fmean(r.f05 for r in self.reports)

    def spread_f05(self) -> float:
        """2 x population std of F0.5 across runs; 0.0 for a single run."""
        if len(self.reports) < 2:
            return 0.0
        return 2 * statistics.pstdev(r.f05 for r in self.reports)


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON experiment config."""
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ValidationError(f"{path}: unknown config keys: {sorted(unknown)}")
    for required in ("name", "gold", "systems", "method"):
        if required not in raw:
            raise ValidationError(f"{path}: missing required key {required!r}")
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else base / candidate

    systems = tuple(_parse_system_entry(entry, resolve) for entry in raw["systems"])
    seeds = tuple(raw["seeds"]) if raw.get("seeds") is not None else None
    return ExperimentConfig(
        name=raw["name"],
        gold_path=resolve(raw["gold"]),
        systems=systems,
        method=raw["method"],
        source_path=resolve(raw["source"]) if raw.get("source") else None,
        output_dir=resolve(raw.get("output_dir", "results")),
        n_min=int(raw.get("n_min", 0)),
        score_path=resolve(raw["scores"]) if raw.get("scores") else None,
        variant=raw.get("variant", "a"),
        runs=int(raw.get("runs", 1)),
        seed=int(raw.get("seed", 0)),
        seeds=seeds,
        backend=raw.get("backend", "mock-lexmin"),
        base_url=raw.get("base_url"),
        model=raw.get("model"),
        jobs=int(raw.get("jobs", 1)),
    )


def _parse_system_entry(entry, resolve) -> tuple[str, Path]:
    if isinstance(entry, dict):
        if set(entry) != {"name", "path"}:
            raise ValidationError(f"system entry needs exactly name and path: {entry}")
        return entry["name"], resolve(entry["path"])
    if isinstance(entry, str):
        if "=" in entry:
            name, _, p = entry.partition("=")
            return name, resolve(p)
        p = resolve(entry)
        return p.stem, p
    raise ValidationError(f"bad system entry: {entry!r}")


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run one configured experiment and write its artifacts."""
    gold = load_m2(config.gold_path)
    sources = [gs.source for gs in gold]
    if config.source_path is not None:
        file_sources = load_parallel(config.source_path, expected_len=len(gold))
        for i, (a, b) in enumerate(zip(file_sources, sources)):
            if a != b:
                raise ValidationError(
                    f"sentence {i}: source file disagrees with gold M2 source"
                )
    outputs = [
        load_system_output(path, name, expected_len=len(gold))
        for name, path in config.systems
    ]

    artifacts: list[Path] = []
    combined: list[SystemOutput]
    if config.method in ("vote", "second-order-vote"):
        combined = [majority_vote_corpus(sources, outputs, config.n_min)]
    elif config.method == "oracle-ensemble":
        result, choices = oracle_ensemble_corpus(gold, outputs)
        combined = [result]
        artifacts.append(_write(config, "audit.tsv", choices_tsv(choices)))
    elif config.method == "oracle-rank":
        result, choices = oracle_rank_corpus(gold, outputs)
        combined = [result]
        artifacts.append(_write(config, "audit.tsv", choices_tsv(choices)))
    elif config.method in ("rank", "rank-w"):
        combined = [_rank_corpus(config, sources, outputs)]
    elif config.method == "aggr-rank":
        primary, alternative = outputs
        sentences = []
        for i, source in enumerate(sources):
            try:
                sentences.append(
                    aggr_rank(primary.sentences[i], alternative.sentences[i], source)
                )
            except ValidationError as err:
                raise ValidationError(f"sentence {i}: {err}") from None
        name = f"aggr-rank[{primary.name}|{alternative.name}]"
        combined = [SystemOutput(name, tuple(sentences))]
    else:  # llm-rank
        backend = make_backend(
            config.backend, base_url=config.base_url, model=config.model
        )
        seeds = config.seeds or tuple(
            derive_seed(config.seed, "run", r) for r in range(config.runs)
        )
        runs = llm_rank_corpus(
            sources, outputs, config.variant, config.runs, list(seeds), backend,
            jobs=config.jobs,
        )
        combined = [run.output for run in runs]

    reports = []
    for run_index, output in enumerate(combined):
        suffix = f"run{run_index}.txt" if len(combined) > 1 else "out.txt"
        artifacts.append(_write(config, suffix, serialize_parallel(output.sentences)))
        reports.append(score_corpus(output, gold))

    result = ExperimentResult(config, tuple(combined), tuple(reports), tuple(artifacts))
    artifacts.append(_write(config, "report.txt", report_table(result.report)))
    artifacts.append(_write(config, "row.tsv", result_row_tsv([result])))
    result.artifacts = tuple(artifacts)
    return result


def _rank_corpus(
    config: ExperimentConfig,
    sources: Sequence,
    outputs: Sequence[SystemOutput],
) -> SystemOutput:
    scores = load_score_file(config.score_path)
    select = rank_by_score if config.method == "rank" else rank_weighted
    sentences = []
    for i in range(len(sources)):
        candidates = [(out.name, out.sentences[i]) for out in outputs]
        try:
            per_candidate = [scores.get(name, i) for name, _ in candidates]
            _, sentence = select(candidates, per_candidate)
        except (KeyError, ValidationError) as err:
            raise ValidationError(f"sentence {i}: {err}") from None
        sentences.append(sentence)
    members = "+".join(out.name for out in outputs)
    return SystemOutput(f"{config.method}[{members}]", tuple(sentences))


def ablation_remove_one(config: ExperimentConfig) -> list[tuple[str, ExperimentResult]]:
    """The full ensemble plus one rerun per left-out member system."""
    if len(config.systems) < 3:
        raise ValidationError("remove-one ablation needs at least 3 member systems")
    rows = [("full", run_experiment(config))]
    for name, _ in config.systems:
        reduced = _with(
            config,
            name=f"{config.name}.wo-{name}",
            systems=tuple(s for s in config.systems if s[0] != name),
        )
        rows.append((f"w/o {name}", run_experiment(reduced)))
    table = ablation_tsv(rows)
    atomic_write_text(config.output_dir / f"{config.name}.ablation.tsv", table)
    return rows


def sweep_n_min(
    config: ExperimentConfig, values: Sequence[int] | None = None
) -> list[tuple[int, ExperimentResult]]:
    """Rerun a vote experiment across n_min values (default 0..N_sys)."""
    if config.method not in ("vote", "second-order-vote"):
        raise ValidationError("n_min sweep applies to vote methods only")
    if values is None:
        values = range(0, len(config.systems) + 1)
    rows = []
    for n_min in values:
        variant = _with(config, name=f"{config.name}.nmin{n_min}", n_min=n_min)
        rows.append((n_min, run_experiment(variant)))
    lines = ["n_min\tP\tR\tF0.5"]
    for n_min, result in rows:
        r = result.report
        lines.append(
            f"{n_min}\t{round_score(r.precision):.1f}\t{round_score(r.recall):.1f}"
            f"\t{round_score(r.f05):.1f}"
        )
    atomic_write_text(config.output_dir / f"{config.name}.sweep.tsv", "\n".join(lines) + "\n")
    return rows


def result_row_tsv(results: Sequence[ExperimentResult]) -> str:
    """Machine-readable result rows, one per experiment."""
    lines = [
        "experiment\tmethod\tP\tR\tF0.5\tF0.5_2std\tn_correct\tn_proposed\tn_gold\truns"
    ]
    for res in results:
        r = res.report
        spread = (
            f"{round_score(res.spread_f05()):.1f}" if len(res.reports) > 1 else "-"
        )
        mean_f = statistics.fmean(x.f05 for x in res.reports)
        mean_p = statistics.fmean(x.precision for x in res.reports)
        mean_r = statistics.fmean(x.recall for x in res.reports)
        lines.append(
            f"{res.config.name}\t{res.config.method}"
            f"\t{round_score(mean_p):.1f}\t{round_score(mean_r):.1f}"
            f"\t{round_score(mean_f):.1f}\t{spread}"
            f"\t{r.totals.n_correct}\t{r.totals.n_proposed}\t{r.totals.n_gold}"
            f"\t{len(res.reports)}"
        )
    return "\n".join(lines) + "\n"


def ablation_tsv(rows: Sequence[tuple[str, ExperimentResult]]) -> str:
    lines = ["variant\tP\tR\tF0.5"]
    for label, result in rows:
        r = result.report
        lines.append(
            f"{label}\t{round_score(r.precision):.1f}\t{round_score(r.recall):.1f}"
            f"\t{round_score(r.f05):.1f}"
        )
    return "\n".join(lines) + "\n"


def _write(config: ExperimentConfig, suffix: str, text: str) -> Path:
    path = config.output_dir / f"{config.name}.{suffix}"
    atomic_write_text(path, text)
    return path


def _with(config: ExperimentConfig, **overrides) -> ExperimentConfig:
    from dataclasses import replace

    return replace(config, **overrides)
