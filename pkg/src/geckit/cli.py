"""Command-line entry point.

One binary, verb subcommands: extract, apply, score, vote,
oracle-ensemble, oracle-rank, rank, rank-w, aggr-rank, cluster, llm-rank,
experiment. Data goes to files or stdout; diagnostics go to stderr. Exit
codes: 0 success, 1 validation/usage error, 2 runtime error. File outputs
are written atomically. All randomness derives from --seed.

Member systems are given as repeated --sys flags, either a bare path
(system name = file stem) or explicit name=path.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .align import apply_edits, extract_edits
from .corpus import (
    Edit,
    M2ParseError,
    SystemOutput,
    ValidationError,
    atomic_write_text,
    load_m2,
    load_parallel,
    load_score_file,
    load_system_output,
    serialize_parallel,
)
from .experiment import (
    ablation_remove_one,
    ablation_tsv,
    load_config,
    result_row_tsv,
    run_experiment,
    sweep_n_min,
)
from .llm import llm_rank_corpus, make_backend
from .oracle import choices_tsv, oracle_ensemble_corpus, oracle_rank_corpus
from .ranking import (
    aggr_rank,
    cluster_systems,
    clusters_tsv,
    matrix_tsv,
    rank_by_score,
    rank_weighted,
    similarity_matrix,
)
from .scoring import report_table, report_tsv, score_corpus
from .seeds import derive_seed
from .vote import majority_vote_corpus

_EMPTY = "-NONE-"  # empty replacement marker in edit TSVs, as in M2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract wants usage errors -> 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise _UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _load_systems(specs: list[str], expected_len: int | None = None) -> list[SystemOutput]:
    systems = []
    for spec in specs:
        if "=" in spec:
            name, _, path = spec.partition("=")
        else:
            name, path = Path(spec).stem, spec
        systems.append(load_system_output(path, name, expected_len=expected_len))
    if len({s.name for s in systems}) != len(systems):
        raise ValidationError(f"duplicate system names in {specs}")
    return systems


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_extract(args) -> int:
    sources = load_parallel(args.src)
    hyps = load_parallel(args.hyp, expected_len=len(sources))
    lines = ["sentence_index\tstart\tend\treplacement"]
    for i, (src, hyp) in enumerate(zip(sources, hyps)):
        for e in extract_edits(src, hyp):
            repl = " ".join(e.replacement) if e.replacement else _EMPTY
            lines.append(f"{i}\t{e.start}\t{e.end}\t{repl}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_apply(args) -> int:
    sources = load_parallel(args.src)
    per_sentence: dict[int, list[Edit]] = {}
    text = Path(args.edits).read_text(encoding="utf-8")
    lines = text.rstrip("\n").split("\n")
    if not lines or lines[0].rstrip("\r") != "sentence_index\tstart\tend\treplacement":
        raise ValidationError("edit file must start with the extract TSV header")
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValidationError(f"edit file line {lineno}: expected 4 columns")
        try:
            idx, start, end = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ValidationError(f"edit file line {lineno}: non-integer field") from None
        repl = () if parts[3] == _EMPTY else tuple(parts[3].split())
        per_sentence.setdefault(idx, []).append(Edit(start, end, repl))
    out_of_range = [i for i in per_sentence if not 0 <= i < len(sources)]
    if out_of_range:
        raise ValidationError(f"edit file references unknown sentences: {out_of_range}")
    edited = []
    for i, src in enumerate(sources):
        try:
            edited.append(apply_edits(src, per_sentence.get(i, [])))
        except ValidationError as err:
            raise ValidationError(f"sentence {i}: {err}") from None
    _emit(serialize_parallel(edited), args.out)
    return 0


def _cmd_score(args) -> int:
    gold = load_m2(args.gold)
    if args.src:
        file_sources = load_parallel(args.src, expected_len=len(gold))
        for i, (a, gs) in enumerate(zip(file_sources, gold)):
            if a != gs.source:
                raise ValidationError(
                    f"sentence {i}: --src disagrees with the gold M2 source"
                )
    hyp = load_system_output(args.hyp, expected_len=len(gold))
    report = score_corpus(hyp, gold)
    text = report_tsv(report) if args.tsv else report_table(report)
    _emit(text, args.out)
    return 0


def _cmd_vote(args) -> int:
    sources = load_parallel(args.src)
    systems = _load_systems(args.sys, expected_len=len(sources))
    ensemble = majority_vote_corpus(sources, systems, args.nmin, name=args.name)
    atomic_write_text(args.out, serialize_parallel(ensemble.sentences))
    print(f"wrote {args.out} ({ensemble.name})", file=sys.stderr)
    return 0


def _cmd_oracle(method: str, args) -> int:
    gold = load_m2(args.gold)
    systems = _load_systems(args.sys, expected_len=len(gold))
    runner = oracle_ensemble_corpus if method == "oracle-ensemble" else oracle_rank_corpus
    output, choices = runner(gold, systems)
    atomic_write_text(args.out, serialize_parallel(output.sentences))
    if args.audit:
        atomic_write_text(args.audit, choices_tsv(choices))
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_rank(method: str, args) -> int:
    systems = _load_systems(args.sys)
    n = len(systems[0].sentences)
    for s in systems[1:]:
        if len(s.sentences) != n:
            raise ValidationError(
                f"system {s.name!r} has {len(s.sentences)} sentences, expected {n}"
            )
    scores = load_score_file(args.scores)
    select = rank_by_score if method == "rank" else rank_weighted
    chosen = []
    for i in range(n):
        candidates = [(s.name, s.sentences[i]) for s in systems]
        try:
            per_candidate = [scores.get(name, i) for name, _ in candidates]
            chosen.append(select(candidates, per_candidate)[1])
        except (KeyError, ValidationError) as err:
            raise ValidationError(f"sentence {i}: {err}") from None
    _emit(serialize_parallel(chosen), args.out)
    return 0


def _cmd_aggr_rank(args) -> int:
    sources = load_parallel(args.src)
    primary = load_parallel(args.primary, expected_len=len(sources))
    alternative = load_parallel(args.alt, expected_len=len(sources))
    chosen = [
        aggr_rank(p, a, s) for p, a, s in zip(primary, alternative, sources)
    ]
    _emit(serialize_parallel(chosen), args.out)
    return 0


def _cmd_cluster(args) -> int:
    systems = _load_systems(args.sys)
    matrix = similarity_matrix(systems)
    clusters = cluster_systems(systems, args.threshold, matrix=matrix)
    _emit(clusters_tsv(clusters), args.out)
    if args.matrix:
        atomic_write_text(args.matrix, matrix_tsv(matrix))
    print(f"{len(clusters)} clusters at threshold {args.threshold}", file=sys.stderr)
    return 0


def _cmd_llm_rank(args) -> int:
    sources = load_parallel(args.src)
    systems = _load_systems(args.sys, expected_len=len(sources))
    backend = make_backend(
        "http" if args.base_url else f"mock-{args.mock}",
        base_url=args.base_url,
        model=args.model,
    )
    seeds = [derive_seed(args.seed, "run", r) for r in range(args.runs)]
    runs = llm_rank_corpus(
        sources, systems, args.variant, args.runs, seeds, backend,
        shuffle=not args.no_shuffle, jobs=args.jobs,
    )
    for run in runs:
        path = f"{args.out_prefix}.run{run.run_index}.txt"
        atomic_write_text(path, serialize_parallel(run.output.sentences))
        note = f", {len(run.fallbacks)} fallback sentences" if run.fallbacks else ""
        print(f"wrote {path}{note}", file=sys.stderr)
    return 0


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.jobs is not None:
        config.jobs = args.jobs
    if args.seed is not None:
        config.seed = args.seed
        config.seeds = None
    if args.ablation:
        rows = ablation_remove_one(config)
        sys.stdout.write(ablation_tsv(rows))
        return 0
    if args.sweep_nmin:
        rows = sweep_n_min(config)
        for n_min, result in rows:
            print(f"n_min={n_min}: F0.5={result.report.f05:.4f}", file=sys.stderr)
        return 0
    result = run_experiment(config)
    sys.stdout.write(result_row_tsv([result]))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="geckit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str):
        p = sub.add_parser(name, help=help_text)
        return p

    p = add("extract", "extract edit spans between source and hypothesis files")
    p.add_argument("--src", required=True, help="source parallel text")
    p.add_argument("--hyp", required=True, help="hypothesis parallel text")
    p.add_argument("--out", help="output TSV (default: stdout)")
    p.set_defaults(func=_cmd_extract)

    p = add("apply", "apply an extract-format edit TSV to source sentences")
    p.add_argument("--src", required=True)
    p.add_argument("--edits", required=True, help="TSV from the extract subcommand")
    p.add_argument("--out", help="output text (default: stdout)")
    p.set_defaults(func=_cmd_apply)

    p = add("score", "score a hypothesis file against gold M2")
    p.add_argument("--hyp", required=True)
    p.add_argument("--gold", required=True, help="gold M2 file")
    p.add_argument("--src", help="optional source file, validated against the M2")
    p.add_argument("--tsv", action="store_true", help="emit TSV instead of a table")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=_cmd_score)

    p = add("vote", "majority-vote ensemble of member outputs")
    p.add_argument("--src", required=True)
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--nmin", type=int, required=True, help="keep edits with votes > nmin")
    p.add_argument("--name", help="ensemble name (default records members and nmin)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_vote)

    p = add("oracle-ensemble", "gold-informed best edit subset (upper bound)")
    p.add_argument("--gold", required=True)
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--audit", help="write per-sentence choice TSV here")
    p.set_defaults(func=lambda a: _cmd_oracle("oracle-ensemble", a))

    p = add("oracle-rank", "gold-informed best candidate per sentence (upper bound)")
    p.add_argument("--gold", required=True)
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--out", required=True)
    p.add_argument("--audit", help="write per-sentence choice TSV here")
    p.set_defaults(func=lambda a: _cmd_oracle("oracle-rank", a))

    p = add("rank", "pick the highest-scored candidate per sentence")
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--scores", required=True, help="score TSV (system, sentence_index, score)")
    p.add_argument("--out", help="output text (default: stdout)")
    p.set_defaults(func=lambda a: _cmd_rank("rank", a))

    p = add("rank-w", "rank with output-frequency weighting")
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--scores", required=True)
    p.add_argument("--out", help="output text (default: stdout)")
    p.set_defaults(func=lambda a: _cmd_rank("rank-w", a))

    p = add("aggr-rank", "prefer the primary candidate when it edits less (but edits)")
    p.add_argument("--src", required=True)
    p.add_argument("--primary", required=True)
    p.add_argument("--alt", required=True)
    p.add_argument("--out", help="output text (default: stdout)")
    p.set_defaults(func=_cmd_aggr_rank)

    p = add("cluster", "cluster systems by output similarity; pick representatives")
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--threshold", type=float, default=0.11, help="dendrogram cut distance")
    p.add_argument("--out", help="cluster TSV (default: stdout)")
    p.add_argument("--matrix", help="write the similarity matrix TSV here")
    p.set_defaults(func=_cmd_cluster)

    p = add("llm-rank", "rank candidates with a chat model (or offline mock)")
    p.add_argument("--src", required=True)
    p.add_argument("--sys", action="append", required=True, metavar="[NAME=]PATH")
    p.add_argument("--variant", choices=("a", "b"), default="a")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mock", choices=("lexmin", "label-a"), default="lexmin",
                   help="offline backend (ignored when --base-url is given)")
    p.add_argument("--base-url", help="chat-completions endpoint base URL")
    p.add_argument("--model", help="model name for the http backend")
    p.add_argument("--no-shuffle", action="store_true",
                   help="keep candidates in input order")
    p.add_argument("--jobs", type=int, default=1, help="concurrent requests")
    p.add_argument("--out-prefix", required=True,
                   help="one output per run: PREFIX.runN.txt")
    p.set_defaults(func=_cmd_llm_rank)

    p = add("experiment", "run a JSON experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--ablation", action="store_true", help="remove-one member ablation")
    p.add_argument("--sweep-nmin", action="store_true", help="sweep the vote threshold")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--jobs", type=int, help="override the config jobs")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValidationError, M2ParseError, FileNotFoundError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
