"""Chat-model candidate ranking.

Per sentence, the member outputs are shuffled into a labeled list (A, B,
C, ...) and rendered into a prompt that asks the model either for the best
candidate (variant "a") or for a full ranking (variant "b"; only the top
label feeds selection). Shuffling breaks positional bias; the permutation
is remembered so parsed labels map back to systems.

The backend is any callable from (system message, user message,
temperature) to response text. A real HTTP chat-completions client and
deterministic offline mocks both satisfy it, so every test runs without
network access. Responses that cannot be parsed fall back to label A and
are flagged; a corpus run never aborts on a bad response.
"""

from __future__ import annotations

import json
import re
import string
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .corpus import SystemOutput, TokenSentence, ValidationError
from .seeds import derive_rng, derive_seed

Backend = Callable[[str, str, float], str]

DEFAULT_TASK_DESCRIPTION = (
    "You are an expert English proofreader. You will see an original "
    "sentence and several edited candidate versions labeled with capital "
    "letters. Judge which candidates correct the sentence best."
)

_INSTRUCTION = {
    "a": (
        "Reply with the label of the single best candidate in exactly this "
        "format:\nOUTPUT:\n<label>"
    ),
    "b": (
        "Reply with all candidate labels ranked from best to worst, "
        "separated by spaces, in exactly this format:\nOUTPUT:\n<labels>"
    ),
}


@dataclass(frozen=True)
class RankPrompt:
    """A rendered ranking request for one sentence."""

    variant: str
    original: TokenSentence
    candidates: tuple[tuple[str, TokenSentence], ...]  # (label, sentence)
    permutation: dict[str, str]  # label -> system name
    text: str

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.candidates)


@dataclass(frozen=True)
class RankResponse:
    variant: str
    raw: str
    parsed: tuple[str, ...]  # single label for "a", sequence for "b"
    fallback: bool

    @property
    def top(self) -> str:
        return self.parsed[0]


def build_prompt(
    variant: str,
    source: TokenSentence,
    candidates: Sequence[tuple[str, TokenSentence]],
    seed: int | None,
) -> RankPrompt:
    """Label and render candidates in seeded-shuffled order.

    ``seed=None`` disables shuffling (identity permutation). Requires at
    least 2 candidates and at most 26 (single-letter labels).
    """
    if variant not in ("a", "b"):
        raise ValidationError(f"unknown prompt variant {variant!r}")
    if len(candidates) < 2:
        raise ValidationError("prompt needs at least 2 candidates")
    if len(candidates) > len(string.ascii_uppercase):
        raise ValidationError("at most 26 candidates supported")
    order = list(candidates)
    if seed is not None:
        derive_rng(seed).shuffle(order)
    labeled = tuple(
        (string.ascii_uppercase[i], sentence) for i, (_, sentence) in enumerate(order)
    )
    permutation = {
        string.ascii_uppercase[i]: name for i, (name, _) in enumerate(order)
    }
    lines = ["ORIGINAL:", source.text, "EDITED:"]
    lines += [f"{label}: {sentence.text}" for label, sentence in labeled]
    text = "\n".join(lines) + "\n\n" + _INSTRUCTION[variant]
    return RankPrompt(variant, source, labeled, permutation, text)


def parse_response(text: str, prompt: RankPrompt) -> RankResponse:
    """Extract the chosen label(s); fall back to label A / issued order.

    Variant "a" takes the first standalone capital letter that is an
    issued label. Variant "b" takes the longest whitespace-separated run
    of distinct issued labels.
    """
    labels = prompt.labels
    if prompt.variant == "a":
        for match in re.finditer(r"\b[A-Z]\b", text):
            if match.group(0) in labels:
                return RankResponse("a", text, (match.group(0),), False)
        return RankResponse("a", text, (labels[0],), True)

    issued = set(labels)
    best: list[str] = []
    run: list[str] = []
    for token in text.split():
        if token in issued and token not in run:
            run.append(token)
        else:
            if len(run) > len(best):
                best = run
            run = [token] if token in issued else []
    if len(run) > len(best):
        best = run
    if not best:
        return RankResponse("b", text, labels, True)
    return RankResponse("b", text, tuple(best), False)


# ---------------------------------------------------------------------------
# Backends


class MockLexminBackend:
    """Deterministic offline backend: prefers the lexicographically
    smallest candidate sentence. Content-based, so its choice is invariant
    under label shuffling; used to test positional-bias immunity."""

    def __call__(self, system_message: str, user_message: str, temperature: float) -> str:
        ranked = sorted(_parse_candidates(user_message), key=lambda lc: lc[1])
        return "OUTPUT:\n" + " ".join(label for label, _ in ranked)


class MockLabelBackend:
    """Offline backend that always answers a fixed positional label."""

    def __init__(self, label: str = "A"):
        self.label = label

    def __call__(self, system_message: str, user_message: str, temperature: float) -> str:
        return f"OUTPUT:\n{self.label}"


def _parse_candidates(user_message: str) -> list[tuple[str, tuple[str, ...]]]:
    # Inverse of build_prompt's rendering, for mocks that judge content.
    out = []
    in_block = False
    for line in user_message.splitlines():
        if line == "EDITED:":
            in_block = True
            continue
        if in_block:
            m = re.match(r"^([A-Z]): (.*)$", line)
            if not m:
                break
            out.append((m.group(1), tuple(m.group(2).split())))
    return out


class HttpChatBackend:
    """Chat-completions client: POST {base_url}/chat/completions.

    The bearer token is read from the environment (default variable
    GECKIT_API_KEY) so credentials never appear in configs or argv.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key_env: str = "GECKIT_API_KEY",
        timeout: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def __call__(self, system_message: str, user_message: str, temperature: float) -> str:
        import os

        import requests

        key = os.environ.get(self.api_key_env)
        if not key:
            raise RuntimeError(f"environment variable {self.api_key_env} is not set")
        body = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system_message},
                {"role": "user", "content": user_message},
            ],
            "temperature": temperature,
        }
        resp = requests.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {key}"},
            json=body,
            timeout=self.timeout,
        )
        resp.raise_for_status()
        payload = resp.json()
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise RuntimeError(f"malformed chat response: {json.dumps(payload)[:200]}")


def make_backend(
    kind: str,
    *,
    base_url: str | None = None,
    model: str | None = None,
    api_key_env: str = "GECKIT_API_KEY",
    timeout: float = 60.0,
) -> Backend:
    """Build a backend from a config/CLI name.

    ``mock-lexmin`` and ``mock-label-a`` run offline; ``http`` needs
    ``base_url`` and ``model``.
    """
    if kind == "mock-lexmin":
        return MockLexminBackend()
    if kind == "mock-label-a":
        return MockLabelBackend("A")
    if kind == "http":
        if not base_url or not model:
            raise ValidationError("http backend needs base_url and model")
        return HttpChatBackend(base_url, model, api_key_env=api_key_env, timeout=timeout)
    raise ValidationError(f"unknown backend {kind!r}")


def call_with_retries(
    backend: Backend,
    system_message: str,
    user_message: str,
    temperature: float,
    retries: int = 3,
    backoff: float = 1.0,
) -> str:
    """Call the backend, retrying failures with exponential backoff."""
    attempt = 0
    while True:
        try:
            return backend(system_message, user_message, temperature)
        except Exception:
            if attempt >= retries:
                raise
            time.sleep(backoff * (2**attempt))
            attempt += 1


# ---------------------------------------------------------------------------
# Corpus runs


@dataclass(frozen=True)
class RankedRun:
    """One complete pass over the corpus with one shuffle seed."""

    output: SystemOutput
    run_index: int
    seed: int
    fallbacks: tuple[int, ...]  # sentence indices that fell back to label A


def llm_rank_corpus(
    sources: Sequence[TokenSentence],
    outputs: Sequence[SystemOutput],
    variant: str,
    runs: int,
    seeds: Sequence[int] | None,
    backend: Backend,
    *,
    shuffle: bool = True,
    jobs: int = 1,
    task_description: str = DEFAULT_TASK_DESCRIPTION,
    temperature: float = 1.0,
    retries: int = 3,
    backoff: float = 1.0,
    name_prefix: str = "llm-rank",
) -> list[RankedRun]:
    """Rank every sentence once per run; runs stay separate.

    Each run reshuffles candidates with its own seed. Evaluation averages
    scores across the returned runs; the runs are never merged into one
    output. Backend failures that survive the retry budget select label A
    for that sentence and are recorded in the run's ``fallbacks``.
    """
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    if seeds is None:
        seeds = [derive_seed(0, "run", r) for r in range(runs)]
    if len(seeds) != runs:
        raise ValidationError(f"{runs} runs but {len(seeds)} seeds")
    for out in outputs:
        if len(out.sentences) != len(sources):
            raise ValidationError(
                f"system {out.name!r} has {len(out.sentences)} sentences, "
                f"expected {len(sources)}"
            )

    results: list[RankedRun] = []
    for run_index, run_seed in enumerate(seeds):

        def rank_one(i: int) -> tuple[TokenSentence, bool]:
            candidates = [(out.name, out.sentences[i]) for out in outputs]
            prompt_seed = derive_seed(run_seed, "sentence", i) if shuffle else None
            prompt = build_prompt(variant, sources[i], candidates, prompt_seed)
            by_label = dict(prompt.candidates)
            try:
                raw = call_with_retries(
                    backend, task_description, prompt.text, temperature,
                    retries=retries, backoff=backoff,
                )
            except Exception:
                return by_label[prompt.labels[0]], True
            response = parse_response(raw, prompt)
            return by_label[response.top], response.fallback

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                ranked = list(pool.map(rank_one, range(len(sources))))
        else:
            ranked = [rank_one(i) for i in range(len(sources))]

        sentences = tuple(sentence for sentence, _ in ranked)
        flagged = tuple(i for i, (_, fb) in enumerate(ranked) if fb)
        output = SystemOutput(f"{name_prefix}-{variant}[run{run_index}]", sentences)
        results.append(RankedRun(output, run_index, run_seed, flagged))
    return results
