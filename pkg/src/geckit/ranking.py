"""Score-based candidate selection and system clustering.

Three selection modes over per-sentence candidates:

* plain ranking: argmax of an externally supplied quality score;
* weighted ranking: the same argmax after multiplying each score by
  w_j = n_j / max_k(n_k), where n_j counts how many systems produced the
  candidate's exact output sentence;
* aggressiveness ranking: prefer the primary candidate only when it edits
  less than the alternative while still editing something.

Clustering groups near-duplicate systems: per sentence, each system's
output becomes a token TF-IDF vector over that sentence's vocabulary;
pairwise cosine similarities are averaged across the corpus into one
matrix, and average-linkage agglomerative clustering cuts the dendrogram
at a distance threshold. One representative per cluster keeps ensembles
from double-counting families of similar systems.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .align import extract_edits
from .corpus import SystemOutput, TokenSentence, ValidationError


@dataclass(frozen=True)
class WeightedCandidate:
    """A candidate with its output-frequency weight applied."""

    system: str
    sentence: TokenSentence
    raw_score: float
    frequency: int
    weight: float
    weighted_score: float


@dataclass(frozen=True)
class SimilarityMatrix:
    """Mean pairwise cosine similarities between systems."""

    names: tuple[str, ...]
    values: np.ndarray  # shape (N, N), symmetric, unit diagonal

    def sim(self, a: str, b: str) -> float:
        return float(self.values[self.names.index(a), self.names.index(b)])


@dataclass(frozen=True)
class SystemCluster:
    members: tuple[str, ...]  # input order
    representative: str


def rank_by_score(
    candidates: Sequence[tuple[str, TokenSentence]], scores: Sequence[float]
) -> tuple[str, TokenSentence]:
    """Argmax by score; ties go to the lexicographically smallest sentence,
    then to input order."""
    if len(scores) != len(candidates):
        raise ValidationError(
            f"{len(candidates)} candidates but {len(scores)} scores"
        )
    if not candidates:
        raise ValidationError("rank_by_score needs at least one candidate")
    best_i = 0
    for i in range(1, len(candidates)):
        if scores[i] > scores[best_i] or (
            scores[i] == scores[best_i]
            and tuple(candidates[i][1]) < tuple(candidates[best_i][1])
        ):
            best_i = i
    return candidates[best_i]


def weight_candidates(
    candidates: Sequence[tuple[str, TokenSentence]], scores: Sequence[float]
) -> list[WeightedCandidate]:
    """Attach output-frequency weights w_j = n_j / max_k(n_k) to candidates."""
    if len(scores) != len(candidates):
        raise ValidationError(f"{len(candidates)} candidates but {len(scores)} scores")
    freq = Counter(tuple(sentence) for _, sentence in candidates)
    max_n = max(freq.values())
    out = []
    for (name, sentence), score in zip(candidates, scores):
        n_j = freq[tuple(sentence)]
        w_j = n_j / max_n
        out.append(WeightedCandidate(name, sentence, score, n_j, w_j, score * w_j))
    return out


def rank_weighted(
    candidates: Sequence[tuple[str, TokenSentence]], scores: Sequence[float]
) -> tuple[str, TokenSentence]:
    """Argmax of score x frequency weight, with rank_by_score tie-breaks."""
    weighted = weight_candidates(candidates, scores)
    return rank_by_score(candidates, [w.weighted_score for w in weighted])


def aggr_rank(
    primary: TokenSentence, alternative: TokenSentence, source: TokenSentence
) -> TokenSentence:
    """Keep the primary candidate only when it is the less aggressive one.

    Primary wins iff it proposes strictly fewer edits than the alternative
    and proposes at least one; everything else falls back to the
    alternative.
    """
    e_p = len(extract_edits(source, primary))
    e_a = len(extract_edits(source, alternative))
    return primary if 1 <= e_p < e_a else alternative


# ---------------------------------------------------------------------------
# System clustering


def similarity_matrix(outputs: Sequence[SystemOutput]) -> SimilarityMatrix:
    """Mean per-sentence cosine similarity between all system pairs.

    Per sentence, each system's output is a raw-count token vector over the
    union vocabulary of that sentence's variants, scaled by smoothed IDF
    (ln((1+N)/(1+df)) + 1, N = number of systems) and L2-normalized.
    """
    if len(outputs) < 2:
        raise ValidationError("similarity needs at least 2 systems")
    n_sys = len(outputs)
    n_sentences = len(outputs[0].sentences)
    for out in outputs[1:]:
        if len(out.sentences) != n_sentences:
            raise ValidationError(
                f"system {out.name!r} has {len(out.sentences)} sentences, "
                f"expected {n_sentences}"
            )
    if n_sentences == 0:
        raise ValidationError("similarity needs at least 1 sentence")

    acc = np.zeros((n_sys, n_sys))
    for i in range(n_sentences):
        docs = [Counter(out.sentences[i]) for out in outputs]
        vocab = sorted(set().union(*docs))
        index = {tok: k for k, tok in enumerate(vocab)}
        df = Counter(tok for doc in docs for tok in doc)
        idf = np.array(
            [math.log((1 + n_sys) / (1 + df[tok])) + 1 for tok in vocab]
        )
        vectors = np.zeros((n_sys, len(vocab)))
        for s, doc in enumerate(docs):
            for tok, count in doc.items():
                vectors[s, index[tok]] = count
        vectors *= idf
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        if not norms.all():
            empty = outputs[int(np.argmin(norms))].name
            raise ValidationError(f"sentence {i}: empty output from {empty!r}")
        vectors /= norms
        acc += vectors @ vectors.T

    mean = acc / n_sentences
    mean = (mean + mean.T) / 2  # exact symmetry despite float noise
    mean = np.clip(mean, 0.0, 1.0)
    np.fill_diagonal(mean, 1.0)
    return SimilarityMatrix(tuple(out.name for out in outputs), mean)


def cluster_systems(
    outputs: Sequence[SystemOutput],
    threshold: float,
    matrix: SimilarityMatrix | None = None,
) -> list[SystemCluster]:
    """Cut the average-linkage dendrogram over 1 - similarity at ``threshold``.

    Within a cluster the representative is the member with the highest mean
    similarity to the other members (ties to input order); singletons
    represent themselves. Clusters are ordered by their first member's
    input position. Pass a precomputed ``matrix`` to avoid recomputing it.
    """
    sim = matrix if matrix is not None else similarity_matrix(outputs)
    names = sim.names
    dist = 1.0 - sim.values
    np.fill_diagonal(dist, 0.0)
    merges = linkage(squareform(dist, checks=False), method="average")
    labels = fcluster(merges, t=threshold, criterion="distance")

    by_label: dict[int, list[int]] = {}
    for idx, label in enumerate(labels):
        by_label.setdefault(int(label), []).append(idx)
    clusters = []
    for members in sorted(by_label.values(), key=lambda ms: ms[0]):
        best = members[0]
        if len(members) > 1:
            best_mean = -1.0
            for i in members:
                mean_sim = sum(sim.values[i, j] for j in members if j != i) / (
                    len(members) - 1
                )
                if mean_sim > best_mean:
                    best, best_mean = i, mean_sim
        clusters.append(
            SystemCluster(tuple(names[i] for i in members), names[best])
        )
    return clusters


def matrix_tsv(matrix: SimilarityMatrix) -> str:
    lines = ["system\t" + "\t".join(matrix.names)]
    for i, name in enumerate(matrix.names):
        row = "\t".join(f"{matrix.values[i, j]:.6f}" for j in range(len(matrix.names)))
        lines.append(f"{name}\t{row}")
    return "\n".join(lines) + "\n"


def clusters_tsv(clusters: Sequence[SystemCluster]) -> str:
    lines = ["system\tcluster\trepresentative"]
    for cid, cluster in enumerate(clusters, start=1):
        for member in cluster.members:
            flag = 1 if member == cluster.representative else 0
            lines.append(f"{member}\t{cid}\t{flag}")
    return "\n".join(lines) + "\n"
