"""Report-quality metrics and the statistics used to summarize them.

Text metrics (BLEU-2, embedding-based greedy-match score) work on token
sequences and precomputed embedding matrices; clinical metrics compare
report graphs and 14-dimensional pathology indicator vectors. Neural
models are never executed here: their outputs are ingested from sidecar
files so every number is reproducible offline.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, InputError, IoError, SchemaError
from .graph import RadGraph

# Token sequences are plain lists of lower-cased strings; pathology vectors
# are 14-tuples of 0/1 ints; embedding matrices are (tokens, dim) float arrays.
TokenSequence = list[str]
PathologyVector = tuple[int, ...]

PATHOLOGY_DIM = 14

_PUNCT = set(".,:;()/")


def tokenize(text: str) -> TokenSequence:
    """Lower-case, split on whitespace, and peel leading/trailing
    punctuation marks (.,:;()/ ) off into their own tokens."""
    out: list[str] = []
    for word in text.lower().split():
        leading: list[str] = []
        while word and word[0] in _PUNCT:
            leading.append(word[0])
            word = word[1:]
        trailing: list[str] = []
        while word and word[-1] in _PUNCT:
            trailing.append(word[-1])
            word = word[:-1]
        out.extend(leading)
        if word:
            out.append(word)
        out.extend(reversed(trailing))
    return out


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu2(candidate: Sequence[str], reference: Sequence[str],
          eps: float = 1e-9) -> float:
    """Geometric mean of clipped unigram/bigram precision with a brevity
    penalty for short candidates.

    Zero precisions are replaced by ``eps``. An order with no candidate
    n-grams counts as precision 1 when the reference has none either
    (so identical single-token inputs still score 1.0) and 0 otherwise.
    """
    if not candidate:
        return 0.0
    precisions = []
    for n in (1, 2):
        cand_counts = _ngrams(candidate, n)
        ref_counts = _ngrams(reference, n)
        total = sum(cand_counts.values())
        if total == 0:
            p = 1.0 if sum(ref_counts.values()) == 0 else 0.0
        else:
            clipped = sum(min(count, ref_counts[gram])
                          for gram, count in cand_counts.items())
            p = clipped / total
        precisions.append(p if p > 0.0 else eps)
    brevity = (math.exp(1.0 - len(reference) / len(candidate))
               if len(candidate) < len(reference) else 1.0)
    return brevity * math.sqrt(precisions[0] * precisions[1])


class RadGraphF1(NamedTuple):
    entity_f1: float
    relation_f1: float
    combined: float


def _multiset_f1(pred: Counter, ref: Counter) -> float:
    n_pred = sum(pred.values())
    n_ref = sum(ref.values())
    if n_pred == 0 and n_ref == 0:
        return 1.0
    if n_pred == 0 or n_ref == 0:
        return 0.0
    matches = sum((pred & ref).values())
    precision = matches / n_pred
    recall = matches / n_ref
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def radgraph_f1(pred: RadGraph, ref: RadGraph) -> RadGraphF1:
    """Overlap F1 of entities and relations between two report graphs.

    Entities match on (case-folded tokens, label); relations additionally
    require both endpoint entities to match and the kind to agree. Token
    positions are ignored. Empty-vs-empty scores 1, empty-vs-nonempty 0.
    """
    def entity_key(g: RadGraph, eid: str) -> tuple:
        entity = g.entities[eid]
        return (entity.tokens.casefold(), entity.label)

    def keys(g: RadGraph) -> tuple[Counter, Counter]:
        ents = Counter(entity_key(g, eid) for eid in g.entities)
        rels = Counter((entity_key(g, r.source), entity_key(g, r.target), r.kind)
                       for r in g.relations)
        return ents, rels

    pred_ents, pred_rels = keys(pred)
    ref_ents, ref_rels = keys(ref)
    entity_f1 = _multiset_f1(pred_ents, ref_ents)
    relation_f1 = _multiset_f1(pred_rels, ref_rels)
    return RadGraphF1(entity_f1, relation_f1, (entity_f1 + relation_f1) / 2.0)


def as_pathology_vector(values: Sequence) -> PathologyVector:
    """Validate and normalize a 14-long 0/1 indicator sequence."""
    items = list(values)
    if len(items) != PATHOLOGY_DIM:
        raise InputError(
            f"pathology vector must have {PATHOLOGY_DIM} entries, got {len(items)}")
    out = []
    for v in items:
        if v not in (0, 1):
            raise InputError(f"pathology indicator must be 0 or 1, got {v!r}")
        out.append(int(v))
    return tuple(out)


def chexbert_similarity(a: Sequence, b: Sequence) -> float:
    """Cosine similarity of two pathology indicator vectors.

    Two all-zero vectors agree perfectly (1.0); exactly one all-zero
    vector scores 0.0.
    """
    va = as_pathology_vector(a)
    vb = as_pathology_vector(b)
    na = math.sqrt(sum(x * x for x in va))
    nb = math.sqrt(sum(x * x for x in vb))
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    dot = sum(x * y for x, y in zip(va, vb))
    return dot / (na * nb)


def _as_embedding(name: str, rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise InputError(f"{name} embedding matrix must be non-empty and 2-D")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} embedding matrix contains non-finite values")
    return arr


def bert_score(cand_emb, ref_emb) -> float:
    """Greedy-matching F1 over token embeddings.

    Precision is the mean over candidate rows of the best cosine against
    any reference row; recall is symmetric; the score is their harmonic
    mean. Invariant under row permutation of either matrix.
    """
    cand = _as_embedding("candidate", cand_emb)
    ref = _as_embedding("reference", ref_emb)
    if cand.shape[1] != ref.shape[1]:
        raise InputError(
            f"embedding dimensions differ: {cand.shape[1]} vs {ref.shape[1]}")

    def unit(rows: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return rows / norms

    sim = unit(cand) @ unit(ref).T
    precision = float(sim.max(axis=1).mean())
    recall = float(sim.max(axis=0).mean())
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def radcliq(components: dict[str, float], weights: dict[str, float],
            bias: float = 0.0) -> float:
    """Affine combination of sub-metric values; lower is better."""
    total = bias
    for name, weight in weights.items():
        if name not in components:
            raise ConfigError(f"composite weight references missing metric {name!r}")
        total += weight * components[name]
    return total


@dataclass(frozen=True)
class MetricReport:
    """Summary of one metric over a sample: mean, 95% CI half-width, n."""

    name: str
    mean: float
    ci_halfwidth: float
    n: int


def mean_ci(values: Sequence[float], name: str = "score") -> MetricReport:
    """Mean with 1.96 * s / sqrt(n) half-width; s is the sample standard
    deviation (n-1 denominator), zero when n == 1."""
    n = len(values)
    if n == 0:
        raise InputError("mean_ci requires at least one value")
    mean = sum(values) / n
    if n == 1:
        sd = 0.0
    else:
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    return MetricReport(name, mean, 1.96 * sd / math.sqrt(n), n)


def normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class ZTestResult:
    successes: int
    trials: int
    p0: float
    phat: float
    z: float
    p_value: float


def z_test_proportion(x: int, n: int, p0: float) -> ZTestResult:
    """One-sided z-test of a sample proportion against p0 (alternative:
    proportion > p0).

    The standard error uses the sample proportion, sqrt(phat(1-phat)/n),
    not the null proportion. When phat is exactly 0 or 1 the standard
    error vanishes; the p-value is then 1.0 for phat <= p0 and 0.0 for
    phat > p0.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    if not 0 <= x <= n:
        raise InputError(f"x must be in [0, {n}], got {x}")
    if not 0.0 < p0 < 1.0:
        raise InputError(f"p0 must be in (0, 1), got {p0}")
    phat = x / n
    if phat in (0.0, 1.0):
        z = math.inf if phat > p0 else -math.inf
        p_value = 0.0 if phat > p0 else 1.0
        return ZTestResult(x, n, p0, phat, z, p_value)
    se = math.sqrt(phat * (1.0 - phat) / n)
    z = (phat - p0) / se
    return ZTestResult(x, n, p0, phat, z, 1.0 - normal_cdf(z))


def load_pathology_vectors(path) -> dict[str, PathologyVector]:
    """Read a JSON sidecar mapping study id to a 14-entry indicator array."""
    doc = _load_json_object(path)
    out: dict[str, PathologyVector] = {}
    for study_id, values in doc.items():
        if not isinstance(values, list):
            raise SchemaError(f"study {study_id}: expected an array of indicators")
        try:
            out[study_id] = as_pathology_vector(values)
        except InputError as exc:
            raise SchemaError(f"study {study_id}: {exc}") from exc
    return out


def load_embeddings(path) -> dict[str, np.ndarray]:
    """Read a JSON sidecar mapping study id to an array-of-arrays of reals."""
    doc = _load_json_object(path)
    out: dict[str, np.ndarray] = {}
    for study_id, rows in doc.items():
        try:
            out[study_id] = _as_embedding(f"study {study_id}", rows)
        except (InputError, ValueError) as exc:
            raise SchemaError(f"study {study_id}: {exc}") from exc
    return out


def _load_json_object(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object keyed by study id")
    return doc
