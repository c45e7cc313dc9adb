"""Sample-level explanations: multi-metric token importance (VIFI), neighbor
and contrast selection, token relation graphs, and the templated summary.

Similarity is cosine over mean-pooled token embeddings everywhere, which
admits an exact additive decomposition onto tokens; the relation graphs are
faithful by construction rather than estimated.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset, normalize_word
from .errors import InputError, NotFoundError
from .labels import ConfusionEntry, confusion_table

BUILTIN_METRICS = ("occlusion", "similarity", "class_tfidf")
DEFAULT_TAU = 0.4


@dataclass(frozen=True)
class ImportanceProfile:
    """Per-metric, per-token importance scores, each vector L1-normalized."""

    sample_id: str
    metric_order: tuple[str, ...]
    vectors: dict[str, tuple[float, ...]]


@dataclass(frozen=True)
class ContrastTriple:
    """Query plus its nearest same-predicted-label example and a contrast
    example carrying a different label."""

    query_id: str
    closest_id: str
    contrast_id: str
    contrast_label: str


@dataclass(frozen=True)
class GraphColumn:
    role: str
    sample_id: str
    label: str
    header: str
    text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class GraphEdge:
    pair: str
    query_index: int
    other_index: int
    weight: float


@dataclass(frozen=True)
class RelationGraph:
    """Token-to-token links above the cosine threshold, plus each token's
    additive contribution to the two pooled similarities."""

    columns: tuple[GraphColumn, ...]
    edges: tuple[GraphEdge, ...]
    contributions: dict[str, tuple[float, ...]]
    pair_similarity: dict[str, float]
    tau: float


@dataclass(frozen=True)
class Summary:
    text: str
    slots: dict


def _normalize_scores(raw: Sequence[float]) -> tuple[float, ...]:
    clamped = [max(0.0, float(v)) for v in raw]
    total = sum(clamped)
    if total <= 0.0:
        return tuple(1.0 / len(clamped) for _ in clamped)
    return tuple(v / total for v in clamped)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InputError("zero-norm pooled embedding")
    return float(a @ b / (na * nb))


def _class_tfidf_weights(dataset: Dataset) -> tuple[dict[str, Counter], dict[str, int], Counter, float]:
    per_label: dict[str, Counter] = {}
    corpus: Counter = Counter()
    for sample in dataset.samples:
        counts = per_label.setdefault(sample.pred_label, Counter())
        for token in sample.tokens:
            word = normalize_word(token)
            if word is None:
                continue
            counts[word] += 1
            corpus[word] += 1
    label_totals = {label: sum(c.values()) for label, c in per_label.items()}
    avg_class_tokens = sum(label_totals.values()) / max(1, len(label_totals))
    return per_label, label_totals, corpus, avg_class_tokens


def occlusion_scores(tokens: np.ndarray, prototype: np.ndarray) -> list[float]:
    """Increase in cosine distance from the prototype when a token leaves the
    mean pool. Single-token samples have nothing to remove and score zero raw."""
    n = tokens.shape[0]
    if n == 1:
        return [0.0]
    pooled = tokens.mean(axis=0)
    base = 1.0 - _cosine(pooled, prototype)
    total = tokens.sum(axis=0)
    scores = []
    for i in range(n):
        without = (total - tokens[i]) / (n - 1)
        scores.append((1.0 - _cosine(without, prototype)) - base)
    return scores


def similarity_share_scores(tokens: np.ndarray, prototype: np.ndarray) -> list[float]:
    """Each token's additive share of the pooled cosine similarity to the
    prototype: share_i = <t_i, proto> / (n * |pool| * |proto|)."""
    n = tokens.shape[0]
    pooled = tokens.mean(axis=0)
    denom = n * np.linalg.norm(pooled) * np.linalg.norm(prototype)
    if denom == 0.0:
        raise InputError("zero-norm pooled embedding")
    return [float(tokens[i] @ prototype) / denom for i in range(n)]


def vifi(
    dataset: Dataset, sample_id: str, metrics: Optional[Sequence[str]] = None
) -> ImportanceProfile:
    """Compute the requested importance metrics for one sample.

    Built-ins: ``occlusion`` (leave-one-out cosine distance increase to the
    predicted-label prototype), ``similarity`` (additive cosine share toward
    the prototype), ``class_tfidf`` (class-based tf-idf of the token for the
    predicted label). Anything else is looked up among the ingested external
    scores. Every vector is clamped at zero and normalized to sum 1; an
    all-zero vector falls back to uniform.
    """
    idx = dataset.index_of(sample_id)
    sample = dataset.samples[idx]
    if metrics is None:
        metrics = BUILTIN_METRICS + dataset.external_importance.metrics()
    metric_order = tuple(metrics)
    if len(set(metric_order)) != len(metric_order):
        raise InputError("duplicate metric name in request")

    tokens = dataset.embeddings.token_matrices[idx]
    prototype = None
    if any(m in ("occlusion", "similarity") for m in metric_order):
        rows = [i for i, s in enumerate(dataset.samples) if s.gold_label == sample.pred_label]
        if not rows:
            raise InputError(
                f"label {sample.pred_label!r} has no gold samples; no prototype available"
            )
        prototype = dataset.embeddings.sample_matrix[rows].mean(axis=0)

    vectors: dict[str, tuple[float, ...]] = {}
    for metric in metric_order:
        if metric == "occlusion":
            raw = occlusion_scores(tokens, prototype)
        elif metric == "similarity":
            raw = similarity_share_scores(tokens, prototype)
        elif metric == "class_tfidf":
            per_label, label_totals, corpus, avg_tokens = _class_tfidf_weights(dataset)
            counts = per_label.get(sample.pred_label, Counter())
            total = label_totals.get(sample.pred_label, 0)
            raw = []
            for token in sample.tokens:
                word = normalize_word(token)
                if word is None or total == 0 or corpus[word] == 0:
                    raw.append(0.0)
                else:
                    raw.append(counts[word] / total * math.log(1.0 + avg_tokens / corpus[word]))
        else:
            external = dataset.external_importance.scores(sample_id, metric)
            if external is None:
                raise NotFoundError(
                    f"unknown metric {metric!r} for sample {sample_id!r}",
                    code="metric_not_found",
                )
            raw = list(external)
        vectors[metric] = _normalize_scores(raw)
    return ImportanceProfile(sample_id=sample_id, metric_order=metric_order, vectors=vectors)


def _nearest(
    dataset: Dataset, query_vec: np.ndarray, candidates: Sequence[int]
) -> Optional[int]:
    """Highest cosine similarity to the query; ties go to the smaller id."""
    best = None
    matrix = dataset.embeddings.sample_matrix
    qn = np.linalg.norm(query_vec)
    for i in candidates:
        v = matrix[i]
        denom = qn * np.linalg.norm(v)
        sim = float(query_vec @ v / denom) if denom > 0.0 else -1.0
        key = (-sim, dataset.samples[i].id)
        if best is None or key < best[0]:
            best = (key, i)
    return None if best is None else best[1]


def _default_contrast_label(
    dataset: Dataset, query_idx: int, table: Sequence[ConfusionEntry]
) -> str:
    query = dataset.samples[query_idx]
    if not query.correct:
        return query.gold_label
    pred = query.pred_label
    partners: dict[str, int] = {}
    for entry in table:
        if entry.gold == pred:
            partners[entry.pred] = partners.get(entry.pred, 0) + entry.frequency
        elif entry.pred == pred:
            partners[entry.gold] = partners.get(entry.gold, 0) + entry.frequency
    if partners:
        return min(partners, key=lambda label: (-partners[label], label))
    others = [
        i
        for i, s in enumerate(dataset.samples)
        if s.gold_label != pred and i != query_idx
    ]
    nearest = _nearest(dataset, dataset.embeddings.sample_matrix[query_idx], others)
    if nearest is None:
        raise InputError("no sample with a different label exists", code="contrast_unavailable")
    return dataset.samples[nearest].gold_label


def select_contrast(
    dataset: Dataset,
    query_id: str,
    contrast_label: Optional[str] = None,
    table: Optional[Sequence[ConfusionEntry]] = None,
) -> ContrastTriple:
    """Pick the nearest same-predicted-label example and a contrast example.

    The contrast label defaults to the gold label for a misclassified query,
    otherwise to the label most frequently confused with the prediction,
    otherwise to the nearest different-label sample's label.
    """
    query_idx = dataset.index_of(query_id)
    query = dataset.samples[query_idx]
    query_vec = dataset.embeddings.sample_matrix[query_idx]

    same = [
        i
        for i, s in enumerate(dataset.samples)
        if s.gold_label == query.pred_label and i != query_idx
    ]
    closest = _nearest(dataset, query_vec, same)
    if closest is None:
        raise InputError(
            f"no other sample of predicted label {query.pred_label!r} to act as the closest example",
            code="contrast_unavailable",
        )

    if contrast_label is None:
        contrast_label = _default_contrast_label(
            dataset, query_idx, table if table is not None else confusion_table(dataset)
        )
    if contrast_label == query.pred_label:
        raise InputError("contrast label must differ from the predicted label")
    if contrast_label not in dataset.label_set:
        raise NotFoundError(f"unknown label {contrast_label!r}", code="label_not_found")
    contrast_candidates = [
        i
        for i, s in enumerate(dataset.samples)
        if s.gold_label == contrast_label and i != query_idx
    ]
    contrast = _nearest(dataset, query_vec, contrast_candidates)
    if contrast is None:
        raise InputError(
            f"no sample with gold label {contrast_label!r} to contrast against",
            code="contrast_unavailable",
        )

    return ContrastTriple(
        query_id=query_id,
        closest_id=dataset.samples[closest].id,
        contrast_id=dataset.samples[contrast].id,
        contrast_label=contrast_label,
    )


def similarity_contributions(
    query_tokens: np.ndarray, other_tokens: np.ndarray
) -> tuple[list[float], list[float], float]:
    """Exact additive decomposition of the pooled cosine similarity.

    Returns per-query-token contributions, per-other-token contributions, and
    the pooled cosine; each contribution list sums to the cosine.
    """
    n, m = query_tokens.shape[0], other_tokens.shape[0]
    pool_q = query_tokens.mean(axis=0)
    pool_s = other_tokens.mean(axis=0)
    denom = n * m * np.linalg.norm(pool_q) * np.linalg.norm(pool_s)
    if denom == 0.0:
        raise InputError("zero-norm pooled embedding")
    cross = (query_tokens @ other_tokens.T) / denom
    return (
        cross.sum(axis=1).tolist(),
        cross.sum(axis=0).tolist(),
        _cosine(pool_q, pool_s),
    )


def relation_graph(dataset: Dataset, triple: ContrastTriple, tau: float = DEFAULT_TAU) -> RelationGraph:
    """Token-to-token links (cosine >= tau) between query/closest and
    query/contrast, with each token's contribution to the pooled similarity."""
    qi = dataset.index_of(triple.query_id)
    ci = dataset.index_of(triple.closest_id)
    xi = dataset.index_of(triple.contrast_id)
    query, closest, contrast = (dataset.samples[i] for i in (qi, ci, xi))
    tm = dataset.embeddings.token_matrices
    q_tokens, c_tokens, x_tokens = tm[qi], tm[ci], tm[xi]

    columns = (
        GraphColumn(
            role="query",
            sample_id=query.id,
            label=query.pred_label,
            header=f"{query.id} [{query.pred_label}]",
            text=query.text,
            tokens=query.tokens,
        ),
        GraphColumn(
            role="closest",
            sample_id=closest.id,
            label=closest.gold_label,
            header=f"{closest.id} [{closest.gold_label}]",
            text=closest.text,
            tokens=closest.tokens,
        ),
        GraphColumn(
            role="contrast",
            sample_id=contrast.id,
            label=triple.contrast_label,
            header=f"{contrast.id} [{triple.contrast_label}]",
            text=contrast.text,
            tokens=contrast.tokens,
        ),
    )

    contributions: dict[str, tuple[float, ...]] = {}
    pair_similarity: dict[str, float] = {}
    edges: list[GraphEdge] = []
    for pair, other_tokens in (("query_closest", c_tokens), ("query_contrast", x_tokens)):
        q_contrib, s_contrib, cosine = similarity_contributions(q_tokens, other_tokens)
        contributions[pair] = tuple(q_contrib)
        contributions["closest" if pair == "query_closest" else "contrast"] = tuple(s_contrib)
        pair_similarity[pair] = cosine

        q_norms = np.linalg.norm(q_tokens, axis=1)
        s_norms = np.linalg.norm(other_tokens, axis=1)
        denom = np.outer(q_norms, s_norms)
        with np.errstate(divide="ignore", invalid="ignore"):
            token_cos = np.where(denom > 0.0, (q_tokens @ other_tokens.T) / denom, 0.0)
        for i, j in np.argwhere(token_cos >= tau):
            edges.append(
                GraphEdge(
                    pair=pair,
                    query_index=int(i),
                    other_index=int(j),
                    weight=float(token_cos[i, j]),
                )
            )

    return RelationGraph(
        columns=columns,
        edges=tuple(edges),
        contributions=contributions,
        pair_similarity=pair_similarity,
        tau=tau,
    )


def _find_confounder(graph: RelationGraph) -> Optional[int]:
    """Query token whose contribution to BOTH pooled similarities exceeds that
    pair's mean contribution; the strongest such token wins."""
    to_closest = graph.contributions["query_closest"]
    to_contrast = graph.contributions["query_contrast"]
    mean_c = sum(to_closest) / len(to_closest)
    mean_x = sum(to_contrast) / len(to_contrast)
    best = None
    for i, (a, b) in enumerate(zip(to_closest, to_contrast)):
        if a > mean_c and b > mean_x:
            key = (-(a + b), i)
            if best is None or key < best[0]:
                best = (key, i)
    return None if best is None else best[1]


def summarize(triple: ContrastTriple, graph: RelationGraph, profile: ImportanceProfile) -> Summary:
    """Fill the fixed explanation template from the graph and the importance
    profile. Wording is deterministic; the confounder clause appears only when
    a token clears both mean contributions."""
    if profile.sample_id != triple.query_id:
        raise InputError("importance profile and triple describe different samples")
    query_col, closest_col, contrast_col = graph.columns

    totals = [
        sum(graph_vector[i] for graph_vector in profile.vectors.values())
        for i in range(len(query_col.tokens))
    ]
    ranked = sorted(range(len(totals)), key=lambda i: (-totals[i], i))
    top_tokens = tuple(query_col.tokens[i] for i in ranked[:2])

    confounder_idx = _find_confounder(graph)
    confounder = None if confounder_idx is None else query_col.tokens[confounder_idx]

    if len(top_tokens) == 1:
        support = f'The strongest supporting token is "{top_tokens[0]}".'
    else:
        support = f'The strongest supporting tokens are "{top_tokens[0]}" and "{top_tokens[1]}".'
    parts = [
        f'The model predicted "{query_col.label}" for sample {triple.query_id}.',
        f'Its closest "{closest_col.label}" example is sample {triple.closest_id}: "{closest_col.text}".',
        support,
        f'The contrast label "{triple.contrast_label}" is represented by sample '
        f'{triple.contrast_id}: "{contrast_col.text}".',
    ]
    if confounder is not None:
        parts.append(
            f'The token "{confounder}" contributes strongly to the similarity with both '
            f"examples and may be confounding the two labels."
        )
    return Summary(
        text=" ".join(parts),
        slots={
            "query_id": triple.query_id,
            "pred_label": query_col.label,
            "closest_id": triple.closest_id,
            "closest_text": closest_col.text,
            "top_tokens": list(top_tokens),
            "contrast_label": triple.contrast_label,
            "contrast_id": triple.contrast_id,
            "contrast_text": contrast_col.text,
            "confounder": confounder,
        },
    )
