"""Label-level analytics: confusion table, error shares, label prototypes,
similarity clustering of labels, and sample filtering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .errors import InputError

PALETTE_SIZE = 20  # distinguishable hues available to the UI; indexes cycle


@dataclass(frozen=True)
class ConfusionEntry:
    """One (gold, predicted) error pair with the samples it covers."""

    gold: str
    pred: str
    frequency: int
    sample_ids: tuple[str, ...]


@dataclass(frozen=True)
class ErrorShares:
    """Share of all false negatives per gold label and of all false positives
    per predicted label. Empty (flagged by total_errors == 0) when the model
    made no errors."""

    total_errors: int
    false_negative_share: dict[str, float]
    false_positive_share: dict[str, float]


@dataclass(frozen=True)
class LabelPrototype:
    """Mean embedding of a label's gold samples."""

    label: str
    vector: np.ndarray
    support: int

    def __post_init__(self):
        self.vector.setflags(write=False)


@dataclass(frozen=True)
class LabelCluster:
    cluster_id: int
    members: tuple[str, ...]
    color_index: int


def confusion_table(
    dataset: Dataset, confidence: Optional[tuple[float, float]] = None
) -> list[ConfusionEntry]:
    """Count (gold, pred) error pairs among samples in the confidence band.

    Default order: frequency descending, ties lexicographic by (gold, pred).
    """
    pairs: dict[tuple[str, str], list[str]] = {}
    for sample in dataset.samples:
        if sample.correct:
            continue
        if confidence is not None:
            lo, hi = confidence
            if lo > hi:
                raise InputError(f"confidence band [{lo}, {hi}] is inverted")
            if not lo <= sample.confidence <= hi:
                continue
        pairs.setdefault((sample.gold_label, sample.pred_label), []).append(sample.id)
    entries = [
        ConfusionEntry(gold=g, pred=p, frequency=len(ids), sample_ids=tuple(ids))
        for (g, p), ids in pairs.items()
    ]
    return sort_confusions(entries, "freq")


_SORT_KEYS = {
    "freq": lambda e: (-e.frequency,),
    "gold": lambda e: (e.gold,),
    "pred": lambda e: (e.pred,),
}


def sort_confusions(
    entries: Sequence[ConfusionEntry], key: str = "freq", secondary: Optional[str] = None
) -> list[ConfusionEntry]:
    """Total-order sort: primary key, optional secondary key within primary
    groups, then (gold, pred) lexicographically as the final tie-break."""
    if key not in _SORT_KEYS:
        raise InputError(f"unknown sort key {key!r}")
    if secondary is not None and secondary not in _SORT_KEYS:
        raise InputError(f"unknown secondary sort key {secondary!r}")
    primary = _SORT_KEYS[key]
    second = _SORT_KEYS[secondary] if secondary else lambda e: ()
    return sorted(entries, key=lambda e: primary(e) + second(e) + (e.gold, e.pred))


def error_shares(dataset: Dataset) -> ErrorShares:
    """Distribution of errors over gold labels (false negatives) and over
    predicted labels (false positives)."""
    errors = [s for s in dataset.samples if not s.correct]
    if not errors:
        return ErrorShares(0, {}, {})
    fn: dict[str, int] = {}
    fp: dict[str, int] = {}
    for s in errors:
        fn[s.gold_label] = fn.get(s.gold_label, 0) + 1
        fp[s.pred_label] = fp.get(s.pred_label, 0) + 1
    total = len(errors)
    return ErrorShares(
        total_errors=total,
        false_negative_share={k: v / total for k, v in sorted(fn.items())},
        false_positive_share={k: v / total for k, v in sorted(fp.items())},
    )


def label_prototypes(dataset: Dataset) -> list[LabelPrototype]:
    """Mean sample embedding per gold label, ordered like the label set."""
    matrix = dataset.embeddings.sample_matrix
    groups: dict[str, list[int]] = {}
    for i, s in enumerate(dataset.samples):
        groups.setdefault(s.gold_label, []).append(i)
    prototypes = []
    for label in dataset.label_set:
        rows = groups.get(label)
        if not rows:
            raise InputError(f"label {label!r} has no gold samples")
        prototypes.append(
            LabelPrototype(label=label, vector=matrix[rows].mean(axis=0), support=len(rows))
        )
    return prototypes


def _cosine_distance_matrix(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1)
    norms = np.where(norms == 0.0, 1.0, norms)
    unit = vectors / norms[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    return 1.0 - sim


def cluster_labels(prototypes: Sequence[LabelPrototype], cut: float = 0.5) -> list[LabelCluster]:
    """Average-linkage agglomeration over cosine distance between prototypes.

    Merging continues while the smallest linkage stays below ``cut``. Merge
    order is deterministic: lowest linkage first, ties resolved by the
    lexicographically smallest member labels of the two clusters. Cluster ids
    and palette color indexes follow each cluster's smallest member label.
    """
    if not prototypes:
        raise InputError("cluster_labels requires at least one prototype")
    if not 0.0 < cut < 2.0:
        raise InputError("cut must lie in (0, 2)")
    ordered = sorted(prototypes, key=lambda p: p.label)
    dist = _cosine_distance_matrix(np.stack([p.vector for p in ordered]))
    clusters: dict[int, list[int]] = {i: [i] for i in range(len(ordered))}

    def linkage(a: int, b: int) -> float:
        rows = clusters[a]
        cols = clusters[b]
        return float(dist[np.ix_(rows, cols)].mean())

    def rep(c: int) -> str:
        return min(ordered[i].label for i in clusters[c])

    while len(clusters) > 1:
        best = None
        ids = sorted(clusters)
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                a, b = ids[ai], ids[bi]
                ra, rb = sorted((rep(a), rep(b)))
                key = (linkage(a, b), ra, rb)
                if best is None or key < best[0]:
                    best = (key, a, b)
        (link, _, _), a, b = best
        if link >= cut:
            break
        clusters[a] = clusters[a] + clusters[b]
        del clusters[b]

    members = sorted(
        (tuple(sorted(ordered[i].label for i in rows)) for rows in clusters.values()),
        key=lambda m: m[0],
    )
    # color_index is unique per cluster; renderers cycle it through the
    # PALETTE_SIZE-hue palette (color = palette[color_index % PALETTE_SIZE]).
    return [
        LabelCluster(cluster_id=i, members=m, color_index=i) for i, m in enumerate(members)
    ]


def filter_samples(
    dataset: Dataset,
    errors_only: bool = False,
    confidence: Optional[tuple[float, float]] = None,
    labels: Optional[frozenset[str]] = None,
) -> frozenset[int]:
    """Conjunction of predicates over the corpus.

    The confidence band is boundary-inclusive; the label filter keeps samples
    whose gold or predicted label is in the set.
    """
    if confidence is not None and confidence[0] > confidence[1]:
        raise InputError(f"confidence band [{confidence[0]}, {confidence[1]}] is inverted")
    kept = []
    for i, s in enumerate(dataset.samples):
        if errors_only and s.correct:
            continue
        if confidence is not None and not confidence[0] <= s.confidence <= confidence[1]:
            continue
        if labels is not None and s.gold_label not in labels and s.pred_label not in labels:
            continue
        kept.append(i)
    return frozenset(kept)
