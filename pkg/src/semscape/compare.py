"""Comparison mode: contrast two sample groups by word, concept, or label
frequency using weighted log-odds with an informative Dirichlet prior.

Items with |z| below the critical value are "shared"; the sign of z says
which side over-represents the item. The prior comes from pooled corpus
counts scaled to a fixed total, which keeps rare-item odds stable even when
the two groups differ wildly in size.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .dataset import Dataset, normalize_word
from .errors import InputError
from .geometry import RegionSelector, select_positions
from .labels import filter_samples

ALPHA_TOTAL = 500.0
Z_CRITICAL = 1.96

ItemKind = Literal["word", "concept", "label"]


@dataclass(frozen=True)
class GroupSelector:
    """Conjunction of predicates resolving to one group of samples."""

    dataset_id: str = "default"
    labels_gold: Optional[frozenset[str]] = None
    labels_pred: Optional[frozenset[str]] = None
    error_status: Literal["all", "errors", "correct"] = "all"
    confidence: Optional[tuple[float, float]] = None
    region: Optional[RegionSelector] = None

    def describe(self) -> dict:
        out: dict = {"dataset": self.dataset_id}
        if self.labels_gold is not None:
            out["labels_gold"] = sorted(self.labels_gold)
        if self.labels_pred is not None:
            out["labels_pred"] = sorted(self.labels_pred)
        if self.error_status != "all":
            out["error_status"] = self.error_status
        if self.confidence is not None:
            out["confidence"] = list(self.confidence)
        if self.region is not None and self.region.kind != "all":
            out["region"] = [c for v in self.region.vertices for c in v]
        return out


@dataclass(frozen=True)
class ResolvedGroup:
    """A selector applied to a concrete dataset and layout."""

    dataset_id: str
    dataset: Dataset
    indices: frozenset[int]
    descriptor: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DivergenceItem:
    item: str
    kind: str
    count_a: int
    count_b: int
    z: float
    verdict: Literal["shared", "a_side", "b_side"]


@dataclass(frozen=True)
class SideLayout:
    """One side of the dual map: which samples it shows and where."""

    layout_id: str
    sample_ids: tuple[str, ...]
    positions: np.ndarray

    def __post_init__(self):
        self.positions.setflags(write=False)


def resolve_group(selector: GroupSelector, dataset: Dataset, layout) -> ResolvedGroup:
    """Apply every predicate of the selector; raise if nothing survives."""
    indices = set(
        filter_samples(
            dataset,
            errors_only=selector.error_status == "errors",
            confidence=selector.confidence,
        )
    )
    if selector.error_status == "correct":
        indices = {i for i in indices if dataset.samples[i].correct}
    if selector.labels_gold is not None:
        indices = {i for i in indices if dataset.samples[i].gold_label in selector.labels_gold}
    if selector.labels_pred is not None:
        indices = {i for i in indices if dataset.samples[i].pred_label in selector.labels_pred}
    if selector.region is not None and selector.region.kind != "all":
        positions = np.asarray(layout.positions, dtype=np.float64)
        indices &= select_positions(positions, selector.region)
    if not indices:
        raise InputError("group selector resolves to an empty sample set", code="empty_group")
    return ResolvedGroup(
        dataset_id=selector.dataset_id,
        dataset=dataset,
        indices=frozenset(indices),
        descriptor=selector.describe(),
    )


def item_counts(dataset: Dataset, indices, kind: ItemKind) -> Counter:
    """Exact item counts over a sample set.

    Words count normalized token instances; concepts count every concept of
    every normalized token instance (via the lexicon); labels count one gold
    label per sample.
    """
    counts: Counter = Counter()
    for i in sorted(indices):
        sample = dataset.samples[i]
        if kind == "label":
            counts[sample.gold_label] += 1
            continue
        for token in sample.tokens:
            word = normalize_word(token)
            if word is None:
                continue
            if kind == "word":
                counts[word] += 1
            elif kind == "concept":
                for concept in dataset.lexicon.concepts(word):
                    counts[concept] += 1
            else:
                raise InputError(f"unknown item kind {kind!r}")
    return counts


def divergence(
    group_a: ResolvedGroup,
    group_b: ResolvedGroup,
    item_kind: ItemKind = "word",
    alpha_total: float = ALPHA_TOTAL,
    z_critical: float = Z_CRITICAL,
) -> list[DivergenceItem]:
    """Weighted log-odds of every item present in either group.

    delta_w = log[(y_a + a_w) / (n_a + a0 - y_a - a_w)]
            - log[(y_b + a_w) / (n_b + a0 - y_b - a_w)]
    z_w = delta_w / sqrt(1 / (y_a + a_w) + 1 / (y_b + a_w))

    with the prior a_w proportional to pooled corpus counts, scaled to a0.
    Sorted by |z| descending, ties by item ascending.
    """
    if not group_a.indices or not group_b.indices:
        raise InputError("both comparison groups must be non-empty")

    counts_a = item_counts(group_a.dataset, group_a.indices, item_kind)
    counts_b = item_counts(group_b.dataset, group_b.indices, item_kind)

    pooled = item_counts(group_a.dataset, range(len(group_a.dataset)), item_kind)
    if group_b.dataset is not group_a.dataset:
        pooled = pooled + item_counts(group_b.dataset, range(len(group_b.dataset)), item_kind)
    pooled_total = sum(pooled.values())
    if pooled_total == 0:
        return []

    n_a = sum(counts_a.values())
    n_b = sum(counts_b.values())
    items = sorted(set(counts_a) | set(counts_b))
    results = []
    for item in items:
        alpha_w = alpha_total * pooled[item] / pooled_total
        y_a, y_b = counts_a[item], counts_b[item]
        delta = math.log((y_a + alpha_w) / (n_a + alpha_total - y_a - alpha_w)) - math.log(
            (y_b + alpha_w) / (n_b + alpha_total - y_b - alpha_w)
        )
        z = delta / math.sqrt(1.0 / (y_a + alpha_w) + 1.0 / (y_b + alpha_w))
        verdict = "shared" if abs(z) < z_critical else ("a_side" if z > 0 else "b_side")
        results.append(
            DivergenceItem(
                item=item, kind=item_kind, count_a=y_a, count_b=y_b, z=z, verdict=verdict
            )
        )
    results.sort(key=lambda r: (-abs(r.z), r.item))
    return results


def dual_layout(
    group_a: ResolvedGroup,
    group_b: ResolvedGroup,
    layouts: dict[str, tuple[str, np.ndarray]],
) -> tuple[SideLayout, SideLayout]:
    """Filtered copies of each side's layout for side-by-side rendering.

    ``layouts`` maps dataset id to (layout id, positions). Groups over the
    same dataset share coordinates; groups over two datasets each use their
    own layout and report distinct layout ids.
    """
    sides = []
    for group in (group_a, group_b):
        try:
            layout_id, positions = layouts[group.dataset_id]
        except KeyError:
            raise InputError(f"no layout registered for dataset {group.dataset_id!r}") from None
        order = sorted(group.indices)
        sides.append(
            SideLayout(
                layout_id=layout_id,
                sample_ids=tuple(group.dataset.samples[i].id for i in order),
                positions=np.asarray(positions, dtype=np.float64)[order],
            )
        )
    return sides[0], sides[1]
