"""Payload builders shared by the HTTP service and the CLI.

Both surfaces serve the same dict structures, so analytics results are
content-identical regardless of transport. All floats are rounded to 9
significant digits at this boundary (engine internals stay full precision).
"""

from __future__ import annotations

import csv
import io
import json
from typing import Optional, Sequence

from .compare import GroupSelector, divergence, dual_layout, resolve_group
from .errors import InputError, NotFoundError
from .explain import relation_graph, select_contrast, summarize, vifi
from .geometry import RegionSelector, convex_hull, select_region
from .labels import error_shares, filter_samples, sort_confusions
from .localwords import LwcParams, build_index, local_concepts, local_words
from .store import DEFAULT_CLUSTER_CUT, DatasetRegistry, RegistryEntry
from .labels import cluster_labels


def round_floats(obj):
    """Round every float to 9 significant digits, recursively."""
    if isinstance(obj, float):
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


def parse_region(flat: Optional[Sequence[float]]) -> Optional[RegionSelector]:
    """A region travels as a flat lasso-polygon coordinate list."""
    if flat is None:
        return None
    if len(flat) % 2 != 0 or len(flat) < 6:
        raise InputError(
            "region needs an even number of coordinates (>= 3 points)", code="invalid_region"
        )
    vertices = tuple((float(flat[i]), float(flat[i + 1])) for i in range(0, len(flat), 2))
    return RegionSelector(kind="lasso_polygon", vertices=vertices)


def _confidence_band(lo: Optional[float], hi: Optional[float]):
    if lo is None and hi is None:
        return None
    return (0.0 if lo is None else float(lo), 1.0 if hi is None else float(hi))


def _filtered_indices(entry, errors_only, conf_lo, conf_hi, labels, region=None):
    indices = filter_samples(
        entry.dataset,
        errors_only=errors_only,
        confidence=_confidence_band(conf_lo, conf_hi),
        labels=None if labels is None else frozenset(labels),
    )
    if region is not None:
        indices &= select_region(entry.layout, region)
    return sorted(indices)


def build_datasets_payload(registry: DatasetRegistry) -> dict:
    return {
        "datasets": [
            {
                "id": did,
                "sample_count": len(registry.get(did).dataset),
                "label_count": len(registry.get(did).dataset.label_set),
            }
            for did in registry.ids()
        ]
    }


def build_points_payload(
    entry: RegistryEntry,
    errors_only: bool = False,
    conf_lo: Optional[float] = None,
    conf_hi: Optional[float] = None,
    labels: Optional[Sequence[str]] = None,
) -> dict:
    dataset = entry.dataset
    positions = entry.layout.positions
    indices = _filtered_indices(entry, errors_only, conf_lo, conf_hi, labels)
    points = []
    for i in indices:
        s = dataset.samples[i]
        points.append(
            {
                "id": s.id,
                "x": float(positions[i, 0]),
                "y": float(positions[i, 1]),
                "gold_label": s.gold_label,
                "pred_label": s.pred_label,
                "confidence": s.confidence,
                "correct": s.correct,
                "domain": s.domain,
            }
        )
    return round_floats(
        {
            "dataset": entry.dataset_id,
            "layout_id": entry.layout_id,
            "method": entry.layout.method,
            "seed": entry.layout.seed,
            "sample_count": len(points),
            "points": points,
        }
    )


def build_local_words_payload(
    entry: RegistryEntry,
    freq: int = 5,
    locality: float = 0.5,
    quantile: float = 0.8,
    mode: str = "words",
    stopwords: str = "ignore",
    region: Optional[Sequence[float]] = None,
) -> dict:
    if mode not in ("words", "concepts"):
        raise InputError(f"unknown local-word mode {mode!r}")
    if stopwords not in ("keep", "ignore"):
        raise InputError(f"stopwords must be 'keep' or 'ignore', got {stopwords!r}")
    params = LwcParams(
        freq_threshold=int(freq),
        locality_max=float(locality),
        ignore_stopwords=stopwords == "ignore",
        locality_quantile=float(quantile),
    )
    index = build_index(entry.dataset, entry.layout, region=parse_region(region))
    if mode == "words":
        found = local_words(index, params)
    else:
        found = local_concepts(index, entry.dataset.lexicon, params, params)
    return round_floats(
        {
            "dataset": entry.dataset_id,
            "mode": mode,
            "params": {
                "freq_threshold": params.freq_threshold,
                "locality_max": params.locality_max,
                "locality_quantile": params.locality_quantile,
                "stopwords": stopwords,
            },
            "words": [
                {
                    "word": w.word,
                    "x": w.position[0],
                    "y": w.position[1],
                    "frequency": w.frequency,
                    "locality": w.locality,
                    "scale_hint": w.scale_hint,
                }
                for w in found
            ],
        }
    )


def _ranked_items(counter_items, containing, total_samples):
    ranked = sorted(counter_items.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        {
            "item": item,
            "count": count,
            "sample_share": (len(containing[item]) / total_samples) if total_samples else 0.0,
        }
        for item, count in ranked
    ]


def build_lists_payload(
    entry: RegistryEntry,
    errors_only: bool = False,
    conf_lo: Optional[float] = None,
    conf_hi: Optional[float] = None,
    labels: Optional[Sequence[str]] = None,
    region: Optional[Sequence[float]] = None,
    stopwords: str = "ignore",
) -> dict:
    """Ranked words, concepts, and gold/pred labels over the visible samples.

    Counts are occurrence counts; sample_share is the fraction of visible
    samples containing the item. Label shares are fractions of visible
    samples, which under an errors-only filter equal the false-negative and
    false-positive shares.
    """
    if stopwords not in ("keep", "ignore"):
        raise InputError(f"stopwords must be 'keep' or 'ignore', got {stopwords!r}")
    from .dataset import normalize_word

    dataset = entry.dataset
    indices = _filtered_indices(
        entry, errors_only, conf_lo, conf_hi, labels, parse_region(region)
    )
    total = len(indices)
    word_counts: dict[str, int] = {}
    word_samples: dict[str, set] = {}
    concept_counts: dict[str, int] = {}
    concept_samples: dict[str, set] = {}
    gold_counts: dict[str, int] = {}
    pred_counts: dict[str, int] = {}
    for i in indices:
        s = dataset.samples[i]
        gold_counts[s.gold_label] = gold_counts.get(s.gold_label, 0) + 1
        pred_counts[s.pred_label] = pred_counts.get(s.pred_label, 0) + 1
        for token in s.tokens:
            word = normalize_word(token)
            if word is None:
                continue
            if stopwords == "keep" or word not in dataset.stopwords:
                word_counts[word] = word_counts.get(word, 0) + 1
                word_samples.setdefault(word, set()).add(i)
            for concept in dataset.lexicon.concepts(word):
                concept_counts[concept] = concept_counts.get(concept, 0) + 1
                concept_samples.setdefault(concept, set()).add(i)

    def label_rows(counts):
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [
            {"item": label, "count": count, "share": count / total if total else 0.0}
            for label, count in ranked
        ]

    return round_floats(
        {
            "dataset": entry.dataset_id,
            "total_samples": total,
            "words": _ranked_items(word_counts, word_samples, total),
            "concepts": _ranked_items(concept_counts, concept_samples, total),
            "gold_labels": label_rows(gold_counts),
            "pred_labels": label_rows(pred_counts),
        }
    )


def build_confusions_payload(
    entry: RegistryEntry,
    sort: str = "freq",
    secondary: Optional[str] = None,
    conf_lo: Optional[float] = None,
    conf_hi: Optional[float] = None,
) -> dict:
    band = _confidence_band(conf_lo, conf_hi)
    if band is None:
        entries = list(entry.confusions)
    else:
        from .labels import confusion_table

        entries = confusion_table(entry.dataset, confidence=band)
    entries = sort_confusions(entries, sort, secondary)
    shares = error_shares(entry.dataset)
    return round_floats(
        {
            "dataset": entry.dataset_id,
            "total_errors": sum(e.frequency for e in entries),
            "entries": [
                {
                    "gold": e.gold,
                    "pred": e.pred,
                    "frequency": e.frequency,
                    "sample_ids": list(e.sample_ids),
                }
                for e in entries
            ],
            "error_shares": {
                "total_errors": shares.total_errors,
                "false_negatives": shares.false_negative_share,
                "false_positives": shares.false_positive_share,
            },
        }
    )


def build_label_clusters_payload(entry: RegistryEntry, cut: Optional[float] = None) -> dict:
    if cut is None or cut == DEFAULT_CLUSTER_CUT:
        clusters = entry.clusters
        cut = DEFAULT_CLUSTER_CUT
    else:
        clusters = cluster_labels(entry.prototypes, cut=float(cut))
    return round_floats(
        {
            "dataset": entry.dataset_id,
            "cut": float(cut),
            "clusters": [
                {
                    "cluster_id": c.cluster_id,
                    "members": list(c.members),
                    "color_index": c.color_index,
                }
                for c in clusters
            ],
        }
    )


def build_hulls_payload(
    entry: RegistryEntry,
    labels: Optional[Sequence[str]] = None,
    membership: str = "gold",
) -> dict:
    if membership not in ("gold", "pred"):
        raise InputError(f"membership must be 'gold' or 'pred', got {membership!r}")
    dataset = entry.dataset
    wanted = list(labels) if labels else list(dataset.label_set)
    for label in wanted:
        if label not in dataset.label_set:
            raise NotFoundError(f"unknown label {label!r}", code="label_not_found")
    positions = entry.layout.positions
    hulls = []
    for label in wanted:
        rows = [
            i
            for i, s in enumerate(dataset.samples)
            if (s.gold_label if membership == "gold" else s.pred_label) == label
        ]
        if not rows:
            continue
        hulls.append(
            {
                "label": label,
                "membership": membership,
                "vertices": [[x, y] for x, y in convex_hull(positions[rows])],
            }
        )
    return round_floats({"dataset": entry.dataset_id, "hulls": hulls})


def build_explanation_payload(
    entry: RegistryEntry,
    sample_id: str,
    contrast_label: Optional[str] = None,
    tau: float = 0.4,
    metrics: Optional[Sequence[str]] = None,
) -> dict:
    dataset = entry.dataset
    idx = dataset.index_of(sample_id)
    sample = dataset.samples[idx]
    triple = select_contrast(
        dataset, sample_id, contrast_label=contrast_label, table=entry.confusions
    )
    graph = relation_graph(dataset, triple, tau=float(tau))
    profile = vifi(dataset, sample_id, metrics=metrics)
    summary = summarize(triple, graph, profile)
    return round_floats(
        {
            "dataset": entry.dataset_id,
            "query": {
                "id": sample.id,
                "text": sample.text,
                "tokens": list(sample.tokens),
                "gold_label": sample.gold_label,
                "pred_label": sample.pred_label,
                "confidence": sample.confidence,
            },
            "triple": {
                "query_id": triple.query_id,
                "closest_id": triple.closest_id,
                "contrast_id": triple.contrast_id,
                "contrast_label": triple.contrast_label,
            },
            "importance": {
                "metrics": list(profile.metric_order),
                "vectors": {m: list(v) for m, v in profile.vectors.items()},
            },
            "graph": {
                "tau": graph.tau,
                "columns": [
                    {
                        "role": c.role,
                        "sample_id": c.sample_id,
                        "label": c.label,
                        "header": c.header,
                        "text": c.text,
                        "tokens": list(c.tokens),
                    }
                    for c in graph.columns
                ],
                "edges": [
                    {
                        "pair": e.pair,
                        "query_index": e.query_index,
                        "other_index": e.other_index,
                        "weight": e.weight,
                    }
                    for e in graph.edges
                ],
                "contributions": {k: list(v) for k, v in graph.contributions.items()},
                "pair_similarity": dict(graph.pair_similarity),
            },
            "summary": {"text": summary.text, "slots": summary.slots},
        }
    )


def selector_from_dict(raw: dict) -> GroupSelector:
    """Decode a group selector from its wire form."""
    if not isinstance(raw, dict):
        raise InputError("group selector must be an object")
    known = {
        "dataset",
        "labels_gold",
        "labels_pred",
        "error_status",
        "confidence",
        "region",
    }
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown selector fields: {sorted(unknown)}")
    confidence = raw.get("confidence")
    if confidence is not None:
        if len(confidence) != 2:
            raise InputError("confidence must be [lo, hi]")
        confidence = (float(confidence[0]), float(confidence[1]))
        if confidence[0] > confidence[1]:
            raise InputError("confidence band is inverted")
    error_status = raw.get("error_status", "all")
    if error_status not in ("all", "errors", "correct"):
        raise InputError(f"unknown error_status {error_status!r}")
    return GroupSelector(
        dataset_id=raw.get("dataset", "default"),
        labels_gold=None if raw.get("labels_gold") is None else frozenset(raw["labels_gold"]),
        labels_pred=None if raw.get("labels_pred") is None else frozenset(raw["labels_pred"]),
        error_status=error_status,
        confidence=confidence,
        region=parse_region(raw.get("region")),
    )


def build_compare_payload(
    registry: DatasetRegistry,
    side_a: GroupSelector,
    side_b: GroupSelector,
    item_kind: str = "word",
) -> dict:
    if item_kind not in ("word", "concept", "label"):
        raise InputError(f"unknown item kind {item_kind!r}")
    entry_a = registry.get(side_a.dataset_id)
    entry_b = registry.get(side_b.dataset_id)
    group_a = resolve_group(side_a, entry_a.dataset, entry_a.layout)
    group_b = resolve_group(side_b, entry_b.dataset, entry_b.layout)
    items = divergence(group_a, group_b, item_kind=item_kind)
    layout_a, layout_b = dual_layout(group_a, group_b, registry.layouts())
    return round_floats(
        {
            "item_kind": item_kind,
            "items": [
                {
                    "item": it.item,
                    "kind": it.kind,
                    "count_a": it.count_a,
                    "count_b": it.count_b,
                    "z": it.z,
                    "verdict": it.verdict,
                }
                for it in items
            ],
            "side_a": {
                "descriptor": group_a.descriptor,
                "layout_id": layout_a.layout_id,
                "sample_ids": list(layout_a.sample_ids),
            },
            "side_b": {
                "descriptor": group_b.descriptor,
                "layout_id": layout_b.layout_id,
                "sample_ids": list(layout_b.sample_ids),
            },
        }
    )


def dump_json(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


_CSV_SHAPES = {
    "datasets": ("datasets", ["id", "sample_count", "label_count"]),
    "points": ("points", ["id", "x", "y", "gold_label", "pred_label", "confidence", "correct", "domain"]),
    "local-words": ("words", ["word", "x", "y", "frequency", "locality", "scale_hint"]),
    "confusions": ("entries", ["gold", "pred", "frequency"]),
    "compare": ("items", ["item", "kind", "count_a", "count_b", "z", "verdict"]),
}


def dump_csv(kind: str, payload: dict) -> str:
    """Tabular renderings for the row-shaped payloads."""
    if kind == "lists":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["section", "item", "count", "share"])
        for section in ("words", "concepts", "gold_labels", "pred_labels"):
            for row in payload[section]:
                writer.writerow(
                    [section, row["item"], row["count"], row.get("share", row.get("sample_share"))]
                )
        return buffer.getvalue()
    if kind == "label-clusters":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["cluster_id", "color_index", "member"])
        for cluster in payload["clusters"]:
            for member in cluster["members"]:
                writer.writerow([cluster["cluster_id"], cluster["color_index"], member])
        return buffer.getvalue()
    if kind == "hulls":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["label", "membership", "x", "y"])
        for hull in payload["hulls"]:
            for x, y in hull["vertices"]:
                writer.writerow([hull["label"], hull["membership"], x, y])
        return buffer.getvalue()
    if kind not in _CSV_SHAPES:
        raise InputError(f"no CSV rendering for {kind!r} results")
    rows_key, columns = _CSV_SHAPES[kind]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in payload[rows_key]:
        writer.writerow([row.get(c, "") for c in columns])
    return buffer.getvalue()
