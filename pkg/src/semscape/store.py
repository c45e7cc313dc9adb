"""Dataset stores: a self-contained directory holding the raw inputs, a
manifest, the projected layout cache, and derived analytics caches.

Everything derived (layout, confusion table, prototypes, clusters) can be
deleted and recomputed; the manifest plus raw inputs are the source of truth.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import formats
from .dataset import Dataset, load_corpus
from .errors import FormatError, InputError, NotFoundError
from .labels import ConfusionEntry, LabelCluster, cluster_labels, confusion_table, label_prototypes
from .projection import ProjectedLayout, ProjectionParams, project

MANIFEST_NAME = "manifest.json"
LAYOUT_NAME = "layout.seml"
CACHES_NAME = "caches.json"
CACHE_VERSION = 1
DEFAULT_SEED = 42
DEFAULT_CLUSTER_CUT = 0.5


@dataclass(frozen=True)
class Manifest:
    """Recipe for rebuilding a dataset: input file names (relative to the
    store directory) plus projection settings."""

    dataset_id: str
    corpus: str
    token_embeddings: str
    sample_embeddings: Optional[str] = None
    lexicon: Optional[str] = None
    importance: Optional[str] = None
    stopwords: Optional[str] = None
    method: str = "tsne"
    seed: int = DEFAULT_SEED
    projection: ProjectionParams = field(default_factory=ProjectionParams)

    def to_dict(self) -> dict:
        return {
            "version": CACHE_VERSION,
            "id": self.dataset_id,
            "corpus": self.corpus,
            "token_embeddings": self.token_embeddings,
            "sample_embeddings": self.sample_embeddings,
            "lexicon": self.lexicon,
            "importance": self.importance,
            "stopwords": self.stopwords,
            "method": self.method,
            "seed": self.seed,
            "projection": self.projection.to_dict(),
        }


def load_manifest(store_dir) -> Manifest:
    path = Path(store_dir) / MANIFEST_NAME
    if not path.exists():
        raise InputError(
            f"{store_dir}: not a dataset store (missing {MANIFEST_NAME})", code="store_invalid"
        )
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg})") from exc
    if raw.get("version") != CACHE_VERSION:
        raise FormatError(f"{path}: unsupported manifest version {raw.get('version')!r}")
    try:
        return Manifest(
            dataset_id=raw["id"],
            corpus=raw["corpus"],
            token_embeddings=raw["token_embeddings"],
            sample_embeddings=raw.get("sample_embeddings"),
            lexicon=raw.get("lexicon"),
            importance=raw.get("importance"),
            stopwords=raw.get("stopwords"),
            method=raw.get("method", "tsne"),
            seed=int(raw.get("seed", DEFAULT_SEED)),
            projection=ProjectionParams(**raw.get("projection", {})),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing manifest field {exc.args[0]!r}") from exc


def save_manifest(store_dir, manifest: Manifest) -> None:
    path = Path(store_dir) / MANIFEST_NAME
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")


def build_store(
    out_dir,
    corpus_path,
    token_embeddings_path,
    sample_embeddings_path=None,
    lexicon_path=None,
    importance_path=None,
    stopwords_path=None,
    dataset_id: Optional[str] = None,
    method: str = "tsne",
    seed: int = DEFAULT_SEED,
    projection: Optional[ProjectionParams] = None,
) -> tuple[Manifest, Dataset]:
    """Validate the inputs, copy them into the store, and write the manifest."""
    dataset = load_corpus(
        corpus_path,
        sample_embeddings_path,
        token_embeddings_path,
        lexicon_path=lexicon_path,
        importance_path=importance_path,
        stopwords_path=stopwords_path,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = {}
    for key, src in (
        ("corpus", corpus_path),
        ("token_embeddings", token_embeddings_path),
        ("sample_embeddings", sample_embeddings_path),
        ("lexicon", lexicon_path),
        ("importance", importance_path),
        ("stopwords", stopwords_path),
    ):
        if src is None:
            names[key] = None
            continue
        name = Path(src).name
        dst = out / name
        if Path(src).resolve() != dst.resolve():
            shutil.copyfile(src, dst)
        names[key] = name
    manifest = Manifest(
        dataset_id=dataset_id or Path(corpus_path).stem,
        corpus=names["corpus"],
        token_embeddings=names["token_embeddings"],
        sample_embeddings=names["sample_embeddings"],
        lexicon=names["lexicon"],
        importance=names["importance"],
        stopwords=names["stopwords"],
        method=method,
        seed=seed,
        projection=projection or ProjectionParams(),
    )
    save_manifest(out, manifest)
    return manifest, dataset


def load_dataset(store_dir, manifest: Optional[Manifest] = None) -> Dataset:
    store = Path(store_dir)
    manifest = manifest or load_manifest(store)

    def path_of(name):
        return None if name is None else store / name

    return load_corpus(
        store / manifest.corpus,
        path_of(manifest.sample_embeddings),
        store / manifest.token_embeddings,
        lexicon_path=path_of(manifest.lexicon),
        importance_path=path_of(manifest.importance),
        stopwords_path=path_of(manifest.stopwords),
    )


def compute_layout(dataset: Dataset, manifest: Manifest) -> ProjectedLayout:
    return project(
        dataset.embeddings, manifest.projection, seed=manifest.seed, method=manifest.method
    )


def write_layout(store_dir, layout: ProjectedLayout) -> None:
    params = dict(layout.params.to_dict(), method=layout.method)
    formats.write_layout_cache(
        Path(store_dir) / LAYOUT_NAME, layout.positions, layout.seed, params
    )


def read_layout(store_dir, expected_samples: int) -> Optional[ProjectedLayout]:
    path = Path(store_dir) / LAYOUT_NAME
    if not path.exists():
        return None
    positions, seed, params = formats.read_layout_cache(path)
    if positions.shape[0] != expected_samples:
        raise FormatError(
            f"{path}: layout covers {positions.shape[0]} samples, dataset has {expected_samples}"
        )
    method = params.pop("method", "tsne")
    return ProjectedLayout(
        positions=positions, method=method, seed=seed, params=ProjectionParams(**params)
    )


def _caches_payload(entry: "RegistryEntry") -> dict:
    return {
        "version": CACHE_VERSION,
        "confusions": [
            {"gold": e.gold, "pred": e.pred, "sample_ids": list(e.sample_ids)}
            for e in entry.confusions
        ],
        "prototypes": {
            p.label: {"vector": p.vector.tolist(), "support": p.support}
            for p in entry.prototypes
        },
        "clusters": {
            "cut": DEFAULT_CLUSTER_CUT,
            "groups": [list(c.members) for c in entry.clusters],
        },
    }


@dataclass(frozen=True)
class RegistryEntry:
    """One loaded dataset with its layout and precomputed analytics."""

    dataset_id: str
    store_dir: Optional[Path]
    dataset: Dataset
    layout: ProjectedLayout
    confusions: tuple[ConfusionEntry, ...]
    prototypes: tuple
    clusters: tuple[LabelCluster, ...]

    @property
    def layout_id(self) -> str:
        return f"{self.dataset_id}:{self.layout.method}:{self.layout.seed}"


def _build_entry(dataset_id, store_dir, dataset, layout) -> RegistryEntry:
    prototypes = tuple(label_prototypes(dataset))
    return RegistryEntry(
        dataset_id=dataset_id,
        store_dir=None if store_dir is None else Path(store_dir),
        dataset=dataset,
        layout=layout,
        confusions=tuple(confusion_table(dataset)),
        prototypes=prototypes,
        clusters=tuple(cluster_labels(prototypes, cut=DEFAULT_CLUSTER_CUT)),
    )


def precompute(store_dir) -> RegistryEntry:
    """Compute and persist the layout and analytics caches for a store."""
    store = Path(store_dir)
    manifest = load_manifest(store)
    dataset = load_dataset(store, manifest)
    layout = compute_layout(dataset, manifest)
    write_layout(store, layout)
    entry = _build_entry(manifest.dataset_id, store, dataset, layout)
    caches = json.dumps(_caches_payload(entry), sort_keys=True)
    (store / CACHES_NAME).write_text(caches + "\n", "utf-8")
    return entry


def load_store(store_dir) -> RegistryEntry:
    """Open a store, reusing the cached layout when present and recomputing
    anything missing (caches are derivable, never authoritative)."""
    store = Path(store_dir)
    manifest = load_manifest(store)
    dataset = load_dataset(store, manifest)
    layout = read_layout(store, len(dataset))
    if layout is None:
        layout = compute_layout(dataset, manifest)
        write_layout(store, layout)
    return _build_entry(manifest.dataset_id, store, dataset, layout)


class DatasetRegistry:
    """Immutable entries keyed by dataset id; loading is the only write path."""

    def __init__(self):
        self._entries: dict[str, RegistryEntry] = {}

    def add(self, entry: RegistryEntry) -> None:
        if entry.dataset_id in self._entries:
            raise InputError(f"dataset {entry.dataset_id!r} is already loaded", code="dataset_exists")
        self._entries[entry.dataset_id] = entry

    def add_store(self, store_dir) -> RegistryEntry:
        entry = load_store(store_dir)
        self.add(entry)
        return entry

    def get(self, dataset_id: str) -> RegistryEntry:
        try:
            return self._entries[dataset_id]
        except KeyError:
            raise NotFoundError(f"unknown dataset {dataset_id!r}", code="dataset_not_found") from None

    def ids(self) -> list[str]:
        return sorted(self._entries)

    def layouts(self) -> dict[str, tuple[str, np.ndarray]]:
        return {
            did: (entry.layout_id, entry.layout.positions)
            for did, entry in self._entries.items()
        }

    def __len__(self) -> int:
        return len(self._entries)
