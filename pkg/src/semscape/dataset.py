"""Corpus ingestion: parse, validate, and index a classified corpus with its
embeddings into an immutable in-memory dataset.

Text arrives pre-tokenized; token embeddings must align with the producing
model's own tokenization, so the engine never tokenizes. Word statistics use
:func:`normalize_word` (lowercase, surrounding punctuation stripped, internal
hyphens and apostrophes kept).
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Optional

import numpy as np

from . import formats
from .errors import FormatError, InputError, NotFoundError
from .stopwords import DEFAULT_STOPWORDS, load_stopwords


def normalize_word(token: str) -> Optional[str]:
    """Normalize a token for word statistics.

    Lowercases and strips surrounding whitespace and Unicode punctuation
    (category P*) down to a fixpoint; internal hyphens and apostrophes
    survive. Returns None when nothing is left. Idempotent.
    """
    core = token.lower()
    while True:
        stripped = core.strip()
        start, end = 0, len(stripped)
        while start < end and unicodedata.category(stripped[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(stripped[end - 1]).startswith("P"):
            end -= 1
        nxt = stripped[start:end]
        if nxt == core:
            return core or None
        core = nxt


@dataclass(frozen=True)
class Sample:
    """One classified text: tokens, gold/predicted labels, model confidence."""

    id: str
    text: str
    tokens: tuple[str, ...]
    gold_label: str
    pred_label: str
    confidence: float
    domain: Optional[str] = None

    @property
    def correct(self) -> bool:
        return self.gold_label == self.pred_label


@dataclass(frozen=True)
class EmbeddingStore:
    """Dense sample-embedding matrix plus ragged per-token matrices.

    ``sample_matrix`` rows are mean-pooled from ``token_matrices`` when the
    source provided no sample embeddings; ``derived`` records that so exports
    can skip writing a redundant file.
    """

    sample_matrix: np.ndarray
    token_matrices: tuple[np.ndarray, ...]
    dim: int
    derived: bool = False

    def __post_init__(self):
        self.sample_matrix.setflags(write=False)
        for m in self.token_matrices:
            m.setflags(write=False)


@dataclass(frozen=True)
class ConceptLexicon:
    """Mapping from normalized word to its set of commonsense concepts."""

    entries: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def concepts(self, word: str) -> frozenset[str]:
        return self.entries.get(word, frozenset())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ExternalImportance:
    """Externally computed per-token importance vectors, keyed by metric name."""

    by_metric: Mapping[str, Mapping[str, tuple[float, ...]]] = field(default_factory=dict)

    def metrics(self) -> tuple[str, ...]:
        return tuple(sorted(self.by_metric))

    def scores(self, sample_id: str, metric: str) -> Optional[tuple[float, ...]]:
        return self.by_metric.get(metric, {}).get(sample_id)


@dataclass(frozen=True)
class Dataset:
    """Immutable validated corpus + embeddings + lexicon + importance scores."""

    samples: tuple[Sample, ...]
    label_set: tuple[str, ...]
    embeddings: EmbeddingStore
    lexicon: ConceptLexicon = ConceptLexicon()
    external_importance: ExternalImportance = ExternalImportance()
    stopwords: frozenset[str] = DEFAULT_STOPWORDS

    @cached_property
    def id_to_index(self) -> dict[str, int]:
        return {s.id: i for i, s in enumerate(self.samples)}

    def __len__(self) -> int:
        return len(self.samples)

    def index_of(self, sample_id: str) -> int:
        try:
            return self.id_to_index[sample_id]
        except KeyError:
            raise NotFoundError(f"unknown sample id {sample_id!r}", code="sample_not_found") from None

    def normalized_tokens(self, index: int) -> list[Optional[str]]:
        """Per-token normalized forms, aligned with token order (None where dropped)."""
        return [normalize_word(t) for t in self.samples[index].tokens]


def derive_sample_embeddings(store: EmbeddingStore) -> EmbeddingStore:
    """Fill the sample matrix with the arithmetic mean of each sample's token rows."""
    if not store.token_matrices:
        raise InputError("cannot derive sample embeddings: no token matrices")
    for i, m in enumerate(store.token_matrices):
        if m.shape[0] == 0:
            raise InputError(f"cannot derive sample embeddings: sample {i} has zero tokens")
    pooled = np.stack([m.mean(axis=0) for m in store.token_matrices])
    return replace(store, sample_matrix=pooled, derived=True)


def _require(obj: dict, key: str, kind, path, lineno: int):
    if key not in obj:
        raise FormatError(f"{path}: line {lineno}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise FormatError(
            f"{path}: line {lineno}: field {key!r} must be {kind.__name__}, "
            f"got {type(value).__name__}"
        )
    return value


def _load_samples(corpus_path) -> list[Sample]:
    samples: list[Sample] = []
    seen: set[str] = set()
    for lineno, obj in formats.iter_jsonl(corpus_path):
        sid = _require(obj, "id", str, corpus_path, lineno)
        if sid in seen:
            raise FormatError(f"{corpus_path}: line {lineno}: duplicate sample id {sid!r}")
        seen.add(sid)
        text = _require(obj, "text", str, corpus_path, lineno)
        tokens = _require(obj, "tokens", list, corpus_path, lineno)
        if not tokens or not all(isinstance(t, str) for t in tokens):
            raise FormatError(
                f"{corpus_path}: line {lineno}: 'tokens' must be a non-empty list of strings"
            )
        gold = _require(obj, "gold_label", str, corpus_path, lineno)
        pred = _require(obj, "pred_label", str, corpus_path, lineno)
        confidence = _require(obj, "confidence", (int, float), corpus_path, lineno)
        if isinstance(confidence, bool) or not 0.0 <= float(confidence) <= 1.0:
            raise FormatError(
                f"{corpus_path}: line {lineno}: confidence {confidence!r} outside [0, 1]"
            )
        domain = obj.get("domain")
        if domain is not None and not isinstance(domain, str):
            raise FormatError(f"{corpus_path}: line {lineno}: 'domain' must be a string")
        samples.append(
            Sample(
                id=sid,
                text=text,
                tokens=tuple(tokens),
                gold_label=gold,
                pred_label=pred,
                confidence=float(confidence),
                domain=domain,
            )
        )
    if not samples:
        raise FormatError(f"{corpus_path}: empty corpus")
    return samples


def _load_lexicon(path) -> ConceptLexicon:
    entries: dict[str, frozenset[str]] = {}
    for lineno, obj in formats.iter_jsonl(path):
        word = _require(obj, "word", str, path, lineno)
        concepts = _require(obj, "concepts", list, path, lineno)
        if not concepts or not all(isinstance(c, str) for c in concepts):
            raise FormatError(
                f"{path}: line {lineno}: 'concepts' must be a non-empty list of strings"
            )
        normalized = normalize_word(word)
        if normalized is None:
            raise FormatError(f"{path}: line {lineno}: word {word!r} normalizes to nothing")
        entries[normalized] = entries.get(normalized, frozenset()) | frozenset(concepts)
    return ConceptLexicon(entries)


def _load_importance(path, samples: list[Sample]) -> ExternalImportance:
    by_id = {s.id: s for s in samples}
    by_metric: dict[str, dict[str, tuple[float, ...]]] = {}
    for lineno, obj in formats.iter_jsonl(path):
        sid = _require(obj, "id", str, path, lineno)
        metric = _require(obj, "metric", str, path, lineno)
        scores = _require(obj, "scores", list, path, lineno)
        if sid not in by_id:
            raise FormatError(f"{path}: line {lineno}: unknown sample id {sid!r}")
        if not all(isinstance(s, (int, float)) and not isinstance(s, bool) for s in scores):
            raise FormatError(f"{path}: line {lineno}: 'scores' must be numeric")
        expected = len(by_id[sid].tokens)
        if len(scores) != expected:
            raise FormatError(
                f"{path}: line {lineno}: sample {sid!r} has {expected} tokens "
                f"but {len(scores)} scores"
            )
        by_metric.setdefault(metric, {})[sid] = tuple(float(s) for s in scores)
    return ExternalImportance(by_metric)


def load_corpus(
    corpus_path,
    embeddings_path=None,
    token_embeddings_path=None,
    lexicon_path=None,
    importance_path=None,
    stopwords_path=None,
) -> Dataset:
    """Parse and cross-validate all input files into an immutable Dataset.

    The label set is the sorted set of distinct gold and predicted labels.
    Sample embeddings are mean-pooled from token embeddings when
    ``embeddings_path`` is omitted.
    """
    samples = _load_samples(corpus_path)

    if token_embeddings_path is None:
        raise InputError("token embeddings are required")
    token_matrices = formats.read_token_embeddings(token_embeddings_path)
    if len(token_matrices) != len(samples):
        raise FormatError(
            f"{token_embeddings_path}: holds {len(token_matrices)} samples, "
            f"corpus has {len(samples)}"
        )
    dim = token_matrices[0].shape[1]
    for sample, matrix in zip(samples, token_matrices):
        if matrix.shape[0] != len(sample.tokens):
            raise FormatError(
                f"sample {sample.id!r}: {len(sample.tokens)} tokens but "
                f"{matrix.shape[0]} token embedding rows"
            )
        if not np.isfinite(matrix).all():
            raise FormatError(f"sample {sample.id!r}: non-finite token embedding value")

    store = EmbeddingStore(
        sample_matrix=np.empty((0, dim)),
        token_matrices=tuple(token_matrices),
        dim=dim,
    )
    if embeddings_path is not None:
        sample_matrix = formats.read_sample_embeddings(embeddings_path)
        if sample_matrix.shape[0] != len(samples):
            raise FormatError(
                f"{embeddings_path}: holds {sample_matrix.shape[0]} rows, "
                f"corpus has {len(samples)}"
            )
        if sample_matrix.shape[1] != dim:
            raise FormatError(
                f"{embeddings_path}: dimension {sample_matrix.shape[1]} does not match "
                f"token embedding dimension {dim}"
            )
        if not np.isfinite(sample_matrix).all():
            bad = np.argwhere(~np.isfinite(sample_matrix))[0]
            raise FormatError(
                f"{embeddings_path}: non-finite value for sample "
                f"{samples[int(bad[0])].id!r}"
            )
        store = replace(store, sample_matrix=sample_matrix, derived=False)
    else:
        store = derive_sample_embeddings(store)

    lexicon = _load_lexicon(lexicon_path) if lexicon_path else ConceptLexicon()
    importance = (
        _load_importance(importance_path, samples) if importance_path else ExternalImportance()
    )
    stopword_set = load_stopwords(stopwords_path) if stopwords_path else DEFAULT_STOPWORDS

    labels = tuple(sorted({s.gold_label for s in samples} | {s.pred_label for s in samples}))
    return Dataset(
        samples=tuple(samples),
        label_set=labels,
        embeddings=store,
        lexicon=lexicon,
        external_importance=importance,
        stopwords=stopword_set,
    )


def save_dataset(
    dataset: Dataset,
    corpus_path,
    token_embeddings_path,
    embeddings_path=None,
    lexicon_path=None,
    importance_path=None,
) -> None:
    """Write a Dataset back to the interchange formats.

    A derived sample matrix is not written (reloading re-derives it), which
    keeps export -> load an exact round trip.
    """
    rows = []
    for s in dataset.samples:
        row = {
            "id": s.id,
            "text": s.text,
            "tokens": list(s.tokens),
            "gold_label": s.gold_label,
            "pred_label": s.pred_label,
            "confidence": s.confidence,
        }
        if s.domain is not None:
            row["domain"] = s.domain
        rows.append(row)
    formats.write_jsonl(corpus_path, rows)
    formats.write_token_embeddings(token_embeddings_path, dataset.embeddings.token_matrices)
    if embeddings_path is not None and not dataset.embeddings.derived:
        formats.write_sample_embeddings(embeddings_path, dataset.embeddings.sample_matrix)
    if lexicon_path is not None and len(dataset.lexicon):
        formats.write_jsonl(
            lexicon_path,
            (
                {"word": word, "concepts": sorted(concepts)}
                for word, concepts in sorted(dataset.lexicon.entries.items())
            ),
        )
    if importance_path is not None and dataset.external_importance.metrics():
        formats.write_jsonl(
            importance_path,
            (
                {"id": sid, "metric": metric, "scores": list(scores)}
                for metric in dataset.external_importance.metrics()
                for sid, scores in sorted(dataset.external_importance.by_metric[metric].items())
            ),
        )
