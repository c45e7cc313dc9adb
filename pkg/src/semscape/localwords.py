"""Localized word clouds: find words (and, recursively, concepts) whose
occurrences concentrate in one neighborhood of the landscape, and place each
at the center of its occurrences for overlay rendering.

Bottom-up by construction: every token of every in-scope sample drops one
occurrence at that sample's position; a word survives when it is frequent
enough (count > T) and its normalized spread is small enough (<= locality
cap). No clustering is involved at any point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .dataset import ConceptLexicon, Dataset, normalize_word
from .errors import InputError
from .geometry import RegionSelector, geometric_median, select_positions
from .stopwords import DEFAULT_STOPWORDS


@dataclass(frozen=True)
class LwcParams:
    """Filter settings: frequency threshold T, locality cap, spread quantile."""

    freq_threshold: int = 5
    locality_max: float = 0.5
    ignore_stopwords: bool = True
    locality_quantile: float = 0.8

    def __post_init__(self):
        if self.freq_threshold < 0:
            raise InputError("freq_threshold must be >= 0")
        if self.locality_max <= 0:
            raise InputError("locality_max must be positive")
        if not 0.0 < self.locality_quantile <= 1.0:
            raise InputError("locality_quantile must be in (0, 1]")


@dataclass(frozen=True)
class LocalWord:
    """A word or concept that passed the filters, placed at its center."""

    word: str
    position: tuple[float, ...]
    frequency: int
    locality: float
    scale_hint: float


@dataclass(frozen=True)
class OccurrenceIndex:
    """Per-word occurrence positions over a set of indexed samples.

    ``sample_positions`` holds the positions of every indexed sample and
    anchors the locality normalization, so a word spread over the whole
    indexed set scores exactly 1.
    """

    occurrences: dict[str, np.ndarray]
    space_dim: int
    sample_positions: np.ndarray
    stopwords: frozenset[str] = field(default_factory=frozenset)

    @property
    def total_occurrences(self) -> int:
        return sum(arr.shape[0] for arr in self.occurrences.values())


def build_index(
    dataset: Dataset,
    layout,
    region: Optional[RegionSelector] = None,
    space: str = "layout",
) -> OccurrenceIndex:
    """Drop one occurrence per normalized token at its sample's position.

    ``space`` selects where localities live: the 2-D layout (default, matches
    the overlay) or the original embedding space. Stopwords are indexed too;
    filtering happens later so one index serves both toggles.
    """
    if space == "layout":
        positions = np.asarray(layout.positions, dtype=np.float64)
    elif space == "embedding":
        positions = np.asarray(dataset.embeddings.sample_matrix, dtype=np.float64)
    else:
        raise InputError(f"unknown index space {space!r}")
    if positions.shape[0] != len(dataset):
        raise InputError(
            f"layout has {positions.shape[0]} positions for {len(dataset)} samples"
        )
    selected = sorted(select_positions(positions, region or RegionSelector()))
    rows: dict[str, list[int]] = {}
    for i in selected:
        for token in dataset.samples[i].tokens:
            word = normalize_word(token)
            if word is None:
                continue
            rows.setdefault(word, []).append(i)
    occurrences = {word: positions[idx] for word, idx in sorted(rows.items())}
    return OccurrenceIndex(
        occurrences=occurrences,
        space_dim=positions.shape[1],
        sample_positions=positions[selected],
        stopwords=dataset.stopwords,
    )


def global_locality_scale(sample_positions: np.ndarray, quantile: float) -> float:
    """Spread of the whole indexed set: the q-quantile of sample distances
    from the global geometric median."""
    center = geometric_median(sample_positions)
    dists = np.linalg.norm(sample_positions - center, axis=1)
    return float(np.quantile(dists, quantile))


def locality_score(
    occurrences: np.ndarray, global_scale: float, quantile: float = 0.8
) -> float:
    """Normalized spread of a word's occurrences.

    The q-quantile of distances from the occurrences' geometric median,
    divided by the global scale. 0 means a single spot; 1 means spread like
    the whole corpus.
    """
    occ = np.asarray(occurrences, dtype=np.float64)
    if occ.shape[0] == 0:
        raise InputError("locality_score requires at least one occurrence")
    center = geometric_median(occ)
    radius = float(np.quantile(np.linalg.norm(occ - center, axis=1), quantile))
    if global_scale <= 0.0:
        return 0.0
    return radius / global_scale


def local_words(index: OccurrenceIndex, params: LwcParams) -> list[LocalWord]:
    """Words with frequency > T and locality <= cap, placed at their centers.

    Sorted by frequency descending, ties by word ascending.
    """
    if index.sample_positions.shape[0] == 0:
        return []
    scale = global_locality_scale(index.sample_positions, params.locality_quantile)
    out: list[LocalWord] = []
    for word, occ in index.occurrences.items():
        if params.ignore_stopwords and word in index.stopwords:
            continue
        frequency = occ.shape[0]
        if frequency <= params.freq_threshold:
            continue
        center = geometric_median(occ)
        radius = float(np.quantile(np.linalg.norm(occ - center, axis=1), params.locality_quantile))
        locality = 0.0 if scale <= 0.0 else radius / scale
        if locality > params.locality_max:
            continue
        out.append(
            LocalWord(
                word=word,
                position=tuple(float(c) for c in center),
                frequency=frequency,
                locality=locality,
                scale_hint=1.0 + math.log(frequency),
            )
        )
    out.sort(key=lambda w: (-w.frequency, w.word))
    return out


def local_concepts(
    index: OccurrenceIndex,
    lexicon: ConceptLexicon,
    params: LwcParams,
    concept_params: Optional[LwcParams] = None,
) -> list[LocalWord]:
    """Recursive pass: map each local word's occurrences to its concepts and
    re-apply the filters over the concept occurrences."""
    concept_params = concept_params or params
    stage_one = local_words(index, params)
    merged: dict[str, list[np.ndarray]] = {}
    for lw in stage_one:
        concepts = lexicon.concepts(lw.word)
        if not concepts:
            continue
        occ = index.occurrences[lw.word]
        for concept in sorted(concepts):
            merged.setdefault(concept, []).append(occ)
    concept_index = OccurrenceIndex(
        occurrences={c: np.vstack(parts) for c, parts in sorted(merged.items())},
        space_dim=index.space_dim,
        sample_positions=index.sample_positions,
        stopwords=index.stopwords,
    )
    return local_words(concept_index, concept_params)


class LocalWordCloud(BaseEstimator):
    """Estimator-style wrapper: fit on positions and token sequences, read
    the surviving words from ``words_``."""

    def __init__(
        self,
        freq_threshold: int = 5,
        locality_max: float = 0.5,
        ignore_stopwords: bool = True,
        locality_quantile: float = 0.8,
        stopwords: frozenset[str] = DEFAULT_STOPWORDS,
    ):
        self.freq_threshold = freq_threshold
        self.locality_max = locality_max
        self.ignore_stopwords = ignore_stopwords
        self.locality_quantile = locality_quantile
        self.stopwords = stopwords

    def fit(self, X, y: Optional[Sequence[Sequence[str]]] = None):
        positions = np.asarray(X, dtype=np.float64)
        if y is None or len(y) != positions.shape[0]:
            raise InputError("fit needs one token sequence per position row")
        rows: dict[str, list[int]] = {}
        for i, tokens in enumerate(y):
            for token in tokens:
                word = normalize_word(token)
                if word is not None:
                    rows.setdefault(word, []).append(i)
        self.index_ = OccurrenceIndex(
            occurrences={w: positions[idx] for w, idx in sorted(rows.items())},
            space_dim=positions.shape[1],
            sample_positions=positions,
            stopwords=frozenset(self.stopwords),
        )
        self.words_ = local_words(
            self.index_,
            LwcParams(
                freq_threshold=self.freq_threshold,
                locality_max=self.locality_max,
                ignore_stopwords=self.ignore_stopwords,
                locality_quantile=self.locality_quantile,
            ),
        )
        return self
