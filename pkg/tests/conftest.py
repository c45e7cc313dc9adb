import numpy as np
import pytest

from semscape import formats
from semscape.dataset import (
    ConceptLexicon,
    Dataset,
    EmbeddingStore,
    ExternalImportance,
    Sample,
    derive_sample_embeddings,
)
from semscape.stopwords import DEFAULT_STOPWORDS


def make_dataset(rows, dim=4, rng=None, lexicon=None, importance=None, stopwords=None):
    """Build an in-memory Dataset from row dicts.

    Each row: id, tokens, gold, pred, and optionally conf, text, domain,
    token_matrix (n_tokens x dim). Missing embeddings are drawn from rng.
    """
    rng = rng or np.random.default_rng(0)
    samples = []
    token_matrices = []
    for row in rows:
        tokens = tuple(row["tokens"])
        matrix = row.get("token_matrix")
        if matrix is None:
            matrix = rng.normal(size=(len(tokens), dim))
        matrix = np.asarray(matrix, dtype=np.float64)
        token_matrices.append(matrix)
        samples.append(
            Sample(
                id=row["id"],
                text=row.get("text", " ".join(tokens)),
                tokens=tokens,
                gold_label=row["gold"],
                pred_label=row["pred"],
                confidence=float(row.get("conf", 0.9)),
                domain=row.get("domain"),
            )
        )
    store = derive_sample_embeddings(
        EmbeddingStore(
            sample_matrix=np.empty((0, token_matrices[0].shape[1])),
            token_matrices=tuple(token_matrices),
            dim=token_matrices[0].shape[1],
        )
    )
    labels = tuple(sorted({s.gold_label for s in samples} | {s.pred_label for s in samples}))
    return Dataset(
        samples=tuple(samples),
        label_set=labels,
        embeddings=store,
        lexicon=ConceptLexicon(lexicon or {}),
        external_importance=ExternalImportance(importance or {}),
        stopwords=stopwords if stopwords is not None else DEFAULT_STOPWORDS,
    )


def write_corpus_files(tmp_path, rows, dim=3, rng=None, with_sample_embeddings=True):
    """Write corpus + embedding files for `load_corpus` tests; returns paths."""
    rng = rng or np.random.default_rng(0)
    corpus = tmp_path / "corpus.jsonl"
    records = []
    token_matrices = []
    for row in rows:
        tokens = list(row["tokens"])
        rec = {
            "id": row["id"],
            "text": row.get("text", " ".join(tokens)),
            "tokens": tokens,
            "gold_label": row["gold"],
            "pred_label": row["pred"],
            "confidence": float(row.get("conf", 0.9)),
        }
        if row.get("domain") is not None:
            rec["domain"] = row["domain"]
        records.append(rec)
        matrix = row.get("token_matrix")
        if matrix is None:
            matrix = rng.normal(size=(len(tokens), dim))
        token_matrices.append(np.asarray(matrix, dtype=np.float64))
    formats.write_jsonl(corpus, records)
    token_path = tmp_path / "tokens.semt"
    formats.write_token_embeddings(token_path, token_matrices)
    sample_path = None
    if with_sample_embeddings:
        sample_path = tmp_path / "samples.semb"
        pooled = np.stack([m.mean(axis=0) for m in token_matrices])
        formats.write_sample_embeddings(sample_path, pooled)
    return corpus, sample_path, token_path


@pytest.fixture
def tiny_rows():
    return [
        {"id": "s1", "tokens": ["book", "a", "cab"], "gold": "taxi", "pred": "taxi", "conf": 0.95},
        {"id": "s2", "tokens": ["play", "some", "jazz"], "gold": "music", "pred": "music", "conf": 0.8},
        {"id": "s3", "tokens": ["cancel", "my", "cab"], "gold": "taxi", "pred": "music", "conf": 0.4},
        {"id": "s4", "tokens": ["loud", "jazz", "music"], "gold": "music", "pred": "music", "conf": 0.7},
    ]
