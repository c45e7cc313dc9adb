import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semscape import formats
from semscape.dataset import (
    derive_sample_embeddings,
    load_corpus,
    normalize_word,
    save_dataset,
)
from semscape.errors import FormatError
from semscape.stopwords import DEFAULT_STOPWORDS

from conftest import write_corpus_files

# Hand-built normalization table: lowercase, strip surrounding punctuation,
# keep internal hyphens/apostrophes, None when nothing is left.
NORMALIZATION_TABLE = [
    ("Card,", "card"),
    ("?!", None),
    ("Top-up", "top-up"),
    ("HELLO", "hello"),
    ("don't", "don't"),
    ("'quoted'", "quoted"),
    ('"Double"', "double"),
    ("...ellipsis...", "ellipsis"),
    ("mid-word-hyphen", "mid-word-hyphen"),
    ("trailing.", "trailing"),
    ("(parens)", "parens"),
    ("[bracket]", "bracket"),
    ("semi;", "semi"),
    ("colon:", "colon"),
    ("", None),
    ("   ", None),
    ("--", None),
    ("rock'n'roll", "rock'n'roll"),
    ("word!!!", "word"),
    ("50%", "50"),
]


@pytest.mark.parametrize("token,expected", NORMALIZATION_TABLE)
def test_normalize_word_table(token, expected):
    assert normalize_word(token) == expected


@given(st.text(max_size=30))
def test_normalize_word_idempotent(token):
    once = normalize_word(token)
    if once is not None:
        assert normalize_word(once) == once


def test_derive_sample_embeddings_mean(tiny_rows):
    from conftest import make_dataset

    ds = make_dataset(
        [
            {
                "id": "only",
                "tokens": ["x", "y"],
                "gold": "a",
                "pred": "a",
                "token_matrix": [[1.0, 0.0], [0.0, 1.0]],
            }
        ]
    )
    assert np.allclose(ds.embeddings.sample_matrix[0], [0.5, 0.5])


def test_derive_identity_for_single_tokens():
    from conftest import make_dataset

    rng = np.random.default_rng(3)
    rows = [
        {"id": f"s{i}", "tokens": ["w"], "gold": "a", "pred": "a", "token_matrix": rng.normal(size=(1, 5))}
        for i in range(4)
    ]
    ds = make_dataset(rows)
    stacked = np.vstack([m for m in ds.embeddings.token_matrices])
    assert np.array_equal(ds.embeddings.sample_matrix, stacked)


def test_derive_matches_compensated_summation():
    from semscape.dataset import EmbeddingStore

    rng = np.random.default_rng(7)
    matrices = tuple(rng.normal(size=(rng.integers(1, 9), 6)) for _ in range(10))
    store = EmbeddingStore(
        sample_matrix=np.empty((0, 6)), token_matrices=matrices, dim=6
    )
    derived = derive_sample_embeddings(store)
    for i, m in enumerate(matrices):
        expected = [math.fsum(m[:, j]) / m.shape[0] for j in range(6)]
        assert np.abs(derived.sample_matrix[i] - np.array(expected)).max() < 1e-9


def test_load_corpus_counts_and_labels(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    ds = load_corpus(corpus, semb, semt)
    assert len(ds) == 4
    assert ds.label_set == ("music", "taxi")
    assert ds.embeddings.dim == 3
    assert not ds.embeddings.derived
    assert ds.stopwords == DEFAULT_STOPWORDS


def test_load_corpus_derives_when_no_sample_file(tmp_path, tiny_rows):
    corpus, _, semt = write_corpus_files(tmp_path, tiny_rows, with_sample_embeddings=False)
    ds = load_corpus(corpus, None, semt)
    assert ds.embeddings.derived
    pooled = np.stack([m.mean(axis=0) for m in ds.embeddings.token_matrices])
    assert np.allclose(ds.embeddings.sample_matrix, pooled)


def test_empty_corpus_rejected(tmp_path):
    corpus = tmp_path / "c.jsonl"
    corpus.write_text("")
    with pytest.raises(FormatError, match="empty corpus"):
        load_corpus(corpus, None, tmp_path / "missing.semt")


def test_duplicate_id_rejected(tmp_path, tiny_rows):
    rows = tiny_rows + [dict(tiny_rows[0])]
    corpus, semb, semt = write_corpus_files(tmp_path, rows)
    with pytest.raises(FormatError, match="line 5.*duplicate sample id 's1'"):
        load_corpus(corpus, semb, semt)


def test_token_count_mismatch_names_sample(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    # Rewrite the token file with one row dropped from s3.
    matrices = formats.read_token_embeddings(semt)
    matrices[2] = matrices[2][:-1]
    formats.write_token_embeddings(semt, matrices)
    with pytest.raises(FormatError, match="'s3'.*3 tokens.*2 token embedding rows"):
        load_corpus(corpus, None, semt)


def test_non_finite_embedding_rejected(tmp_path, tiny_rows):
    rows = [dict(r) for r in tiny_rows]
    rows[1]["token_matrix"] = [[1.0, 2.0, np.nan]] * 3
    corpus, _, semt = write_corpus_files(tmp_path, rows, with_sample_embeddings=False)
    with pytest.raises(FormatError, match="'s2'.*non-finite"):
        load_corpus(corpus, None, semt)


def test_bad_json_line_reported(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    lines = corpus.read_text().splitlines()
    lines[1] = "{not json"
    corpus.write_text("\n".join(lines) + "\n")
    with pytest.raises(FormatError, match="line 2: invalid JSON"):
        load_corpus(corpus, semb, semt)


def test_confidence_out_of_range(tmp_path, tiny_rows):
    rows = [dict(r) for r in tiny_rows]
    rows[0]["conf"] = 1.5
    corpus, _, semt = write_corpus_files(tmp_path, rows, with_sample_embeddings=False)
    with pytest.raises(FormatError, match="line 1: confidence 1.5"):
        load_corpus(corpus, None, semt)


def test_sample_count_mismatch_between_files(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    with open(corpus, "a", encoding="utf-8") as fh:
        fh.write(
            json.dumps(
                {
                    "id": "extra",
                    "text": "x",
                    "tokens": ["x"],
                    "gold_label": "a",
                    "pred_label": "a",
                    "confidence": 0.5,
                }
            )
            + "\n"
        )
    with pytest.raises(FormatError, match="holds 4 samples, corpus has 5"):
        load_corpus(corpus, semb, semt)


def test_lexicon_and_importance_load(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    lex = tmp_path / "lexicon.jsonl"
    formats.write_jsonl(lex, [{"word": "Jazz", "concepts": ["a music genre"]}])
    imp = tmp_path / "imp.jsonl"
    formats.write_jsonl(imp, [{"id": "s1", "metric": "lime", "scores": [0.5, 0.1, 0.4]}])
    ds = load_corpus(corpus, semb, semt, lexicon_path=lex, importance_path=imp)
    assert ds.lexicon.concepts("jazz") == frozenset({"a music genre"})
    assert ds.lexicon.concepts("unknown-word") == frozenset()
    assert ds.external_importance.scores("s1", "lime") == (0.5, 0.1, 0.4)


def test_importance_wrong_length_rejected(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    imp = tmp_path / "imp.jsonl"
    formats.write_jsonl(imp, [{"id": "s1", "metric": "lime", "scores": [0.5]}])
    with pytest.raises(FormatError, match="3 tokens but 1 scores"):
        load_corpus(corpus, semb, semt, importance_path=imp)


def test_stopword_file_override(tmp_path, tiny_rows):
    corpus, semb, semt = write_corpus_files(tmp_path, tiny_rows)
    sw = tmp_path / "sw.txt"
    sw.write_text("# comment\ncab\n\njazz\n")
    ds = load_corpus(corpus, semb, semt, stopwords_path=sw)
    assert ds.stopwords == frozenset({"cab", "jazz"})


def _datasets_equal(a, b):
    if len(a) != len(b) or a.label_set != b.label_set:
        return False
    for sa, sb in zip(a.samples, b.samples):
        if sa != sb:
            return False
    if a.embeddings.derived != b.embeddings.derived:
        return False
    if not np.array_equal(a.embeddings.sample_matrix, b.embeddings.sample_matrix):
        return False
    for ma, mb in zip(a.embeddings.token_matrices, b.embeddings.token_matrices):
        if not np.array_equal(ma, mb):
            return False
    return (
        a.lexicon.entries == b.lexicon.entries
        and dict(a.external_importance.by_metric) == dict(b.external_importance.by_metric)
        and a.stopwords == b.stopwords
    )


@pytest.mark.parametrize("with_sample_embeddings", [True, False])
def test_round_trip(tmp_path, tiny_rows, with_sample_embeddings):
    rows = [dict(r) for r in tiny_rows]
    rows[0]["domain"] = "transport"
    corpus, semb, semt = write_corpus_files(
        tmp_path, rows, with_sample_embeddings=with_sample_embeddings
    )
    lex = tmp_path / "lexicon.jsonl"
    formats.write_jsonl(lex, [{"word": "jazz", "concepts": ["a music genre"]}])
    imp = tmp_path / "imp.jsonl"
    formats.write_jsonl(imp, [{"id": "s1", "metric": "lime", "scores": [0.5, 0.1, 0.4]}])
    ds = load_corpus(corpus, semb, semt, lexicon_path=lex, importance_path=imp)

    out = tmp_path / "export"
    out.mkdir()
    save_dataset(
        ds,
        out / "corpus.jsonl",
        out / "tokens.semt",
        embeddings_path=out / "samples.semb",
        lexicon_path=out / "lexicon.jsonl",
        importance_path=out / "imp.jsonl",
    )
    reloaded = load_corpus(
        out / "corpus.jsonl",
        (out / "samples.semb") if (out / "samples.semb").exists() else None,
        out / "tokens.semt",
        lexicon_path=out / "lexicon.jsonl",
        importance_path=out / "imp.jsonl",
    )
    assert _datasets_equal(ds, reloaded)


def test_validation_is_deterministic(tmp_path, tiny_rows):
    rows = tiny_rows + [dict(tiny_rows[0])]
    corpus, semb, semt = write_corpus_files(tmp_path, rows)
    messages = set()
    for _ in range(3):
        with pytest.raises(FormatError) as err:
            load_corpus(corpus, semb, semt)
        messages.add(str(err.value))
    assert len(messages) == 1


def test_binary_format_errors(tmp_path):
    bad = tmp_path / "bad.semb"
    bad.write_bytes(b"NOPE" + b"\x00" * 12)
    with pytest.raises(FormatError, match="bad magic"):
        formats.read_sample_embeddings(bad)
    truncated = tmp_path / "trunc.semb"
    truncated.write_bytes(b"SEMB" + (1).to_bytes(4, "little") + (5).to_bytes(4, "little"))
    with pytest.raises(FormatError, match="truncated at offset"):
        formats.read_sample_embeddings(truncated)


def test_layout_cache_round_trip(tmp_path):
    positions = np.asarray(np.random.default_rng(0).normal(size=(6, 2)), dtype=np.float32)
    path = tmp_path / "layout.seml"
    formats.write_layout_cache(path, positions, seed=42, params={"perplexity": 30.0})
    loaded, seed, params = formats.read_layout_cache(path)
    assert seed == 42
    assert params == {"perplexity": 30.0}
    assert np.array_equal(loaded, positions.astype(np.float64))
