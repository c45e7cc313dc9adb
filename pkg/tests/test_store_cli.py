import hashlib
import json

import numpy as np
import pytest

from semscape.cli import main
from semscape.errors import InputError
from semscape.store import (
    DatasetRegistry,
    build_store,
    load_manifest,
    load_store,
    precompute,
)

from conftest import write_corpus_files


def demo_rows(rng, n=24):
    labels = ["alpha", "beta", "gamma"]
    words = {
        "alpha": ["cash", "card", "send"],
        "beta": ["music", "play", "song"],
        "gamma": ["cab", "ride", "book"],
    }
    centers = {"alpha": [0, 0, 0, 0], "beta": [5, 0, 0, 0], "gamma": [0, 5, 0, 0]}
    rows = []
    for i in range(n):
        lab = labels[i % 3]
        toks = list(rng.choice(words[lab], size=4)) + ["the"]
        pred = lab if rng.uniform() > 0.25 else labels[(i + 1) % 3]
        tm = np.array(centers[lab], float) + rng.normal(scale=0.3, size=(5, 4))
        rows.append(
            {
                "id": f"s{i:02d}",
                "tokens": toks,
                "gold": lab,
                "pred": pred,
                "conf": float(rng.uniform()),
                "token_matrix": tm,
            }
        )
    return rows


@pytest.fixture
def demo_store(tmp_path):
    rng = np.random.default_rng(0)
    corpus, semb, semt = write_corpus_files(tmp_path, demo_rows(rng), dim=4, rng=rng)
    store = tmp_path / "store"
    rc = main(
        [
            "ingest",
            "--corpus", str(corpus),
            "--sample-emb", str(semb),
            "--token-emb", str(semt),
            "--out", str(store),
            "--id", "demo",
            "--iterations", "260",
        ]
    )
    assert rc == 0
    return store


def test_ingest_prints_summary(tmp_path, capsys):
    rng = np.random.default_rng(1)
    corpus, semb, semt = write_corpus_files(tmp_path, demo_rows(rng), dim=4, rng=rng)
    rc = main(
        ["ingest", "--corpus", str(corpus), "--sample-emb", str(semb),
         "--token-emb", str(semt), "--out", str(tmp_path / "s"), "--id", "demo"]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "M=24" in out and "labels=3" in out and "d=4" in out


def test_manifest_round_trip(demo_store):
    manifest = load_manifest(demo_store)
    assert manifest.dataset_id == "demo"
    assert manifest.seed == 42
    assert manifest.projection.iterations == 260


def test_precompute_is_deterministic(demo_store, capsys):
    assert main(["precompute", "--store", str(demo_store)]) == 0
    digests1 = {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in (demo_store / "layout.seml", demo_store / "caches.json")
    }
    assert main(["precompute", "--store", str(demo_store)]) == 0
    digests2 = {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in (demo_store / "layout.seml", demo_store / "caches.json")
    }
    assert digests1 == digests2


def test_load_store_reuses_cached_layout(demo_store):
    entry1 = precompute(demo_store)
    entry2 = load_store(demo_store)
    assert np.array_equal(entry1.layout.positions.astype(np.float32), entry2.layout.positions)
    assert entry2.layout_id == "demo:tsne:42"


def test_load_store_recomputes_missing_caches(demo_store):
    precompute(demo_store)
    (demo_store / "layout.seml").unlink()
    (demo_store / "caches.json").unlink()
    entry = load_store(demo_store)
    assert len(entry.dataset) == 24
    assert (demo_store / "layout.seml").exists()


def test_registry_duplicate_rejected(demo_store):
    registry = DatasetRegistry()
    registry.add_store(demo_store)
    with pytest.raises(InputError, match="already loaded"):
        registry.add_store(demo_store)


def test_missing_store_is_input_error(tmp_path):
    with pytest.raises(InputError, match="not a dataset store"):
        load_store(tmp_path / "nope")


def test_cli_local_words_json(demo_store, capsys):
    rc = main(["local-words", "--store", str(demo_store), "--freq", "3", "--locality", "0.8"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["dataset"] == "demo"
    assert payload["params"]["freq_threshold"] == 3
    for row in payload["words"]:
        assert row["frequency"] > 3
        assert row["locality"] <= 0.8


def test_cli_confusions_empty_on_all_correct(tmp_path, capsys):
    rng = np.random.default_rng(2)
    rows = demo_rows(rng)
    for r in rows:
        r["pred"] = r["gold"]
    corpus, semb, semt = write_corpus_files(tmp_path, rows, dim=4, rng=rng)
    store = tmp_path / "store"
    main(
        ["ingest", "--corpus", str(corpus), "--sample-emb", str(semb),
         "--token-emb", str(semt), "--out", str(store), "--iterations", "260"]
    )
    capsys.readouterr()
    rc = main(["confusions", "--store", str(store), "--sort", "freq"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["entries"] == []
    assert payload["total_errors"] == 0


def test_cli_confusions_csv(demo_store, capsys):
    rc = main(["confusions", "--store", str(demo_store), "--format", "csv"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "gold,pred,frequency"
    assert len(lines) > 1


def test_cli_exit_codes(demo_store, tmp_path, capsys):
    # Usage error: unknown flag.
    with pytest.raises(SystemExit) as exc:
        main(["local-words", "--store", str(demo_store), "--bogus"])
    assert exc.value.code == 64
    # Usage error: unknown subcommand.
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64
    capsys.readouterr()
    # Validation error: malformed parameters.
    assert main(["local-words", "--store", str(demo_store), "--locality", "-1"]) == 2
    # Validation error: store does not exist.
    assert main(["confusions", "--store", str(tmp_path / "missing")]) == 2
    capsys.readouterr()


def test_cli_unknown_sample_is_runtime_error(demo_store, capsys):
    rc = main(["explain", "--store", str(demo_store), "--sample", "ghost"])
    assert rc == 1  # NotFoundError is not an input-validation failure
    assert "unknown sample" in capsys.readouterr().err


def test_cli_store_env_default(demo_store, capsys, monkeypatch):
    monkeypatch.setenv("SEMSCAPE_STORE", str(demo_store))
    rc = main(["confusions"])
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["dataset"] == "demo"


def test_export_writes_files(demo_store, tmp_path, capsys):
    out = tmp_path / "confusions.csv"
    rc = main(
        ["export", "confusions", "--store", str(demo_store), "--out", str(out), "--format", "csv"]
    )
    assert rc == 0
    assert out.read_text().startswith("gold,pred,frequency")
    out_json = tmp_path / "points.json"
    rc = main(["export", "points", "--store", str(demo_store), "--out", str(out_json)])
    assert rc == 0
    payload = json.loads(out_json.read_text())
    assert payload["sample_count"] == 24
    rc = main(["export", "label-clusters", "--store", str(demo_store), "--format", "csv"])
    assert rc == 0
    assert capsys.readouterr().out.startswith("cluster_id,color_index,member")


def test_export_explanation_csv_rejected(demo_store, capsys):
    rc = main(
        ["export", "explanation", "--store", str(demo_store), "--sample", "s00", "--format", "csv"]
    )
    assert rc == 2
    assert "no CSV rendering" in capsys.readouterr().err


def test_build_store_without_sample_embeddings(tmp_path):
    rng = np.random.default_rng(3)
    corpus, _, semt = write_corpus_files(
        tmp_path, demo_rows(rng), dim=4, rng=rng, with_sample_embeddings=False
    )
    manifest, dataset = build_store(tmp_path / "store", corpus, semt, dataset_id="nosample")
    assert manifest.sample_embeddings is None
    assert dataset.embeddings.derived
    entry = load_store(tmp_path / "store")
    assert entry.dataset.embeddings.derived
