import json
from pathlib import Path

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from semscape.cli import main
from semscape.service import ERROR_CODES, create_app, openapi_document
from semscape.store import DatasetRegistry, load_store

from conftest import write_corpus_files
from test_store_cli import demo_rows

SPEC_ROUTES = {
    ("GET", "/api/datasets"),
    ("GET", "/api/datasets/{dataset_id}/points"),
    ("GET", "/api/datasets/{dataset_id}/local-words"),
    ("GET", "/api/datasets/{dataset_id}/lists"),
    ("GET", "/api/datasets/{dataset_id}/confusions"),
    ("GET", "/api/datasets/{dataset_id}/label-clusters"),
    ("GET", "/api/datasets/{dataset_id}/hulls"),
    ("GET", "/api/datasets/{dataset_id}/samples/{sample_id}/explanation"),
    ("POST", "/api/compare"),
    ("POST", "/api/admin/datasets"),
}

# Filled by _expect_error as tests trigger error responses; the coverage test
# asserts every documented machine code was actually produced at least once.
TRIGGERED_CODES: set[str] = set()


@pytest.fixture(scope="module")
def demo_store(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    rng = np.random.default_rng(0)
    corpus, semb, semt = write_corpus_files(tmp, demo_rows(rng), dim=4, rng=rng)
    store = tmp / "store"
    assert (
        main(
            ["ingest", "--corpus", str(corpus), "--sample-emb", str(semb),
             "--token-emb", str(semt), "--out", str(store), "--id", "demo",
             "--iterations", "260"]
        )
        == 0
    )
    assert main(["precompute", "--store", str(store)]) == 0
    return store


@pytest.fixture(scope="module")
def second_store(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc2")
    rng = np.random.default_rng(9)
    corpus, semb, semt = write_corpus_files(tmp, demo_rows(rng), dim=4, rng=rng)
    store = tmp / "store2"
    assert (
        main(
            ["ingest", "--corpus", str(corpus), "--sample-emb", str(semb),
             "--token-emb", str(semt), "--out", str(store), "--id", "demo2",
             "--iterations", "260"]
        )
        == 0
    )
    return store


@pytest.fixture(scope="module")
def client(demo_store):
    registry = DatasetRegistry()
    registry.add_store(demo_store)
    app = create_app(registry)
    with TestClient(app) as test_client:
        test_client.app = app
        yield test_client


def _expect_error(response, status, code):
    assert response.status_code == status, response.text
    body = response.json()
    assert body["error"]["code"] == code
    assert body["error"]["message"]
    TRIGGERED_CODES.add(code)


def test_datasets_listing(client):
    body = client.get("/api/datasets").json()
    assert body == {"datasets": [{"id": "demo", "sample_count": 24, "label_count": 3}]}


def test_points_and_filters(client):
    all_points = client.get("/api/datasets/demo/points").json()
    assert all_points["sample_count"] == 24
    assert all_points["layout_id"] == "demo:tsne:42"
    errors = client.get("/api/datasets/demo/points?errors_only=true").json()
    assert errors["sample_count"] < 24
    assert all(not p["correct"] for p in errors["points"])
    banded = client.get("/api/datasets/demo/points?conf_lo=0.4&conf_hi=0.6").json()
    assert all(0.4 <= p["confidence"] <= 0.6 for p in banded["points"])
    labeled = client.get("/api/datasets/demo/points?labels=alpha").json()
    assert all(
        p["gold_label"] == "alpha" or p["pred_label"] == "alpha" for p in labeled["points"]
    )


def test_get_idempotence_byte_identical(client):
    paths = [
        "/api/datasets/demo/points?errors_only=true",
        "/api/datasets/demo/local-words?freq=3&locality=0.8",
        "/api/datasets/demo/confusions?sort=gold&secondary=freq",
        "/api/datasets/demo/lists",
        "/api/datasets/demo/label-clusters",
        "/api/datasets/demo/hulls",
        "/api/datasets/demo/samples/s00/explanation",
    ]
    for path in paths:
        first = client.get(path)
        second = client.get(path)
        assert first.status_code == 200, f"{path}: {first.text}"
        assert first.content == second.content


def test_local_words_region_filter(client):
    base = client.get("/api/datasets/demo/local-words?freq=2&locality=5&stopwords=keep").json()
    assert base["words"]
    # A region far away from the layout keeps no samples -> no words.
    far = client.get(
        "/api/datasets/demo/local-words?freq=2&locality=5&region=1e9,1e9,1e9,2e9,2e9,1e9"
    )
    assert far.status_code == 200
    assert far.json()["words"] == []


def test_lists_shares(client):
    body = client.get("/api/datasets/demo/lists?stopwords=keep").json()
    assert body["total_samples"] == 24
    for row in body["words"]:
        assert 0.0 < row["sample_share"] <= 1.0
    assert sum(r["share"] for r in body["gold_labels"]) == pytest.approx(1.0, abs=1e-6)
    # Error filter turns label shares into FN/FP shares.
    errors = client.get("/api/datasets/demo/lists?errors_only=true").json()
    confusions = client.get("/api/datasets/demo/confusions").json()
    fn = confusions["error_shares"]["false_negatives"]
    for row in errors["gold_labels"]:
        assert row["share"] == pytest.approx(fn[row["item"]], abs=1e-9)


def test_label_clusters_cut_param(client):
    default = client.get("/api/datasets/demo/label-clusters").json()
    assert default["cut"] == 0.5
    singletons = client.get("/api/datasets/demo/label-clusters?cut=1e-9").json()
    assert all(len(c["members"]) == 1 for c in singletons["clusters"])


def test_hulls_payload(client):
    body = client.get("/api/datasets/demo/hulls?labels=alpha&membership=pred").json()
    assert len(body["hulls"]) == 1
    hull = body["hulls"][0]
    assert hull["label"] == "alpha" and hull["membership"] == "pred"
    assert len(hull["vertices"]) >= 3


def test_explanation_payload_contract(client):
    body = client.get("/api/datasets/demo/samples/s00/explanation").json()
    assert [c["role"] for c in body["graph"]["columns"]] == ["query", "closest", "contrast"]
    n = len(body["query"]["tokens"])
    for vec in body["importance"]["vectors"].values():
        assert len(vec) == n
        assert sum(vec) == pytest.approx(1.0, abs=1e-6)
    for pair in ("query_closest", "query_contrast"):
        assert sum(body["graph"]["contributions"][pair]) == pytest.approx(
            body["graph"]["pair_similarity"][pair], abs=1e-6
        )
    assert body["summary"]["text"].startswith("The model predicted")


def test_compare_round_trip(client):
    request = {
        "side_a": {"dataset": "demo", "labels_gold": ["alpha"]},
        "side_b": {"dataset": "demo", "labels_gold": ["beta"]},
        "item_kind": "word",
    }
    body = client.post("/api/compare", json=request).json()
    assert body["item_kind"] == "word"
    assert body["side_a"]["descriptor"]["labels_gold"] == ["alpha"]
    assert {i["item"] for i in body["items"]} >= {"cash", "music"}
    zs = [abs(i["z"]) for i in body["items"]]
    assert zs == sorted(zs, reverse=True)


def test_admin_load_and_duplicate(client, second_store):
    response = client.post("/api/admin/datasets", json={"store": str(second_store)})
    assert response.status_code == 201
    assert response.json() == {"id": "demo2", "sample_count": 24, "label_count": 3}
    listed = {d["id"] for d in client.get("/api/datasets").json()["datasets"]}
    assert listed == {"demo", "demo2"}
    _expect_error(
        client.post("/api/admin/datasets", json={"store": str(second_store)}),
        409,
        "dataset_exists",
    )
    # Cross-dataset compare reports distinct layout ids.
    body = client.post(
        "/api/compare",
        json={"side_a": {"dataset": "demo"}, "side_b": {"dataset": "demo2"}},
    ).json()
    assert body["side_a"]["layout_id"] != body["side_b"]["layout_id"]


def test_error_paths(client, tmp_path):
    _expect_error(client.get("/api/datasets/unknown/points"), 404, "dataset_not_found")
    _expect_error(
        client.get("/api/datasets/demo/samples/ghost/explanation"), 404, "sample_not_found"
    )
    _expect_error(client.get("/api/datasets/demo/hulls?labels=ghost"), 404, "label_not_found")
    _expect_error(
        client.get("/api/datasets/demo/samples/s00/explanation?metrics=bogus"),
        404,
        "metric_not_found",
    )
    # A label with a single exemplar has no "closest" candidate.
    rng = np.random.default_rng(77)
    rows = [
        {"id": "only", "tokens": ["x"], "gold": "solo", "pred": "solo"},
        {"id": "o1", "tokens": ["y"], "gold": "other", "pred": "other"},
        {"id": "o2", "tokens": ["z"], "gold": "other", "pred": "other"},
    ]
    corpus, semb, semt = write_corpus_files(tmp_path, rows, dim=3, rng=rng)
    lonely = tmp_path / "lonely"
    assert (
        main(
            ["ingest", "--corpus", str(corpus), "--sample-emb", str(semb),
             "--token-emb", str(semt), "--out", str(lonely), "--id", "lonely",
             "--method", "pca"]
        )
        == 0
    )
    assert client.post("/api/admin/datasets", json={"store": str(lonely)}).status_code == 201
    _expect_error(
        client.get("/api/datasets/lonely/samples/only/explanation"),
        422,
        "contrast_unavailable",
    )
    _expect_error(client.get("/api/datasets/demo/confusions?sort=bogus"), 422, "invalid_params")
    _expect_error(
        client.get("/api/datasets/demo/local-words?freq=notanumber"), 422, "invalid_params"
    )
    _expect_error(
        client.get("/api/datasets/demo/local-words?region=1,2,3"), 422, "invalid_region"
    )
    _expect_error(
        client.post(
            "/api/compare",
            json={
                "side_a": {"dataset": "demo", "labels_gold": ["nonexistent-label"]},
                "side_b": {"dataset": "demo"},
            },
        ),
        422,
        "empty_group",
    )
    _expect_error(
        client.post("/api/admin/datasets", json={"store": str(tmp_path / "nothing")}),
        400,
        "store_invalid",
    )
    bad_store = tmp_path / "bad"
    bad_store.mkdir()
    (bad_store / "manifest.json").write_text("{broken")
    _expect_error(
        client.post("/api/admin/datasets", json={"store": str(bad_store)}),
        400,
        "invalid_format",
    )


def test_openapi_routes_match_contract(client):
    doc = openapi_document(client.app)
    documented = {
        (method.upper(), path)
        for path, methods in doc["paths"].items()
        for method in methods
    }
    assert documented == SPEC_ROUTES


def test_openapi_documents_every_error_code(client):
    doc = openapi_document(client.app)
    advertised = set()
    for path, methods in doc["paths"].items():
        for method, op in methods.items():
            for status, resp in op.get("responses", {}).items():
                desc = resp.get("description", "")
                if desc.startswith("error codes: "):
                    advertised |= set(desc.removeprefix("error codes: ").split(", "))
    assert advertised <= set(ERROR_CODES)
    # Status codes in the doc agree with the registry.
    for code in advertised:
        assert code in ERROR_CODES


def _advertised_codes(doc) -> set[str]:
    advertised = set()
    for methods in doc["paths"].values():
        for op in methods.values():
            for resp in op.get("responses", {}).values():
                desc = resp.get("description", "")
                if desc.startswith("error codes: "):
                    advertised |= set(desc.removeprefix("error codes: ").split(", "))
    return advertised


def test_every_documented_code_is_triggered_somewhere(client):
    # Runs after the error tests in this module, which populate
    # TRIGGERED_CODES: every code advertised in the document must have been
    # produced by at least one request above.
    advertised = _advertised_codes(openapi_document(client.app))
    assert advertised
    missing = advertised - TRIGGERED_CODES
    assert not missing, f"documented codes never triggered by a test: {sorted(missing)}"


def _resolve_ref(schema, doc):
    while "$ref" in schema:
        ref = schema["$ref"].split("/")[-1]
        schema = doc["components"]["schemas"][ref]
    return schema


def test_schema_validates_golden_payload_fixtures(client, tmp_path):
    """Every payload the service emits validates against its own OpenAPI
    schema (resolved against the document's component registry)."""
    doc = openapi_document(client.app)
    resolver = jsonschema.validators.RefResolver(
        base_uri="", referrer=doc, store={"": doc}
    )
    cases = [
        ("/api/datasets", "DatasetsPayload"),
        ("/api/datasets/demo/points", "PointsPayload"),
        ("/api/datasets/demo/local-words?freq=3", "LocalWordsPayload"),
        ("/api/datasets/demo/lists", "ListsPayload"),
        ("/api/datasets/demo/confusions", "ConfusionsPayload"),
        ("/api/datasets/demo/label-clusters", "LabelClustersPayload"),
        ("/api/datasets/demo/hulls", "HullsPayload"),
        ("/api/datasets/demo/samples/s00/explanation", "ExplanationPayload"),
    ]
    for path, schema_name in cases:
        body = client.get(path).json()
        schema = doc["components"]["schemas"][schema_name]
        jsonschema.validate(body, schema, resolver=resolver)
    compare_body = client.post(
        "/api/compare",
        json={"side_a": {"dataset": "demo"}, "side_b": {"dataset": "demo"}},
    ).json()
    jsonschema.validate(
        compare_body, doc["components"]["schemas"]["ComparePayload"], resolver=resolver
    )
    error_body = client.get("/api/datasets/none/points").json()
    jsonschema.validate(
        error_body, doc["components"]["schemas"]["ErrorPayload"], resolver=resolver
    )


def test_floats_serialized_with_nine_significant_digits(client):
    text = client.get("/api/datasets/demo/points").text
    for token in text.replace("{", " ").replace("}", " ").replace(",", " ").split():
        if token.count(".") == 1 and token.replace(".", "").replace("-", "").isdigit():
            digits = token.lstrip("-").replace(".", "").lstrip("0")
            assert len(digits) <= 9, f"float {token} exceeds 9 significant digits"


def test_static_mount_serves_ui(demo_store, tmp_path):
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>ui</body></html>")
    registry = DatasetRegistry()
    registry.add_store(demo_store)
    app = create_app(registry, static_dir=str(static))
    with TestClient(app) as client_with_ui:
        assert client_with_ui.get("/api/datasets").status_code == 200
        page = client_with_ui.get("/")
        assert page.status_code == 200
        assert "ui" in page.text


def test_serves_built_frontend_bundle(demo_store):
    dist = Path(__file__).resolve().parent.parent / "frontend" / "dist"
    if not (dist / "index.html").exists():
        pytest.skip("frontend bundle not built (run `npm run build` in frontend/)")
    registry = DatasetRegistry()
    registry.add_store(demo_store)
    app = create_app(registry, static_dir=str(dist))
    with TestClient(app) as client_with_ui:
        page = client_with_ui.get("/")
        assert page.status_code == 200
        assert 'src="./assets/app.js"' in page.text
        bundle = client_with_ui.get("/assets/app.js")
        assert bundle.status_code == 200
        assert "ApiClient" in bundle.text
        assert client_with_ui.get("/styles.css").status_code == 200
        # API keeps priority over the static mount.
        assert client_with_ui.get("/api/datasets").status_code == 200
