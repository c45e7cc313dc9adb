"""HTTP/JSON facade over the analytics engine.

Stateless by design: selections, filters, and compare groups travel in each
request, the server holds only immutable dataset registry entries. Every
query endpoint is read-only; the lone write path is loading a dataset at
startup or through the admin route.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import payloads
from .errors import InputError, NotFoundError, SemscapeError
from .store import DatasetRegistry

# Every machine code the API can emit, with its HTTP status. A raise site
# picks exactly one code; anything uncoded is a 500 internal_error.
ERROR_CODES: dict[str, int] = {
    "dataset_not_found": 404,
    "sample_not_found": 404,
    "label_not_found": 404,
    "metric_not_found": 404,
    "not_found": 404,
    "invalid_params": 422,
    "invalid_region": 422,
    "empty_group": 422,
    "contrast_unavailable": 422,
    "invalid_format": 400,
    "store_invalid": 400,
    "dataset_exists": 409,
}


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorPayload(BaseModel):
    error: ErrorBody


class DatasetInfo(BaseModel):
    id: str
    sample_count: int
    label_count: int


class DatasetsPayload(BaseModel):
    datasets: list[DatasetInfo]


class Point(BaseModel):
    id: str
    x: float
    y: float
    gold_label: str
    pred_label: str
    confidence: float
    correct: bool
    domain: Optional[str] = None


class PointsPayload(BaseModel):
    dataset: str
    layout_id: str
    method: str
    seed: int
    sample_count: int
    points: list[Point]


class LocalWordRow(BaseModel):
    word: str
    x: float
    y: float
    frequency: int
    locality: float
    scale_hint: float


class LocalWordParams(BaseModel):
    freq_threshold: int
    locality_max: float
    locality_quantile: float
    stopwords: str


class LocalWordsPayload(BaseModel):
    dataset: str
    mode: str
    params: LocalWordParams
    words: list[LocalWordRow]


class RankedItem(BaseModel):
    item: str
    count: int
    sample_share: float


class RankedLabel(BaseModel):
    item: str
    count: int
    share: float


class ListsPayload(BaseModel):
    dataset: str
    total_samples: int
    words: list[RankedItem]
    concepts: list[RankedItem]
    gold_labels: list[RankedLabel]
    pred_labels: list[RankedLabel]


class ConfusionRow(BaseModel):
    gold: str
    pred: str
    frequency: int
    sample_ids: list[str]


class ErrorSharesBody(BaseModel):
    total_errors: int
    false_negatives: dict[str, float]
    false_positives: dict[str, float]


class ConfusionsPayload(BaseModel):
    dataset: str
    total_errors: int
    entries: list[ConfusionRow]
    error_shares: ErrorSharesBody


class ClusterRow(BaseModel):
    cluster_id: int
    members: list[str]
    color_index: int


class LabelClustersPayload(BaseModel):
    dataset: str
    cut: float
    clusters: list[ClusterRow]


class HullRow(BaseModel):
    label: str
    membership: str
    vertices: list[list[float]]


class HullsPayload(BaseModel):
    dataset: str
    hulls: list[HullRow]


class QueryInfo(BaseModel):
    id: str
    text: str
    tokens: list[str]
    gold_label: str
    pred_label: str
    confidence: float


class TripleInfo(BaseModel):
    query_id: str
    closest_id: str
    contrast_id: str
    contrast_label: str


class ImportanceBody(BaseModel):
    metrics: list[str]
    vectors: dict[str, list[float]]


class GraphColumnBody(BaseModel):
    role: str
    sample_id: str
    label: str
    header: str
    text: str
    tokens: list[str]


class GraphEdgeBody(BaseModel):
    pair: str
    query_index: int
    other_index: int
    weight: float


class GraphBody(BaseModel):
    tau: float
    columns: list[GraphColumnBody]
    edges: list[GraphEdgeBody]
    contributions: dict[str, list[float]]
    pair_similarity: dict[str, float]


class SummaryBody(BaseModel):
    text: str
    slots: dict[str, Any]


class ExplanationPayload(BaseModel):
    dataset: str
    query: QueryInfo
    triple: TripleInfo
    importance: ImportanceBody
    graph: GraphBody
    summary: SummaryBody


class CompareSide(BaseModel):
    descriptor: dict[str, Any]
    layout_id: str
    sample_ids: list[str]


class DivergenceRow(BaseModel):
    item: str
    kind: str
    count_a: int
    count_b: int
    z: float
    verdict: str


class ComparePayload(BaseModel):
    item_kind: str
    items: list[DivergenceRow]
    side_a: CompareSide
    side_b: CompareSide


class CompareRequest(BaseModel):
    side_a: dict[str, Any]
    side_b: dict[str, Any]
    item_kind: str = "word"


class AdminLoadRequest(BaseModel):
    store: str


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _csv(values: Optional[str]) -> Optional[list[str]]:
    if values is None or values == "":
        return None
    return values.split(",")


def _floats(values: Optional[str]) -> Optional[list[float]]:
    if values is None or values == "":
        return None
    try:
        return [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers: {exc}", code="invalid_region")


def _err_doc(*codes: str) -> dict:
    """OpenAPI `responses` block advertising the machine codes a route emits."""
    by_status: dict[int, list[str]] = {}
    for code in codes:
        by_status.setdefault(ERROR_CODES[code], []).append(code)
    return {
        status: {
            "model": ErrorPayload,
            "description": "error codes: " + ", ".join(sorted(codes_)),
        }
        for status, codes_ in sorted(by_status.items())
    }


def create_app(registry: DatasetRegistry, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(
        title="semscape",
        version="0.1.0",
        description="Embedding-landscape analytics for fine-grained text classification.",
    )
    app.state.registry = registry

    @app.exception_handler(SemscapeError)
    async def engine_error_handler(request: Request, exc: SemscapeError):
        status = ERROR_CODES.get(exc.code, 500)
        return _error_response(status, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return _error_response(422, "invalid_params", str(exc.errors()))

    @app.get("/api/datasets", response_model=DatasetsPayload)
    def list_datasets():
        return payloads.build_datasets_payload(registry)

    @app.get(
        "/api/datasets/{dataset_id}/points",
        response_model=PointsPayload,
        responses=_err_doc("dataset_not_found", "invalid_params"),
    )
    def points(
        dataset_id: str,
        errors_only: bool = False,
        conf_lo: Optional[float] = None,
        conf_hi: Optional[float] = None,
        labels: Optional[str] = None,
    ):
        return payloads.build_points_payload(
            registry.get(dataset_id),
            errors_only=errors_only,
            conf_lo=conf_lo,
            conf_hi=conf_hi,
            labels=_csv(labels),
        )

    @app.get(
        "/api/datasets/{dataset_id}/local-words",
        response_model=LocalWordsPayload,
        responses=_err_doc("dataset_not_found", "invalid_params", "invalid_region"),
    )
    def local_words_route(
        dataset_id: str,
        freq: int = Query(default=5, ge=0),
        locality: float = 0.5,
        quantile: float = 0.8,
        mode: str = "words",
        stopwords: str = "ignore",
        region: Optional[str] = None,
    ):
        return payloads.build_local_words_payload(
            registry.get(dataset_id),
            freq=freq,
            locality=locality,
            quantile=quantile,
            mode=mode,
            stopwords=stopwords,
            region=_floats(region),
        )

    @app.get(
        "/api/datasets/{dataset_id}/lists",
        response_model=ListsPayload,
        responses=_err_doc("dataset_not_found", "invalid_params", "invalid_region"),
    )
    def lists(
        dataset_id: str,
        errors_only: bool = False,
        conf_lo: Optional[float] = None,
        conf_hi: Optional[float] = None,
        labels: Optional[str] = None,
        region: Optional[str] = None,
        stopwords: str = "ignore",
    ):
        return payloads.build_lists_payload(
            registry.get(dataset_id),
            errors_only=errors_only,
            conf_lo=conf_lo,
            conf_hi=conf_hi,
            labels=_csv(labels),
            region=_floats(region),
            stopwords=stopwords,
        )

    @app.get(
        "/api/datasets/{dataset_id}/confusions",
        response_model=ConfusionsPayload,
        responses=_err_doc("dataset_not_found", "invalid_params"),
    )
    def confusions(
        dataset_id: str,
        sort: str = "freq",
        secondary: Optional[str] = None,
        conf_lo: Optional[float] = None,
        conf_hi: Optional[float] = None,
    ):
        return payloads.build_confusions_payload(
            registry.get(dataset_id),
            sort=sort,
            secondary=secondary,
            conf_lo=conf_lo,
            conf_hi=conf_hi,
        )

    @app.get(
        "/api/datasets/{dataset_id}/label-clusters",
        response_model=LabelClustersPayload,
        responses=_err_doc("dataset_not_found", "invalid_params"),
    )
    def label_clusters(dataset_id: str, cut: Optional[float] = None):
        return payloads.build_label_clusters_payload(registry.get(dataset_id), cut=cut)

    @app.get(
        "/api/datasets/{dataset_id}/hulls",
        response_model=HullsPayload,
        responses=_err_doc("dataset_not_found", "label_not_found", "invalid_params"),
    )
    def hulls(dataset_id: str, labels: Optional[str] = None, membership: str = "gold"):
        return payloads.build_hulls_payload(
            registry.get(dataset_id), labels=_csv(labels), membership=membership
        )

    @app.get(
        "/api/datasets/{dataset_id}/samples/{sample_id}/explanation",
        response_model=ExplanationPayload,
        responses=_err_doc(
            "dataset_not_found",
            "sample_not_found",
            "label_not_found",
            "metric_not_found",
            "contrast_unavailable",
            "invalid_params",
        ),
    )
    def explanation(
        dataset_id: str,
        sample_id: str,
        contrast_label: Optional[str] = None,
        tau: float = 0.4,
        metrics: Optional[str] = None,
    ):
        return payloads.build_explanation_payload(
            registry.get(dataset_id),
            sample_id,
            contrast_label=contrast_label,
            tau=tau,
            metrics=_csv(metrics),
        )

    @app.post(
        "/api/compare",
        response_model=ComparePayload,
        responses=_err_doc(
            "dataset_not_found", "invalid_params", "invalid_region", "empty_group"
        ),
    )
    def compare(request: CompareRequest):
        return payloads.build_compare_payload(
            registry,
            payloads.selector_from_dict(request.side_a),
            payloads.selector_from_dict(request.side_b),
            item_kind=request.item_kind,
        )

    @app.post(
        "/api/admin/datasets",
        response_model=DatasetInfo,
        status_code=201,
        responses=_err_doc("store_invalid", "invalid_format", "dataset_exists"),
    )
    def admin_load(request: AdminLoadRequest):
        entry = registry.add_store(request.store)
        return {
            "id": entry.dataset_id,
            "sample_count": len(entry.dataset),
            "label_count": len(entry.dataset.label_set),
        }

    if static_dir is not None:
        path = Path(static_dir)
        if not path.is_dir():
            raise InputError(f"static asset directory {static_dir!r} does not exist")
        app.mount("/", StaticFiles(directory=path, html=True), name="ui")

    return app


def openapi_document(app: FastAPI) -> dict:
    """Machine-readable description of every route, parameter, and payload."""
    return app.openapi()


def serve(
    store_dirs,
    host: str = "127.0.0.1",
    port: int = 8008,
    static_dir: Optional[str] = None,
):
    """Load every store and serve until interrupted. Fails fast (non-zero
    exit via the raised error) when a manifest cannot be loaded."""
    import uvicorn

    registry = DatasetRegistry()
    for store in store_dirs:
        registry.add_store(store)
    app = create_app(registry, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
