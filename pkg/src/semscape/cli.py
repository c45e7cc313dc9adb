"""Batch command-line interface.

Every analytics result the HTTP service can produce is reachable here with
identical content. Exit codes: 0 success, 2 invalid input, 1 runtime
failure, 64 usage error. The SEMSCAPE_STORE environment variable supplies
the default --store.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from . import payloads
from .errors import InputError, SemscapeError
from .projection import ProjectionParams
from .store import DatasetRegistry, build_store, load_store, precompute

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2
EXIT_USAGE = 64

STORE_ENV = "SEMSCAPE_STORE"


class _Parser(argparse.ArgumentParser):
    """argparse parser that exits 64 on usage errors (unknown flags etc.)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_store_arg(parser):
    default = os.environ.get(STORE_ENV)
    parser.add_argument(
        "--store",
        default=default,
        required=default is None,
        help=f"dataset store directory (default: ${STORE_ENV})",
    )


def _add_format_arg(parser):
    parser.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")


def _add_local_words_args(parser):
    parser.add_argument("--freq", type=int, default=5, help="frequency threshold T")
    parser.add_argument("--locality", type=float, default=0.5, help="locality cap")
    parser.add_argument("--quantile", type=float, default=0.8, help="locality quantile")
    parser.add_argument("--mode", choices=("words", "concepts"), default="words")
    parser.add_argument("--stopwords", choices=("keep", "ignore"), default="ignore")
    parser.add_argument("--region", default=None, help="lasso polygon: x1,y1,x2,y2,...")


def _add_filter_args(parser):
    parser.add_argument("--errors-only", action="store_true")
    parser.add_argument("--conf-lo", type=float, default=None)
    parser.add_argument("--conf-hi", type=float, default=None)
    parser.add_argument("--labels", default=None, help="comma-separated label ids")


def _add_confusions_args(parser):
    parser.add_argument("--sort", choices=("freq", "gold", "pred"), default="freq")
    parser.add_argument("--secondary", choices=("freq", "gold", "pred"), default=None)
    parser.add_argument("--conf-lo", type=float, default=None)
    parser.add_argument("--conf-hi", type=float, default=None)


def _add_explain_args(parser):
    parser.add_argument("--sample", required=True, help="sample id to explain")
    parser.add_argument("--contrast-label", default=None)
    parser.add_argument("--tau", type=float, default=0.4)
    parser.add_argument("--metrics", default=None, help="comma-separated metric names")


def _add_compare_args(parser):
    parser.add_argument("--store-b", default=None, help="second store for cross-dataset compare")
    parser.add_argument("--side-a", required=True, help="group selector as JSON")
    parser.add_argument("--side-b", required=True, help="group selector as JSON")
    parser.add_argument("--kind", choices=("word", "concept", "label"), default="word")


def build_parser() -> _Parser:
    parser = _Parser(prog="semscape", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate inputs and build a dataset store")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sample-emb", default=None)
    p.add_argument("--token-emb", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--importance", default=None)
    p.add_argument("--stopwords-file", default=None)
    p.add_argument("--id", default=None, help="dataset id (default: corpus file stem)")
    p.add_argument("--out", required=True, help="store directory to create")
    p.add_argument("--method", choices=("tsne", "pca"), default="tsne")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--pca-dims", type=int, default=50)

    p = sub.add_parser("precompute", help="compute the layout and analytics caches")
    _add_store_arg(p)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store", action="append", default=None, help="store directory (repeatable)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    p.add_argument("--static", default=None, help="static UI bundle directory")

    p = sub.add_parser("local-words", help="localized words or concepts")
    _add_store_arg(p)
    _add_local_words_args(p)
    _add_format_arg(p)

    p = sub.add_parser("confusions", help="confusion table and error shares")
    _add_store_arg(p)
    _add_confusions_args(p)
    _add_format_arg(p)

    p = sub.add_parser("explain", help="explanation bundle for one sample")
    _add_store_arg(p)
    _add_explain_args(p)
    _add_format_arg(p)

    p = sub.add_parser("compare", help="two-group divergence statistics")
    _add_store_arg(p)
    _add_compare_args(p)
    _add_format_arg(p)

    p = sub.add_parser("export", help="write any analytics result to a file")
    p.add_argument(
        "what",
        choices=(
            "datasets",
            "points",
            "local-words",
            "lists",
            "confusions",
            "label-clusters",
            "hulls",
            "explanation",
            "compare",
        ),
    )
    _add_store_arg(p)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")
    _add_format_arg(p)
    _add_local_words_args(p)
    _add_filter_args(p)
    p.add_argument("--sort", choices=("freq", "gold", "pred"), default="freq")
    p.add_argument("--secondary", choices=("freq", "gold", "pred"), default=None)
    p.add_argument("--sample", default=None)
    p.add_argument("--contrast-label", default=None)
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--metrics", default=None)
    p.add_argument("--cut", type=float, default=None)
    p.add_argument("--membership", choices=("gold", "pred"), default="gold")
    p.add_argument("--store-b", default=None)
    p.add_argument("--side-a", default=None)
    p.add_argument("--side-b", default=None)
    p.add_argument("--kind", choices=("word", "concept", "label"), default="word")

    return parser


def _split(csv_value: Optional[str]) -> Optional[list[str]]:
    if csv_value is None or csv_value == "":
        return None
    return csv_value.split(",")


def _split_floats(csv_value: Optional[str]) -> Optional[list[float]]:
    if csv_value is None or csv_value == "":
        return None
    try:
        return [float(v) for v in csv_value.split(",")]
    except ValueError as exc:
        raise InputError(f"expected comma-separated numbers: {exc}", code="invalid_region")


def _compare_payload(args) -> dict:
    import json as _json

    registry = DatasetRegistry()
    entry_a = registry.add_store(args.store)
    entry_b = entry_a
    if args.store_b is not None:
        entry_b = registry.add_store(args.store_b)
    try:
        raw_a = _json.loads(args.side_a)
        raw_b = _json.loads(args.side_b)
    except _json.JSONDecodeError as exc:
        raise InputError(f"selector is not valid JSON: {exc.msg}")
    raw_a.setdefault("dataset", entry_a.dataset_id)
    raw_b.setdefault("dataset", entry_b.dataset_id)
    return payloads.build_compare_payload(
        registry,
        payloads.selector_from_dict(raw_a),
        payloads.selector_from_dict(raw_b),
        item_kind=args.kind,
    )


def _build_payload(kind: str, args) -> dict:
    if kind == "compare":
        return _compare_payload(args)
    if kind == "datasets":
        registry = DatasetRegistry()
        registry.add_store(args.store)
        return payloads.build_datasets_payload(registry)
    entry = load_store(args.store)
    if kind == "points":
        return payloads.build_points_payload(
            entry,
            errors_only=args.errors_only,
            conf_lo=args.conf_lo,
            conf_hi=args.conf_hi,
            labels=_split(args.labels),
        )
    if kind == "local-words":
        return payloads.build_local_words_payload(
            entry,
            freq=args.freq,
            locality=args.locality,
            quantile=args.quantile,
            mode=args.mode,
            stopwords=args.stopwords,
            region=_split_floats(args.region),
        )
    if kind == "lists":
        return payloads.build_lists_payload(
            entry,
            errors_only=args.errors_only,
            conf_lo=args.conf_lo,
            conf_hi=args.conf_hi,
            labels=_split(args.labels),
            region=_split_floats(args.region),
            stopwords=args.stopwords,
        )
    if kind == "confusions":
        return payloads.build_confusions_payload(
            entry,
            sort=args.sort,
            secondary=args.secondary,
            conf_lo=args.conf_lo,
            conf_hi=args.conf_hi,
        )
    if kind == "label-clusters":
        return payloads.build_label_clusters_payload(entry, cut=args.cut)
    if kind == "hulls":
        return payloads.build_hulls_payload(
            entry, labels=_split(args.labels), membership=args.membership
        )
    if kind == "explanation":
        if args.sample is None:
            raise InputError("explanation export needs --sample")
        return payloads.build_explanation_payload(
            entry,
            args.sample,
            contrast_label=args.contrast_label,
            tau=args.tau,
            metrics=_split(args.metrics),
        )
    raise InputError(f"unknown export target {kind!r}")


def _emit(payload: dict, kind: str, fmt: str, out: str = "-") -> None:
    if fmt == "csv":
        text = payloads.dump_csv(kind, payload)
    else:
        text = payloads.dump_json(payload)
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _run(args) -> int:
    if args.command == "ingest":
        manifest, dataset = build_store(
            args.out,
            args.corpus,
            args.token_emb,
            sample_embeddings_path=args.sample_emb,
            lexicon_path=args.lexicon,
            importance_path=args.importance,
            stopwords_path=args.stopwords_file,
            dataset_id=args.id,
            method=args.method,
            seed=args.seed,
            projection=ProjectionParams(
                perplexity=args.perplexity,
                iterations=args.iterations,
                pca_dims=args.pca_dims,
            ),
        )
        print(
            f"ingested {manifest.dataset_id!r}: M={len(dataset)}, "
            f"labels={len(dataset.label_set)}, d={dataset.embeddings.dim}"
        )
        return EXIT_OK

    if args.command == "precompute":
        entry = precompute(args.store)
        print(
            f"precomputed {entry.dataset_id!r}: layout method={entry.layout.method} "
            f"seed={entry.layout.seed}, confusions={len(entry.confusions)}, "
            f"clusters={len(entry.clusters)}"
        )
        return EXIT_OK

    if args.command == "serve":
        from .service import serve

        stores = args.store or ([os.environ[STORE_ENV]] if STORE_ENV in os.environ else [])
        if not stores:
            raise InputError(f"serve needs --store (or ${STORE_ENV})")
        serve(stores, host=args.host, port=args.port, static_dir=args.static)
        return EXIT_OK

    if args.command in ("local-words", "confusions", "explain", "compare"):
        kind = "explanation" if args.command == "explain" else args.command
        payload = _build_payload(kind, args)
        _emit(payload, kind, args.fmt)
        return EXIT_OK

    if args.command == "export":
        payload = _build_payload(args.what, args)
        _emit(payload, args.what, args.fmt, out=args.out)
        return EXIT_OK

    raise InputError(f"unknown command {args.command!r}")


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except InputError as exc:
        print(f"semscape: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SemscapeError as exc:
        print(f"semscape: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"semscape: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
