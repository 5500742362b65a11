"""Command-line entry points for the channel construction engine."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import augmentation, qc
from .catalog import (TopicSource, TopicTitle, build_consistency_corpus,
                      build_reorder_corpus, load_catalog, load_topics,
                      write_pretrain, write_topics)
from .clustering import Cluster, agnes, attach_titles, cluster_prf, kmeans, silhouette
from .embedding import embed_title, fit_vocabulary, train_refinement
from .errors import EngineError
from .pipeline import PipelineConfig, load_config, run_pipeline, _build_generator
from .store import ChannelStore, channel_to_json
from .textmetrics import evaluate_generation
from .topicgen import generate_all


def _read_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _load_pipeline_inputs(config: PipelineConfig):
    products = load_catalog(config.catalog_path)
    catalog = {p.id: p for p in products}
    pairs = load_topics(config.topics_path, products)
    return products, catalog, pairs


def _fit_models(config: PipelineConfig, products, pairs):
    corpus = ([p.title for p in products]
              + [f"{k} {v}" for p in products for k, v in p.attributes]
              + [p.ocr_text for p in products if p.ocr_text]
              + [pair.title.serialized() for pair in pairs])
    vocab = fit_vocabulary(corpus, config.embedding_max_dim, config.embedding_char_bigrams)
    titles = sorted({pair.title.serialized() for pair in pairs})
    projection = train_refinement(titles, vocab, config.refinement_config())
    return vocab, projection


def cmd_ingest(args) -> int:
    config = load_config(args.config, _overrides(args))
    products, _, pairs = _load_pipeline_inputs(config)
    summary = {"products": len(products), "topics": len(pairs)}
    if args.pretrain_out:
        examples = (build_consistency_corpus(products, config.seed)
                    + build_reorder_corpus(products, config.seed))
        write_pretrain(args.pretrain_out, examples)
        summary["pretrain_examples"] = len(examples)
        summary["pretrain_out"] = str(args.pretrain_out)
    print(json.dumps(summary))
    return 0


def cmd_augment(args) -> int:
    products = load_catalog(args.catalog)
    catalog = {p.id: p for p in products}
    pairs = load_topics(args.topics, products)
    candidates = [(p, p.ocr_text) for p in products if p.ocr_text.strip()]
    positives = [(catalog[pair.product_id], pair.title) for pair in pairs]
    corpus = ([p.title for p in products]
              + [p.ocr_text for p in products if p.ocr_text]
              + [pair.title.serialized() for pair in pairs])
    vocab = fit_vocabulary(corpus, max_dim=4096, char_bigrams=True)
    model = augmentation.train_augment_classifier(positives, candidates, vocab)
    report = augmentation.mine_candidates(model, candidates, args.threshold, vocab)
    merged = augmentation.merge_promoted(pairs, report)
    write_topics(args.out, merged)
    print(json.dumps({
        "candidates_scored": report.candidates_scored,
        "promoted": report.promoted,
        "threshold": report.threshold,
        "written": len(merged),
        "out": str(args.out),
    }))
    return 0


def cmd_generate(args) -> int:
    config = load_config(args.config, _overrides(args))
    products, catalog, pairs = _load_pipeline_inputs(config)
    vocab, projection = _fit_models(config, products, pairs)
    generator, concurrency = _build_generator(config, pairs, catalog, vocab, projection)
    titles = generate_all(products, generator, concurrency)
    with open(args.out, "w", encoding="utf-8") as fh:
        for product, title in zip(products, titles):
            fh.write(json.dumps({
                "product_id": product.id,
                "phrase_a": title.phrase_a,
                "phrase_b": title.phrase_b,
                "source": title.source.value,
            }, ensure_ascii=False) + "\n")
    print(json.dumps({"generated": len(titles), "out": str(args.out)}))
    return 0


def cmd_cluster(args) -> int:
    config = load_config(args.config, _overrides(args))
    products, _, pairs = _load_pipeline_inputs(config)
    vocab, projection = _fit_models(config, products, pairs)
    records = [json.loads(line) for line in _read_lines(args.titles)]
    ids = [r["product_id"] for r in records]
    titles = [TopicTitle(r["phrase_a"], r.get("phrase_b", ""), TopicSource(r["source"]))
              for r in records]
    vectors = [embed_title(t.serialized(), vocab, projection) for t in titles]
    clusters = attach_titles(
        agnes(vectors, config.agnes_threshold, config.agnes_linkage), ids, titles)
    with open(args.out, "w", encoding="utf-8") as fh:
        for i, cluster in enumerate(clusters):
            fh.write(json.dumps({
                "cluster_id": i,
                "members": cluster.member_ids,
                "candidates": [{"phrase_a": t.phrase_a, "phrase_b": t.phrase_b,
                                "source": t.source.value} for t in cluster.title_candidates],
            }, ensure_ascii=False) + "\n")
    print(json.dumps({"clusters": len(clusters), "out": str(args.out)}))
    return 0


def cmd_qc(args) -> int:
    config = load_config(args.config, _overrides(args))
    products, catalog, pairs = _load_pipeline_inputs(config)
    vocab, projection = _fit_models(config, products, pairs)
    online = [p for p in pairs if p.origin.value == "online_positive"]
    coherence_model = qc.train_coherence(
        [p.title for p in online], vocab, projection, config.train_config())
    correlation_model = qc.train_correlation(
        [(catalog[p.product_id], p.title) for p in online],
        vocab, projection, config=config.train_config())
    clusters = []
    for line in _read_lines(args.clusters):
        obj = json.loads(line)
        clusters.append(Cluster(
            member_ids=obj["members"],
            title_candidates=[TopicTitle(t["phrase_a"], t.get("phrase_b", ""),
                                         TopicSource(t.get("source", "generated")))
                              for t in obj["candidates"]],
        ))
    channels, rejected = qc.assemble_channels(
        clusters,
        qc.make_coherence_scorer(coherence_model, vocab, projection),
        qc.make_correlation_scorer(correlation_model, vocab, projection),
        catalog,
        config.assembly_config(),
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for channel in channels:
            fh.write(json.dumps(channel_to_json(channel), ensure_ascii=False) + "\n")
    print(json.dumps({
        "channels": len(channels),
        "rejected": [{"members": list(r.member_ids), "reason": r.reason,
                      "best_coherence": r.best_coherence} for r in rejected],
        "out": str(args.out),
    }, ensure_ascii=False))
    return 0


def cmd_run(args) -> int:
    config = load_config(args.config, _overrides(args))
    summary = run_pipeline(config)
    print(json.dumps(summary.to_json(), ensure_ascii=False))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    config = load_config(args.config, _overrides(args))
    store = ChannelStore(config.store_path, config.min_products)
    static_dir = args.static_dir
    if static_dir is None:
        default = Path("frontend") / "dist"
        static_dir = default if default.is_dir() else None
    app = create_app(store, static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_eval_generation(args) -> int:
    hyps = _read_lines(args.hyp)
    refs = _read_lines(args.ref)
    report = evaluate_generation(hyps, refs)
    print(json.dumps(report.to_json()))
    return 0


def _read_embeddings(path: str) -> tuple[list[str], list[np.ndarray]]:
    ids, vectors = [], []
    for line in _read_lines(path):
        item_id, _, rest = line.partition("\t")
        ids.append(item_id)
        vectors.append(np.array([float(x) for x in rest.split()]))
    return ids, vectors


def cmd_eval_clustering(args) -> int:
    ids, vectors = _read_embeddings(args.embeddings)
    reference = {}
    for line in _read_lines(args.labels):
        item_id, _, group = line.partition("\t")
        reference[item_id] = group
    if set(ids) != set(reference):
        raise EngineError("embeddings and labels cover different item sets")
    if args.method == "agnes":
        clusters = agnes(vectors, args.threshold, args.linkage)
    else:
        k = len(set(reference.values()))
        clusters = kmeans(vectors, k, seed=args.seed or 0)
    assignment = {}
    for ci, cluster in enumerate(clusters):
        for idx in cluster.member_ids:
            assignment[ids[idx]] = ci
    evaluation = cluster_prf(assignment, reference)
    sil = None
    if len(clusters) > 1:
        labels = [assignment[i] for i in ids]
        sil = silhouette(vectors, labels)
    out = evaluation.to_json()
    out["silhouette"] = sil
    print(json.dumps(out))
    return 0


def _overrides(args) -> dict:
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="estc", description="Scene-based topic channel construction engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="JSON or key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        return p

    p = with_config(sub.add_parser("ingest", help="validate catalog and topic files"))
    p.add_argument("--pretrain-out", default=None,
                   help="also emit the consistency/reorder pretraining corpus here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("augment", help="mine weakly supervised topic pairs from OCR text")
    p.add_argument("--catalog", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--threshold", type=float, default=0.9)
    p.add_argument("--out", default="topics_augmented.jsonl")
    p.set_defaults(func=cmd_augment)

    p = with_config(sub.add_parser("generate", help="generate one topic title per product"))
    p.add_argument("--out", default="generated.jsonl")
    p.set_defaults(func=cmd_generate)

    p = with_config(sub.add_parser("cluster", help="cluster generated titles"))
    p.add_argument("--titles", default="generated.jsonl")
    p.add_argument("--out", default="clusters.jsonl")
    p.set_defaults(func=cmd_cluster)

    p = with_config(sub.add_parser("qc", help="filter clusters into channels"))
    p.add_argument("--clusters", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qc)

    with_config(sub.add_parser("run", help="execute the full pipeline")) \
        .set_defaults(func=cmd_run)

    p = with_config(sub.add_parser("serve", help="serve the review API and UI"))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8600)
    p.add_argument("--static-dir", default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval-generation", help="score hypothesis titles against references")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(func=cmd_eval_generation)

    p = sub.add_parser("eval-clustering", help="score a clustering against labeled groups")
    p.add_argument("--embeddings", required=True, help="item_id<TAB>v1 v2 ... lines")
    p.add_argument("--labels", required=True, help="item_id<TAB>group_id lines")
    p.add_argument("--method", choices=("agnes", "kmeans"), default="agnes")
    p.add_argument("--threshold", type=float, default=0.35)
    p.add_argument("--linkage", choices=("average", "complete", "single"), default="average")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval_clustering)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
