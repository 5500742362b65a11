"""End-to-end scheduled run: configuration, stage wiring, and the summary.

Stage order mirrors the deployed workflow: augment the training pairs,
refresh the embedding and filter models, generate a title per product,
encode, cluster, quality-control, then stage the surviving channels as
pending review items. Any stage failure aborts before the store is touched.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from . import augmentation, qc
from .catalog import (LabeledPair, PairOrigin, Product, load_catalog, load_topics)
from .clustering import agnes, attach_titles
from .embedding import (FeatureVocabulary, RefinementConfig, embed_title,
                        fit_vocabulary, save_projection, save_vocabulary,
                        train_refinement)
from .errors import DataError
from .linear import TrainConfig, save_classifier
from .qc import AssemblyConfig, assemble_channels, make_coherence_scorer, make_correlation_scorer
from .store import ChannelStore
from .textmetrics import difference_rate
from .topicgen import (RemoteGenerator, RetrievalGenerator, TemplateGenerator,
                       generate_all)

DEFAULT_TEMPLATES: list[tuple[str, tuple[str, str]]] = [
    ("t恤", ("清凉一夏", "精选{category}")),
    ("露营", ("快乐露营", "户外欢乐时光")),
    ("礼", ("送礼好物", "为爱精挑细选")),
    ("", ("精选好物", "品质{category}推荐")),
]


@dataclass(frozen=True)
class PipelineConfig:
    catalog_path: str
    topics_path: str
    store_path: str
    seed: int
    models_dir: str | None = None
    generator: str = "retrieval"
    remote_endpoint: str = ""
    remote_timeout: float = 10.0
    remote_concurrency: int = 8
    templates_path: str | None = None
    embedding_max_dim: int = 4096
    embedding_char_bigrams: bool = True
    embedding_dim_out: int = 128
    embedding_temperature: float = 0.05
    embedding_dropout: float = 0.1
    embedding_epochs: int = 20
    embedding_batch_size: int = 32
    embedding_learning_rate: float = 1e-2
    agnes_threshold: float = 0.35
    agnes_linkage: str = "average"
    coherence_threshold: float = 0.5
    correlation_threshold: float = 0.5
    min_products: int = 3
    augment_threshold: float = 0.9
    classifier_epochs: int = 400
    classifier_learning_rate: float = 3.0
    classifier_batch_size: int = 16

    def refinement_config(self) -> RefinementConfig:
        return RefinementConfig(
            dim_out=self.embedding_dim_out,
            temperature=self.embedding_temperature,
            dropout_rate=self.embedding_dropout,
            epochs=self.embedding_epochs,
            batch_size=self.embedding_batch_size,
            learning_rate=self.embedding_learning_rate,
            seed=self.seed,
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            epochs=self.classifier_epochs,
            learning_rate=self.classifier_learning_rate,
            batch_size=self.classifier_batch_size,
        )

    def assembly_config(self) -> AssemblyConfig:
        return AssemblyConfig(
            coherence_threshold=self.coherence_threshold,
            correlation_threshold=self.correlation_threshold,
            min_products=self.min_products,
        )


_KEY_ALIASES = {
    "catalog": "catalog_path",
    "topics": "topics_path",
    "store": "store_path",
}

_PATH_KEYS = ("catalog_path", "topics_path", "store_path", "models_dir", "templates_path")


def _coerce(raw: str):
    text = raw.strip()
    if (text.startswith('"') and text.endswith('"')) or \
       (text.startswith("'") and text.endswith("'")):
        return text[1:-1]
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    """Read a JSON object or flat `key = value` file into a PipelineConfig.

    Relative paths resolve against the config file's directory; the seed is
    mandatory.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    values: dict = {}
    stripped = text.lstrip()
    if stripped.startswith("{"):
        values.update(json.loads(text))
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"config line {lineno} is not `key = value`: {line!r}")
            key, raw = line.split("=", 1)
            values[key.strip()] = _coerce(raw)
    values = {_KEY_ALIASES.get(k, k): v for k, v in values.items()}
    if overrides:
        values.update(overrides)
    known = set(PipelineConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in values:
        raise DataError("config must set a seed")
    for key in ("catalog_path", "topics_path", "store_path"):
        if key not in values:
            raise DataError(f"config must set {key}")
    config = PipelineConfig(**values)
    resolved = {
        key: str((path.parent / value).resolve())
        for key in _PATH_KEYS
        if (value := getattr(config, key)) and not Path(value).is_absolute()
    }
    return replace(config, **resolved) if resolved else config


def load_templates(path: str | Path) -> list[tuple[str, tuple[str, str]]]:
    templates = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            templates.append((obj["pattern"], (obj["phrase_a"], obj.get("phrase_b", ""))))
    return templates


@dataclass
class RunSummary:
    channels_created: int
    clusters_rejected: int
    dr: float
    timings: dict[str, float] = field(default_factory=dict)
    products: int = 0
    training_pairs: int = 0
    augmented_pairs: int = 0
    clusters: int = 0
    duplicates_skipped: int = 0

    def to_json(self) -> dict:
        return {
            "channels_created": self.channels_created,
            "clusters_rejected": self.clusters_rejected,
            "dr": self.dr,
            "timings": self.timings,
            "products": self.products,
            "training_pairs": self.training_pairs,
            "augmented_pairs": self.augmented_pairs,
            "clusters": self.clusters,
            "duplicates_skipped": self.duplicates_skipped,
        }


def _build_generator(config: PipelineConfig, pairs: list[LabeledPair],
                     catalog: dict[str, Product], vocab: FeatureVocabulary, projection):
    if config.generator == "retrieval":
        return RetrievalGenerator(pairs, catalog, vocab, projection), 1
    if config.generator == "template":
        templates = (load_templates(config.templates_path)
                     if config.templates_path else DEFAULT_TEMPLATES)
        return TemplateGenerator(templates), 1
    if config.generator == "remote":
        if not config.remote_endpoint:
            raise DataError("remote generator requires remote_endpoint")
        return (RemoteGenerator(config.remote_endpoint, config.remote_timeout),
                config.remote_concurrency)
    raise DataError(f"unknown generator {config.generator!r}")


def run_pipeline(config: PipelineConfig,
                 clock: Callable[[], float] = time.time) -> RunSummary:
    """Execute one scheduled construction run against the configured store."""
    timings: dict[str, float] = {}

    def timed(stage: str):
        start = time.perf_counter()
        return lambda: timings.__setitem__(stage, time.perf_counter() - start)

    done = timed("load")
    products = load_catalog(config.catalog_path)
    if not products:
        raise DataError(f"catalog {config.catalog_path} is empty")
    catalog = {p.id: p for p in products}
    pairs = load_topics(config.topics_path, products)
    done()

    # Shared sparse feature space over everything the run will embed.
    done = timed("vocabulary")
    corpus = ([p.title for p in products]
              + [f"{k} {v}" for p in products for k, v in p.attributes]
              + [p.ocr_text for p in products if p.ocr_text]
              + [pair.title.serialized() for pair in pairs])
    vocab = fit_vocabulary(corpus, config.embedding_max_dim, config.embedding_char_bigrams)
    done()

    done = timed("augment")
    ocr_candidates = [(p, p.ocr_text) for p in products if p.ocr_text.strip()]
    pos_pairs = [(catalog[pair.product_id], pair.title) for pair in pairs]
    augmented = 0
    if ocr_candidates and pos_pairs:
        miner = augmentation.train_augment_classifier(
            pos_pairs, ocr_candidates, vocab, config=config.train_config())
        report = augmentation.mine_candidates(
            miner, ocr_candidates, config.augment_threshold, vocab)
        merged = augmentation.merge_promoted(pairs, report)
        augmented = len(merged) - len(pairs)
        pairs = merged
    else:
        miner = None
    done()

    done = timed("train")
    training_titles = sorted({pair.title.serialized() for pair in pairs})
    projection = train_refinement(training_titles, vocab, config.refinement_config())
    online = [pair for pair in pairs if pair.origin == PairOrigin.ONLINE_POSITIVE]
    coherence_model = qc.train_coherence(
        [pair.title for pair in online], vocab, projection, config.train_config())
    correlation_model = qc.train_correlation(
        [(catalog[pair.product_id], pair.title) for pair in online],
        vocab, projection, config=config.train_config())
    done()

    done = timed("generate")
    generator, concurrency = _build_generator(config, pairs, catalog, vocab, projection)
    generated = generate_all(products, generator, concurrency)
    done()

    done = timed("encode")
    vectors = [embed_title(t.serialized(), vocab, projection) for t in generated]
    done()

    done = timed("cluster")
    raw_clusters = agnes(vectors, config.agnes_threshold, config.agnes_linkage)
    clusters = attach_titles(raw_clusters, [p.id for p in products], generated)
    done()

    done = timed("qc")
    channels, rejected = assemble_channels(
        clusters,
        make_coherence_scorer(coherence_model, vocab, projection),
        make_correlation_scorer(correlation_model, vocab, projection),
        catalog,
        config.assembly_config(),
        clock,
    )
    done()

    done = timed("store")
    store = ChannelStore(config.store_path, config.min_products, clock)
    with store.lease():
        created = store.add_channels(channels)
    done()

    if config.models_dir:
        models_dir = Path(config.models_dir)
        models_dir.mkdir(parents=True, exist_ok=True)
        save_vocabulary(models_dir / "vocabulary.json", vocab)
        save_projection(models_dir / "projection.json", projection)
        save_classifier(models_dir / "coherence.json", coherence_model)
        save_classifier(models_dir / "correlation.json", correlation_model)
        if miner is not None:
            save_classifier(models_dir / "augment.json", miner)

    dr = difference_rate(generated, [pair.title for pair in pairs])
    return RunSummary(
        channels_created=created,
        clusters_rejected=len(rejected),
        dr=dr,
        timings=timings,
        products=len(products),
        training_pairs=len(pairs),
        augmented_pairs=augmented,
        clusters=len(clusters),
        duplicates_skipped=len(channels) - created,
    )
