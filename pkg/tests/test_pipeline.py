import json

import pytest

from estc.errors import DataError
from estc.pipeline import (DEFAULT_TEMPLATES, PipelineConfig, load_config,
                           load_templates, run_pipeline)
from estc.store import ChannelStore
from estc.synthdata import write_demo_files


@pytest.fixture(scope="module")
def demo_files(tmp_path_factory):
    directory = tmp_path_factory.mktemp("demo")
    return write_demo_files(directory, n=50, seed=13)


def _config(demo_files, store_path, **overrides) -> PipelineConfig:
    values = dict(
        catalog_path=str(demo_files["catalog"]),
        topics_path=str(demo_files["topics"]),
        store_path=str(store_path),
        seed=42,
        embedding_max_dim=2048,
        embedding_dim_out=64,
        embedding_epochs=8,
    )
    values.update(overrides)
    return PipelineConfig(**values)


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

def test_load_config_key_value_format(tmp_path, demo_files):
    text = "\n".join([
        "# demo configuration",
        f'catalog = "{demo_files["catalog"]}"',
        f"topics = {demo_files['topics']}",
        "store = store.jsonl",
        "seed = 42",
        "agnes_threshold = 0.4",
        "embedding_char_bigrams = true",
        "generator = retrieval",
    ])
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    config = load_config(path)
    assert config.seed == 42
    assert config.agnes_threshold == 0.4
    assert config.embedding_char_bigrams is True
    assert config.store_path == str(tmp_path / "store.jsonl")  # resolved relative


def test_load_config_json_format(tmp_path, demo_files):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({
        "catalog": str(demo_files["catalog"]),
        "topics": str(demo_files["topics"]),
        "store": "s.jsonl",
        "seed": 7,
    }), encoding="utf-8")
    config = load_config(path)
    assert config.seed == 7
    assert config.catalog_path == str(demo_files["catalog"])


def test_load_config_requires_seed(tmp_path, demo_files):
    path = tmp_path / "run.toml"
    path.write_text(f"catalog = {demo_files['catalog']}\n"
                    f"topics = {demo_files['topics']}\nstore = s.jsonl\n",
                    encoding="utf-8")
    with pytest.raises(DataError, match="seed"):
        load_config(path)


def test_load_config_rejects_unknown_keys(tmp_path, demo_files):
    path = tmp_path / "run.toml"
    path.write_text("seed = 1\nstore = s\ncatalog = c\ntopics = t\ntypo_key = 3\n",
                    encoding="utf-8")
    with pytest.raises(DataError, match="typo_key"):
        load_config(path)


def test_load_config_seed_override(tmp_path, demo_files):
    path = tmp_path / "run.toml"
    path.write_text(f"catalog = {demo_files['catalog']}\n"
                    f"topics = {demo_files['topics']}\nstore = s.jsonl\nseed = 1\n",
                    encoding="utf-8")
    assert load_config(path, {"seed": 99}).seed == 99


def test_load_templates(tmp_path):
    path = tmp_path / "templates.jsonl"
    path.write_text(json.dumps({"pattern": "帐篷", "phrase_a": "露营", "phrase_b": "好物"})
                    + "\n" + json.dumps({"pattern": "", "phrase_a": "兜底"}) + "\n",
                    encoding="utf-8")
    templates = load_templates(path)
    assert templates == [("帐篷", ("露营", "好物")), ("", ("兜底", ""))]


def test_default_templates_have_catch_all():
    assert any(pattern == "" for pattern, _ in DEFAULT_TEMPLATES)


# ---------------------------------------------------------------------------
# Pipeline runs
# ---------------------------------------------------------------------------

def test_run_creates_pending_channels(tmp_path, demo_files):
    config = _config(demo_files, tmp_path / "store.jsonl")
    summary = run_pipeline(config, clock=lambda: 500.0)
    assert summary.channels_created >= 1
    assert summary.products == 50
    assert summary.channels_created + summary.duplicates_skipped + \
        summary.clusters_rejected == summary.clusters
    assert set(summary.timings) >= {"load", "augment", "train", "generate",
                                    "encode", "cluster", "qc", "store"}
    store = ChannelStore(config.store_path)
    assert all(c.status.value == "pending" for c in store.channels())


def test_run_retrieval_dr_is_zero(tmp_path, demo_files):
    config = _config(demo_files, tmp_path / "store.jsonl")
    summary = run_pipeline(config, clock=lambda: 500.0)
    assert summary.dr == 0.0  # retrieval can only emit seen titles


def test_run_empty_catalog_aborts_before_store(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    topics = tmp_path / "topics.jsonl"
    topics.write_text("", encoding="utf-8")
    store_path = tmp_path / "store.jsonl"
    config = PipelineConfig(catalog_path=str(empty), topics_path=str(topics),
                            store_path=str(store_path), seed=1)
    with pytest.raises(DataError):
        run_pipeline(config)
    assert not store_path.exists()


def test_run_is_deterministic(tmp_path, demo_files):
    config_a = _config(demo_files, tmp_path / "a.jsonl")
    config_b = _config(demo_files, tmp_path / "b.jsonl")
    summary_a = run_pipeline(config_a, clock=lambda: 1.0)
    summary_b = run_pipeline(config_b, clock=lambda: 1.0)
    assert (tmp_path / "a.jsonl").read_text() == (tmp_path / "b.jsonl").read_text()
    assert summary_a.channels_created == summary_b.channels_created
    assert summary_a.dr == summary_b.dr


def test_rerun_same_store_is_idempotent(tmp_path, demo_files):
    config = _config(demo_files, tmp_path / "store.jsonl")
    first = run_pipeline(config, clock=lambda: 1.0)
    second = run_pipeline(config, clock=lambda: 2.0)
    assert first.channels_created >= 1
    assert second.channels_created == 0
    assert second.duplicates_skipped == first.channels_created


def test_run_with_template_generator(tmp_path, demo_files):
    config = _config(demo_files, tmp_path / "store.jsonl", generator="template")
    summary = run_pipeline(config, clock=lambda: 1.0)
    assert summary.dr >= 0.0
    assert summary.clusters >= 1


def test_run_persists_models(tmp_path, demo_files):
    models_dir = tmp_path / "models"
    config = _config(demo_files, tmp_path / "store.jsonl",
                     models_dir=str(models_dir))
    run_pipeline(config, clock=lambda: 1.0)
    for name in ("vocabulary.json", "projection.json", "coherence.json",
                 "correlation.json", "augment.json"):
        assert (models_dir / name).exists()
