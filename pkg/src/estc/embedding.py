"""Title and product-text embeddings.

The base provider is tf-idf bag-of-features over the engine tokenizer
(optionally extended with character bigrams). On top of it an unsupervised
contrastive refinement trains a linear projection: two feature-dropout views
of each title are positives for an in-batch InfoNCE loss over
temperature-scaled cosine similarity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .textmetrics import tokenize

EmbeddingVector = np.ndarray

_BIGRAM_PREFIX = "2g:"
_NORM_EPS = 1e-12


def feature_terms(text: str, char_bigrams: bool = False) -> list[str]:
    """Tokenizer features, optionally plus character bigrams of the token stream."""
    tokens = tokenize(text)
    if not char_bigrams:
        return tokens
    chars = "".join(tokens)
    return tokens + [f"{_BIGRAM_PREFIX}{chars[i:i + 2]}" for i in range(len(chars) - 1)]


@dataclass(frozen=True)
class FeatureVocabulary:
    index: dict[str, int]
    doc_frequency: dict[str, int]
    total_docs: int
    char_bigrams: bool = False

    @property
    def dim(self) -> int:
        return len(self.index)

    def idf(self, term: str) -> float:
        df = self.doc_frequency[term]
        return math.log((1 + self.total_docs) / (1 + df)) + 1.0


def fit_vocabulary(corpus: Sequence[str], max_dim: int,
                   char_bigrams: bool = False) -> FeatureVocabulary:
    """Rank terms by document frequency (ties lexicographic), keep max_dim."""
    if not corpus:
        raise ValueError("corpus must be nonempty")
    df: dict[str, int] = {}
    for doc in corpus:
        for term in set(feature_terms(doc, char_bigrams)):
            df[term] = df.get(term, 0) + 1
    if not df:
        raise ValueError("corpus produced no features")
    ranked = sorted(df, key=lambda t: (-df[t], t))[:max_dim]
    index = {term: i for i, term in enumerate(ranked)}
    return FeatureVocabulary(
        index=index,
        doc_frequency={t: df[t] for t in ranked},
        total_docs=len(corpus),
        char_bigrams=char_bigrams,
    )


def embed_bow(text: str, vocab: FeatureVocabulary) -> EmbeddingVector:
    """L2-normalized tf-idf vector; out-of-vocabulary terms are ignored."""
    vec = np.zeros(vocab.dim)
    for term in feature_terms(text, vocab.char_bigrams):
        i = vocab.index.get(term)
        if i is not None:
            vec[i] += vocab.idf(term)
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


# ---------------------------------------------------------------------------
# Contrastive refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RefinementConfig:
    dim_out: int = 128
    temperature: float = 0.05
    dropout_rate: float = 0.1
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-2
    seed: int = 0


@dataclass(frozen=True)
class RefinementProjection:
    matrix: np.ndarray  # dim_in x dim_out
    temperature: float
    seed: int
    epochs: int
    initial_loss: float
    final_loss: float

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("projection matrix has non-finite entries")

    @property
    def dim_in(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim_out(self) -> int:
        return self.matrix.shape[1]


def infonce_loss(weight: np.ndarray, anchors: np.ndarray, positives: np.ndarray,
                 temperature: float) -> float:
    return _infonce(weight, anchors, positives, temperature, with_grad=False)[0]


def infonce_loss_grad(weight: np.ndarray, anchors: np.ndarray, positives: np.ndarray,
                      temperature: float) -> tuple[float, np.ndarray]:
    return _infonce(weight, anchors, positives, temperature, with_grad=True)


def _infonce(weight, anchors, positives, temperature, with_grad):
    """In-batch InfoNCE over cosine similarity of projected view pairs.

    Row i of `anchors` and `positives` are two views of item i; all other
    rows in `positives` serve as negatives for anchor i.
    """
    n = anchors.shape[0]
    if n < 2:
        raise ValueError("InfoNCE needs at least 2 in-batch items")
    u = anchors @ weight
    v = positives @ weight
    nu = np.maximum(np.linalg.norm(u, axis=1), _NORM_EPS)
    nv = np.maximum(np.linalg.norm(v, axis=1), _NORM_EPS)
    un = u / nu[:, None]
    vn = v / nv[:, None]
    cos = un @ vn.T
    scaled = cos / temperature
    shift = scaled.max(axis=1, keepdims=True)
    log_probs = scaled - (shift + np.log(np.exp(scaled - shift).sum(axis=1, keepdims=True)))
    loss = float(-np.trace(log_probs) / n)
    if not with_grad:
        return loss, None
    softmax = np.exp(log_probs)
    g = (softmax - np.eye(n)) / (n * temperature)
    row_dot = (g * cos).sum(axis=1)
    col_dot = (g * cos).sum(axis=0)
    d_u = (g @ vn) / nu[:, None] - un * (row_dot / nu)[:, None]
    d_v = (g.T @ un) / nv[:, None] - vn * (col_dot / nv)[:, None]
    grad = anchors.T @ d_u + positives.T @ d_v
    return loss, grad


def _dropout(rng: np.random.Generator, x: np.ndarray, rate: float) -> np.ndarray:
    if rate <= 0:
        return x
    return x * (rng.random(x.shape) >= rate)


def _pca_init(base: np.ndarray, dim_out: int, rng: np.random.Generator) -> np.ndarray:
    """Leading principal directions of the base vectors, sign-fixed; columns
    beyond the data rank are filled with scaled Gaussian noise."""
    dim_in = base.shape[1]
    _, _, vt = np.linalg.svd(base, full_matrices=False)
    components = vt[:dim_out].T.copy()
    for col in range(components.shape[1]):
        pivot = int(np.argmax(np.abs(components[:, col])))
        if components[pivot, col] < 0:
            components[:, col] = -components[:, col]
    if components.shape[1] < dim_out:
        extra = rng.normal(0.0, 1.0 / math.sqrt(dim_in),
                           size=(dim_in, dim_out - components.shape[1]))
        components = np.hstack([components, extra])
    return components


def train_refinement(titles: Sequence[str], vocab: FeatureVocabulary,
                     config: RefinementConfig) -> RefinementProjection:
    """Fit the projection by SGD on the dropout-view InfoNCE objective.

    The projection starts from the principal directions of the base vectors
    (the stand-in for starting from a pretrained encoder) and is refined
    contrastively. Deterministic given the config seed. The returned matrix
    is the epoch snapshot with the lowest fixed-view evaluation loss, so the
    recorded final loss never exceeds the initial one.
    """
    if len(titles) < 2:
        raise ValueError("refinement needs at least 2 titles")
    if config.batch_size < 2:
        raise ValueError("batch_size must be >= 2 for in-batch negatives")
    rng = np.random.default_rng(config.seed)
    base = np.stack([embed_bow(t, vocab) for t in titles])
    n, dim_in = base.shape
    weight = _pca_init(base, config.dim_out, rng)

    # Fixed evaluation views: the configured dropout with frozen masks, so the
    # recorded loss is comparable across epochs. With dropout 0 the two views
    # coincide with the base vectors.
    eval_rng = np.random.default_rng(config.seed + 1)
    eval_anchors = _dropout(eval_rng, base, config.dropout_rate)
    eval_positives = _dropout(eval_rng, base, config.dropout_rate)

    def eval_loss(w: np.ndarray) -> float:
        return infonce_loss(w, eval_anchors, eval_positives, config.temperature)

    initial_loss = eval_loss(weight)
    best_loss = initial_loss
    best_weight = weight.copy()
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            if len(idx) < 2:
                continue
            anchors = _dropout(rng, base[idx], config.dropout_rate)
            positives = _dropout(rng, base[idx], config.dropout_rate)
            _, grad = infonce_loss_grad(weight, anchors, positives, config.temperature)
            weight -= config.learning_rate * grad
        epoch_loss = eval_loss(weight)
        if epoch_loss < best_loss:
            best_loss = epoch_loss
            best_weight = weight.copy()
    return RefinementProjection(
        matrix=best_weight,
        temperature=config.temperature,
        seed=config.seed,
        epochs=config.epochs,
        initial_loss=initial_loss,
        final_loss=best_loss,
    )


def embed_title(text: str, vocab: FeatureVocabulary,
                projection: RefinementProjection | None = None) -> EmbeddingVector:
    """Base bow vector, optionally projected, then L2-normalized."""
    vec = embed_bow(text, vocab)
    if projection is None:
        return vec
    if projection.dim_in != vocab.dim:
        raise ValueError(
            f"projection expects dim {projection.dim_in}, vocabulary has {vocab.dim}")
    out = vec @ projection.matrix
    norm = np.linalg.norm(out)
    return out / norm if norm > 0 else out


# ---------------------------------------------------------------------------
# Persistence and the pluggable word-vector provider
# ---------------------------------------------------------------------------

def save_projection(path: str | Path, projection: RefinementProjection) -> None:
    obj = {
        "dim_in": projection.dim_in,
        "dim_out": projection.dim_out,
        "temperature": projection.temperature,
        "seed": projection.seed,
        "epochs": projection.epochs,
        "initial_loss": projection.initial_loss,
        "final_loss": projection.final_loss,
        "matrix": [float(x) for x in projection.matrix.reshape(-1)],
    }
    Path(path).write_text(json.dumps(obj), encoding="utf-8")


def load_projection(path: str | Path) -> RefinementProjection:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    matrix = np.array(obj["matrix"]).reshape(obj["dim_in"], obj["dim_out"])
    return RefinementProjection(
        matrix=matrix,
        temperature=obj["temperature"],
        seed=obj["seed"],
        epochs=obj["epochs"],
        initial_loss=obj["initial_loss"],
        final_loss=obj["final_loss"],
    )


def save_vocabulary(path: str | Path, vocab: FeatureVocabulary) -> None:
    terms = sorted(vocab.index, key=vocab.index.get)
    obj = {
        "terms": terms,
        "doc_frequency": [vocab.doc_frequency[t] for t in terms],
        "total_docs": vocab.total_docs,
        "char_bigrams": vocab.char_bigrams,
    }
    Path(path).write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")


def load_vocabulary(path: str | Path) -> FeatureVocabulary:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return FeatureVocabulary(
        index={t: i for i, t in enumerate(obj["terms"])},
        doc_frequency=dict(zip(obj["terms"], obj["doc_frequency"])),
        total_docs=obj["total_docs"],
        char_bigrams=obj["char_bigrams"],
    )


def load_word_vectors(path: str | Path) -> dict[str, np.ndarray]:
    """Read 'token v1 v2 ... vd' lines; all rows must share one dimension."""
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            if len(values) != dim or dim == 0:
                raise ValueError(f"word-vector line {lineno} has {len(values)} values, expected {dim}")
            vectors[token] = np.array([float(v) for v in values])
    return vectors


def embed_word_average(text: str, vectors: Mapping[str, np.ndarray]) -> EmbeddingVector:
    """Mean of known token vectors, L2-normalized; no known tokens -> zeros."""
    if not vectors:
        raise ValueError("word-vector table is empty")
    dim = len(next(iter(vectors.values())))
    hits = [vectors[t] for t in tokenize(text) if t in vectors]
    if not hits:
        return np.zeros(dim)
    mean = np.mean(hits, axis=0)
    norm = np.linalg.norm(mean)
    return mean / norm if norm > 0 else mean
