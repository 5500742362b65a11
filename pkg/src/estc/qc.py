"""Quality control: coherence and correlation classifiers, channel assembly.

Negative training data is synthesized from clean titles by two corruption
procedures (span repetition, tail truncation). Classifier heads are logistic
models over embedding features; assembled clusters that survive both filters
become pending channels.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from .catalog import Product, ProfileVocabulary, DEFAULT_PROFILE_VOCAB, TopicTitle
from .clustering import Cluster
from .embedding import FeatureVocabulary, RefinementProjection, embed_title
from .linear import FeatureLayout, LinearClassifier, TrainConfig, train_logistic
from .textmetrics import tokenize
from .topicgen import serialize_input

CoherenceScorer = Callable[[TopicTitle], float]
CorrelationScorer = Callable[[Product, TopicTitle], float]


def title_token_split(title: TopicTitle) -> tuple[list[str], int]:
    """Token sequence of both phrases plus the phrase-boundary index."""
    a = tokenize(title.phrase_a)
    b = tokenize(title.phrase_b)
    return a + b, len(a)


def _rebuild_title(tokens: list[str], boundary: int, source) -> TopicTitle:
    boundary = min(boundary, len(tokens))
    if boundary == 0:
        boundary = len(tokens)
    return TopicTitle(
        phrase_a=" ".join(tokens[:boundary]),
        phrase_b=" ".join(tokens[boundary:]),
        source=source,
    )


# ---------------------------------------------------------------------------
# Synthesized negatives
# ---------------------------------------------------------------------------

def apply_repetition(tokens: Sequence[str], span_len: int, position: int,
                     repeats: int) -> list[str]:
    """Insert `repeats` copies of the span immediately after it."""
    span = list(tokens[position:position + span_len])
    if len(span) != span_len:
        raise ValueError(f"span at {position} exceeds sequence of {len(tokens)} tokens")
    cut = position + span_len
    return list(tokens[:cut]) + span * repeats + list(tokens[cut:])


def synth_repetition_negative(title: TopicTitle, rng_seed: int) -> TopicTitle:
    """Repeat a uniformly chosen unigram or bigram once or twice."""
    tokens, boundary = title_token_split(title)
    if len(tokens) < 2:
        raise ValueError("repetition negative needs a title of at least 2 tokens")
    rng = random.Random(rng_seed)
    span_len = 1 if rng.random() < 0.5 else 2
    position = rng.randrange(len(tokens) - span_len + 1)
    repeats = 1 if rng.random() < 0.5 else 2
    corrupted = apply_repetition(tokens, span_len, position, repeats)
    if position + span_len <= boundary:
        boundary += span_len * repeats
    return _rebuild_title(corrupted, boundary, title.source)


def synth_incomplete_negative(title: TopicTitle, rng_seed: int) -> TopicTitle:
    """Drop the last two unigrams or the last two bigrams."""
    tokens, boundary = title_token_split(title)
    if len(tokens) < 5:
        raise ValueError("incomplete negative needs a title of at least 5 tokens")
    rng = random.Random(rng_seed)
    removed = 2 if rng.random() < 0.5 else 4
    return _rebuild_title(tokens[:-removed], boundary, title.source)


# ---------------------------------------------------------------------------
# Feature extraction
# ---------------------------------------------------------------------------

def max_adjacent_repetition(tokens: Sequence[str], n: int) -> int:
    """Longest run of an immediately repeating n-gram (1 = no repetition)."""
    if len(tokens) < n:
        return 0
    best = 1
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i:i + n])
        run = 1
        j = i + n
        while tuple(tokens[j:j + n]) == gram:
            run += 1
            j += n
        best = max(best, run)
    return best


def embedding_dim(vocab: FeatureVocabulary,
                  projection: RefinementProjection | None = None) -> int:
    return projection.dim_out if projection is not None else vocab.dim


def coherence_feature_layout(dim: int) -> FeatureLayout:
    return (
        ("title_embedding", dim),
        ("repetition_unigram", 1),
        ("repetition_bigram", 1),
        ("token_length", 1),
        ("type_token_ratio", 1),
    )


def featurize_title(title: TopicTitle, vocab: FeatureVocabulary,
                    projection: RefinementProjection | None = None) -> np.ndarray:
    tokens, _ = title_token_split(title)
    embedding = embed_title(title.serialized(), vocab, projection)
    rep1 = max_adjacent_repetition(tokens, 1)
    rep2 = max_adjacent_repetition(tokens, 2)
    ttr = len(set(tokens)) / len(tokens) if tokens else 0.0
    scalars = np.array([
        float(max(rep1 - 1, 0)),
        float(max(rep2 - 1, 0)),
        len(tokens) / 10.0,
        ttr,
    ])
    return np.concatenate([embedding, scalars])


def pair_feature_layout(dim: int, profile_vocab: ProfileVocabulary) -> FeatureLayout:
    return (
        ("product_embedding", dim),
        ("title_embedding", dim),
        ("interaction", dim),
        ("profile", profile_vocab.size),
    )


def featurize_pair(product: Product, title_text: str, vocab: FeatureVocabulary,
                   projection: RefinementProjection | None = None,
                   profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> np.ndarray:
    """Product text and title embeddings, their elementwise product, and the
    one-hot profile block (its weights realize the learned profile encoding)."""
    product_vec = embed_title(serialize_input(product).text, vocab, projection)
    title_vec = embed_title(title_text, vocab, projection)
    one_hot = np.zeros(profile_vocab.size)
    names = profile_vocab.one_hot_layout()
    for fld in ("age", "gender", "season"):
        one_hot[names.index(f"{fld}={getattr(product.profile, fld)}")] = 1.0
    return np.concatenate([product_vec, title_vec, product_vec * title_vec, one_hot])


# ---------------------------------------------------------------------------
# Classifier training
# ---------------------------------------------------------------------------

def synthesize_negatives(positives: Sequence[TopicTitle], seed: int) -> list[TopicTitle]:
    """Corrupt every eligible positive with both procedures, then downsample
    to exactly the positive count."""
    ordered = sorted(positives, key=lambda t: t.serialized())
    rng = np.random.default_rng(seed)
    pool: list[TopicTitle] = []
    for title in ordered:
        n_tokens = len(title_token_split(title)[0])
        if n_tokens >= 2:
            pool.append(synth_repetition_negative(title, int(rng.integers(2 ** 31))))
        if n_tokens >= 5:
            pool.append(synth_incomplete_negative(title, int(rng.integers(2 ** 31))))
    if len(pool) < len(positives):
        raise ValueError(
            f"only {len(pool)} synthesizable negatives for {len(positives)} positives")
    keep = rng.choice(len(pool), size=len(positives), replace=False)
    return [pool[i] for i in sorted(keep)]


def train_coherence(positives: Sequence[TopicTitle], vocab: FeatureVocabulary,
                    projection: RefinementProjection | None = None,
                    config: TrainConfig = TrainConfig()) -> LinearClassifier:
    if len(positives) < 10:
        raise ValueError(f"need at least 10 positive titles, got {len(positives)}")
    negatives = synthesize_negatives(positives, config.seed)
    titles = list(positives) + negatives
    labels = [1] * len(positives) + [0] * len(negatives)
    features = np.stack([featurize_title(t, vocab, projection) for t in titles])
    layout = coherence_feature_layout(embedding_dim(vocab, projection))
    return train_logistic(features, labels, layout, config)


def score_coherence(model: LinearClassifier, title: TopicTitle, vocab: FeatureVocabulary,
                    projection: RefinementProjection | None = None) -> float:
    return model.score(featurize_title(title, vocab, projection))


def sample_mismatches(positives: Sequence[tuple[Product, TopicTitle]],
                      seed: int) -> list[tuple[Product, TopicTitle]]:
    """Seed-determined mismatched (product, title) pairs, one per positive.

    Titles are deranged against the positives, so every title serves as a
    negative exactly once and no product keeps its own (or any true) title;
    collisions are repaired by pairwise swaps.
    """
    ordered = sorted(positives, key=lambda pt: (pt[0].id, pt[1].serialized()))
    truths = {(p.id, t.serialized()) for p, t in ordered}
    if len({t.serialized() for _, t in ordered}) < 2:
        raise ValueError("mismatch sampling needs at least 2 distinct titles")
    rng = np.random.default_rng(seed)
    n = len(ordered)
    perm = list(rng.permutation(n))

    def valid(i: int, j: int) -> bool:
        product, own = ordered[i]
        title = ordered[j][1]
        return (title.serialized() != own.serialized()
                and (product.id, title.serialized()) not in truths)

    for i in range(n):
        if valid(i, perm[i]):
            continue
        for k in range(n):
            if k != i and valid(i, perm[k]) and valid(k, perm[i]):
                perm[i], perm[k] = perm[k], perm[i]
                break
        else:
            raise ValueError(
                f"no valid mismatch for product {ordered[i][0].id!r}")
    return [(ordered[i][0], ordered[perm[i]][1]) for i in range(n)]


def train_correlation(positives: Sequence[tuple[Product, TopicTitle]],
                      vocab: FeatureVocabulary,
                      projection: RefinementProjection | None = None,
                      profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB,
                      config: TrainConfig = TrainConfig()) -> LinearClassifier:
    if len(positives) < 10:
        raise ValueError(f"need at least 10 positive pairs, got {len(positives)}")
    negatives = sample_mismatches(positives, config.seed)
    ordered = sorted(positives, key=lambda pt: (pt[0].id, pt[1].serialized()))
    pairs = ordered + negatives
    labels = [1] * len(ordered) + [0] * len(negatives)
    features = np.stack([
        featurize_pair(p, t.serialized(), vocab, projection, profile_vocab)
        for p, t in pairs
    ])
    layout = pair_feature_layout(embedding_dim(vocab, projection), profile_vocab)
    return train_logistic(features, labels, layout, config)


def score_correlation(model: LinearClassifier, product: Product, title: TopicTitle,
                      vocab: FeatureVocabulary,
                      projection: RefinementProjection | None = None,
                      profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> float:
    return model.score(featurize_pair(product, title.serialized(), vocab, projection, profile_vocab))


def make_coherence_scorer(model: LinearClassifier, vocab: FeatureVocabulary,
                          projection: RefinementProjection | None = None) -> CoherenceScorer:
    return lambda title: score_coherence(model, title, vocab, projection)


def make_correlation_scorer(model: LinearClassifier, vocab: FeatureVocabulary,
                            projection: RefinementProjection | None = None,
                            profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> CorrelationScorer:
    return lambda product, title: score_correlation(
        model, product, title, vocab, projection, profile_vocab)


# ---------------------------------------------------------------------------
# Channel assembly
# ---------------------------------------------------------------------------

class ChannelStatus(str, Enum):
    PENDING = "pending"
    PUBLISHED = "published"
    REJECTED = "rejected"


@dataclass
class Channel:
    channel_id: str
    title: TopicTitle
    title_candidates: list[tuple[TopicTitle, float]]
    products: list[tuple[str, float]]
    status: ChannelStatus
    created_at: float

    def __post_init__(self):
        if not self.products:
            raise ValueError(f"channel {self.channel_id} has no products")


@dataclass(frozen=True)
class RejectedCluster:
    member_ids: tuple[str, ...]
    reason: str  # "incoherent" | "too_few_products"
    best_coherence: float


@dataclass(frozen=True)
class AssemblyConfig:
    coherence_threshold: float = 0.5
    correlation_threshold: float = 0.5
    min_products: int = 3


def channel_content_id(title: TopicTitle, product_ids: Sequence[str]) -> str:
    payload = title.normalized() + "\n" + "\n".join(sorted(product_ids))
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


def assemble_channels(clusters: Sequence[Cluster],
                      coherence_scorer: CoherenceScorer,
                      correlation_scorer: CorrelationScorer,
                      catalog: Mapping[str, Product],
                      config: AssemblyConfig = AssemblyConfig(),
                      clock: Callable[[], float] = time.time,
                      ) -> tuple[list[Channel], list[RejectedCluster]]:
    """Filter clusters into pending channels.

    Per cluster: the most coherent distinct candidate becomes the title unless
    every candidate falls below the coherence threshold; products whose
    correlation with the chosen title falls below the correlation threshold
    are dropped; too-small survivors reject the cluster.
    """
    channels: list[Channel] = []
    rejected: list[RejectedCluster] = []
    for cluster in clusters:
        distinct: dict[str, TopicTitle] = {}
        for candidate in cluster.title_candidates:
            distinct.setdefault(candidate.normalized(), candidate)
        scored = sorted(
            ((title, coherence_scorer(title)) for title in distinct.values()),
            key=lambda ts: (-ts[1], ts[0].serialized()),
        )
        member_ids = tuple(str(m) for m in cluster.member_ids)
        if not scored or scored[0][1] < config.coherence_threshold:
            rejected.append(RejectedCluster(
                member_ids=member_ids,
                reason="incoherent",
                best_coherence=scored[0][1] if scored else 0.0,
            ))
            continue
        chosen = scored[0][0]
        retained = []
        for pid in member_ids:
            score = correlation_scorer(catalog[pid], chosen)
            if score >= config.correlation_threshold:
                retained.append((pid, score))
        if len(retained) < config.min_products:
            rejected.append(RejectedCluster(
                member_ids=member_ids,
                reason="too_few_products",
                best_coherence=scored[0][1],
            ))
            continue
        channels.append(Channel(
            channel_id=channel_content_id(chosen, [pid for pid, _ in retained]),
            title=chosen,
            title_candidates=scored,
            products=retained,
            status=ChannelStatus.PENDING,
            created_at=clock(),
        ))
    return channels, rejected
