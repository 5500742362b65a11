"""Weakly supervised mining of new product-topic pairs from OCR side text.

A binary classifier learns to separate true product-topic pairs from
product-OCR pairs; OCR candidates the trained model scores highly are
promoted into the training set as augmented pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .catalog import (DEFAULT_PROFILE_VOCAB, LabeledPair, PairOrigin, Product,
                      ProfileVocabulary, TopicSource, TopicTitle)
from .embedding import FeatureVocabulary, RefinementProjection
from .linear import LinearClassifier, TrainConfig, train_logistic
from .qc import embedding_dim, featurize_pair, pair_feature_layout


@dataclass(frozen=True)
class AugmentationReport:
    candidates_scored: int
    promoted: int
    threshold: float
    promoted_pairs: tuple[LabeledPair, ...]

    def __post_init__(self):
        if self.promoted > self.candidates_scored:
            raise ValueError("promoted count exceeds scored count")


def train_augment_classifier(positives: Sequence[tuple[Product, TopicTitle]],
                             negatives: Sequence[tuple[Product, str]],
                             vocab: FeatureVocabulary,
                             projection: RefinementProjection | None = None,
                             profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB,
                             config: TrainConfig = TrainConfig()) -> LinearClassifier:
    """Positive pairs against product-OCR pairs, OCR text in the title slot."""
    if not positives:
        raise ValueError("need at least one positive product-topic pair")
    if not negatives:
        raise ValueError("need at least one product-OCR negative")
    pos = sorted(positives, key=lambda pt: (pt[0].id, pt[1].serialized()))
    neg = sorted(negatives, key=lambda po: (po[0].id, po[1]))
    features = np.stack(
        [featurize_pair(p, t.serialized(), vocab, projection, profile_vocab) for p, t in pos]
        + [featurize_pair(p, ocr, vocab, projection, profile_vocab) for p, ocr in neg]
    )
    labels = [1] * len(pos) + [0] * len(neg)
    layout = pair_feature_layout(embedding_dim(vocab, projection), profile_vocab)
    return train_logistic(features, labels, layout, config)


def ocr_to_title(ocr_text: str) -> TopicTitle:
    """Split at the first delimiter if present, else the whole text is phrase_a."""
    return TopicTitle.parse(ocr_text, source=TopicSource.MINED)


def mine_candidates(model: LinearClassifier,
                    candidates: Sequence[tuple[Product, str]],
                    threshold: float,
                    vocab: FeatureVocabulary,
                    projection: RefinementProjection | None = None,
                    profile_vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> AugmentationReport:
    """Score every product-OCR candidate; promote those at or above threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    promoted: list[LabeledPair] = []
    for product, ocr_text in candidates:
        score = model.score(featurize_pair(product, ocr_text, vocab, projection, profile_vocab))
        if score >= threshold:
            promoted.append(LabeledPair(
                product_id=product.id,
                title=ocr_to_title(ocr_text),
                label=1,
                origin=PairOrigin.AUGMENTED,
            ))
    return AugmentationReport(
        candidates_scored=len(candidates),
        promoted=len(promoted),
        threshold=threshold,
        promoted_pairs=tuple(promoted),
    )


def merge_promoted(existing: Sequence[LabeledPair],
                   report: AugmentationReport) -> list[LabeledPair]:
    """Append promoted pairs, never displacing an existing (product, title)."""
    merged = list(existing)
    seen = {(p.product_id, p.title.normalized()) for p in existing}
    for pair in report.promoted_pairs:
        key = (pair.product_id, pair.title.normalized())
        if key not in seen:
            seen.add(key)
            merged.append(pair)
    return merged
