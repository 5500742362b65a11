"""Topic title generation behind a pluggable generator interface.

A generator maps a product's serialized text to a two-phrase scene title.
Built-ins: nearest-neighbour retrieval over the training pairs and a
pattern-template fallback. The remote client posts the serialized input to
an external model endpoint.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import httpx
import numpy as np

from .catalog import LabeledPair, Product, TopicSource, TopicTitle, attribute_sequence
from .embedding import FeatureVocabulary, RefinementProjection, embed_title
from .errors import TransportError, ValidationError

MAX_INPUT_UNITS = 120
DEFAULT_BEAM_SIZE = 4
MAX_OUTPUT_UNITS = 20


@dataclass(frozen=True)
class GeneratorInput:
    """Serialized product text, truncated to a unit (code point) budget."""

    text: str
    max_units: int = MAX_INPUT_UNITS

    def __post_init__(self):
        if not self.text:
            raise ValidationError("generator input must be nonempty")
        if len(self.text) > self.max_units:
            object.__setattr__(self, "text", self.text[:self.max_units])


def serialize_input(product: Product, max_units: int = MAX_INPUT_UNITS) -> GeneratorInput:
    """Title, attribute pairs in catalog order, then OCR text, space-joined."""
    parts = [product.title]
    if product.attributes:
        parts.append(attribute_sequence(product.attributes))
    if product.ocr_text:
        parts.append(product.ocr_text)
    return GeneratorInput(text=" ".join(parts), max_units=max_units)


class Generator(Protocol):
    name: str

    def generate(self, product: Product) -> TopicTitle: ...


class RetrievalGenerator:
    """Returns the topic of the nearest training product by cosine similarity."""

    name = "retrieval"

    def __init__(self, training_pairs: Sequence[LabeledPair],
                 catalog: Mapping[str, Product],
                 vocab: FeatureVocabulary,
                 projection: RefinementProjection | None = None):
        positives = [p for p in training_pairs if p.label == 1]
        if not positives:
            raise ValueError("retrieval generator needs at least one positive pair")
        self._vocab = vocab
        self._projection = projection
        # Candidates sorted by (product id, title) so argmax ties resolve stably.
        self._candidates = sorted(
            positives, key=lambda p: (p.product_id, p.title.serialized()))
        self._matrix = np.stack([
            embed_title(serialize_input(catalog[p.product_id]).text, vocab, projection)
            for p in self._candidates
        ])

    def generate(self, product: Product) -> TopicTitle:
        query = embed_title(serialize_input(product).text, self._vocab, self._projection)
        sims = self._matrix @ query
        best = self._candidates[int(np.argmax(sims))]
        return TopicTitle(best.title.phrase_a, best.title.phrase_b, TopicSource.GENERATED)


def retrieval_generate(product: Product, training_pairs: Sequence[LabeledPair],
                       catalog: Mapping[str, Product], vocab: FeatureVocabulary,
                       projection: RefinementProjection | None = None) -> TopicTitle:
    return RetrievalGenerator(training_pairs, catalog, vocab, projection).generate(product)


def category_token(product: Product) -> str:
    """Token substituted into template phrases: the category attribute when
    present, else the first attribute value, else the product title."""
    for key, value in product.attributes:
        if key == "category":
            return value
    if product.attributes:
        return product.attributes[0][1]
    return product.title


class TemplateGenerator:
    """First pattern found in the title or any attribute value wins."""

    name = "template"

    def __init__(self, templates: Sequence[tuple[str, tuple[str, str]]]):
        if not templates:
            raise ValueError("template list must be nonempty")
        if not any(pattern == "" for pattern, _ in templates):
            raise ValueError("template list must include a catch-all (empty pattern)")
        self._templates = list(templates)

    def generate(self, product: Product) -> TopicTitle:
        haystacks = [product.title] + [v for _, v in product.attributes]
        token = category_token(product)
        for pattern, (phrase_a, phrase_b) in self._templates:
            if pattern == "" or any(pattern in text for text in haystacks):
                return TopicTitle(
                    phrase_a.replace("{category}", token),
                    phrase_b.replace("{category}", token),
                    TopicSource.GENERATED,
                )
        raise AssertionError("unreachable: catch-all pattern is mandatory")


def template_generate(product: Product,
                      templates: Sequence[tuple[str, tuple[str, str]]]) -> TopicTitle:
    return TemplateGenerator(templates).generate(product)


class RemoteGenerator:
    """HTTP client for an externally served generation model."""

    name = "remote"

    def __init__(self, endpoint: str, timeout: float = 10.0,
                 beam_size: int = DEFAULT_BEAM_SIZE, max_output: int = MAX_OUTPUT_UNITS):
        self.endpoint = endpoint
        self.timeout = timeout
        self.beam_size = beam_size
        self.max_output = max_output

    def generate(self, product: Product) -> TopicTitle:
        return remote_generate(serialize_input(product), self.endpoint, self.timeout,
                               self.beam_size, self.max_output)


def remote_generate(input: GeneratorInput, endpoint: str, timeout: float,
                    beam_size: int = DEFAULT_BEAM_SIZE,
                    max_output: int = MAX_OUTPUT_UNITS) -> TopicTitle:
    payload = {
        "input": input.text,
        "beam_size": beam_size,
        "max_output_length": max_output,
    }
    try:
        response = httpx.post(endpoint, json=payload, timeout=timeout)
    except httpx.HTTPError as exc:
        raise TransportError(f"generation request to {endpoint} failed: {exc}") from exc
    if response.status_code // 100 != 2:
        raise TransportError(
            f"generation endpoint returned status {response.status_code}")
    try:
        body = response.json()
        phrase_a, phrase_b = body["phrase_a"], body.get("phrase_b", "")
    except (ValueError, KeyError, TypeError) as exc:
        raise TransportError(f"malformed generation response: {exc}") from exc
    if not isinstance(phrase_a, str) or not phrase_a.strip():
        raise ValidationError("generated phrase_a is empty")
    if len(phrase_a) + len(phrase_b) > max_output:
        raise ValidationError(
            f"generated title has {len(phrase_a) + len(phrase_b)} units, limit {max_output}")
    return TopicTitle(phrase_a, phrase_b, TopicSource.GENERATED)


def generate_all(products: Sequence[Product], generator: Generator,
                 concurrency: int = 1) -> list[TopicTitle]:
    """One title per product, in product order; remote calls may overlap."""
    if concurrency <= 1:
        return [generator.generate(p) for p in products]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(generator.generate, products))
