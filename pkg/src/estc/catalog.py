"""Domain data model, catalog/topic ingestion, and pretraining corpus builders.

Catalog records arrive as JSONL (one product object per line). Topic records
pair a product id with a two-phrase scene title. The two corpus builders emit
the in-domain pretraining objectives: title/attribute consistency
classification and shuffled-copywriting reordering.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

# Two-phrase titles are stored as "phrase_a @ phrase_b".
PHRASE_DELIMITER = "@"

# Boundary between title and attribute sequence in consistency examples.
FIELD_SEP = "[SEP]"

# Copywriting is split into pieces at these marks (ASCII and full-width).
SENTENCE_DELIMITERS = ",，.。"
_PIECE_RE = re.compile("[" + re.escape(SENTENCE_DELIMITERS) + "]")


@dataclass(frozen=True)
class ProfileVocabulary:
    """Closed per-field code vocabularies; every field includes 'unknown'."""

    age: tuple[str, ...] = ("child", "youth", "adult", "senior", "unknown")
    gender: tuple[str, ...] = ("female", "male", "unknown")
    season: tuple[str, ...] = ("spring", "summer", "autumn", "winter", "unknown")

    def __post_init__(self):
        for name in ("age", "gender", "season"):
            codes = getattr(self, name)
            if "unknown" not in codes:
                raise ValueError(f"profile field {name!r} lacks an 'unknown' code")
            if len(set(codes)) != len(codes):
                raise ValueError(f"profile field {name!r} has duplicate codes")

    @property
    def size(self) -> int:
        return len(self.age) + len(self.gender) + len(self.season)

    def validate(self, profile: "ProfileFeatures") -> None:
        for name in ("age", "gender", "season"):
            value = getattr(profile, name)
            if value not in getattr(self, name):
                raise DataError(f"unknown profile code for field {name!r}: {value!r}")

    def one_hot_layout(self) -> list[str]:
        """Feature names in a fixed order, one slot per code."""
        names = []
        for name in ("age", "gender", "season"):
            names.extend(f"{name}={code}" for code in getattr(self, name))
        return names


DEFAULT_PROFILE_VOCAB = ProfileVocabulary()  # 13 codes total


@dataclass(frozen=True)
class ProfileFeatures:
    age: str = "unknown"
    gender: str = "unknown"
    season: str = "unknown"


class TopicSource(str, Enum):
    HUMAN = "human"
    MINED = "mined"
    GENERATED = "generated"


@dataclass(frozen=True)
class TopicTitle:
    """Two short scene phrases; phrase_b may be empty."""

    phrase_a: str
    phrase_b: str = ""
    source: TopicSource = TopicSource.HUMAN

    def __post_init__(self):
        if not self.phrase_a.strip():
            raise DataError("topic title phrase_a must be nonempty")

    def serialized(self) -> str:
        if self.phrase_b:
            return f"{self.phrase_a} {PHRASE_DELIMITER} {self.phrase_b}"
        return self.phrase_a

    def normalized(self) -> str:
        """Canonical whitespace-trimmed form used for novelty comparison."""
        a, b = self.phrase_a.strip(), self.phrase_b.strip()
        return f"{a} {PHRASE_DELIMITER} {b}" if b else a

    @classmethod
    def parse(cls, text: str, source: TopicSource = TopicSource.HUMAN) -> "TopicTitle":
        """Split at the first delimiter; no delimiter leaves phrase_b empty."""
        if PHRASE_DELIMITER in text:
            a, b = text.split(PHRASE_DELIMITER, 1)
            return cls(phrase_a=a.strip(), phrase_b=b.strip(), source=source)
        return cls(phrase_a=text.strip(), phrase_b="", source=source)


class PairOrigin(str, Enum):
    ONLINE_POSITIVE = "online_positive"
    SYNTHESIZED_NEGATIVE = "synthesized_negative"
    AUGMENTED = "augmented"


@dataclass(frozen=True)
class LabeledPair:
    product_id: str
    title: TopicTitle
    label: int
    origin: PairOrigin

    def __post_init__(self):
        if self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")
        if self.label == 1 and self.origin == PairOrigin.SYNTHESIZED_NEGATIVE:
            raise DataError("positive pairs cannot originate from synthesized negatives")


class PretrainTask(str, Enum):
    CONSISTENCY = "consistency"
    REORDER = "reorder"


@dataclass(frozen=True)
class PretrainExample:
    task: PretrainTask
    input_text: str
    target: str | int

    def __post_init__(self):
        if self.task == PretrainTask.CONSISTENCY and self.target not in (0, 1):
            raise DataError("consistency examples carry a binary target")
        if self.task == PretrainTask.REORDER and not isinstance(self.target, str):
            raise DataError("reorder examples carry a text target")


@dataclass(frozen=True)
class Product:
    id: str
    title: str
    attributes: tuple[tuple[str, str], ...] = ()
    ocr_text: str = ""
    profile: ProfileFeatures = field(default_factory=ProfileFeatures)
    copywriting: str | None = None

    def __post_init__(self):
        if not self.id:
            raise DataError("product id must be nonempty")
        if not self.title:
            raise DataError(f"product {self.id!r} has an empty title")
        for key, _ in self.attributes:
            if not key:
                raise DataError(f"product {self.id!r} has an attribute with empty key")


def attribute_sequence(attributes: Iterable[tuple[str, str]]) -> str:
    """Render attribute pairs as 'key:value' tokens joined by single spaces."""
    return " ".join(f"{k}:{v}" for k, v in attributes)


# ---------------------------------------------------------------------------
# JSONL parsing / serialization
# ---------------------------------------------------------------------------

def parse_product(obj: dict, vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> Product:
    try:
        attrs = tuple((a["k"], a["v"]) for a in obj.get("attributes", []))
        profile_obj = obj.get("profile", {})
        profile = ProfileFeatures(
            age=profile_obj.get("age", "unknown"),
            gender=profile_obj.get("gender", "unknown"),
            season=profile_obj.get("season", "unknown"),
        )
        product = Product(
            id=obj["id"],
            title=obj["title"],
            attributes=attrs,
            ocr_text=obj.get("ocr_text", ""),
            profile=profile,
            copywriting=obj.get("copywriting"),
        )
    except KeyError as exc:
        raise DataError(f"product record missing field {exc.args[0]!r}") from exc
    vocab.validate(product.profile)
    return product


def product_to_json(product: Product) -> dict:
    obj: dict = {
        "id": product.id,
        "title": product.title,
        "attributes": [{"k": k, "v": v} for k, v in product.attributes],
        "ocr_text": product.ocr_text,
        "profile": {
            "age": product.profile.age,
            "gender": product.profile.gender,
            "season": product.profile.season,
        },
    }
    if product.copywriting is not None:
        obj["copywriting"] = product.copywriting
    return obj


def load_catalog(path: str | Path,
                 vocab: ProfileVocabulary = DEFAULT_PROFILE_VOCAB) -> list[Product]:
    """Read products.jsonl, preserving file order; duplicate ids rejected."""
    products: list[Product] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed product record on line {lineno}: {exc}") from exc
            try:
                product = parse_product(obj, vocab)
            except DataError as exc:
                raise DataError(f"line {lineno}: {exc}") from exc
            if product.id in seen:
                raise DataError(f"duplicate product id {product.id!r} on line {lineno}")
            seen.add(product.id)
            products.append(product)
    return products


def write_catalog(path: str | Path, products: Iterable[Product]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for product in products:
            fh.write(json.dumps(product_to_json(product), ensure_ascii=False) + "\n")


_SOURCE_ORIGIN = {
    TopicSource.HUMAN: PairOrigin.ONLINE_POSITIVE,
    TopicSource.MINED: PairOrigin.AUGMENTED,
}


def load_topics(path: str | Path, catalog: Sequence[Product]) -> list[LabeledPair]:
    """Read topics.jsonl as positive pairs; every product_id must exist."""
    known = {p.id for p in catalog}
    pairs: list[LabeledPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"malformed topic record on line {lineno}: {exc}") from exc
            pid = obj.get("product_id")
            if pid not in known:
                raise DataError(f"line {lineno}: topic references unknown product id {pid!r}")
            try:
                source = TopicSource(obj.get("source", "human"))
            except ValueError as exc:
                raise DataError(f"line {lineno}: unknown topic source {obj.get('source')!r}") from exc
            if source not in _SOURCE_ORIGIN:
                raise DataError(f"line {lineno}: topic source {source.value!r} is not a training source")
            title = TopicTitle(
                phrase_a=obj.get("phrase_a", ""),
                phrase_b=obj.get("phrase_b", ""),
                source=source,
            )
            pairs.append(LabeledPair(pid, title, label=1, origin=_SOURCE_ORIGIN[source]))
    return pairs


def write_topics(path: str | Path, pairs: Iterable[LabeledPair]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            obj = {
                "product_id": pair.product_id,
                "phrase_a": pair.title.phrase_a,
                "phrase_b": pair.title.phrase_b,
                "source": pair.title.source.value,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_pretrain(path: str | Path, examples: Iterable[PretrainExample]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            obj = {"task": ex.task.value, "input": ex.input_text, "target": ex.target}
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Pretraining corpus builders
# ---------------------------------------------------------------------------

def build_consistency_corpus(products: Sequence[Product], rng_seed: int) -> list[PretrainExample]:
    """One positive and one negative title/attribute example per product.

    The positive pairs a product's title with its own attributes in a
    seed-shuffled order; the negative swaps in the attributes of a uniformly
    drawn different product. Products without attributes are skipped.
    """
    if len(products) < 2:
        raise DataError("consistency corpus needs at least 2 products to draw negatives")
    rng = random.Random(rng_seed)
    eligible = [p for p in products if p.attributes]
    examples: list[PretrainExample] = []
    for product in eligible:
        own = list(product.attributes)
        rng.shuffle(own)
        examples.append(PretrainExample(
            task=PretrainTask.CONSISTENCY,
            input_text=f"{product.title} {FIELD_SEP} {attribute_sequence(own)}",
            target=1,
        ))
        donors = [q for q in eligible if q.id != product.id]
        if not donors:
            raise DataError(f"no donor product with attributes for negative of {product.id!r}")
        donor = donors[rng.randrange(len(donors))]
        foreign = list(donor.attributes)
        rng.shuffle(foreign)
        examples.append(PretrainExample(
            task=PretrainTask.CONSISTENCY,
            input_text=f"{product.title} {FIELD_SEP} {attribute_sequence(foreign)}",
            target=0,
        ))
    return examples


def split_copywriting(text: str) -> list[str]:
    """Split at comma/period marks (ASCII and full-width), dropping empties."""
    return [piece.strip() for piece in _PIECE_RE.split(text) if piece.strip()]


def build_reorder_corpus(products: Sequence[Product], rng_seed: int) -> list[PretrainExample]:
    """Shuffled-piece copywriting as input, original copywriting as target."""
    rng = random.Random(rng_seed)
    examples: list[PretrainExample] = []
    for product in products:
        if not product.copywriting:
            continue
        pieces = split_copywriting(product.copywriting)
        if not pieces:
            continue
        rng.shuffle(pieces)
        examples.append(PretrainExample(
            task=PretrainTask.REORDER,
            input_text=" ".join(pieces),
            target=product.copywriting,
        ))
    return examples
