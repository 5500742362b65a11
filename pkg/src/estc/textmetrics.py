"""Tokenization and generation-quality metrics.

Scores operate on token sequences produced by :func:`tokenize`: CJK
ideographs count as single-character tokens, latin/digit runs as one token,
everything else is dropped. Includes corpus BLEU, ROUGE-1/2/L, an
exact-match METEOR variant, and the novelty difference rate over topic
titles.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import TopicTitle

TokenSequence = list[str]

# METEOR parameters: recall weight 9 via alpha, fragmentation beta/gamma.
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5

_CJK_RANGES = (
    (0x3400, 0x4DBF),   # extension A
    (0x4E00, 0x9FFF),   # unified ideographs
    (0xF900, 0xFAFF),   # compatibility ideographs
)


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def tokenize(text: str) -> TokenSequence:
    """CJK chars become single tokens; non-CJK alphanumeric runs one token each."""
    tokens: TokenSequence = []
    run: list[str] = []
    for ch in text:
        if _is_cjk(ch):
            if run:
                tokens.append("".join(run))
                run = []
            tokens.append(ch)
        elif ch.isalnum():
            run.append(ch.lower())
        else:
            if run:
                tokens.append("".join(run))
                run = []
    if run:
        tokens.append("".join(run))
    return tokens


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def bleu(candidates: Sequence[TokenSequence], references: Sequence[TokenSequence],
         max_n: int = 4, smoothed: bool = False) -> float:
    """Corpus BLEU: geometric mean of modified n-gram precisions × brevity penalty.

    Smoothed mode applies add-1 to numerator and denominator for n >= 2;
    unsmoothed mode returns 0 as soon as any precision is 0.
    """
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates vs {len(references)} references")
    if any(not ref for ref in references):
        raise ValueError("all references must be nonempty")
    cand_len = sum(len(c) for c in candidates)
    ref_len = sum(len(r) for r in references)
    if cand_len == 0:
        return 0.0

    log_sum = 0.0
    for n in range(1, max_n + 1):
        matched = 0
        total = 0
        for cand, ref in zip(candidates, references):
            cand_counts = Counter(ngrams(cand, n))
            ref_counts = Counter(ngrams(ref, n))
            matched += sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
            total += max(len(cand) - n + 1, 0)
        if smoothed and n >= 2:
            matched += 1
            total += 1
        if matched == 0 or total == 0:
            return 0.0
        log_sum += math.log(matched / total)

    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_sum / max_n)


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _rouge_n(candidate: TokenSequence, reference: TokenSequence, n: int) -> float:
    ref_grams = Counter(ngrams(reference, n))
    cand_grams = Counter(ngrams(candidate, n))
    if not ref_grams or not cand_grams:
        return 0.0
    overlap = sum(min(count, ref_grams[gram]) for gram, count in cand_grams.items())
    precision = overlap / sum(cand_grams.values())
    recall = overlap / sum(ref_grams.values())
    return _f1(precision, recall)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Classic O(len(a)·len(b)) dynamic program, one row at a time.
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, 1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge(candidate: TokenSequence, reference: TokenSequence) -> tuple[float, float, float]:
    """(ROUGE-1, ROUGE-2, ROUGE-L) F-scores; empty candidate yields zeros."""
    if not reference:
        raise ValueError("reference must be nonempty")
    if not candidate:
        return (0.0, 0.0, 0.0)
    lcs = _lcs_length(candidate, reference)
    rouge_l = _f1(lcs / len(candidate), lcs / len(reference))
    return (_rouge_n(candidate, reference, 1), _rouge_n(candidate, reference, 2), rouge_l)


# ---------------------------------------------------------------------------
# METEOR (exact-match variant)
# ---------------------------------------------------------------------------

def _align_exact(candidate: TokenSequence, reference: TokenSequence) -> list[tuple[int, int]]:
    """Greedy in-order exact matching: each token pairs the first unused twin."""
    used: set[int] = set()
    matches: list[tuple[int, int]] = []
    for i, token in enumerate(candidate):
        for j, ref_token in enumerate(reference):
            if j not in used and ref_token == token:
                used.add(j)
                matches.append((i, j))
                break
    return matches


def _chunk_count(matches: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for ci, ri in matches:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor_exact(candidate: TokenSequence, reference: TokenSequence) -> float:
    """Recall-weighted F-mean with a fragmentation penalty, exact matches only."""
    if not reference:
        raise ValueError("reference must be nonempty")
    if not candidate:
        return 0.0
    matches = _align_exact(candidate, reference)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    fmean = precision * recall / (METEOR_ALPHA * precision + (1.0 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (_chunk_count(matches) / m) ** METEOR_BETA
    return fmean * (1.0 - penalty)


# ---------------------------------------------------------------------------
# Difference rate (novelty)
# ---------------------------------------------------------------------------

def difference_rate(generated: Iterable[TopicTitle], training: Iterable[TopicTitle]) -> float:
    """Percentage of distinct generated titles absent from the training set."""
    distinct = {title.normalized() for title in generated}
    if not distinct:
        raise ValueError("generated title set must be nonempty")
    seen = {title.normalized() for title in training}
    novel = len(distinct - seen)
    return 100.0 * novel / len(distinct)


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricReport:
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float
    meteor_exact: float
    n_pairs: int

    def __post_init__(self):
        if self.n_pairs < 1:
            raise ValueError("report needs at least one pair")
        for name in ("bleu", "rouge1", "rouge2", "rougeL", "meteor_exact"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} out of range: {value}")

    def to_json(self) -> dict:
        return {
            "bleu": self.bleu,
            "rouge1": self.rouge1,
            "rouge2": self.rouge2,
            "rougeL": self.rougeL,
            "meteor_exact": self.meteor_exact,
            "n_pairs": self.n_pairs,
        }


def evaluate_generation(hypotheses: Sequence[str], references: Sequence[str],
                        smoothed: bool = True) -> MetricReport:
    """Tokenize aligned text pairs and score them: corpus BLEU, mean ROUGE/METEOR."""
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses vs {len(references)} references")
    if not hypotheses:
        raise ValueError("need at least one hypothesis/reference pair")
    hyp_tokens = [tokenize(h) for h in hypotheses]
    ref_tokens = [tokenize(r) for r in references]
    rouge_scores = [rouge(h, r) for h, r in zip(hyp_tokens, ref_tokens)]
    n = len(hypotheses)
    return MetricReport(
        bleu=bleu(hyp_tokens, ref_tokens, smoothed=smoothed),
        rouge1=sum(s[0] for s in rouge_scores) / n,
        rouge2=sum(s[1] for s in rouge_scores) / n,
        rougeL=sum(s[2] for s in rouge_scores) / n,
        meteor_exact=sum(meteor_exact(h, r) for h, r in zip(hyp_tokens, ref_tokens)) / n,
        n_pairs=n,
    )
