import math

import pytest
from hypothesis import given, strategies as st

from estc.catalog import TopicTitle
from estc.textmetrics import (bleu, difference_rate, evaluate_generation,
                              meteor_exact, rouge, tokenize)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_latin_runs():
    assert tokenize("ABC def") == ["abc", "def"]


def test_tokenize_cjk_singletons():
    # Every CJK ideograph is its own token; the latin run stays one token.
    assert tokenize("清凉一夏T恤") == ["清", "凉", "一", "夏", "t", "恤"]


def test_tokenize_drops_punctuation():
    assert tokenize("你好，world! 123") == ["你", "好", "world", "123"]


@given(st.text(max_size=40))
def test_tokenize_properties(text):
    tokens = tokenize(text)
    assert all(tokens), "no empty tokens"
    assert all(t == t.lower() for t in tokens)


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def test_bleu_identity():
    seq = ["a", "b", "c", "d", "e"]
    assert bleu([seq], [seq]) == pytest.approx(1.0)
    assert bleu([seq], [seq], smoothed=True) == pytest.approx(1.0)


def test_bleu_zero_without_smoothing():
    assert bleu([["a", "b", "c", "d"]], [["a", "b", "c", "e"]]) == 0.0


def test_bleu_smoothed_hand_computed():
    # Modified precisions, add-1 smoothing for n >= 2:
    #   p1 = 3/4, p2 = (2+1)/(3+1), p3 = (1+1)/(2+1), p4 = (0+1)/(1+1);
    # equal lengths, so the brevity penalty is 1.
    expected = math.exp(
        (math.log(3 / 4) + math.log(3 / 4) + math.log(2 / 3) + math.log(1 / 2)) / 4)
    got = bleu([["a", "b", "c", "d"]], [["a", "b", "c", "e"]], smoothed=True)
    assert got == pytest.approx(expected, abs=1e-9)


def test_bleu_brevity_penalty():
    # Candidate shorter than reference: BP = exp(1 - r/c).
    got = bleu([["a", "b"]], [["a", "b", "c", "d"]], max_n=2)
    expected = math.exp(1 - 4 / 2) * math.exp((math.log(1.0) + math.log(1.0)) / 2)
    assert got == pytest.approx(expected, abs=1e-9)


def test_bleu_length_mismatch():
    with pytest.raises(ValueError):
        bleu([["a"]], [["a"], ["b"]])


def test_bleu_empty_reference_rejected():
    with pytest.raises(ValueError):
        bleu([["a"]], [[]])


@given(st.lists(st.tuples(
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=6),
    st.lists(st.sampled_from("abcde"), min_size=1, max_size=6),
), min_size=1, max_size=6), st.randoms(use_true_random=False))
def test_bleu_corpus_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    original = bleu([c for c, _ in pairs], [r for _, r in pairs], smoothed=True)
    permuted = bleu([c for c, _ in shuffled], [r for _, r in shuffled], smoothed=True)
    assert original == pytest.approx(permuted, abs=1e-12)


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

def test_rouge_identity():
    assert rouge(["a", "b", "c"], ["a", "b", "c"]) == (1.0, 1.0, 1.0)


def test_rouge_hand_computed():
    r1, r2, rl = rouge(["a", "b", "c"], ["a", "b", "d"])
    assert r1 == pytest.approx(2 / 3, abs=1e-9)
    assert r2 == pytest.approx(1 / 2, abs=1e-9)   # bigrams: {ab, bc} vs {ab, bd}
    assert rl == pytest.approx(2 / 3, abs=1e-9)   # LCS = [a, b]
def test_rouge_disjoint():
    assert rouge(["a"], ["b"]) == (0.0, 0.0, 0.0)


@given(st.integers(2, 6), st.integers(0, 3), st.integers(0, 3))
def test_rouge_l_bounds_rouge_2_on_contiguous_overlap(shared_len, pre, post):
    # When the shared tokens form one contiguous block, the LCS covers the
    # whole block, so ROUGE-L cannot fall below ROUGE-2.
    shared = [f"s{i}" for i in range(shared_len)]
    reference = [f"r{i}" for i in range(pre)] + shared + [f"q{i}" for i in range(post)]
    candidate = shared + [f"c{i}" for i in range(post)]
    _, r2, rl = rouge(candidate, reference)
    assert rl >= r2 - 1e-12


def test_rouge_empty_candidate():
    assert rouge([], ["a"]) == (0.0, 0.0, 0.0)


def test_rouge_empty_reference_rejected():
    with pytest.raises(ValueError):
        rouge(["a"], [])


# ---------------------------------------------------------------------------
# METEOR (exact match)
# ---------------------------------------------------------------------------

def test_meteor_identity_four_tokens():
    seq = ["a", "b", "c", "d"]
    # One chunk of four matches: Fmean = 1, penalty = 0.5 * (1/4)^3.
    assert meteor_exact(seq, seq) == pytest.approx(1.0 - 0.5 * (1 / 4) ** 3, abs=1e-9)


def test_meteor_disjoint():
    assert meteor_exact(["a", "b"], ["c", "d"]) == 0.0


def test_meteor_single_shared_token():
    # m = 1, P = R = 1/2, Fmean = PR / (0.9 P + 0.1 R); 1 chunk of 1 match halves it.
    p = r = 0.5
    fmean = p * r / (0.9 * p + 0.1 * r)
    assert meteor_exact(["a", "x"], ["a", "y"]) == pytest.approx(fmean * 0.5, abs=1e-9)


def test_meteor_fragmentation_increases_penalty():
    contiguous = meteor_exact(["a", "b", "c", "d"], ["a", "b", "c", "d"])
    fragmented = meteor_exact(["a", "x", "b", "y"], ["a", "b", "x", "y"])
    assert fragmented < contiguous


def test_meteor_empty_reference_rejected():
    with pytest.raises(ValueError):
        meteor_exact(["a"], [])


# ---------------------------------------------------------------------------
# Difference rate
# ---------------------------------------------------------------------------

def _t(a, b=""):
    return TopicTitle(a, b)


def test_dr_all_seen():
    titles = [_t("快乐露营", "户外时光"), _t("清凉一夏")]
    assert difference_rate(titles, titles) == 0.0


def test_dr_two_of_three_novel():
    generated = [_t("t1"), _t("t2"), _t("t3"), _t("t1")]
    assert difference_rate(generated, [_t("t1")]) == pytest.approx(200 / 3, abs=1e-9)


def test_dr_all_novel():
    assert difference_rate([_t("新")], [_t("旧")]) == 100.0


def test_dr_duplicate_invariance():
    generated = [_t("a"), _t("b")]
    doubled = generated + generated
    training = [_t("a")]
    assert difference_rate(generated, training) == difference_rate(doubled, training)


def test_dr_empty_generated_rejected():
    with pytest.raises(ValueError):
        difference_rate([], [_t("a")])


# ---------------------------------------------------------------------------
# Aggregate report
# ---------------------------------------------------------------------------

def test_evaluate_generation_report():
    hyps = ["清凉一夏 @ 出行必备", "快乐露营 @ 户外时光"]
    refs = ["清凉一夏 @ 夏日出行必备", "快乐露营 @ 营地时光"]
    report = evaluate_generation(hyps, refs)
    assert report.n_pairs == 2
    for value in (report.bleu, report.rouge1, report.rouge2,
                  report.rougeL, report.meteor_exact):
        assert 0.0 <= value <= 1.0


def test_evaluate_generation_identity_maxima():
    texts = ["清凉一夏 @ 出行必备"]
    report = evaluate_generation(texts, texts)
    assert report.bleu == pytest.approx(1.0)
    assert report.rouge1 == pytest.approx(1.0)
    assert report.rougeL == pytest.approx(1.0)


def test_evaluate_generation_requires_pairs():
    with pytest.raises(ValueError):
        evaluate_generation([], [])
