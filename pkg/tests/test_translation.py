import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftkit.core import TranslationRecord
from shiftkit.errors import EmptyDatasetError, EmptyReferenceError
from shiftkit.evaluate import evaluate_translation
from shiftkit.synth import SynthSpec, gen_translation
from shiftkit.translation import (
    egleu,
    egleu_error,
    expected_gleu,
    max_gleu,
    record_egleu_error,
    sentence_gleu,
    weight_entropy,
)

from . import oracles


def const_score(values):
    """Score function returning preset GLEU values keyed by hypothesis text."""
    table = dict(values)
    return lambda hyp, ref: table[" ".join(hyp)]


def rec(hyps, weights, ref=("x",)):
    return TranslationRecord("t", [h.split() for h in hyps], weights, list(ref))


def test_gleu_perfect_match():
    assert sentence_gleu("the cat sat on the mat".split(), "the cat sat on the mat".split()) == 1.0
    assert sentence_gleu(["a"], ["a"]) == 1.0


def test_gleu_disjoint():
    assert sentence_gleu("a b c".split(), "d e f".split()) == 0.0


def test_gleu_partial_overlap_matches_oracle():
    # 6 n-grams each side (3 unigrams, 2 bigrams, 1 trigram); matches: a, b, "a b"
    expected = oracles.gleu("a b c".split(), "a b d".split())
    assert expected == 0.5
    assert sentence_gleu("a b c".split(), "a b d".split()) == expected


def test_gleu_empty_cases():
    assert sentence_gleu([], ["a"]) == 0.0
    with pytest.raises(EmptyReferenceError):
        sentence_gleu(["a"], [])


def test_gleu_clipping():
    # "the the the" vs "the cat": unigram "the" clipped to one match
    assert sentence_gleu("the the the".split(), "the cat".split()) == pytest.approx(
        oracles.gleu("the the the".split(), "the cat".split())
    )


def test_gleu_one_does_not_imply_equality():
    # Distinct sentences can share every n-gram of order <= 4.
    a = "a b c X a b c Y a b c".split()
    b = "a b c Y a b c X a b c".split()
    assert a != b
    assert sentence_gleu(a, b) == 1.0


def test_egleu_examples():
    assert egleu([rec(["x y"], [1.0], ["x", "y"])]) == 100.0
    score = const_score({"p": 0.4, "q": 0.6})
    assert egleu([rec(["p", "q"], [0.5, 0.5])], score) == pytest.approx(50.0, abs=1e-12)
    assert egleu([rec(["p", "q"], [1.0, 1e-300])], score) == pytest.approx(40.0, abs=1e-12)
    with pytest.raises(EmptyDatasetError):
        egleu([])


def test_max_gleu_examples():
    single = [rec(["x z"], [1.0], ["x", "y"])]
    assert max_gleu(single) == egleu(single)
    score = const_score({"p": 0.4, "q": 0.6})
    assert max_gleu([rec(["p", "q"], [0.9, 0.1])], score) == pytest.approx(60.0, abs=1e-12)
    zero = const_score({"p": 0.0, "q": 0.0})
    assert max_gleu([rec(["p", "q"], [0.5, 0.5])], zero) == 0.0
    with pytest.raises(EmptyDatasetError):
        max_gleu([])


def test_egleu_error_examples():
    assert egleu_error([rec(["x y"], [1.0], ["x", "y"])]) == 0.0
    score = const_score({"p": 0.4, "q": 0.6})
    r = rec(["p", "q"], [0.5, 0.5])
    assert egleu_error([r], score) == pytest.approx(50.0, abs=1e-12)
    assert record_egleu_error(r, score) == pytest.approx(50.0, abs=1e-12)


def test_weight_entropy():
    assert weight_entropy(rec(["a", "b"], [0.5, 0.5])) == pytest.approx(0.6931471805599453)
    assert weight_entropy(rec(["a"], [1.0])) == 0.0


tokens = st.lists(st.sampled_from("abcde"), min_size=0, max_size=8)
nonempty = st.lists(st.sampled_from("abcde"), min_size=1, max_size=8)


@settings(max_examples=500)
@given(tokens, nonempty)
def test_gleu_bounds_symmetry_oracle(hyp, ref):
    g = sentence_gleu(hyp, ref)
    assert 0.0 <= g <= 1.0
    assert g == oracles.gleu(hyp, ref)
    if hyp:
        assert g == sentence_gleu(ref, hyp)


@settings(max_examples=200)
@given(nonempty)
def test_gleu_self_is_one(ref):
    assert sentence_gleu(ref, ref) == 1.0


@st.composite
def records(draw):
    ref = draw(nonempty)
    H = draw(st.integers(1, 5))
    hyps = [draw(tokens) for _ in range(H)]
    raw = draw(st.lists(st.floats(0.01, 1), min_size=H, max_size=H))
    w = [x / sum(raw) for x in raw]
    return TranslationRecord("t", hyps, w, ref)


@settings(max_examples=200)
@given(st.lists(records(), min_size=1, max_size=5))
def test_dataset_invariants(rs):
    e = egleu(rs)
    assert max_gleu(rs) >= e - 1e-9
    assert e + egleu_error(rs) == 100.0


@settings(max_examples=200)
@given(records(), st.randoms(use_true_random=False))
def test_permuting_hypotheses_with_weights(r, rnd):
    idx = list(range(r.H))
    rnd.shuffle(idx)
    p = TranslationRecord("t", [r.hypotheses[i] for i in idx], [r.weights[i] for i in idx], r.reference)
    assert expected_gleu(p) == pytest.approx(expected_gleu(r), abs=1e-12)


def test_error_never_negative_when_weights_round_up():
    ref = "a b c".split()
    for weights in ([0.1] * 10, [0.7, 0.2, 0.1], [1 / 3] * 3):
        r = TranslationRecord("x", [ref] * len(weights), weights, ref)
        assert 0.0 <= record_egleu_error(r) < 1e-12
    # this seed contains a record whose weights round up
    recs = gen_translation(SynthSpec(seed=0, n_in=500, n_shifted=500, shift_severity=1.0, task="translation"))
    evaluate_translation(recs, threshold=30.0)
