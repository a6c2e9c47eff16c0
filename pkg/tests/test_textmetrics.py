import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqaworkbench.evalharness.textmetrics import bleu, cider, rouge_l, tokenize

WORDS = st.sampled_from(["the", "cat", "sat", "dog", "park", "red"])
SENT = st.lists(WORDS, min_size=1, max_size=6)


class TestTokenize:
    def test_lowercases_and_splits_punct(self):
        assert tokenize("Where are the people sitting?") == [
            "where",
            "are",
            "the",
            "people",
            "sitting",
            "?",
        ]

    def test_punct_runs(self):
        assert tokenize("it's red-ish.") == ["it", "'", "s", "red", "-", "ish", "."]


class TestBleu:
    def test_identity_is_one(self):
        toks = "what color are these flowers ?".split()
        assert bleu(toks, [toks]) == pytest.approx(1.0)

    def test_brevity_penalty_fixture(self):
        score = bleu("the cat sat".split(), ["the cat sat down".split()], max_n=2)
        assert score == pytest.approx(math.exp(-1 / 3), abs=1e-9)

    def test_no_overlap_is_zero(self):
        assert bleu("dog park".split(), ["the cat sat".split()]) == 0.0

    def test_empty_candidate_warns_zero(self):
        with pytest.warns(UserWarning):
            assert bleu([], ["the cat".split()]) == 0.0

    def test_smoothing_rescues_zero_order(self):
        cand = "the cat sat".split()
        ref = "the dog sat".split()
        assert bleu(cand, [ref], max_n=2) == 0.0  # no bigram overlap
        assert bleu(cand, [ref], max_n=2, smooth=True) > 0.0

    def test_short_candidate_skips_unavailable_orders(self):
        # identity at length 2 with max_n=4: orders 3..4 are skipped
        cand = "the cat".split()
        assert bleu(cand, [cand], max_n=4) == pytest.approx(1.0)

    @given(SENT)
    @settings(max_examples=30, deadline=None)
    def test_identity_property(self, sent):
        assert bleu(sent, [sent]) == pytest.approx(1.0)

    @given(SENT, SENT)
    @settings(max_examples=30, deadline=None)
    def test_relabeling_invariance(self, cand, ref):
        mapping = {"the": "t0", "cat": "t1", "sat": "t2", "dog": "t3", "park": "t4", "red": "t5"}
        base = bleu(cand, [ref], max_n=2)
        renamed = bleu([mapping[w] for w in cand], [[mapping[w] for w in ref]], max_n=2)
        assert base == pytest.approx(renamed)


class TestRougeL:
    def test_identity(self):
        toks = "the cat sat".split()
        assert rouge_l(toks, toks) == (1.0, 1.0, 1.0)

    def test_worked_fixture(self):
        prf = rouge_l("the cat".split(), "the black cat".split())
        assert prf.precision == pytest.approx(1.0)
        assert prf.recall == pytest.approx(2 / 3)
        assert prf.f == pytest.approx(0.8, abs=1e-9)

    def test_disjoint(self):
        assert rouge_l("dog".split(), "cat".split()) == (0.0, 0.0, 0.0)

    def test_empty_inputs(self):
        assert rouge_l([], "cat".split()) == (0.0, 0.0, 0.0)

    def test_lcs_not_contiguous(self):
        prf = rouge_l("a x b y c".split(), "a b c".split())
        assert prf.recall == pytest.approx(1.0)

    @given(SENT, SENT)
    @settings(max_examples=30, deadline=None)
    def test_relabeling_invariance(self, cand, ref):
        mapping = {"the": "z0", "cat": "z1", "sat": "z2", "dog": "z3", "park": "z4", "red": "z5"}
        base = rouge_l(cand, ref)
        renamed = rouge_l([mapping[w] for w in cand], [mapping[w] for w in ref])
        assert base == renamed


def independent_cider(candidates, references, max_n=4, sigma=6.0):
    """Direct transcription of the CIDEr-D formula, structured differently
    from the implementation (dense per-n-gram enumeration)."""
    n_items = len(candidates)

    def grams(tokens, n):
        return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]

    scores = []
    for cand, refs in zip(candidates, references):
        per_n = []
        for n in range(1, max_n + 1):
            df = Counter()
            for other_refs in references:
                seen = set()
                for ref in other_refs:
                    seen |= set(grams(ref, n))
                for g in seen:
                    df[g] += 1
            vocab = set(grams(cand, n))
            for ref in refs:
                vocab |= set(grams(ref, n))
            vocab = sorted(vocab)

            def vec(tokens):
                counts = Counter(grams(tokens, n))
                return [
                    counts[g] * (math.log(n_items) - math.log(max(1.0, df[g]))) for g in vocab
                ]

            cv = vec(cand)
            cnorm = math.sqrt(sum(x * x for x in cv))
            total = 0.0
            for ref in refs:
                rv = vec(ref)
                rnorm = math.sqrt(sum(x * x for x in rv))
                num = sum(min(a, b) * b for a, b in zip(cv, rv))
                sim = num / (cnorm * rnorm) if cnorm > 0 and rnorm > 0 else 0.0
                sim *= math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma**2))
                total += sim
            per_n.append(total / len(refs))
        scores.append(10.0 * sum(per_n) / max_n)
    return scores


class TestCider:
    def test_identity_on_distinct_corpus(self):
        c1 = "the red cat sat over there".split()
        c2 = "a dog runs in some park".split()
        result = cider([c1, c2], [[c1], [c2]])
        assert result.per_item[0] == pytest.approx(10.0)
        assert result.per_item[1] == pytest.approx(10.0)

    def test_zero_overlap(self):
        c1 = "aa bb cc dd".split()
        result = cider([c1, "x y".split()], [["ee ff gg".split()], ["z w".split()]])
        assert result.per_item[0] == 0.0

    def test_matches_independent_oracle(self):
        candidates = [
            "the cat sat on the mat".split(),
            "a dog in the park".split(),
            "the red bird flew home".split(),
        ]
        references = [
            ["the cat sat on a mat".split(), "the cat is sitting".split()],
            ["the dog runs in the park".split()],
            ["a red bird flew back home".split(), "the bird went home".split()],
        ]
        got = cider(candidates, references)
        want = independent_cider(candidates, references)
        for g, w in zip(got.per_item, want):
            assert g == pytest.approx(w, abs=1e-6)

    def test_single_item_warns(self):
        with pytest.warns(UserWarning):
            cider(["a b".split()], [["a b".split()]])

    @given(SENT, SENT)
    @settings(max_examples=20, deadline=None)
    def test_relabeling_invariance(self, s1, s2):
        mapping = {"the": "q0", "cat": "q1", "sat": "q2", "dog": "q3", "park": "q4", "red": "q5"}
        base = cider([s1, s2], [[s2], [s1]]).per_item
        renamed = cider(
            [[mapping[w] for w in s1], [mapping[w] for w in s2]],
            [[[mapping[w] for w in s2]], [[mapping[w] for w in s1]]],
        ).per_item
        for a, b in zip(base, renamed):
            assert a == pytest.approx(b)
