import random
import re

import pytest
from hypothesis import given, strategies as st

from finrag.errors import InputError, JudgeFormatError
from finrag.evaluation import (
    ROUGE_VARIANTS,
    aggregate_verdicts,
    output_stats,
    pairwise_judge,
    rouge,
    rouge_all,
    tokenize,
)
from finrag.model_gateway import CallableChatBackend
from tests.oracles import oracle_lcs, oracle_rouge_n


class TestTokenize:
    def test_latin_runs_are_single_tokens(self):
        assert tokenize("Revenue grew 40%!") == ["revenue", "grew", "40"]

    def test_cjk_chars_are_individual_tokens(self):
        assert tokenize("股票上涨") == ["股", "票", "上", "涨"]

    def test_mixed_text(self):
        assert tokenize("K线 is a chart") == ["k", "线", "is", "a", "chart"]


class TestRouge:
    def test_identical_strings_score_one(self):
        for variant in ROUGE_VARIANTS:
            score = rouge("the cat sat on the mat", "the cat sat on the mat", variant)
            assert score.f1 == pytest.approx(1.0)
            assert score.precision == pytest.approx(1.0)
            assert score.recall == pytest.approx(1.0)

    def test_disjoint_strings_score_zero(self):
        for variant in ROUGE_VARIANTS:
            assert rouge("alpha beta", "gamma delta", variant).f1 == 0.0

    def test_hand_enumerated_overlap(self):
        # unigrams: {the, cat} overlap 2 of 3 -> p = r = f1 = 2/3
        assert rouge("the cat sat", "the cat ran", "rouge1").f1 == pytest.approx(2 / 3)
        # bigrams: {the cat} overlap 1 of 2 -> f1 = 1/2
        assert rouge("the cat sat", "the cat ran", "rouge2").f1 == pytest.approx(1 / 2)

    def test_empty_reference_is_input_error(self):
        with pytest.raises(InputError):
            rouge("candidate", "", "rouge1")

    def test_empty_candidate_scores_zero(self):
        for variant in ROUGE_VARIANTS:
            score = rouge("", "reference text", variant)
            assert (score.precision, score.recall, score.f1) == (0.0, 0.0, 0.0)

    def test_clipped_counts(self):
        # candidate repeats "the" three times; reference has it once
        score = rouge("the the the", "the cat", "rouge1")
        assert score.precision == pytest.approx(1 / 3)
        assert score.recall == pytest.approx(1 / 2)

    def test_cjk_rouge(self):
        score = rouge("股票上涨", "股票下跌", "rouge1")
        assert score.precision == pytest.approx(0.5)

    def test_unknown_variant(self):
        with pytest.raises(InputError):
            rouge("a", "b", "rouge3")

    def test_matches_brute_force_oracle(self):
        rng = random.Random(3)
        vocabulary = ["the", "cat", "sat", "ran", "mat", "dog", "big", "股", "涨"]
        for _ in range(100):
            cand_tokens = [rng.choice(vocabulary) for _ in range(rng.randint(0, 12))]
            ref_tokens = [rng.choice(vocabulary) for _ in range(rng.randint(1, 12))]
            candidate = " ".join(cand_tokens)
            reference = " ".join(ref_tokens)
            cand = tokenize(candidate)
            ref = tokenize(reference)
            for variant, n in (("rouge1", 1), ("rouge2", 2)):
                got = rouge(candidate, reference, variant) if candidate else None
                want = oracle_rouge_n(cand, ref, n)
                if candidate:
                    assert got.precision == pytest.approx(want[0], abs=1e-12)
                    assert got.recall == pytest.approx(want[1], abs=1e-12)
                    assert got.f1 == pytest.approx(want[2], abs=1e-12)
            if candidate:
                got = rouge(candidate, reference, "rougeL")
                lcs = oracle_lcs(cand, ref)
                assert got.precision == pytest.approx(lcs / len(cand) if cand else 0.0)
                assert got.recall == pytest.approx(lcs / len(ref))

    @given(st.text(min_size=1, max_size=40))
    def test_reflexive_and_bounded(self, text):
        tokens = tokenize(text)
        for variant in ROUGE_VARIANTS:
            score = rouge(text, text, variant)
            assert 0.0 <= score.f1 <= 1.0
            needed = 2 if variant == "rouge2" else 1
            if len(tokens) >= needed:
                assert score.f1 == pytest.approx(1.0)


class TestOutputStats:
    def test_average_length(self):
        stats = output_stats([("abcd", "up"), ("", "down")])
        assert stats["avg_len"] == pytest.approx(2.0)

    def test_na_ratio(self):
        rows = [("a", "up"), ("b", "down"), ("c", "invalid"), ("d", "up")]
        assert output_stats(rows)["na_ratio"] == pytest.approx(0.25)

    def test_empty(self):
        assert output_stats([]) == {"avg_len": 0.0, "na_ratio": 0.0}


def longer_judge():
    """Prefers the longer response; symmetric and deterministic."""

    def judge_fn(judge_input: str) -> str:
        a = re.search(r"Response A:\n(.*?)\nResponse B:", judge_input, re.S).group(1)
        b = re.search(r"Response B:\n(.*?)\nReply with", judge_input, re.S).group(1)
        if len(a) > len(b):
            return "A"
        if len(b) > len(a):
            return "B"
        return "TIE"

    return CallableChatBackend(judge_fn, id="longer-judge")


class TestPairwiseJudge:
    def test_longer_wins(self):
        verdict = pairwise_judge("q", "a much longer response", "short", longer_judge())
        assert verdict.outcome == "win"
        assert verdict.judge_id == "longer-judge"

    def test_identical_responses_tie(self):
        assert pairwise_judge("q", "same", "same", longer_judge()).outcome == "tie"

    def test_antisymmetry(self):
        judge = longer_judge()
        forward = pairwise_judge("q", "looooooong answer", "short", judge)
        backward = pairwise_judge("q", "short", "looooooong answer", judge)
        assert (forward.outcome, backward.outcome) == ("win", "lose")

    def test_position_biased_judge_resolves_to_tie(self):
        always_first = CallableChatBackend(lambda _: "A", id="first-bias")
        assert pairwise_judge("q", "x", "y", always_first).outcome == "tie"

    def test_unparseable_judge_output(self):
        mute = CallableChatBackend(lambda _: "no verdict here...", id="mute")
        with pytest.raises(JudgeFormatError) as err:
            pairwise_judge("q", "x", "y", mute)
        assert "no verdict" in err.value.raw_output

    def test_aggregation_win_rate(self):
        judge = longer_judge()
        verdicts = []
        for i in range(100):
            a, b = ("long response", "x") if i < 62 else ("x", "long response")
            verdicts.append(pairwise_judge("q", a, b, judge, item_id=str(i)))
        aggregates = aggregate_verdicts(verdicts)
        assert aggregates["win"] == 62
        assert aggregates["lose"] == 38
        assert aggregates["win_rate"] == pytest.approx(0.62)


class TestRougeAll:
    def test_emits_all_variants(self):
        scores = rouge_all("the cat", "the cat")
        assert set(scores) == set(ROUGE_VARIANTS)
