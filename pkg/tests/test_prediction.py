import random

import pytest
from hypothesis import given, strategies as st

from finrag.errors import InputError
from finrag.prediction import (
    DirectionLexicon,
    TrendPrediction,
    accuracy,
    parse_direction,
    parse_prediction,
    parse_probability,
    select_chosen,
)


def prediction(company_id, direction, month="2021-03"):
    return TrendPrediction(
        company_id=company_id,
        month=month,
        direction=direction,
        prob_category=None,
        raw_response=direction,
    )


class TestParseDirection:
    def test_up_keyword(self):
        assert parse_direction("we predict the trend is up, probability: large") == "up"

    def test_down_keyword(self):
        assert parse_direction("clear answer: down") == "down"

    def test_no_keyword_is_invalid(self):
        assert parse_direction("the market is hard to call") == "invalid"

    def test_up_takes_precedence_over_down(self):
        assert parse_direction("it fell down before, now up") == "up"
        assert parse_direction("up or down, hard to say") == "up"

    def test_case_insensitive_english(self):
        assert parse_direction("Clear answer: UP") == "up"
        assert parse_direction("Down") == "down"

    def test_word_boundaries_on_latin_terms(self):
        assert parse_direction("probability: medium to upper") == "invalid"
        assert parse_direction("expect an update soon") == "invalid"
        assert parse_direction("the breakdown of sectors") == "invalid"

    def test_chinese_keywords(self):
        assert parse_direction("我们预测下个月该股票上涨") == "up"
        assert parse_direction("该股票可能下跌") == "down"

    def test_total_function_on_empty(self):
        assert parse_direction("") == "invalid"

    def test_custom_lexicon(self):
        lexicon = DirectionLexicon(up_terms=("rise",), down_terms=("fall",))
        assert parse_direction("it will rise", lexicon) == "up"
        assert parse_direction("up", lexicon) == "invalid"

    def test_appending_after_up_never_changes(self):
        base = "the answer is up"
        for suffix in (" and down", " 下跌", " more text", ""):
            assert parse_direction(base + suffix) == "up"

    def test_appending_keyword_free_text_is_stable(self):
        for base, expected in [("down for sure", "down"), ("no idea", "invalid")]:
            for suffix in (" extra words", " 没有方向", ""):
                assert parse_direction(base + suffix) == expected


class TestParseProbability:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("... probability: very large", "very_large"),
            ("... probability: large", "large"),
            ("... probability: medium to upper", "medium_to_upper"),
            ("... probability: average", "average"),
            ("Probability is large", "large"),
        ],
    )
    def test_categories(self, text, expected):
        assert parse_probability(text) == expected

    def test_no_marker_is_none(self):
        assert parse_probability("the trend is up, very large move") is None

    def test_marker_without_category_is_none(self):
        assert parse_probability("probability: unclear") is None

    def test_category_before_marker_does_not_count(self):
        assert parse_probability("large move ahead; probability unknown") is None

    def test_first_category_after_marker_wins(self):
        assert parse_probability("probability: average, maybe large") == "average"


class TestSelectChosen:
    def test_example(self):
        rows = [prediction("A", "up"), prediction("B", "down"), prediction("C", "up")]
        assert select_chosen(rows, "2021-03").company_ids == frozenset({"A", "C"})

    def test_all_down_is_empty(self):
        rows = [prediction("A", "down"), prediction("B", "down")]
        assert select_chosen(rows, "2021-03").company_ids == frozenset()

    def test_invalid_not_chosen(self):
        assert select_chosen([prediction("A", "invalid")], "2021-03").company_ids == frozenset()

    def test_wrong_month_rejected(self):
        with pytest.raises(InputError):
            select_chosen([prediction("A", "up", month="2021-04")], "2021-03")

    def test_duplicate_company_rejected(self):
        rows = [prediction("A", "up"), prediction("A", "down")]
        with pytest.raises(InputError):
            select_chosen(rows, "2021-03")

    def test_idempotent_under_reapplication(self):
        rows = [prediction("A", "up"), prediction("B", "down"), prediction("C", "up")]
        once = select_chosen(rows, "2021-03")
        again = select_chosen(
            [prediction(c, "up") for c in sorted(once.company_ids)], "2021-03"
        )
        assert again.company_ids == once.company_ids

    @given(
        st.dictionaries(
            st.text(st.characters(whitelist_categories=("Lu",)), min_size=1, max_size=3),
            st.sampled_from(["up", "down", "invalid"]),
            max_size=12,
        )
    )
    def test_matches_set_comprehension_oracle(self, table):
        rows = [prediction(company, direction) for company, direction in table.items()]
        oracle = {company for company, direction in table.items() if direction == "up"}
        assert select_chosen(rows, "2021-03").company_ids == frozenset(oracle)


class TestAccuracy:
    def labels(self, mapping):
        return {(company, "2021-03"): label for company, label in mapping.items()}

    def test_three_of_four(self):
        rows = [
            prediction("A", "up"), prediction("B", "up"),
            prediction("C", "down"), prediction("D", "down"),
        ]
        labels = self.labels({"A": "up", "B": "up", "C": "down", "D": "up"})
        assert accuracy(rows, labels) == pytest.approx(0.75)

    def test_all_match(self):
        rows = [prediction("A", "up"), prediction("B", "down")]
        assert accuracy(rows, self.labels({"A": "up", "B": "down"})) == 1.0

    def test_invalid_counts_as_incorrect(self):
        rows = [
            prediction("A", "up"), prediction("B", "down"),
            prediction("C", "up"), prediction("D", "invalid"),
        ]
        labels = self.labels({"A": "up", "B": "down", "C": "down", "D": "up"})
        assert accuracy(rows, labels) == pytest.approx(0.5)

    def test_missing_label_is_input_error(self):
        with pytest.raises(InputError):
            accuracy([prediction("A", "up")], {})

    def test_permutation_invariant(self):
        rows = [
            prediction("A", "up"), prediction("B", "down"),
            prediction("C", "invalid"), prediction("D", "up"),
        ]
        labels = self.labels({"A": "up", "B": "up", "C": "down", "D": "up"})
        expected = accuracy(rows, labels)
        rng = random.Random(11)
        for _ in range(10):
            shuffled = rows[:]
            rng.shuffle(shuffled)
            assert accuracy(shuffled, labels) == expected

    def test_empty_is_zero(self):
        assert accuracy([], {}) == 0.0


class TestParsePrediction:
    def test_full_analysis_response(self):
        response = (
            "According to the research report and market data provided, the following "
            "conclusions can be drawn:\n1. Fundamentals: strong\n2. Technical aspects: weak\n"
            "Therefore, we predict the trend of the stock next month is up, probability: "
            "medium to upper"
        )
        parsed = parse_prediction("acme", "2021-03", response)
        assert parsed.direction == "up"
        assert parsed.prob_category == "medium_to_upper"
        assert parsed.raw_response == response

    def test_invalid_direction_keeps_raw(self):
        parsed = parse_prediction("acme", "2021-03", "no signal either way")
        assert parsed.direction == "invalid"
        assert parsed.prob_category is None
