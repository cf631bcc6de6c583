import math
import random
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialscore.geometry import BBox, ioa
from spatialscore.subrewards import (
    DELTA_CAT8,
    DELTA_CONT,
    SubRewardVector,
    assign_depth_ranks,
    circular_distance,
    color_reward,
    count_reward,
    depth_reward,
    edit_distance,
    lexical_similarity,
    normalize_text,
    orientation_reward,
    presence_reward,
    text_reward,
)
from tests.conftest import random_box


# --- independent oracles ------------------------------------------------------

def edit_distance_recursive(a: str, b: str) -> int:
    """Textbook recurrence, memoized; deliberately unlike the two-row DP."""

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


def rank_oracle(depths):
    """Rank by repeated min-extraction instead of a single sort."""
    remaining = {i: pair for i, pair in enumerate(depths)}
    ranks = [0] * len(depths)
    rank = 1
    while remaining:
        best = min(remaining, key=lambda i: (remaining[i][0], remaining[i][1]))
        ranks[best] = rank
        del remaining[best]
        rank += 1
    return ranks


# --- scalar formulas ----------------------------------------------------------

class TestScalars:
    def test_presence(self):
        assert presence_reward([]) == 0.0
        assert presence_reward([object()]) == 1.0
        assert presence_reward(("a", "b")) == 1.0

    def test_count_exact(self):
        assert count_reward(3, 3) == 1.0

    def test_count_off_by_one(self):
        assert count_reward(2, 3) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_count_zero_detected(self):
        assert count_reward(0, 2) == pytest.approx(math.exp(-2), abs=1e-15)

    def test_count_validation(self):
        with pytest.raises(ValueError):
            count_reward(-1, 2)
        with pytest.raises(ValueError):
            count_reward(2, 0)

    def test_color_binary(self):
        assert color_reward("red", "red") == 1.0
        assert color_reward("blue", "red") == 0.0
        assert color_reward(None, "red") == 0.0

    def test_color_synonyms_fold_both_sides(self):
        assert color_reward("grey", "gray") == 1.0
        assert color_reward("violet", "purple") == 1.0

    def test_depth_formula(self):
        assert depth_reward(1, 1) == 1.0
        assert depth_reward(3, 1) == pytest.approx(math.exp(-2), abs=1e-15)
        with pytest.raises(ValueError):
            depth_reward(0, 1)

    @given(st.integers(0, 50), st.integers(1, 50))
    def test_count_matches_formula(self, n, target):
        assert count_reward(n, target) == math.exp(-abs(n - target))


class TestCircular:
    def test_wraparound(self):
        assert circular_distance(350.0, 10.0) == 20.0
        assert orientation_reward(350.0, 10.0, DELTA_CONT) == 1.0

    def test_boundary_inclusive(self):
        assert orientation_reward(0.0, 45.0, DELTA_CAT8) == 1.0
        assert orientation_reward(0.0, 45.001, DELTA_CAT8) == 0.0
        assert orientation_reward(0.0, 22.5, DELTA_CONT) == 1.0
        assert orientation_reward(0.0, 22.6, DELTA_CONT) == 0.0

    def test_antipodal(self):
        assert circular_distance(0.0, 180.0) == 180.0

    def test_negative_delta_rejected(self):
        with pytest.raises(ValueError):
            orientation_reward(0.0, 0.0, -1.0)

    @given(st.floats(0, 360, exclude_max=True), st.floats(0, 360, exclude_max=True))
    def test_symmetric_and_bounded(self, a, b):
        d = circular_distance(a, b)
        assert d == circular_distance(b, a)
        assert 0.0 <= d <= 180.0

    @given(st.floats(0, 360, exclude_max=True), st.integers(-3, 3))
    def test_full_turns_collapse(self, a, k):
        assert circular_distance(a + k * 360.0, a) == pytest.approx(0.0, abs=1e-9)


class TestDepthRanks:
    def test_plain_order(self):
        assert assign_depth_ranks([(0.9, 0.1), (0.2, 0.5), (0.5, 0.3)]) == [3, 1, 2]

    def test_tie_breaks_on_x0(self):
        assert assign_depth_ranks([(0.5, 0.8), (0.5, 0.1)]) == [2, 1]

    def test_empty(self):
        assert assign_depth_ranks([]) == []

    def test_matches_min_extraction_oracle(self, rng):
        for _ in range(300):
            n = rng.randrange(0, 8)
            depths = [
                (rng.choice([0.2, 0.5, 0.9, rng.random()]), round(rng.random(), 2))
                for _ in range(n)
            ]
            assert assign_depth_ranks(depths) == rank_oracle(depths)


# --- text ----------------------------------------------------------------------

class TestNormalizeText:
    @pytest.mark.parametrize("raw,expected", [
        ("OPEN", "open"),
        ("  stop!  ", "stop"),
        ("Hello,   World", "hello, world"),
        ("--EXIT--", "exit"),
        ("", ""),
        ("!!!", ""),
        ("Café", "café"),
        ("Café", "café"),  # NFC composes the combining accent
    ])
    def test_cases(self, raw, expected):
        assert normalize_text(raw) == expected


class TestEditDistance:
    @pytest.mark.parametrize("a,b,d", [
        ("", "", 0),
        ("abc", "", 3),
        ("", "abc", 3),
        ("kitten", "sitting", 3),
        ("flaw", "lawn", 2),
        ("same", "same", 0),
    ])
    def test_known(self, a, b, d):
        assert edit_distance(a, b) == d

    @given(st.text(alphabet="abcde", max_size=8), st.text(alphabet="abcde", max_size=8))
    @settings(max_examples=300)
    def test_matches_recursive_oracle(self, a, b):
        assert edit_distance(a, b) == edit_distance_recursive(a, b)

    @given(st.text(max_size=12), st.text(max_size=12))
    def test_metric_properties(self, a, b):
        d = edit_distance(a, b)
        assert d == edit_distance(b, a)
        assert (d == 0) == (a == b)
        assert d <= max(len(a), len(b))


class TestLexicalSimilarity:
    def test_identical(self):
        assert lexical_similarity("OPEN", "open") == 1.0

    def test_both_empty(self):
        assert lexical_similarity("", "") == 1.0
        assert lexical_similarity("!!!", "...") == 1.0

    def test_one_empty(self):
        assert lexical_similarity("open", "") == 0.0

    def test_partial(self):
        # normalized: "open" vs "oxen" -> distance 1 over length 4
        assert lexical_similarity("OPEN", "oxen") == pytest.approx(0.75)

    @given(st.text(max_size=16), st.text(max_size=16))
    def test_range(self, a, b):
        assert 0.0 <= lexical_similarity(a, b) <= 1.0


class TestTextReward:
    def test_empty_detections(self):
        assert text_reward("OPEN", BBox(0, 0, 1, 1), []) == 0.0

    def test_exact_containment(self):
        obj = BBox(0.1, 0.1, 0.9, 0.9)
        word = BBox(0.3, 0.3, 0.5, 0.5)
        assert text_reward("OPEN", obj, [("open", word)]) == 1.0

    def test_outside_box_scores_zero(self):
        obj = BBox(0.0, 0.0, 0.4, 0.4)
        word = BBox(0.6, 0.6, 0.9, 0.9)
        assert text_reward("OPEN", obj, [("OPEN", word)]) == 0.0

    def test_picks_best_joint_product(self):
        obj = BBox(0.0, 0.0, 0.5, 1.0)
        inside = BBox(0.1, 0.1, 0.2, 0.2)         # ioa 1.0
        half = BBox(0.4, 0.0, 0.6, 1.0)           # ioa 0.5
        # perfect text half-contained (0.5) loses to 0.75-text fully contained
        got = text_reward("open", obj, [("open", half), ("oxen", inside)])
        assert got == pytest.approx(0.75)

    def test_matches_bruteforce(self, rng):
        obj = BBox(0.2, 0.2, 0.8, 0.8)
        words = ["OPEN", "STOP", "EXIT", "SALE", "MENU", "GO", ""]
        for _ in range(200):
            target = rng.choice(words)
            cands = [
                (rng.choice(words), random_box(rng))
                for _ in range(rng.randrange(0, 6))
            ]
            expect = max(
                (lexical_similarity(target, t) * ioa(b, obj) for t, b in cands),
                default=0.0,
            )
            assert text_reward(target, obj, cands) == expect


class TestSubRewardVector:
    def test_facets_order_and_optionality(self):
        v = SubRewardVector(presence=1.0, color=0.0, text=0.5)
        assert list(v.facets().items()) == [
            ("presence", 1.0), ("color", 0.0), ("text", 0.5),
        ]

    def test_full_vector(self):
        v = SubRewardVector(
            presence=1.0, count=0.5, color=1.0, orientation=0.0, depth=0.3, text=0.2,
        )
        assert list(v.facets()) == [
            "presence", "count", "color", "orientation", "depth", "text",
        ]

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SubRewardVector(presence=1.5)
        with pytest.raises(ValueError):
            SubRewardVector(presence=1.0, count=-0.1)
        with pytest.raises(ValueError):
            SubRewardVector(presence=float("nan"))
