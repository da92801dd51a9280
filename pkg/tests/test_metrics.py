import pytest
from hypothesis import given
from hypothesis import strategies as st

from textmend.metrics import (
    edit_distance,
    ppr,
    semantic_similarity,
    similarity_metric_name,
    token_f1,
)

from oracles import plain_edit_distance

short = st.text(alphabet="abcd ", max_size=10)


class TestEditDistance:
    def test_equal_strings(self):
        assert edit_distance("abc", "abc") == 0

    def test_kitten_sitting(self):
        assert edit_distance("kitten", "sitting") == 3

    def test_case_is_ignored(self):
        assert edit_distance("A Car", "a car") == 0

    def test_no_swap_operation(self):
        # a transposition costs two unit edits here
        assert edit_distance("acr", "car") == 2

    @given(short, short)
    def test_matches_textbook_dp(self, a, b):
        assert edit_distance(a, b) == plain_edit_distance(a.casefold(), b.casefold())

    @given(short, short)
    def test_symmetry(self, a, b):
        assert edit_distance(a, b) == edit_distance(b, a)

    @given(short, short)
    def test_identity_of_indiscernibles(self, a, b):
        assert (edit_distance(a, b) == 0) == (a.casefold() == b.casefold())

    @given(short, short, short)
    def test_triangle_inequality(self, a, b, c):
        assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


class TestPPR:
    def test_all_perfect(self):
        assert ppr([("a car", "a car"), ("dog", "DOG")]) == 100.0

    def test_none_perfect(self):
        assert ppr([("a", "b"), ("c", "d")]) == 0.0

    def test_quarter(self):
        pairs = [("x", "x"), ("a", "b"), ("c", "d"), ("e", "f")]
        assert ppr(pairs) == 25.0

    def test_order_invariant(self):
        pairs = [("x", "x"), ("a", "b"), ("c", "d")]
        assert ppr(pairs) == ppr(list(reversed(pairs)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            ppr([])


class TestSimilarityProxy:
    def test_identical(self):
        assert semantic_similarity("two large dogs", "two large dogs") == 1.0

    def test_disjoint(self):
        assert semantic_similarity("aa bb", "cc dd") == 0.0

    def test_two_of_three_overlap(self):
        assert semantic_similarity("two large dogs", "two small dogs") == pytest.approx(2 / 3)

    def test_duplicates_counted_as_bags(self):
        assert token_f1("a a b", "a b b") == pytest.approx(4 / 6)

    def test_metric_name_labels_proxy(self):
        assert similarity_metric_name(None) == "token_f1"

    class _FakeClient:
        def moverscore(self, hyp, ref):
            return 0.42

    def test_service_scorer_used_when_attached(self):
        client = self._FakeClient()
        assert semantic_similarity("a", "b", client) == 0.42
        assert similarity_metric_name(client) == "moverscore"
