import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from textmend.baseline import correct_sentence, correct_word

from conftest import make_lexicon


@pytest.fixture
def lex():
    return make_lexicon(
        "the 400", "a 500", "man 80", "is 300", "driving 40", "car 90",
        "can 35", "cat 20", "##ing 50",
    )


class TestCorrectWord:
    def test_keyboard_typo_fixed(self, lex):
        assert correct_word("dricing", lex) == "driving"

    def test_known_word_unchanged(self, lex):
        assert correct_word("driving", lex) == "driving"

    def test_no_candidate_within_two(self, lex):
        assert correct_word("xqzvvv", lex) == "xqzvvv"

    def test_smaller_distance_beats_higher_frequency(self, lex):
        # "cat" is distance 1 from "cam", "a" is distance 2 but more frequent
        assert correct_word("cam", lex) in {"cat", "can", "car", "man"}
        assert correct_word("cam", lex) == "car"  # distance 1, highest frequency

    def test_frequency_breaks_ties_within_distance(self, lex):
        # "cai" -> car/can/cat all at distance 1; car has highest frequency
        assert correct_word("cai", lex) == "car"

    def test_continuation_pieces_are_not_words(self, lex):
        assert correct_word("inng", lex) != "ing"

    def test_case_folds(self, lex):
        assert correct_word("DRICING", lex) == "driving"


class TestCorrectSentence:
    def test_word_by_word(self, lex):
        assert correct_sentence("A wan is dricing a car", lex) == "a man is driving a car"

    def test_idempotent(self, lex):
        once = correct_sentence("A wan is dricing a zzzzzzz", lex)
        assert correct_sentence(once, lex) == once

    @settings(max_examples=50)
    @given(st.lists(st.sampled_from(["the", "a", "man", "is", "driving", "car"]), min_size=1, max_size=6))
    def test_never_changes_in_vocabulary_words(self, words):
        lex = make_lexicon("the 400", "a 500", "man 80", "is 300", "driving 40", "car 90")
        sentence = " ".join(words)
        assert correct_sentence(sentence, lex) == sentence
