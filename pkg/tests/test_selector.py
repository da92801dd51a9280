import pytest
from hypothesis import given
from hypothesis import strategies as st

from textmend.context import ScorerError
from textmend.lattice import SegmentationHypothesis, VocabDistribution
from textmend.probs import softmax_scores
from textmend.selector import (
    NGramSequenceScorer,
    SequenceScorer,
    SelectionResult,
    collapse,
    select,
)
from textmend.ngram import train_ngram

from conftest import make_lexicon


def make_hypothesis(slot_probs, prob=1.0, loss=0.0):
    slots = [VocabDistribution(probs=dict(p)) for p in slot_probs]
    return SegmentationHypothesis(
        token_spans=(((1, 1),),) * len(slots),
        loss=loss,
        prob=prob,
        slots=slots,
        slot_tokens=tuple(range(len(slots))),
    )


class FixedScorer(SequenceScorer):
    kind = "test_fixed"

    def __init__(self, table):
        self.table = table

    def score(self, sentence):
        return self.table[sentence]


class FailingScorer(SequenceScorer):
    kind = "test_failing"

    def score(self, sentence):
        raise ScorerError("down")


class TestCollapse:
    def test_plain_words_join_with_spaces(self):
        lex = make_lexicon("two", "large", "dogs")
        hyp = make_hypothesis([{0: 1.0}, {1: 1.0}, {2: 1.0}])
        assert collapse(hyp, lex) == "two large dogs"

    def test_continuation_pieces_attach(self):
        lex = make_lexicon("run", "##ning")
        hyp = make_hypothesis([{0: 1.0}, {1: 1.0}])
        assert collapse(hyp, lex) == "running"

    def test_argmax_tie_takes_lower_id(self):
        lex = make_lexicon("alpha", "beta")
        hyp = make_hypothesis([{1: 0.5, 0: 0.5}])
        assert collapse(hyp, lex) == "alpha"

    def test_punctuation_attaches_to_previous_word(self):
        lex = make_lexicon("car", ".")
        hyp = make_hypothesis([{0: 1.0}, {1: 1.0}])
        assert collapse(hyp, lex) == "car."

    def test_deterministic(self):
        lex = make_lexicon("a", "b")
        hyp = make_hypothesis([{0: 0.6, 1: 0.4}])
        assert collapse(hyp, lex) == collapse(hyp, lex)


class TestSelect:
    def test_single_hypothesis_wins_outright(self):
        lex = make_lexicon("dog")
        hyp = make_hypothesis([{0: 1.0}], prob=1.0)
        result = select([hyp], FixedScorer({"dog": -1.0}), lex)
        assert result.sentence == "dog"
        assert result.diagnostics["final_probs"] == [pytest.approx(1.0)]

    def test_equal_lm_scores_reduce_to_prior(self):
        lex = make_lexicon("dog", "dot")
        h1 = make_hypothesis([{0: 1.0}], prob=0.7)
        h2 = make_hypothesis([{1: 1.0}], prob=0.3)
        result = select([h1, h2], FixedScorer({"dog": -2.0, "dot": -2.0}), lex)
        assert result.winner_index == 0
        assert result.diagnostics["final_probs"][0] == pytest.approx(0.7)

    def test_joint_probability_hand_example(self):
        # priors (0.8, 0.2) x lm softmax (0.1, 0.9) -> finals (0.308, 0.692)
        lex = make_lexicon("dog", "dot")
        h1 = make_hypothesis([{0: 1.0}], prob=0.8)
        h2 = make_hypothesis([{1: 1.0}], prob=0.2)

        class TiltedScorer(SequenceScorer):
            kind = "test_tilted"

            def score(self, sentence):
                import math

                return math.log(0.1) if sentence == "dog" else math.log(0.9)

        result = select([h1, h2], TiltedScorer(), lex, tau_lm=1.0)
        assert result.diagnostics["final_probs"][0] == pytest.approx(0.308, abs=1e-3)
        assert result.diagnostics["final_probs"][1] == pytest.approx(0.692, abs=1e-3)
        assert result.winner_index == 1

    def test_scorer_failure_falls_back_to_priors(self):
        lex = make_lexicon("dog", "dot")
        h1 = make_hypothesis([{0: 1.0}], prob=0.7)
        h2 = make_hypothesis([{1: 1.0}], prob=0.3)
        result = select([h1, h2], FailingScorer(), lex)
        assert result.winner_index == 0
        assert result.diagnostics["lm_fallback"]
        assert result.diagnostics["lm_scores"] is None

    def test_final_distribution_normalized(self):
        lex = make_lexicon("a", "b", "c")
        hyps = [make_hypothesis([{i: 1.0}], prob=p) for i, p in enumerate([0.5, 0.3, 0.2])]
        scorer = FixedScorer({"a": -1.0, "b": -5.0, "c": -2.5})
        result = select(hyps, scorer, lex, tau_lm=1.0)
        assert sum(result.diagnostics["final_probs"]) == pytest.approx(1.0, abs=1e-9)

    @given(st.floats(0.1, 10.0))
    def test_lm_score_shift_invariance(self, shift):
        scores = [-3.0, -1.0, -2.0]
        base = softmax_scores(scores, 0.5)
        shifted = softmax_scores([s + shift for s in scores], 0.5)
        for a, b in zip(base, shifted):
            assert a == pytest.approx(b, abs=1e-9)

    @given(st.floats(0.5, 4.0))
    def test_joint_scale_invariance_keeps_winner(self, scale):
        lex = make_lexicon("a", "b")
        h1 = make_hypothesis([{0: 1.0}], prob=0.6)
        h2 = make_hypothesis([{1: 1.0}], prob=0.4)
        base = select([h1, h2], FixedScorer({"a": -1.0, "b": -1.4}), lex, tau_lm=0.2)
        scaled = select(
            [h1, h2],
            FixedScorer({"a": -1.0 * scale, "b": -1.4 * scale}),
            lex,
            tau_lm=0.2 * scale,
        )
        assert base.winner_index == scaled.winner_index
        for a, b in zip(
            base.diagnostics["final_probs"], scaled.diagnostics["final_probs"]
        ):
            assert a == pytest.approx(b, abs=1e-9)


class TestNGramSequenceScorer:
    def test_fluent_sentence_scores_higher(self, tmp_path):
        lex = make_lexicon("the", "dog", "runs")
        corpus = tmp_path / "c.txt"
        corpus.write_text("the dog runs\n" * 20, encoding="utf-8")
        scorer = NGramSequenceScorer(train_ngram(corpus, lex, order=3), lex)
        assert scorer.score("the dog runs") > scorer.score("dog the runs")

    def test_untokenizable_sentence_raises_scorer_error(self, tmp_path):
        lex = make_lexicon("a")
        corpus = tmp_path / "c.txt"
        corpus.write_text("a a\n", encoding="utf-8")
        scorer = NGramSequenceScorer(train_ngram(corpus, lex, order=2), lex)
        with pytest.raises(ScorerError):
            scorer.score("zzz")
