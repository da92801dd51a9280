"""Stage 3: collapse hypotheses to sentences and pick the most fluent one.

Each refined hypothesis collapses to a sentence by taking the argmax piece
per slot; a sequence scorer rates each sentence; the softmaxed fluency
scores multiply the segmentation priors (character-level and semantic
evidence are independent) and the highest product wins.
"""

from __future__ import annotations

from dataclasses import dataclass

from .context import ScorerError
from .lexicon import Lexicon
from .ngram import NGramModel, sentence_to_pieces
from .probs import softmax_scores


class SequenceScorer:
    """Interface: finite fluency score for a sentence, higher is better."""

    kind = "abstract"

    def score(self, sentence: str) -> float:
        raise NotImplementedError


class NGramSequenceScorer(SequenceScorer):
    """Mean per-piece log probability under an n-gram model.

    Length normalization keeps hypotheses with different slot counts
    comparable; perplexity is a monotone transform of this score.
    """

    kind = "ngram_builtin"

    def __init__(self, model: NGramModel, lexicon: Lexicon):
        self.model = model
        self.lexicon = lexicon

    def score(self, sentence: str) -> float:
        pieces, _ = sentence_to_pieces(sentence, self.lexicon)
        if not pieces:
            raise ScorerError(f"cannot word-piece tokenize {sentence!r}")
        return self.model.sequence_logprob(pieces)


def _attaches_to_previous(surface: str, is_continuation: bool) -> bool:
    # single punctuation pieces glue to the previous word, like continuations
    return is_continuation or (len(surface) == 1 and not surface.isalnum())


def collapse(hypothesis, lexicon: Lexicon) -> str:
    """Argmax sentence for a hypothesis.

    Continuation pieces and single-character punctuation pieces concatenate
    to the preceding piece without a space; everything else joins with
    single spaces.  Argmax ties resolve to the lowest piece id.
    """
    words = []
    for slot in hypothesis.slots:
        pid = slot.argmax()
        entry = lexicon.entry(pid)
        if words and _attaches_to_previous(entry.surface, entry.is_continuation):
            words[-1] += entry.surface
        else:
            words.append(entry.surface)
    return " ".join(words)


@dataclass
class SelectionResult:
    sentence: str
    winner_index: int
    diagnostics: dict


def select(hypotheses, scorer: SequenceScorer, lexicon: Lexicon, tau_lm: float = 0.005) -> SelectionResult:
    """Pick the winning hypothesis by fluency-times-prior.

    On scorer failure, falls back to the segmentation priors alone and
    flags the fallback in the diagnostics.
    """
    if not hypotheses:
        raise ValueError("need at least one hypothesis")
    sentences = [collapse(h, lexicon) for h in hypotheses]
    priors = [h.prob for h in hypotheses]

    lm_scores = None
    fallback = False
    try:
        lm_scores = [scorer.score(s) for s in sentences]
    except ScorerError:
        fallback = True

    if fallback:
        lm_probs = [1.0 / len(hypotheses)] * len(hypotheses)
    else:
        lm_probs = softmax_scores(lm_scores, tau_lm)
    joint = [q * p for q, p in zip(lm_probs, priors)]
    total = sum(joint)
    final = [x / total for x in joint]
    winner = min(range(len(final)), key=lambda i: (-final[i], i))

    return SelectionResult(
        sentence=sentences[winner],
        winner_index=winner,
        diagnostics={
            "sentences": sentences,
            "segmentation_priors": priors,
            "lm_scores": lm_scores,
            "lm_probs": lm_probs,
            "final_probs": final,
            "winner_index": winner,
            "lm_fallback": fallback,
            "scorer_kind": scorer.kind,
            "refinement_failed": [h.refinement_failed for h in hypotheses],
        },
    )
