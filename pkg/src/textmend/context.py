"""Stage 2: iterative masked-context refinement of slot distributions.

One slot at a time (round-robin) is masked; a pluggable scorer rates the
masked slot's candidates given the distributions over the surrounding slots;
the softmaxed scores multiply the slot's *original* context-independent
distribution to form its new posterior, which then serves as context for
later iterations.  The built-in scorer rates candidates with an n-gram model
by taking expected log probabilities over the context slots' top candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .lattice import REFINED, SegmentationHypothesis, VocabDistribution
from .ngram import NGramModel
from .probs import normalize, softmax_scores

CONTEXT_TOP_K = 8
UNSCORED = -1e4  # score for candidates a scorer cannot map


class ScorerError(RuntimeError):
    """A scorer could not produce scores (transport failure, bad model...)."""


@dataclass(frozen=True)
class MaskedScoreRequest:
    """Slot distributions (already truncated to the top candidates) with one
    masked position whose candidates are to be scored."""

    slots: tuple  # per slot: tuple of (piece_id, prob), normalized
    mask_index: int
    candidate_ids: tuple

    def __post_init__(self):
        if not 0 <= self.mask_index < len(self.slots):
            raise ValueError("mask index out of range")


class MaskedContextScorer:
    """Interface: return one finite score per candidate of the masked slot."""

    kind = "abstract"

    def mask_scores(self, request: MaskedScoreRequest) -> dict:
        raise NotImplementedError


def refine(
    hypothesis: SegmentationHypothesis,
    scorer: MaskedContextScorer,
    tau_ctx: float = 0.25,
    iterations: int | None = None,
    context_top_k: int = CONTEXT_TOP_K,
) -> SegmentationHypothesis:
    """Run masked-context refinement over a hypothesis's slots.

    Masking is round-robin; each update multiplies the softmaxed context
    scores into the original context-independent distribution (the context
    and the surface evidence are independent), then renormalizes.  On
    scorer failure the hypothesis is returned unrefined with
    `refinement_failed` set, so the pipeline can degrade gracefully.
    """
    n = len(hypothesis.slots)
    if iterations is None:
        iterations = 2 * n
    base = [dict(slot.probs) for slot in hypothesis.slots]
    current = [dict(p) for p in base]

    for step in range(iterations):
        j = step % n
        request = MaskedScoreRequest(
            slots=tuple(
                tuple(VocabDistribution(probs).top_k(context_top_k)) for probs in current
            ),
            mask_index=j,
            candidate_ids=tuple(sorted(base[j])),
        )
        try:
            scores = scorer.mask_scores(request)
        except ScorerError:
            return replace(hypothesis, refinement_failed=True)
        ordered = request.candidate_ids
        context_probs = softmax_scores(
            [scores.get(pid, UNSCORED) for pid in ordered], tau_ctx
        )
        current[j] = normalize(
            {pid: base[j][pid] * cp for pid, cp in zip(ordered, context_probs)}
        )

    return replace(
        hypothesis,
        slots=[VocabDistribution(probs=p, provenance=REFINED) for p in current],
    )


class NGramMaskedScorer(MaskedContextScorer):
    """Masked-slot scoring from an n-gram model.

    A candidate's score sums, over every model-order window that covers the
    masked position, the log of the window's marginal probability under the
    mixture of the context slots' top candidates (the masked slot itself is
    replaced by the candidate, never by its own distribution).  Mixing the
    context before taking the log mirrors how the transformer scorer feeds
    probability-weighted average embeddings, and keeps one implausible
    context candidate from vetoing the whole window.
    """

    kind = "ngram_builtin"

    def __init__(self, model: NGramModel, context_top_k: int = CONTEXT_TOP_K):
        self.model = model
        self.context_top_k = context_top_k

    def mask_scores(self, request: MaskedScoreRequest) -> dict:
        return ngram_score(request, self.model, self.context_top_k)


def _weighted_assignments(slot_lists):
    """Cartesian product of (id, prob) slot lists with joint weights."""
    assignments = [((), 1.0)]
    for options in slot_lists:
        assignments = [
            (ids + (pid,), w * p) for ids, w in assignments for pid, p in options
        ]
    return assignments


def ngram_score(request: MaskedScoreRequest, model: NGramModel, context_top_k: int = CONTEXT_TOP_K) -> dict:
    """Marginal-window log-probability scores for the masked candidates."""
    slots = [list(slot)[:context_top_k] for slot in request.slots]
    slots = [
        [(pid, p / total) for pid, p in slot]
        for slot, total in ((s, sum(p for _, p in s)) for s in slots)
    ]
    j = request.mask_index
    length = len(slots)
    candidates = request.candidate_ids
    totals = {pid: 0.0 for pid in candidates}

    marginal_cache = {}

    def marginal_prob(ctx, predicted_slot_index):
        key = (ctx, predicted_slot_index)
        if key not in marginal_cache:
            marginal_cache[key] = sum(
                p * model.prob(ctx, wid) for wid, p in slots[predicted_slot_index]
            )
        return marginal_cache[key]

    for predicted in range(j, min(j + model.order, length)):
        start = max(0, predicted - model.order + 1)
        context_positions = list(range(start, predicted))
        others = [pos for pos in context_positions if pos != j]
        combos = _weighted_assignments([slots[pos] for pos in others])
        if predicted == j:
            for pid in candidates:
                mass = 0.0
                for ids, weight in combos:
                    ctx = dict(zip(others, ids))
                    ctx_ids = tuple(ctx[pos] for pos in context_positions)
                    mass += weight * model.prob(ctx_ids, pid)
                totals[pid] += math.log(mass)
        else:
            for pid in candidates:
                mass = 0.0
                for ids, weight in combos:
                    ctx = dict(zip(others, ids))
                    ctx[j] = pid
                    ctx_ids = tuple(ctx[pos] for pos in context_positions)
                    mass += weight * marginal_prob(ctx_ids, predicted)
                totals[pid] += math.log(mass)
    return totals
