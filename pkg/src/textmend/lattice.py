"""Stage 1: per-token candidate matching and segmentation hypotheses.

Every token of the attacked sentence is matched against the whole word-piece
dictionary with the substring edit distance.  Optimal match spans populate a
span table per token; exact tilings of the token by those spans form its
candidate segmentations; the Cartesian product across tokens (expanded
best-first, never materialised) yields the sentence hypotheses, each carrying
a softmax prior over the kept set and one candidate distribution per slot.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

from .editdist import CostModel, anagram_distance, substring_distance
from .lexicon import Lexicon
from .probs import softmax_neg

CONTEXT_INDEPENDENT = "context_independent"
REFINED = "refined"

# Safety valve for pathological tokens whose span tables admit very many
# tilings; the search stops expanding beyond this and keeps what it found
# (the whole-token tiling is guaranteed to be present regardless).
MAX_TILINGS_PER_TOKEN = 20000


@dataclass(frozen=True)
class VocabDistribution:
    """Sparse probability distribution over word-piece ids for one slot."""

    probs: dict
    provenance: str = CONTEXT_INDEPENDENT

    def argmax(self) -> int:
        # ties resolved toward the lowest piece id
        return min(self.probs, key=lambda pid: (-self.probs[pid], pid))

    def top_k(self, k: int):
        """Highest-probability (id, prob) pairs, renormalized."""
        items = sorted(self.probs.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        total = sum(p for _, p in items)
        return [(pid, p / total) for pid, p in items]


@dataclass
class MatchSpanTable:
    """Candidate word-pieces per (start, end) span of one token."""

    token_index: int
    token_length: int
    spans: dict = field(default_factory=dict)  # (start, end) -> [(piece_id, distance)]

    def min_distance(self, span) -> float:
        return self.spans[span][0][1]


@dataclass
class SegmentationHypothesis:
    """One tiling of every sentence token into word-piece slots."""

    token_spans: tuple  # per token: tuple of (start, end) spans
    loss: float
    prob: float
    slots: list  # VocabDistribution per span, across all tokens in order
    slot_tokens: tuple  # token index per slot
    refinement_failed: bool = False

    def __len__(self):
        return len(self.slots)


def match_token(
    token: str,
    lexicon: Lexicon,
    cost_model: CostModel | None = None,
    keep_delta: float = 2.0,
    max_candidates_per_span: int = 64,
    token_index: int = 0,
    length_prune: bool = True,
) -> MatchSpanTable:
    """Scan the dictionary and collect candidate pieces at their optimal
    match spans, plus a whole-token candidate for every stand-alone piece.

    Within each span, candidates worse than the span's best distance plus
    `keep_delta` are dropped and at most `max_candidates_per_span` are kept.
    Pieces longer than the token by more than the question could possibly
    recover are skipped before the DP runs; the skip threshold uses the
    cheapest possible insertion cost, so it never drops a candidate the
    keep_delta rule would have retained at the token's best spans.
    """
    if not token:
        raise ValueError("cannot match an empty token")
    if cost_model is None:
        cost_model = CostModel()
    n = len(token)
    full_span = (1, n)
    min_insert = cost_model.min_insertion_cost(token)
    spans: dict = {}
    # Pruning threshold tracks the best whole-token distance seen so far:
    # the length-difference bound holds for every span of the token, and
    # using the (never smaller) full-span best keeps the skip conservative.
    best_full_seen = float("inf")

    for entry in lexicon:
        surface = entry.surface
        if length_prune and (len(surface) - n) * min_insert > best_full_seen + keep_delta:
            continue
        result = substring_distance(token, surface, cost_model)
        if result.full_span_distance < best_full_seen:
            best_full_seen = result.full_span_distance
        for start, end in result.spans:
            if end < start:
                continue  # empty matches cannot take part in a tiling
            if entry.is_continuation and start == 1:
                continue  # continuation pieces never begin a token
            spans.setdefault((start, end), []).append((entry.piece_id, result.distance))
        if not entry.is_continuation:
            full = result.full_span_distance
            if cost_model.is_domain_specific:
                full = min(full, float(anagram_distance(token, surface)))
            spans.setdefault(full_span, []).append((entry.piece_id, full))

    if full_span not in spans:
        raise ValueError("lexicon has no stand-alone pieces; cannot build a full-span candidate")

    pruned = {}
    for span, candidates in spans.items():
        # a piece can reach the same span through both routes; keep its best
        best_per_piece: dict = {}
        for pid, dist in candidates:
            if pid not in best_per_piece or dist < best_per_piece[pid]:
                best_per_piece[pid] = dist
        ordered = sorted(best_per_piece.items(), key=lambda kv: (kv[1], kv[0]))
        cutoff = ordered[0][1] + keep_delta
        kept = [(pid, dist) for pid, dist in ordered if dist <= cutoff]
        pruned[span] = kept[:max_candidates_per_span]
    return MatchSpanTable(token_index=token_index, token_length=n, spans=pruned)


def enumerate_segmentations(table: MatchSpanTable, limit: int = MAX_TILINGS_PER_TOKEN):
    """Exact tilings of the token by the table's spans, each with its total
    distance (the sum of the minimum candidate distance per span).

    Tilings are generated best-first (cheapest-completion lower bounds make
    the search exact), so when a pathological token admits more than `limit`
    tilings, the ones kept are the lowest-distance ones.  Returns a list of
    (tiling, total_distance) sorted by distance then tiling, always
    containing the whole-token tiling.
    """
    full_span = (1, table.token_length)
    if full_span not in table.spans:
        raise ValueError("span table lacks the guaranteed whole-token span")
    by_start: dict = {}
    for span in table.spans:
        by_start.setdefault(span[0], []).append(span)
    for start in by_start:
        by_start[start].sort()

    length = table.token_length
    infinity = float("inf")
    # cheapest way to tile the suffix starting at each position
    suffix = [infinity] * (length + 2)
    suffix[length + 1] = 0.0
    for position in range(length, 0, -1):
        best = infinity
        for span in by_start.get(position, ()):
            cost = table.min_distance(span) + suffix[span[1] + 1]
            if cost < best:
                best = cost
        suffix[position] = best

    tilings = []
    heap = [(suffix[1], 1, ())]
    while heap and len(tilings) < limit:
        bound, position, spans = heapq.heappop(heap)
        if position > length:
            tilings.append((spans, bound))
            continue
        consumed = bound - suffix[position]
        for span in by_start.get(position, ()):
            tail = suffix[span[1] + 1]
            if tail == infinity:
                continue
            new_bound = consumed + table.min_distance(span) + tail
            heapq.heappush(heap, (new_bound, span[1] + 1, spans + (span,)))

    if all(t != (full_span,) for t, _ in tilings):
        tilings.append(((full_span,), table.min_distance(full_span)))
    tilings.sort(key=lambda td: (td[1], td[0]))
    return tilings


def _product_lowest_losses(tiling_lists, limit):
    """Best-first expansion of the Cartesian product of per-token tiling
    lists (each sorted by distance), yielding index vectors of the `limit`
    lowest total distances without materialising the product."""
    base = sum(lst[0][1] for lst in tiling_lists)
    start = (0,) * len(tiling_lists)
    heap = [(base, start)]
    seen = {start}
    emitted = []
    while heap and len(emitted) < limit:
        loss, vector = heapq.heappop(heap)
        emitted.append((loss, vector))
        for axis, lst in enumerate(tiling_lists):
            nxt = vector[axis] + 1
            if nxt < len(lst):
                successor = vector[:axis] + (nxt,) + vector[axis + 1:]
                if successor not in seen:
                    seen.add(successor)
                    delta = lst[nxt][1] - lst[vector[axis]][1]
                    heapq.heappush(heap, (loss + delta, successor))
    return emitted


def build_hypotheses(
    tokens,
    lexicon: Lexicon,
    cost_model: CostModel | None = None,
    tau_hyp: float = 10.0,
    tau_word: float = 1.0,
    max_hypotheses: int = 10,
    keep_delta: float = 2.0,
    max_candidates_per_span: int = 64,
) -> list:
    """Build the `max_hypotheses` lowest-loss segmentation hypotheses for a
    tokenized sentence.  Truncation happens before the prior softmax, which
    is then renormalized over the kept set."""
    if not tokens:
        raise ValueError("need at least one token")
    if max_hypotheses < 1:
        raise ValueError("max_hypotheses must be >= 1")

    tables = [
        match_token(
            token,
            lexicon,
            cost_model,
            keep_delta=keep_delta,
            max_candidates_per_span=max_candidates_per_span,
            token_index=i,
        )
        for i, token in enumerate(tokens)
    ]
    tiling_lists = [enumerate_segmentations(table) for table in tables]
    kept = _product_lowest_losses(tiling_lists, max_hypotheses)

    priors = softmax_neg([loss for loss, _ in kept], tau_hyp)
    hypotheses = []
    for (loss, vector), prior in zip(kept, priors):
        slots = []
        slot_tokens = []
        token_spans = []
        for token_idx, tiling_idx in enumerate(vector):
            tiling = tiling_lists[token_idx][tiling_idx][0]
            token_spans.append(tiling)
            for span in tiling:
                candidates = tables[token_idx].spans[span]
                weights = softmax_neg([d for _, d in candidates], tau_word)
                slots.append(
                    VocabDistribution(
                        probs={pid: w for (pid, _), w in zip(candidates, weights)},
                        provenance=CONTEXT_INDEPENDENT,
                    )
                )
                slot_tokens.append(token_idx)
        hypotheses.append(
            SegmentationHypothesis(
                token_spans=tuple(token_spans),
                loss=loss,
                prob=prior,
                slots=slots,
                slot_tokens=tuple(slot_tokens),
            )
        )
    return hypotheses


def with_slots(hypothesis: SegmentationHypothesis, slots, provenance=REFINED):
    """Copy of a hypothesis with replaced slot distributions."""
    new_slots = [VocabDistribution(probs=dict(p), provenance=provenance) for p in slots]
    return replace(hypothesis, slots=new_slots)
