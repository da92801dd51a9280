"""Character-level distances for candidate matching.

Three distances are combined here:

* a substring edit distance computed with a one-pass dynamic program that
  tracks, for every cell, the set of start positions of the cheapest
  matching substrings (insertion, deletion, substitution, and adjacent
  swap operations);
* a domain-aware cost model that discounts substitutions between visually
  similar characters, deletions of repeated intruder symbols, and vowel
  insertions into vowel-less tokens;
* an anagram distance for shuffled tokens.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .visualsim import VisualSimilarityTable, similarity_to_cost

VOWELS = frozenset("aeiou")
_PLAIN = frozenset("abcdefghijklmnopqrstuvwxyz0123456789")
_TIE_EPS = 1e-12

AGNOSTIC = "agnostic"
DOMAIN_SPECIFIC = "domain_specific"


def intruder_deletion_cost(char: str, occurrences: int, decay: float = 0.75) -> float:
    """Deletion cost for an intruder symbol seen `occurrences` times in the
    source token: decays exponentially so a repeated symbol is cheap to strip.
    """
    if occurrences < 1:
        raise ValueError("occurrence count must be >= 1")
    return decay ** (occurrences - 1)


def domain_substitution_cost(a: str, b: str, visual: VisualSimilarityTable | None) -> float:
    """Substitution cost between a source character and a dictionary
    character, discounted when the pair is visually similar."""
    if a == b:
        return 0.0
    if visual is not None:
        s = visual.get(a, b)
        if s is not None:
            return similarity_to_cost(s)
    return 1.0


def anagram_distance(source: str, target: str) -> int:
    """2m+1 where m counts the multiset symmetric difference of characters.

    Equals 1 exactly when the two strings are permutations of each other.
    """
    if not source or not target:
        raise ValueError("anagram distance needs non-empty strings")
    sc, tc = Counter(source), Counter(target)
    m = sum(((sc - tc) + (tc - sc)).values())
    return 2 * m + 1


@dataclass(frozen=True)
class CostModel:
    """Edit operation costs.

    `agnostic` mode is the classic unit-cost distance.  `domain_specific`
    mode discounts visually confusable substitutions, repeated-intruder
    deletions, and vowel insertions into vowel-less source tokens.
    """

    mode: str = AGNOSTIC
    visual: VisualSimilarityTable | None = None
    vowel_insertion_cost: float = 0.3
    intruder_decay: float = 0.75
    swap_cost: float = 1.0

    def __post_init__(self):
        if self.mode not in (AGNOSTIC, DOMAIN_SPECIFIC):
            raise ValueError(f"unknown cost mode {self.mode!r}")

    @property
    def is_domain_specific(self) -> bool:
        return self.mode == DOMAIN_SPECIFIC

    def min_insertion_cost(self, source: str) -> float:
        """Lower bound on the cost of inserting one target character; used
        for exact length-difference pruning of the vocabulary scan."""
        if self.is_domain_specific and not any(c in VOWELS for c in source):
            return self.vowel_insertion_cost
        return 1.0

    def for_source(self, source: str) -> "_SourceCosts":
        return _SourceCosts(self, source)


class _SourceCosts:
    """Operation costs specialised to one source token.

    The intruder-deletion discount depends on character frequency within
    the whole token and the vowel-insertion discount on the token
    containing no vowels, so both are fixed per source.
    """

    __slots__ = ("sub", "delete", "insert", "swap")

    def __init__(self, model: CostModel, source: str):
        self.swap = model.swap_cost
        if not model.is_domain_specific:
            self.sub = lambda a, b: 0.0 if a == b else 1.0
            self.delete = lambda c: 1.0
            self.insert = lambda c: 1.0
            return
        counts = Counter(source)
        vowel_less = not any(c in VOWELS for c in source)
        visual = model.visual
        vowel_cost = model.vowel_insertion_cost
        decay = model.intruder_decay

        def sub(a, b):
            return domain_substitution_cost(a, b, visual)

        def delete(c):
            if c in _PLAIN:
                return 1.0
            return intruder_deletion_cost(c, counts[c], decay)

        def insert(c):
            if vowel_less and c in VOWELS:
                return vowel_cost
            return 1.0

        self.sub = sub
        self.delete = delete
        self.insert = insert


@dataclass(frozen=True)
class SubstringMatchResult:
    """Best alignment of a dictionary piece against substrings of a token.

    `spans` are 1-based inclusive (start, end) pairs; an empty match is
    encoded as start = end + 1.  `full_span_distance` forces the alignment
    to consume the whole token.
    """

    distance: float
    spans: frozenset = field(default_factory=frozenset)
    full_span_distance: float = 0.0


def substring_distance(source: str, target: str, cost: CostModel | None = None) -> SubstringMatchResult:
    """Minimum edit distance from any contiguous substring of `source` to
    `target`, with the spans achieving it, plus the whole-source distance.
    """
    if not source or not target:
        raise ValueError("source and target must be non-empty")
    if cost is None:
        cost = CostModel()
    ops = cost.for_source(source)
    n, m = len(source), len(target)

    # dist[i][j]: cheapest edit of a substring of source ending at boundary j
    # into target[:i].  starts[i][j]: 0-based start boundaries achieving it.
    dist = [[0.0] * (n + 1) for _ in range(m + 1)]
    starts = [[None] * (n + 1) for _ in range(m + 1)]
    for j in range(n + 1):
        starts[0][j] = {j}
    for i in range(1, m + 1):
        # target-prefix insertions (nothing of the source consumed yet) stay
        # at unit cost in every mode; discounts apply to interior edits only
        dist[i][0] = dist[i - 1][0] + 1.0
        starts[i][0] = {0}

    for i in range(1, m + 1):
        tc = target[i - 1]
        row, prev = dist[i], dist[i - 1]
        srow, sprev = starts[i], starts[i - 1]
        for j in range(1, n + 1):
            sc = source[j - 1]
            moves = [
                (prev[j - 1] + (0.0 if sc == tc else ops.sub(sc, tc)), sprev[j - 1]),
                (prev[j] + ops.insert(tc), sprev[j]),
                (row[j - 1] + ops.delete(sc), srow[j - 1]),
            ]
            if i >= 2 and j >= 2 and target[i - 2] == sc and tc == source[j - 2]:
                moves.append((dist[i - 2][j - 2] + ops.swap, starts[i - 2][j - 2]))
            best = min(v for v, _ in moves)
            merged = set()
            for v, origin in moves:
                if v <= best + _TIE_EPS:
                    merged |= origin
            row[j] = best
            srow[j] = merged

    final_row = dist[m]
    best = min(final_row)
    spans = frozenset(
        (s + 1, j)
        for j in range(n + 1)
        if final_row[j] <= best + _TIE_EPS
        for s in starts[m][j]
    )
    return SubstringMatchResult(
        distance=best,
        spans=spans,
        full_span_distance=_full_span_distance(source, target, ops),
    )


def _full_span_distance(source: str, target: str, ops: _SourceCosts) -> float:
    """Classic edit distance (with swap) forced to consume all of source."""
    n, m = len(source), len(target)
    dist = [[0.0] * (n + 1) for _ in range(m + 1)]
    for j in range(1, n + 1):
        dist[0][j] = dist[0][j - 1] + ops.delete(source[j - 1])
    for i in range(1, m + 1):
        dist[i][0] = dist[i - 1][0] + 1.0  # target-prefix inserts: unit cost
    for i in range(1, m + 1):
        tc = target[i - 1]
        for j in range(1, n + 1):
            sc = source[j - 1]
            best = min(
                dist[i - 1][j - 1] + (0.0 if sc == tc else ops.sub(sc, tc)),
                dist[i - 1][j] + ops.insert(tc),
                dist[i][j - 1] + ops.delete(sc),
            )
            if i >= 2 and j >= 2 and target[i - 2] == sc and tc == source[j - 2]:
                best = min(best, dist[i - 2][j - 2] + ops.swap)
            dist[i][j] = best
    return dist[m][n]


def final_distance(source: str, target: str, cost: CostModel | None = None) -> float:
    """Combined candidate distance.

    Domain-specific mode takes the minimum of the anagram distance and the
    modified substring distance; agnostic mode is the plain substring
    distance.
    """
    if cost is None:
        cost = CostModel()
    sub = substring_distance(source, target, cost).distance
    if not cost.is_domain_specific:
        return sub
    return min(float(anagram_distance(source, target)), sub)
