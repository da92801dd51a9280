"""Evaluation metrics: perfect-restoration rate, character edit distance,
and semantic similarity (token-F1 proxy, or MoverScore via the service)."""

from __future__ import annotations

from collections import Counter


def edit_distance(a: str, b: str) -> int:
    """Unit-cost Levenshtein (insert/delete/substitute) on case-folded
    strings; no swap operation, matching the evaluation convention."""
    a, b = a.casefold(), b.casefold()
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (0 if ca == cb else 1),
                )
            )
        previous = current
    return previous[len(b)]


def ppr(pairs) -> float:
    """Percent of (restored, truth) pairs with zero edit distance."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no sentence pairs to evaluate")
    perfect = sum(1 for restored, truth in pairs if edit_distance(restored, truth) == 0)
    return 100.0 * perfect / len(pairs)


def token_f1(hyp: str, ref: str) -> float:
    """Bag-of-tokens F1 overlap on case-folded whitespace tokens; the
    built-in proxy for semantic similarity."""
    hyp_tokens = Counter(hyp.casefold().split())
    ref_tokens = Counter(ref.casefold().split())
    overlap = sum((hyp_tokens & ref_tokens).values())
    total = sum(hyp_tokens.values()) + sum(ref_tokens.values())
    if total == 0:
        return 1.0
    return 2.0 * overlap / total


def semantic_similarity(hyp: str, ref: str, scorer=None) -> float:
    """Semantic similarity in [0, 1]: MoverScore when a service client is
    attached, otherwise the token-F1 proxy.  Reports must carry
    `similarity_metric_name` so the proxy is never presented as MoverScore.
    """
    if scorer is not None:
        return scorer.moverscore(hyp, ref)
    return token_f1(hyp, ref)


def similarity_metric_name(scorer=None) -> str:
    return "moverscore" if scorer is not None else "token_f1"
