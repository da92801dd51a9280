"""Small probability helpers shared across pipeline stages."""

from __future__ import annotations

import math


def softmax_scores(scores, temperature: float = 1.0):
    """softmax(scores / temperature), numerically stabilised."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    top = max(scores)
    exps = [math.exp((s - top) / temperature) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def softmax_neg(losses, temperature: float = 1.0):
    """softmax(-losses / temperature): lower loss, higher probability."""
    return softmax_scores([-x for x in losses], temperature)


def normalize(weights: dict) -> dict:
    total = sum(weights.values())
    if total <= 0:
        raise ValueError("cannot normalize non-positive mass")
    return {k: v / total for k, v in weights.items()}
