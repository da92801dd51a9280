"""Frequency-plus-edit-distance spellchecker baseline.

Each word is corrected independently: among stand-alone lexicon entries
within edit distance 2 of the token, the closest distance wins and word
frequency breaks ties within a distance.  Known words pass through, as do
tokens with no candidate at all.
"""

from __future__ import annotations

from .lexicon import Lexicon, tokenize_whitespace
from .metrics import edit_distance

MAX_DISTANCE = 2


def correct_word(token: str, lexicon: Lexicon, max_distance: int = MAX_DISTANCE) -> str:
    token = token.casefold()
    if lexicon.lookup(token) is not None:
        return token
    best = None  # (distance, -frequency, piece_id, surface)
    for entry in lexicon.full_words():
        if abs(len(entry.surface) - len(token)) > max_distance:
            continue
        distance = edit_distance(token, entry.surface)
        if distance > max_distance:
            continue
        key = (distance, -entry.frequency, entry.piece_id)
        if best is None or key < best[:3]:
            best = (*key, entry.surface)
    if best is None:
        return token
    return best[3]


def correct_sentence(sentence: str, lexicon: Lexicon, max_distance: int = MAX_DISTANCE) -> str:
    return " ".join(
        correct_word(token, lexicon, max_distance)
        for token in tokenize_whitespace(sentence)
    )
