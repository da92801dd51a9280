"""Word-piece dictionary loading, indexing, and whitespace tokenization.

Lexicon file format: UTF-8 text, one entry per line as
``surface<whitespace>frequency`` with the frequency optional (default 1).
Lines starting with "#" are comments, except lines starting with the
continuation marker (default "##"), which declare continuation pieces that
attach to the preceding piece without a space.  A consequence of this rule is
that a bare "#" cannot itself be a lexicon surface.
"""

from __future__ import annotations

import os
from dataclasses import dataclass


class LexiconError(ValueError):
    """Raised for missing, empty, or malformed lexicon files."""


@dataclass(frozen=True)
class LexiconEntry:
    piece_id: int
    surface: str  # continuation marker already stripped, case-folded
    is_continuation: bool
    frequency: int

    @property
    def marked_surface(self) -> str:
        return ("##" + self.surface) if self.is_continuation else self.surface


class Lexicon:
    """Immutable word-piece dictionary with dense ids.

    Safe for concurrent reads; nothing mutates after construction.
    """

    def __init__(self, entries):
        self._entries = tuple(entries)
        self._index = {}
        for entry in self._entries:
            if entry.piece_id != len(self._index):
                raise LexiconError("entry ids must be dense 0..N-1")
            if not entry.surface:
                raise LexiconError("empty surface")
            key = (entry.surface, entry.is_continuation)
            if key in self._index:
                raise LexiconError(f"duplicate surface {entry.marked_surface!r}")
            self._index[key] = entry.piece_id
        if not self._entries:
            raise LexiconError("empty lexicon")
        self._max_piece_len = max(len(e.surface) for e in self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    @property
    def entries(self):
        return self._entries

    def entry(self, piece_id: int) -> LexiconEntry:
        return self._entries[piece_id]

    def surface(self, piece_id: int) -> str:
        """Display form of a piece: continuation pieces carry the marker."""
        return self._entries[piece_id].marked_surface

    def lookup(self, surface: str, continuation_marker: str = "##"):
        """Id for a surface, or None.  Accepts marker-prefixed forms."""
        surface = surface.casefold()
        if surface.startswith(continuation_marker) and len(surface) > len(continuation_marker):
            return self._index.get((surface[len(continuation_marker):], True))
        return self._index.get((surface, False))

    def is_continuation(self, piece_id: int) -> bool:
        return self._entries[piece_id].is_continuation

    def frequency(self, piece_id: int) -> int:
        return self._entries[piece_id].frequency

    def full_words(self):
        """Non-continuation entries, i.e. pieces that can stand alone."""
        return (e for e in self._entries if not e.is_continuation)

    def greedy_tokenize(self, word: str):
        """Longest-match word-piece split of a single whitespace word.

        Continuation pieces are preferred past the first position, but a
        stand-alone piece may start mid-word (punctuation glued to a word,
        or two words merged without a space), mirroring how collapsed
        sentences are built.  Returns piece ids, or None if the word cannot
        be tiled.  Used to turn text into model vocabulary sequences.
        """
        word = word.casefold()
        if not word:
            return None
        pieces = []
        pos = 0
        while pos < len(word):
            found = None
            limit = min(len(word), pos + self._max_piece_len)
            for end in range(limit, pos, -1):
                if pos > 0:
                    pid = self._index.get((word[pos:end], True))
                    if pid is None:
                        pid = self._index.get((word[pos:end], False))
                else:
                    pid = self._index.get((word[pos:end], False))
                if pid is not None:
                    found = (pid, end)
                    break
            if found is None:
                return None
            pieces.append(found[0])
            pos = found[1]
        return pieces


def tokenize_whitespace(sentence: str):
    """Split a sentence at whitespace into case-folded tokens.

    Punctuation stays attached to its token; the segmentation lattice deals
    with it through sub-token spans.
    """
    return sentence.casefold().split()


def load_lexicon(path, min_frequency: int = 0, continuation_marker: str = "##") -> Lexicon:
    """Load a lexicon file, keeping entries with frequency >= min_frequency.

    Raises LexiconError for a missing file, duplicate or empty surfaces
    (naming the offending line), or if no entries survive.
    """
    if not os.path.exists(path):
        raise LexiconError(f"lexicon file not found: {path}")
    raw = []
    seen = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#") and not line.startswith(continuation_marker):
                continue
            fields = line.split()
            surface = fields[0].casefold()
            if len(fields) > 2:
                raise LexiconError(f"line {lineno}: too many fields")
            if len(fields) == 2:
                try:
                    frequency = int(fields[1])
                except ValueError:
                    raise LexiconError(f"line {lineno}: bad frequency {fields[1]!r}") from None
                if frequency < 0:
                    raise LexiconError(f"line {lineno}: negative frequency")
            else:
                frequency = 1
            is_continuation = surface.startswith(continuation_marker)
            if is_continuation:
                surface = surface[len(continuation_marker):]
            if not surface:
                raise LexiconError(f"line {lineno}: empty surface")
            key = (surface, is_continuation)
            if key in seen:
                raise LexiconError(
                    f"line {lineno}: duplicate surface after case folding "
                    f"(first seen on line {seen[key]})"
                )
            seen[key] = lineno
            raw.append((surface, is_continuation, frequency))
    kept = [r for r in raw if r[2] >= min_frequency]
    if not kept:
        raise LexiconError("empty lexicon")
    entries = [
        LexiconEntry(piece_id=i, surface=s, is_continuation=c, frequency=f)
        for i, (s, c, f) in enumerate(kept)
    ]
    return Lexicon(entries)
