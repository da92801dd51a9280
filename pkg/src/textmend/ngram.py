"""Interpolated n-gram language model over word-piece ids.

Absolute discounting at every level, interpolating down to a unigram that is
itself smoothed against the uniform distribution, so every piece id has
positive probability under every context.  Training text is word-piece
tokenized greedily against the lexicon; words that cannot be tiled are
skipped.
"""

from __future__ import annotations

import json
import math
import os

from .lexicon import Lexicon, tokenize_whitespace


class NGramError(ValueError):
    """Raised for unusable training corpora or model files."""


class NGramModel:
    def __init__(self, order: int, vocab_size: int, discount: float = 0.4):
        if order < 1:
            raise NGramError("order must be >= 1")
        if not 0.0 < discount < 1.0:
            raise NGramError("discount must be in (0, 1)")
        if vocab_size < 1:
            raise NGramError("vocab_size must be >= 1")
        self.order = order
        self.vocab_size = vocab_size
        self.discount = discount
        # one table per context length 0..order-1: {ctx tuple: {piece_id: count}}
        self.tables = [dict() for _ in range(order)]
        self.totals = [dict() for _ in range(order)]
        self.skipped_words = 0
        self._logp_cache = {}
        self._prob_cache = {}

    # -- training ----------------------------------------------------------

    def add_sequence(self, piece_ids):
        self._logp_cache.clear()
        self._prob_cache.clear()
        for level in range(self.order):
            table = self.tables[level]
            totals = self.totals[level]
            for t in range(level, len(piece_ids)):
                ctx = tuple(piece_ids[t - level:t])
                bucket = table.setdefault(ctx, {})
                wid = piece_ids[t]
                bucket[wid] = bucket.get(wid, 0) + 1
                totals[ctx] = totals.get(ctx, 0) + 1

    # -- probabilities -----------------------------------------------------

    def prob(self, context, piece_id: int) -> float:
        """P(piece | context); context longer than order-1 is truncated."""
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        key = (ctx, piece_id)
        cached = self._prob_cache.get(key)
        if cached is None:
            cached = self._prob(ctx, piece_id)
            self._prob_cache[key] = cached
        return cached

    def _prob(self, ctx, wid) -> float:
        if len(ctx) == 0:
            bucket = self.tables[0].get((), {})
            total = self.totals[0].get((), 0)
            base = 1.0 / self.vocab_size
            if total == 0:
                return base
            count = bucket.get(wid, 0)
            reserved = self.discount * len(bucket) / total
            return max(count - self.discount, 0.0) / total + reserved * base
        bucket = self.tables[len(ctx)].get(ctx)
        if not bucket:
            return self._prob(ctx[1:], wid)
        total = self.totals[len(ctx)][ctx]
        count = bucket.get(wid, 0)
        reserved = self.discount * len(bucket) / total
        return max(count - self.discount, 0.0) / total + reserved * self._prob(ctx[1:], wid)

    def logp(self, context, piece_id: int) -> float:
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        key = (ctx, piece_id)
        cached = self._logp_cache.get(key)
        if cached is None:
            cached = math.log(self._prob(ctx, piece_id))
            self._logp_cache[key] = cached
        return cached

    def sequence_logprob(self, piece_ids) -> float:
        """Mean per-piece log probability (length-normalized fluency score)."""
        if not piece_ids:
            raise NGramError("cannot score an empty sequence")
        total = 0.0
        for t, wid in enumerate(piece_ids):
            total += self.logp(piece_ids[max(0, t - self.order + 1):t], wid)
        return total / len(piece_ids)

    # -- persistence -------------------------------------------------------

    def to_dict(self):
        return {
            "order": self.order,
            "vocab_size": self.vocab_size,
            "discount": self.discount,
            "tables": [
                {",".join(map(str, ctx)): counts for ctx, counts in table.items()}
                for table in self.tables
            ],
        }

    @classmethod
    def from_dict(cls, payload):
        model = cls(payload["order"], payload["vocab_size"], payload["discount"])
        for level, table in enumerate(payload["tables"]):
            for ctx_key, counts in table.items():
                ctx = tuple(int(x) for x in ctx_key.split(",")) if ctx_key else ()
                bucket = {int(w): c for w, c in counts.items()}
                model.tables[level][ctx] = bucket
                model.totals[level][ctx] = sum(bucket.values())
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load(cls, path):
        if not os.path.exists(path):
            raise NGramError(f"model file not found: {path}")
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def sentence_to_pieces(sentence: str, lexicon: Lexicon):
    """Word-piece id sequence for a sentence; untileable words are dropped
    and counted via the second return value."""
    pieces = []
    skipped = 0
    for token in tokenize_whitespace(sentence):
        ids = lexicon.greedy_tokenize(token)
        if ids is None:
            skipped += 1
        else:
            pieces.extend(ids)
    return pieces, skipped


def train_ngram(corpus_path, lexicon: Lexicon, order: int = 3, discount: float = 0.4) -> NGramModel:
    """Train an interpolated n-gram model on a one-sentence-per-line corpus."""
    if not os.path.exists(corpus_path):
        raise NGramError(f"corpus file not found: {corpus_path}")
    model = NGramModel(order=order, vocab_size=len(lexicon), discount=discount)
    sequences = 0
    with open(corpus_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            pieces, skipped = sentence_to_pieces(line, lexicon)
            model.skipped_words += skipped
            if pieces:
                model.add_sequence(pieces)
                sequences += 1
    if sequences == 0:
        raise NGramError("empty corpus")
    return model
