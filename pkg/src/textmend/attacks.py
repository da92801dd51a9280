"""Character-level attack suite for generating benchmark data.

Ten attack kinds, each parameterized by a perturbation probability p: every
eligible unit (a word, a character, or a word boundary depending on the
kind) is perturbed independently with probability p.  The phonetic kind is
the exception: there p controls the sampling temperature of the
phoneme-to-letter statistics instead of a per-unit coin.  Any kinds can be
chained; "random" draws one concrete kind per sentence.

All randomness flows through an explicit RNG seeded from the attack spec,
so identical (sentence, spec, seed) triples give identical output.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field

VOWELS = frozenset("aeiou")

CONCRETE_KINDS = (
    "inner_shuffle",
    "full_shuffle",
    "disemvowel",
    "intrude",
    "keyboard_typo",
    "natural_typo",
    "truncate",
    "segmentation",
    "phonetic",
    "visual",
)
ALL_KINDS = CONCRETE_KINDS + ("random",)

KIND_ALIASES = {
    "is": "inner_shuffle",
    "fs": "full_shuffle",
    "dv": "disemvowel",
    "in": "intrude",
    "kt": "keyboard_typo",
    "nt": "natural_typo",
    "tr": "truncate",
    "sg": "segmentation",
    "ph": "phonetic",
    "vi": "visual",
    "rd": "random",
}

DEFAULT_INTRUDER_SYMBOLS = "#*^~!?$%&@+=_"


class AttackConfigError(ValueError):
    """Bad attack spec or missing resources for the requested kind."""


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    p: float
    seed: int = 0
    chain: "AttackSpec | None" = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise AttackConfigError(f"unknown attack kind {self.kind!r}")
        if not 0.0 <= self.p <= 1.0:
            raise AttackConfigError("perturbation probability must be in [0, 1]")

    @property
    def label(self) -> str:
        short = {v: k for k, v in KIND_ALIASES.items()}[self.kind]
        own = f"{short}:{self.p:g}"
        return own + ("," + self.chain.label if self.chain else "")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "AttackSpec":
        """Parse "kind:p" chains like "dv:0.3" or "rd:0.3,rd:0.3"."""
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise AttackConfigError("empty attack spec")
        spec = None
        for part in reversed(parts):
            if ":" not in part:
                raise AttackConfigError(f"attack spec {part!r} needs kind:p")
            kind, _, prob = part.partition(":")
            kind = KIND_ALIASES.get(kind.strip(), kind.strip())
            try:
                p = float(prob)
            except ValueError:
                raise AttackConfigError(f"bad probability in {part!r}") from None
            spec = cls(kind=kind, p=p, seed=seed, chain=spec)
        return spec

    def kinds(self):
        spec = self
        while spec is not None:
            yield spec.kind
            spec = spec.chain


@dataclass
class AttackResources:
    """External data the attack kinds draw from."""

    keyboard: dict = field(default_factory=dict)  # char -> neighbor string
    typos: dict = field(default_factory=dict)  # word -> tuple of typos
    confusables: dict = field(default_factory=dict)  # char -> tuple of lookalikes
    phonetic: "PhoneticSampler | None" = None
    intruder_symbols: str = DEFAULT_INTRUDER_SYMBOLS


_REQUIRED = {
    "keyboard_typo": ("keyboard",),
    "natural_typo": ("typos",),
    "visual": ("confusables",),
    "phonetic": ("phonetic",),
}


def validate_spec(spec: AttackSpec, resources: AttackResources):
    """Fail fast (before any sentence is touched) if a kind in the chain
    lacks its resource; "random" may draw any kind, so it needs them all."""
    for kind in spec.kinds():
        needed = _REQUIRED.get(kind, ())
        if kind == "random":
            needed = tuple(x for req in _REQUIRED.values() for x in req)
        for name in needed:
            if not getattr(resources, name):
                raise AttackConfigError(f"attack {kind!r} requires resource {name!r}")
        if kind == "intrude" and not resources.intruder_symbols:
            raise AttackConfigError("intrude needs a non-empty symbol set")


# ---------------------------------------------------------------------------
# Per-kind word/character operations
# ---------------------------------------------------------------------------


def _inner_shuffle(word, rng, p):
    if len(word) < 4 or rng.random() >= p:
        return word
    middle = list(word[1:-1])
    rng.shuffle(middle)
    return word[0] + "".join(middle) + word[-1]


def _full_shuffle(word, rng, p):
    if len(word) < 2 or rng.random() >= p:
        return word
    chars = list(word)
    rng.shuffle(chars)
    return "".join(chars)


def _disemvowel(word, rng, p):
    has_vowel = any(c in VOWELS for c in word.casefold())
    has_other = any(c not in VOWELS for c in word.casefold())
    if not (has_vowel and has_other) or rng.random() >= p:
        return word
    return "".join(c for c in word if c.casefold() not in VOWELS)


def _intrude(word, rng, p, symbols):
    if len(word) < 2:
        return word
    out = [word[0]]
    previous = None
    for char in word[1:]:
        if rng.random() < p:
            if previous is not None and rng.random() < 0.5:
                symbol = previous
            else:
                symbol = symbols[rng.randrange(len(symbols))]
            previous = symbol
            out.append(symbol)
        out.append(char)
    return "".join(out)


def _keyboard_typo(word, rng, p, keyboard):
    out = []
    for char in word:
        neighbors = keyboard.get(char.casefold())
        if neighbors and rng.random() < p:
            typo = neighbors[rng.randrange(len(neighbors))]
            out.append(typo.upper() if char.isupper() else typo)
        else:
            out.append(char)
    return "".join(out)


def _natural_typo(word, rng, p, typos):
    options = typos.get(word.casefold())
    if not options or rng.random() >= p:
        return word
    return options[rng.randrange(len(options))]


def _truncate(word, rng, p):
    if len(word) < 3 or rng.random() >= p:
        return word
    return word[:-1]


def _visual(word, rng, p, confusables):
    out = []
    for char in word:
        options = confusables.get(char.casefold())
        if options and rng.random() < p:
            out.append(options[rng.randrange(len(options))])
        else:
            out.append(char)
    return "".join(out)


def _phonetic(word, rng, p, sampler):
    key = word.casefold()
    if key not in sampler:
        return word
    respelled = sampler.sample(key, p, rng)
    if not respelled:
        return word
    if word[0].isupper():
        respelled = respelled[0].upper() + respelled[1:]
    return respelled


def _segmentation(words, rng, p):
    if not words:
        return words
    out = [words[0]]
    for word in words[1:]:
        if rng.random() < p:
            out[-1] += word
        else:
            out.append(word)
    return out


# ---------------------------------------------------------------------------
# Sentence-level application
# ---------------------------------------------------------------------------


def _apply_kind(kind, words, spec, resources, rng):
    if kind == "segmentation":
        return _segmentation(words, rng, spec.p)
    word_ops = {
        "inner_shuffle": lambda w: _inner_shuffle(w, rng, spec.p),
        "full_shuffle": lambda w: _full_shuffle(w, rng, spec.p),
        "disemvowel": lambda w: _disemvowel(w, rng, spec.p),
        "intrude": lambda w: _intrude(w, rng, spec.p, resources.intruder_symbols),
        "keyboard_typo": lambda w: _keyboard_typo(w, rng, spec.p, resources.keyboard),
        "natural_typo": lambda w: _natural_typo(w, rng, spec.p, resources.typos),
        "truncate": lambda w: _truncate(w, rng, spec.p),
        "visual": lambda w: _visual(w, rng, spec.p, resources.confusables),
        "phonetic": lambda w: _phonetic(w, rng, spec.p, resources.phonetic),
    }
    return [word_ops[kind](w) for w in words]


def attack(sentence: str, spec: AttackSpec, resources: AttackResources, rng=None) -> str:
    """Apply an attack spec (and its chain, in order) to one sentence."""
    validate_spec(spec, resources)
    if rng is None:
        rng = random.Random(f"{spec.seed}")
    link = spec
    while link is not None:
        if link.p > 0:
            kind = link.kind
            if kind == "random":
                kind = CONCRETE_KINDS[rng.randrange(len(CONCRETE_KINDS))]
            words = sentence.split()
            sentence = " ".join(_apply_kind(kind, words, link, resources, rng))
        link = link.chain
    return sentence


def attack_corpus(sentences, spec: AttackSpec, resources: AttackResources):
    """Attack a corpus with one RNG stream per sentence, derived from the
    seed and the sentence index, so any prefix or reordering reproduces
    exactly."""
    validate_spec(spec, resources)
    out = []
    for index, sentence in enumerate(sentences):
        rng = random.Random(f"{spec.seed}:{index}")
        out.append(attack(sentence, spec, resources, rng))
    return out


# ---------------------------------------------------------------------------
# Resource files
# ---------------------------------------------------------------------------


def _read_map_file(path, value_parser):
    table = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t") if "\t" in line else line.split(None, 1)
            if len(fields) != 2:
                raise AttackConfigError(f"bad resource line: {line!r}")
            key, value = fields[0].strip().casefold(), fields[1].strip()
            table[key] = value_parser(value)
    return table


def load_keyboard(path):
    """Keyboard adjacency: lines of "char<TAB>neighbors"."""
    return _read_map_file(path, lambda v: v.replace(" ", ""))


def load_typos(path):
    """Real-typo dictionary: lines of "word<TAB>typo [typo ...]"."""
    return _read_map_file(path, lambda v: tuple(v.split()))


def load_confusables(path):
    """Confusable characters: lines of "char<TAB>lookalike [lookalike ...]"."""
    return _read_map_file(path, lambda v: tuple(v.split()))


def load_pronunciations(path):
    """Pronunciation dictionary: "word<TAB>PH PH PH" (first variant wins)."""
    prons = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith(("#", ";;;")):
                continue
            fields = line.split()
            word = re.sub(r"\(\d+\)$", "", fields[0]).casefold()
            if word and word not in prons and len(fields) > 1:
                prons[word] = tuple(ph.upper() for ph in fields[1:])
    return prons


# ---------------------------------------------------------------------------
# Phonetic sampler
# ---------------------------------------------------------------------------

# chunk spellings that commonly realize a phoneme; rewarded during alignment
_AFFINITY = {
    ("DH", "th"), ("TH", "th"), ("SH", "sh"), ("CH", "ch"), ("NG", "ng"),
    ("K", "c"), ("K", "ck"), ("K", "q"), ("F", "ph"), ("F", "gh"),
    ("S", "c"), ("Z", "s"), ("JH", "j"), ("JH", "g"), ("HH", "h"),
    ("W", "wh"), ("ER", "er"), ("ER", "ir"), ("ER", "ur"), ("ER", "or"),
    ("AO", "aw"), ("AO", "au"), ("AO", "o"), ("UW", "oo"), ("UW", "ew"),
    ("IY", "ee"), ("IY", "ea"), ("IY", "y"), ("IY", "e"), ("EY", "ay"),
    ("EY", "ai"), ("EY", "a"), ("AY", "i"), ("AY", "y"), ("AY", "igh"),
    ("OW", "ow"), ("OW", "oa"), ("AW", "ou"), ("AW", "ow"), ("UH", "oo"),
}

_MAX_CHUNK = 4


def _core(phoneme: str) -> str:
    return phoneme.rstrip("0123456789").upper()


def _chunk_cost(chunk: str, phoneme: str) -> float:
    core = _core(phoneme)
    if chunk == "":
        return 0.9
    if (core, chunk) in _AFFINITY:
        base = 0.05
    elif chunk[0] == core[0].lower():
        base = 0.0
    elif chunk[0] in core.lower():
        base = 0.35
    else:
        base = 0.8
    return base + 0.3 * (len(chunk) - 1)


def _align(word: str, phonemes) -> list | None:
    """Monotone minimum-cost assignment of letter chunks (length 0..4) to
    phonemes, consuming the whole word.  Returns one chunk per phoneme."""
    n, k = len(word), len(phonemes)
    INF = float("inf")
    best = [[INF] * (k + 1) for _ in range(n + 1)]
    back = [[None] * (k + 1) for _ in range(n + 1)]
    best[0][0] = 0.0
    for j in range(k):
        for i in range(n + 1):
            if best[i][j] == INF:
                continue
            for length in range(0, min(_MAX_CHUNK, n - i) + 1):
                chunk = word[i:i + length]
                cost = best[i][j] + _chunk_cost(chunk, phonemes[j])
                if cost < best[i + length][j + 1]:
                    best[i + length][j + 1] = cost
                    back[i + length][j + 1] = i
    if best[n][k] == INF:
        return None
    chunks = []
    i = n
    for j in range(k, 0, -1):
        prev = back[i][j]
        chunks.append(word[prev:i])
        i = prev
    chunks.reverse()
    return chunks


class PhoneticSampler:
    """Respell words by sampling letter chunks per phoneme from statistics
    aligned out of a pronunciation dictionary.

    The perturbation probability acts as a temperature: near 0 the most
    common spelling of each phoneme is chosen (close to the original word),
    near 1 rare correspondences become likely.
    """

    def __init__(self, pronunciations: dict):
        self.pronunciations = dict(pronunciations)
        self.chunk_counts = {}
        for word, phonemes in self.pronunciations.items():
            chunks = _align(word, phonemes)
            if chunks is None:
                continue
            for phoneme, chunk in zip(phonemes, chunks):
                if not chunk:
                    continue
                bucket = self.chunk_counts.setdefault(_core(phoneme), Counter())
                bucket[chunk] += 1

    def __contains__(self, word: str) -> bool:
        return word in self.pronunciations

    def sample(self, word: str, p: float, rng) -> str:
        phonemes = self.pronunciations[word]
        sharpness = (1.0 - p) / max(p, 0.05)
        pieces = []
        for phoneme in phonemes:
            bucket = self.chunk_counts.get(_core(phoneme))
            if not bucket:
                continue
            chunks = sorted(bucket)
            weights = [bucket[c] ** sharpness for c in chunks]
            pieces.append(rng.choices(chunks, weights=weights)[0])
        return "".join(pieces)
