import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from textmend.lexicon import Lexicon, LexiconEntry


def make_lexicon(*surfaces):
    """Build a Lexicon from surfaces given as "dog", "dog 100", or "##ing".

    Ids follow the argument order.
    """
    entries = []
    for i, item in enumerate(surfaces):
        fields = item.split()
        surface = fields[0]
        frequency = int(fields[1]) if len(fields) > 1 else 1
        is_continuation = surface.startswith("##")
        if is_continuation:
            surface = surface[2:]
        entries.append(
            LexiconEntry(
                piece_id=i,
                surface=surface.casefold(),
                is_continuation=is_continuation,
                frequency=frequency,
            )
        )
    return Lexicon(entries)


@pytest.fixture
def car_lexicon():
    """Small lexicon around the driving example sentences."""
    return make_lexicon(
        "a 500", "man 80", "is 300", "driving 40", "car 90", "the 400",
        "dog 60", "in 200", "on 150", ". 900", "##s 50", "##ing 70",
        "drive 30", "can 45", "mat 5", "din 3",
    )


TINY_CORPUS = """\
a man is driving a car
the man is driving the car
a woman is driving a car
a man is riding a horse
the woman is riding a horse
a dog is running in the grass
the dog is eating some food
a man is eating some bread
the woman is walking in the park
a cat is sleeping on the table
the man is walking in the street
a girl is singing a song
"""

TINY_EXTRA_WORDS = {"mat": 4, "cart": 5, "care": 6, "din": 2, "his": 30, "has": 25, "was": 30}


def write_tiny_world(root):
    """Small self-consistent corpus + lexicon + trained model under `root`."""
    from collections import Counter

    from textmend.ngram import train_ngram
    from textmend.lexicon import load_lexicon

    corpus = root / "corpus.txt"
    corpus.write_text(TINY_CORPUS, encoding="utf-8")
    counts = Counter(tok for line in TINY_CORPUS.splitlines() for tok in line.split())
    lines = [f"{w}\t{c * 20}" for w, c in sorted(counts.items())]
    lines += [f"{w}\t{c}" for w, c in sorted(TINY_EXTRA_WORDS.items())]
    lines += ["##ing\t40", "##s\t40", ".\t100", ",\t60"]
    lexicon_path = root / "lexicon.txt"
    lexicon_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    lexicon = load_lexicon(lexicon_path)
    model_path = root / "model.json"
    train_ngram(corpus, lexicon, order=3).save(model_path)
    return {"corpus": corpus, "lexicon": lexicon_path, "model": model_path}


@pytest.fixture(scope="session")
def tiny_world(tmp_path_factory):
    return write_tiny_world(tmp_path_factory.mktemp("tinyworld"))
