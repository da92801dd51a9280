"""Character visual-similarity table: glyph rasterization and file I/O.

Similarity between a unicode codepoint and a base character in [a-z0-9] is
the best pixel overlap between the rendered codepoint and a battery of
variants of the base glyph (both cases, five sizes, all eight dihedral
orientations, two padding anchors).  The pipeline normally runs from a
precomputed table; the builder only needs to run when regenerating it.

Table file format: UTF-8 lines ``HEXCODEPOINT basechar similarity``,
"#" comments allowed.
"""

from __future__ import annotations

import os
import string

BASE_CHARS = string.ascii_lowercase + string.digits

GLYPH_SIZE = 30
VARIANT_SIZES = (30, 26, 22, 18, 15)
_DARK_THRESHOLD = 128  # 50% gray


class VisualTableError(ValueError):
    """Raised for malformed similarity table files or build misuse."""


def similarity_to_cost(similarity: float) -> float:
    """Map similarity S to a substitution cost: free at S >= 0.8, full unit
    cost once S drops by a third below that, linear in between."""
    return max(0.0, min(1.0, (0.8 - similarity) * 3.0))


class VisualSimilarityTable:
    """Map (codepoint, base character) -> similarity in [0, 1]."""

    def __init__(self, entries=None):
        self._entries = {}
        self.build_warnings = []
        if entries:
            for (codepoint, base), similarity in dict(entries).items():
                self.put(codepoint, base, similarity)

    def put(self, codepoint: int, base: str, similarity: float):
        if base not in BASE_CHARS:
            raise VisualTableError(f"base character {base!r} not in [a-z0-9]")
        if not 0.0 <= similarity <= 1.0:
            raise VisualTableError("similarity out of range")
        self._entries[(codepoint, base)] = similarity

    def get(self, char, base: str):
        """Similarity for (char, base), or None if the pair is absent."""
        codepoint = char if isinstance(char, int) else ord(char)
        return self._entries.get((codepoint, base))

    def items(self):
        return self._entries.items()

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        return isinstance(other, VisualSimilarityTable) and self._entries == other._entries


def save_table(table: VisualSimilarityTable, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# codepoint(hex) base similarity\n")
        for (codepoint, base), similarity in sorted(table.items()):
            fh.write(f"{codepoint:04X} {base} {similarity:.6f}\n")


def load_table(path) -> VisualSimilarityTable:
    if not os.path.exists(path):
        raise VisualTableError(f"similarity table not found: {path}")
    table = VisualSimilarityTable()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 3:
                raise VisualTableError(f"line {lineno}: expected 3 fields")
            try:
                codepoint = int(fields[0], 16)
                similarity = float(fields[2])
            except ValueError:
                raise VisualTableError(f"line {lineno}: malformed entry") from None
            if not 0.0 <= similarity <= 1.0:
                raise VisualTableError(f"line {lineno}: similarity out of range")
            if fields[1] not in BASE_CHARS:
                raise VisualTableError(f"line {lineno}: bad base character {fields[1]!r}")
            table.put(codepoint, fields[1], similarity)
    return table


# ---------------------------------------------------------------------------
# Builder.  Imports Pillow lazily so table consumers never need it.
# ---------------------------------------------------------------------------


def _render_glyph(char: str, font):
    """Render a glyph at 20pt, crop to ink, scale to fit the comparison
    grid, and pad right/bottom.  Returns a binary numpy array or None for
    glyphs that produce no ink."""
    import numpy as np
    from PIL import Image, ImageDraw, ImageOps

    canvas = Image.new("L", (120, 120), 255)
    draw = ImageDraw.Draw(canvas)
    draw.text((20, 20), char, font=font, fill=0)
    bbox = ImageOps.invert(canvas).getbbox()
    if bbox is None:
        return None
    glyph = canvas.crop(bbox)
    scale = GLYPH_SIZE / max(glyph.size)
    shrunk = glyph.resize(
        (max(1, round(glyph.width * scale)), max(1, round(glyph.height * scale))),
        Image.LANCZOS,
    )
    padded = Image.new("L", (GLYPH_SIZE, GLYPH_SIZE), 255)
    padded.paste(shrunk, (0, 0))
    return np.asarray(padded) < _DARK_THRESHOLD


def _dihedral(image):
    from PIL import Image

    yield image
    yield image.transpose(Image.ROTATE_90)
    yield image.transpose(Image.ROTATE_180)
    yield image.transpose(Image.ROTATE_270)
    flipped = image.transpose(Image.FLIP_LEFT_RIGHT)
    yield flipped
    yield flipped.transpose(Image.ROTATE_90)
    yield flipped.transpose(Image.ROTATE_180)
    yield flipped.transpose(Image.ROTATE_270)


def _base_variants(base: str, font):
    """All comparison variants of a base character: both letter cases, five
    sizes, eight orientations, glyph anchored top-left or bottom-left."""
    import numpy as np
    from PIL import Image

    cases = {base, base.upper()} if base.isalpha() else {base}
    variants = []
    for cased in cases:
        mask = _render_glyph(cased, font)
        if mask is None:
            continue
        full = Image.fromarray((~mask * 255).astype("uint8"))
        for size in VARIANT_SIZES:
            shrunk = full.resize((size, size), Image.LANCZOS)
            for oriented in _dihedral(shrunk):
                for top in (True, False):
                    padded = Image.new("L", (GLYPH_SIZE, GLYPH_SIZE), 255)
                    padded.paste(oriented, (0, 0 if top else GLYPH_SIZE - size))
                    variants.append(np.asarray(padded) < _DARK_THRESHOLD)
    return variants


def _overlap(a, b) -> float:
    """Fraction of matching dark pixels: intersection over union, which is
    symmetric and bounded in [0, 1]."""
    either = (a | b).sum()
    if either == 0:
        return 0.0
    return float((a & b).sum()) / float(either)


def build_table(codepoints, font_paths, bases: str = BASE_CHARS, font_size: int = 20) -> VisualSimilarityTable:
    """Build a similarity table for the given codepoints against the base
    characters.  Unrenderable codepoints are skipped and recorded in the
    returned table's ``build_warnings``."""
    from PIL import ImageFont

    if not font_paths:
        raise VisualTableError("no font provided")
    fonts = []
    for path in font_paths:
        try:
            fonts.append(ImageFont.truetype(path, font_size))
        except OSError as exc:
            raise VisualTableError(f"cannot load font {path}: {exc}") from exc

    table = VisualSimilarityTable()
    variant_cache = {}
    for codepoint in sorted(set(codepoints)):
        char = chr(codepoint)
        rendered = None
        font_used = None
        for font in fonts:
            rendered = _render_glyph(char, font)
            if rendered is not None:
                font_used = font
                break
        if rendered is None:
            table.build_warnings.append(f"U+{codepoint:04X}: no ink in any font, skipped")
            continue
        for base in bases:
            key = (id(font_used), base)
            if key not in variant_cache:
                variant_cache[key] = _base_variants(base, font_used)
            variants = variant_cache[key]
            if not variants:
                table.build_warnings.append(f"base {base!r}: unrenderable, skipped")
                continue
            best = max(_overlap(rendered, variant) for variant in variants)
            table.put(codepoint, base, best)
    return table
