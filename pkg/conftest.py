"""
Shared fixtures: a toy corpus, dictionary and source glyphs written to
tmp_path, and a small training configuration.
"""

import os
import tempfile

os.environ.setdefault("INKSTYLE_LOG_DIR", tempfile.mkdtemp(prefix="inkstyle-logs-"))

import numpy as np
import pytest
from PIL import Image

from src.components.dictionary import ComponentDictionary, write_dictionary
from src.training.config import TrainConfig

# ten CJK characters, one per line of the toy dictionary
TOY_CHARS = [0x4E00 + i for i in range(10)]
TOY_STYLES = (1, 2, 3)
TOY_VOCAB = 20


def toy_sequence(code: int):
    """Deterministic component sequence of length 2..4 in [1, TOY_VOCAB]."""
    i = code - 0x4E00
    return tuple(((i * 7 + k * 3) % TOY_VOCAB) + 1 for k in range(2 + i % 3))


def draw_glyph(code: int, style: int, width: int, height: int, variant: int = 0) -> Image.Image:
    """Black strokes on white; shape depends on the character, thickness on the style."""
    rng = np.random.default_rng(code * 31 + style * 7 + variant)
    pixels = np.full((height, width), 255, dtype=np.uint8)
    thickness = 2 + 2 * style
    for _ in range(3):
        if rng.random() < 0.5:
            y = int(rng.integers(0, max(1, height - thickness)))
            x0, x1 = sorted(rng.integers(0, width, size=2))
            pixels[y:y + thickness, x0:x1 + 1] = 0
        else:
            x = int(rng.integers(0, max(1, width - thickness)))
            y0, y1 = sorted(rng.integers(0, height, size=2))
            pixels[y0:y1 + 1, x:x + thickness] = 0
    return Image.fromarray(pixels)


def write_corpus(root: str, chars=TOY_CHARS, styles=TOY_STYLES, variants=None, skip=()):
    """
    Write <root>/<style>/<CODEPOINT>.png images with a 140-pixel long side.

    Args:
        variants: {(style, code): extra image count} written as <CODEPOINT>_<k>.png
        skip: (style, code) pairs left out
    """
    variants = variants or {}
    for style in styles:
        style_dir = os.path.join(root, str(style))
        os.makedirs(style_dir, exist_ok=True)
        for code in chars:
            if (style, code) in skip:
                continue
            draw_glyph(code, style, 100 + (code % 5) * 10, 140).save(
                os.path.join(style_dir, f"{code:04X}.png"))
            for k in range(1, variants.get((style, code), 0) + 1):
                draw_glyph(code, style, 120, 140, variant=k).save(
                    os.path.join(style_dir, f"{code:04X}_{k}.png"))
    return root


def write_sources(root: str, chars=TOY_CHARS):
    """Canvas-sized source glyphs <root>/<CODEPOINT>.png."""
    os.makedirs(root, exist_ok=True)
    for code in chars:
        draw_glyph(code, 0, 256, 256).save(os.path.join(root, f"{code:04X}.png"))
    return root


def toy_dictionary(chars=TOY_CHARS) -> ComponentDictionary:
    return ComponentDictionary({c: toy_sequence(c) for c in chars}, vocab_size=TOY_VOCAB)


def tiny_config(**overrides) -> TrainConfig:
    """Narrow networks over the toy vocabulary and three styles."""
    values = dict(
        batch_size=4,
        epochs=2,
        styles_count=len(TOY_STYLES),
        vocab_size=TOY_VOCAB,
        generator_filters=8,
        discriminator_filters=8,
        style_embedding_dim=16,
        seed=0,
    )
    values.update(overrides)
    return TrainConfig(**values)


@pytest.fixture
def corpus_dir(tmp_path):
    return write_corpus(str(tmp_path / "corpus"))


@pytest.fixture
def source_dir(tmp_path):
    return write_sources(str(tmp_path / "sources"))


@pytest.fixture
def dictionary_path(tmp_path):
    path = str(tmp_path / "components.txt")
    write_dictionary(toy_dictionary(), path)
    return path


@pytest.fixture
def tiny_cfg():
    return tiny_config()
