"""
Glyph image normalization and source-glyph providers.
Turns raw bitmaps into 256x256 tensors in [-1, 1] (white paper = +1, ink = -1).
"""

import os
from typing import Protocol

import numpy as np
from PIL import Image, ImageDraw, ImageFont, UnidentifiedImageError

from src.config.logger import get_logger
from src.errors import DataError

logger = get_logger(__name__)

CANVAS_SIZE = 256
WHITE = 255.0


class InvalidImageError(DataError):
    """Image with a zero dimension or unreadable content."""
    pass


class MissingGlyphError(DataError):
    """Glyph provider cannot produce an image for a character."""

    def __init__(self, code: int, detail: str = ""):
        self.code = code
        msg = f"No source glyph for U+{code:04X}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


def codepoint_name(code: int) -> str:
    """File stem of a code point: uppercase hex, at least 4 digits."""
    return f"{code:04X}"


def scaled_size(width: int, height: int, canvas: int = CANVAS_SIZE):
    """
    Size after scaling the long side to ``canvas``.

    The short side is rounded half-up.

    Returns:
        (new_width, new_height)
    """
    long_side = max(width, height)
    if width >= height:
        return canvas, (2 * height * canvas + long_side) // (2 * long_side)
    return (2 * width * canvas + long_side) // (2 * long_side), canvas


def to_tensor_range(pixels: np.ndarray) -> np.ndarray:
    """Map 8-bit intensities [0, 255] linearly onto [-1, 1]."""
    return (np.asarray(pixels, dtype=np.float32) / 127.5 - 1.0).astype(np.float32)


def to_uint8(glyph: np.ndarray) -> np.ndarray:
    """Map [-1, 1] back to 8-bit intensities, rounding to nearest."""
    pixels = (np.clip(glyph, -1.0, 1.0) + 1.0) * 127.5
    return np.round(pixels).astype(np.uint8)


def normalize_ground_truth(raw: Image.Image, canvas: int = CANVAS_SIZE) -> np.ndarray:
    """
    Normalize a raw glyph bitmap to a square model tensor.

    The long side is scaled to ``canvas`` with a 3-lobe Lanczos kernel,
    the result is centered on a white canvas (extra pixel to the
    right/bottom) and mapped to [-1, 1]. Resampled gray values are kept.

    Args:
        raw: 1-bit or 8-bit single-channel PIL image

    Returns:
        float32 array of shape (canvas, canvas)
    """
    width, height = raw.size
    if width < 1 or height < 1:
        raise InvalidImageError(f"Degenerate image size {width}x{height}")

    # continuous-valued resampling, no re-binarization
    gray = raw.convert("L").convert("F")
    new_w, new_h = scaled_size(width, height, canvas)
    if (new_w, new_h) != (width, height):
        gray = gray.resize((new_w, new_h), resample=Image.Resampling.LANCZOS)

    content = np.clip(np.asarray(gray, dtype=np.float64), 0.0, WHITE)
    page = np.full((canvas, canvas), WHITE, dtype=np.float64)
    top = (canvas - new_h) // 2
    left = (canvas - new_w) // 2
    page[top:top + new_h, left:left + new_w] = content
    return to_tensor_range(page)


def load_image(path: str) -> Image.Image:
    """Open an image file fully, raising InvalidImageError on failure."""
    try:
        with Image.open(path) as img:
            img.load()
            return img.copy()
    except (OSError, UnidentifiedImageError) as e:
        raise InvalidImageError(f"Unreadable image {path}: {e}") from e


class GlyphProvider(Protocol):
    """Source of font-style input glyphs."""

    def load(self, code: int) -> Image.Image:
        """Raw glyph image for a character, or MissingGlyphError."""
        ...


class DirectoryGlyphProvider:
    """Pre-rendered glyphs stored as ``<root>/<CODEPOINT>.png``."""

    def __init__(self, root: str):
        self.root = root

    def path_for(self, code: int) -> str:
        return os.path.join(self.root, f"{codepoint_name(code)}.png")

    def has(self, code: int) -> bool:
        return os.path.exists(self.path_for(code))

    def load(self, code: int) -> Image.Image:
        path = self.path_for(code)
        if not os.path.exists(path):
            raise MissingGlyphError(code, f"{path} not found")
        return load_image(path)


class FontGlyphProvider:
    """Rasterizes glyphs from a TrueType/OpenType font."""

    def __init__(self, font_path: str, size: int = CANVAS_SIZE, scale: float = 0.8,
                 blank_threshold: float = 250.0):
        self.font_path = font_path
        self.size = size
        self.blank_threshold = blank_threshold
        self.font = ImageFont.truetype(font_path, int(size * scale))

    def has(self, code: int) -> bool:
        try:
            self.load(code)
            return True
        except MissingGlyphError:
            return False

    def load(self, code: int) -> Image.Image:
        char = chr(code)
        img = Image.new("L", (self.size, self.size), color=255)
        draw = ImageDraw.Draw(img)
        bbox = draw.textbbox((0, 0), char, font=self.font)
        w, h = bbox[2] - bbox[0], bbox[3] - bbox[1]
        x = (self.size - w) / 2 - bbox[0]
        y = (self.size - h) / 2 - bbox[1]
        draw.text((x, y), char, font=self.font, fill=0)
        if float(np.mean(np.asarray(img))) > self.blank_threshold:
            raise MissingGlyphError(code, f"blank render in {self.font_path}")
        return img


def render_source_glyph(code: int, provider: GlyphProvider) -> np.ndarray:
    """
    Input glyph x for a character.

    Canvas-sized images are only range-mapped; anything else goes through
    normalize_ground_truth.
    """
    img = provider.load(code)
    if img.size == (CANVAS_SIZE, CANVAS_SIZE):
        return to_tensor_range(np.asarray(img.convert("L")))
    return normalize_ground_truth(img)


def save_glyph(glyph: np.ndarray, path: str):
    """Write a [-1, 1] glyph as an 8-bit grayscale PNG."""
    Image.fromarray(to_uint8(glyph)).save(path)
