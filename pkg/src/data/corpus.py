"""
Ground-truth corpus handle.
Layout: <root>/<style-id>/<CODEPOINT>.png or <CODEPOINT>_<k>.png (variants).
"""

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set

import numpy as np

from src.config.logger import get_logger
from src.data.glyphs import InvalidImageError, load_image, normalize_ground_truth
from src.errors import DataError

logger = get_logger(__name__)

_STEM = re.compile(r"^([0-9A-Fa-f]{4,6})(?:_(\d+))?$")


class CorpusLayoutError(DataError):
    """Corpus directory does not follow the expected layout."""
    pass


@dataclass(frozen=True)
class GlyphRecord:
    """One ground-truth image of a character under a style."""

    style: int
    code: int
    path: str

    @property
    def stem(self) -> str:
        return os.path.splitext(os.path.basename(self.path))[0]


class GlyphCorpus:
    """Indexes and loads ground-truth glyphs, preferring a normalized cache."""

    def __init__(self, root: str, cache_dir: Optional[str] = None):
        self.root = root
        self.cache_dir = cache_dir
        self.records: List[GlyphRecord] = []
        self._scan()

    def _scan(self):
        if not os.path.isdir(self.root):
            raise CorpusLayoutError(f"Corpus root not found: {self.root}")

        for entry in sorted(os.listdir(self.root)):
            style_dir = os.path.join(self.root, entry)
            if not os.path.isdir(style_dir) or not entry.isdigit():
                continue
            style = int(entry)
            if style < 1:
                raise CorpusLayoutError(f"Style directory {entry} must be >= 1")
            for name in sorted(os.listdir(style_dir)):
                stem, ext = os.path.splitext(name)
                if ext.lower() != ".png":
                    continue
                match = _STEM.match(stem)
                if match is None:
                    raise CorpusLayoutError(f"Unexpected file name {os.path.join(style_dir, name)}")
                self.records.append(
                    GlyphRecord(style, int(match.group(1), 16), os.path.join(style_dir, name))
                )

        self.records.sort(key=lambda r: (r.style, r.code, r.stem))
        logger.info(
            f"Corpus {self.root}: {len(self.records)} images, "
            f"{len(self.styles())} styles, {len(self.characters())} characters"
        )

    def styles(self) -> List[int]:
        return sorted({r.style for r in self.records})

    def characters(self) -> Set[int]:
        return {r.code for r in self.records}

    def chars_by_style(self) -> Dict[int, Set[int]]:
        """Characters available per style."""
        result: Dict[int, Set[int]] = {}
        for r in self.records:
            result.setdefault(r.style, set()).add(r.code)
        return result

    def cache_path(self, record: GlyphRecord) -> Optional[str]:
        if not self.cache_dir:
            return None
        return os.path.join(self.cache_dir, str(record.style), f"{record.stem}.npy")

    def load_target(self, record: GlyphRecord) -> np.ndarray:
        """Normalized ground-truth glyph y for a record."""
        cached = self.cache_path(record)
        if cached and os.path.exists(cached):
            return np.load(cached)
        return normalize_ground_truth(load_image(record.path))

    def verify(self, record: GlyphRecord):
        """Raise InvalidImageError unless the record's image (or its cache entry) is usable."""
        cached = self.cache_path(record)
        if cached and os.path.exists(cached):
            return
        width, height = load_image(record.path).size
        if width < 1 or height < 1:
            raise InvalidImageError(f"Degenerate image size {width}x{height} in {record.path}")

    def find_unreadable(self, workers: int = 4) -> List[GlyphRecord]:
        """Records whose image cannot be decoded, in record order."""
        def check(record: GlyphRecord) -> Optional[GlyphRecord]:
            try:
                self.verify(record)
            except InvalidImageError:
                return record
            return None

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            return [r for r in pool.map(check, self.records) if r is not None]

    def exclude(self, records: Sequence[GlyphRecord]):
        """Drop records from the index."""
        dropped = set(records)
        self.records = [r for r in self.records if r not in dropped]

    def build_cache(self, cache_dir: str, workers: int = 4) -> int:
        """
        Normalize every record into ``cache_dir`` as float32 .npy files.

        Each worker normalizes and writes one record at a time, so at most
        ``workers`` glyphs are held in memory.

        Returns:
            Number of cached images
        """
        def store(record: GlyphRecord):
            target = os.path.join(cache_dir, str(record.style), f"{record.stem}.npy")
            np.save(target, normalize_ground_truth(load_image(record.path)))

        for style in self.styles():
            os.makedirs(os.path.join(cache_dir, str(style)), exist_ok=True)
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            list(pool.map(store, self.records))

        self.cache_dir = cache_dir
        logger.info(f"✓ Cached {len(self.records)} normalized glyphs in {cache_dir}")
        return len(self.records)

    def image_counts(self) -> Dict[int, Dict[int, int]]:
        """style -> {character: number of images}, variants included."""
        counts: Dict[int, Dict[int, int]] = {}
        for r in self.records:
            per_style = counts.setdefault(r.style, {})
            per_style[r.code] = per_style.get(r.code, 0) + 1
        return counts
