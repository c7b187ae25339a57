"""
Paired training samples (x, y, c, s) drawn from a corpus split. Pixel data
is loaded when a sample is read, not when it is built.
"""

from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterator, List, Optional, Sequence, Set, Union

import numpy as np

from src.components.dictionary import (
    ComponentDictionary,
    ComponentSequence,
    MissingCharacterError,
    decompose,
)
from src.config.logger import get_logger
from src.data.corpus import GlyphCorpus
from src.data.glyphs import (
    CANVAS_SIZE,
    GlyphProvider,
    InvalidImageError,
    render_source_glyph,
)
from src.data.split import DatasetSplit
from src.errors import DataError, ShapeError

logger = get_logger(__name__)


class SampleError(DataError):
    """A ground-truth image could not be turned into a sample."""

    def __init__(self, path: str, cause: Exception):
        self.path = path
        self.cause = cause
        super().__init__(f"Cannot build sample from {path}: {cause}")


def check_glyph(glyph: np.ndarray, name: str = "glyph") -> np.ndarray:
    """Assert the 256x256 / [-1, 1] glyph contract."""
    if glyph.shape != (CANVAS_SIZE, CANVAS_SIZE):
        raise ShapeError(f"{name} has shape {glyph.shape}, expected {(CANVAS_SIZE, CANVAS_SIZE)}")
    if not np.all(np.isfinite(glyph)) or glyph.min() < -1.0 or glyph.max() > 1.0:
        raise DataError(f"{name} values outside [-1, 1]")
    return glyph


GlyphSource = Union[np.ndarray, Callable[[], np.ndarray]]


@dataclass
class TrainingSample:
    """
    One (x, y, c, s) quadruple.

    Glyphs are given either as arrays or as zero-argument loaders; loaders
    are called on every access so a dataset holds no pixel data.
    """

    character: int
    style: int
    components: ComponentSequence
    source_glyph: GlyphSource = field(repr=False)
    target_glyph: GlyphSource = field(repr=False)

    def __post_init__(self):
        if not self.components:
            raise DataError(f"Empty component sequence for U+{self.character:04X}")
        if isinstance(self.source_glyph, np.ndarray):
            check_glyph(self.source_glyph, "source")
        if isinstance(self.target_glyph, np.ndarray):
            check_glyph(self.target_glyph, "target")

    @property
    def source(self) -> np.ndarray:
        return _resolve(self.source_glyph, "source")

    @property
    def target(self) -> np.ndarray:
        return _resolve(self.target_glyph, "target")


def _resolve(glyph: GlyphSource, name: str) -> np.ndarray:
    if isinstance(glyph, np.ndarray):
        return glyph
    return check_glyph(glyph(), name)


@dataclass
class BuildReport:
    """Counts of samples emitted and skipped by build_samples."""

    emitted: int = 0
    skipped_unreadable: List[str] = field(default_factory=list)
    skipped_missing: List[int] = field(default_factory=list)

    @property
    def skipped(self) -> int:
        return len(self.skipped_unreadable) + len(self.skipped_missing)


def build_samples(
    split: DatasetSplit,
    corpus: GlyphCorpus,
    dictionary: ComponentDictionary,
    provider: GlyphProvider,
    part: str = "train",
    skip_missing: bool = False,
    skip_unreadable: bool = False,
    styles: Optional[Sequence[int]] = None,
    report: Optional[BuildReport] = None,
) -> Iterator[TrainingSample]:
    """
    Yield one TrainingSample per ground-truth image of the chosen split part.

    Args:
        split: Character split
        corpus: Ground-truth corpus
        dictionary: Decomposition dictionary
        provider: Source glyph provider
        part: 'train' or 'test'
        skip_missing: Drop characters absent from the dictionary instead of aborting
        skip_unreadable: Drop unreadable images instead of aborting
        styles: Restrict to these style labels
        report: Collects emitted/skipped counts when given

    Raises:
        MissingCharacterError: character not in dictionary and skip_missing is off
        SampleError: unreadable image and skip_unreadable is off
    """
    report = report if report is not None else BuildReport()
    chars = split.part(part)
    rendered: Set[int] = set()

    for record in corpus.records:
        if record.code not in chars:
            continue
        if styles is not None and record.style not in styles:
            continue

        try:
            components = decompose(dictionary, record.code)
        except MissingCharacterError:
            if not skip_missing:
                raise
            logger.warning(f"Skipping {record.path}: U+{record.code:04X} not in dictionary")
            report.skipped_missing.append(record.code)
            continue

        try:
            corpus.verify(record)
        except InvalidImageError as e:
            if not skip_unreadable:
                raise SampleError(record.path, e) from e
            logger.warning(f"Skipping unreadable image {record.path}: {e}")
            report.skipped_unreadable.append(record.path)
            continue

        # one trial render per character surfaces missing source glyphs here
        if record.code not in rendered:
            render_source_glyph(record.code, provider)
            rendered.add(record.code)

        report.emitted += 1
        yield TrainingSample(
            character=record.code,
            style=record.style,
            components=components,
            source_glyph=partial(render_source_glyph, record.code, provider),
            target_glyph=partial(corpus.load_target, record),
        )

    if report.skipped:
        logger.warning(
            f"{part}: {report.emitted} samples, skipped {len(report.skipped_unreadable)} unreadable "
            f"and {len(report.skipped_missing)} without decomposition"
        )
    else:
        logger.info(f"✓ {part}: {report.emitted} samples")


