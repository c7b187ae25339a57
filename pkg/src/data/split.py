"""
Deterministic train/test split by character, split manifest I/O,
and per-style sample statistics.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set

import numpy as np

from src.config.logger import get_logger
from src.data.glyphs import codepoint_name
from src.errors import ConfigurationError, DataError

logger = get_logger(__name__)


@dataclass(frozen=True)
class DatasetSplit:
    """Characters held out for testing; every other character trains."""

    train_chars: FrozenSet[int]
    test_chars: FrozenSet[int]
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "train_chars", frozenset(self.train_chars))
        object.__setattr__(self, "test_chars", frozenset(self.test_chars))
        overlap = self.train_chars & self.test_chars
        if overlap:
            raise DataError(f"{len(overlap)} characters are in both train and test sets")

    def part(self, name: str) -> FrozenSet[int]:
        """Character set of the 'train' or 'test' part."""
        if name == "train":
            return self.train_chars
        if name == "test":
            return self.test_chars
        raise ConfigurationError(f"Unknown split part: {name}")


def common_characters(chars_by_style: Mapping[int, Iterable[int]]) -> Set[int]:
    """Characters available in every style."""
    sets = [set(chars) for chars in chars_by_style.values()]
    if not sets:
        return set()
    return set.intersection(*sets)


def split_dataset(chars_by_style: Mapping[int, Iterable[int]], test_count: int,
                  seed: int) -> DatasetSplit:
    """
    Hold out ``test_count`` characters drawn from the all-styles intersection.

    Args:
        chars_by_style: style label -> characters available in that style
        test_count: Number of test characters
        seed: Sampling seed; equal seeds give equal splits

    Returns:
        DatasetSplit
    """
    common = sorted(common_characters(chars_by_style))
    if test_count < 0 or test_count > len(common):
        raise ConfigurationError(
            f"test_count {test_count} exceeds the {len(common)} characters common to all styles"
        )

    rng = np.random.default_rng(seed)
    picked = rng.choice(len(common), size=test_count, replace=False) if test_count else []
    test_chars = {common[int(i)] for i in picked}

    all_chars: Set[int] = set()
    for chars in chars_by_style.values():
        all_chars.update(chars)

    split = DatasetSplit(frozenset(all_chars - test_chars), frozenset(test_chars), seed)
    logger.info(
        f"✓ Split (seed {seed}): {len(split.train_chars)} train / "
        f"{len(split.test_chars)} test characters ({len(common)} common)"
    )
    return split


def write_manifest(split: DatasetSplit, path: str):
    """One line per character: ``<CODEPOINT>\\t<train|test>``, sorted by code point."""
    lines = [f"# seed={split.seed} test_count={len(split.test_chars)}"]
    tags = {c: "train" for c in split.train_chars}
    tags.update({c: "test" for c in split.test_chars})
    for code in sorted(tags):
        lines.append(f"{codepoint_name(code)}\t{tags[code]}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def load_manifest(path: str) -> DatasetSplit:
    """Read a manifest written by write_manifest."""
    train: Set[int] = set()
    test: Set[int] = set()
    seed = 0
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    key, _, value = token.partition("=")
                    if key == "seed":
                        seed = int(value)
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in ("train", "test"):
                raise DataError(f"{path} line {line_no}: malformed manifest line {line!r}")
            code = int(parts[0], 16)
            (train if parts[1] == "train" else test).add(code)
    return DatasetSplit(frozenset(train), frozenset(test), seed)


@dataclass
class SplitStatistics:
    """Per-style train/test/total image counts."""

    train: Dict[int, int] = field(default_factory=dict)
    test: Dict[int, int] = field(default_factory=dict)

    @property
    def styles(self) -> List[int]:
        return sorted(set(self.train) | set(self.test))

    def total(self, style: int) -> int:
        return self.train.get(style, 0) + self.test.get(style, 0)

    @property
    def train_total(self) -> int:
        return sum(self.train.values())

    @property
    def test_total(self) -> int:
        return sum(self.test.values())

    @property
    def grand_total(self) -> int:
        return self.train_total + self.test_total

    def to_table(self) -> str:
        """Aligned text table with a Total column."""
        header = ["Style"] + [str(s) for s in self.styles] + ["Total"]
        rows = [
            ["Training"] + [str(self.train.get(s, 0)) for s in self.styles] + [str(self.train_total)],
            ["Test"] + [str(self.test.get(s, 0)) for s in self.styles] + [str(self.test_total)],
            ["Total"] + [str(self.total(s)) for s in self.styles] + [str(self.grand_total)],
        ]
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]

        def fmt(row: List[str]) -> str:
            return "  ".join(cell.rjust(w) for cell, w in zip(row, widths))

        lines = [fmt(header), "-" * len(fmt(header))] + [fmt(r) for r in rows]
        return "\n".join(lines) + "\n"


def split_statistics(images_by_style: Mapping[int, Mapping[int, int]],
                     split: DatasetSplit) -> SplitStatistics:
    """
    Count images per style on each side of a split.

    Args:
        images_by_style: style -> {character: number of images}
        split: Character split
    """
    stats = SplitStatistics()
    for style, counts in sorted(images_by_style.items()):
        stats.train[style] = sum(n for c, n in counts.items() if c not in split.test_chars)
        stats.test[style] = sum(n for c, n in counts.items() if c in split.test_chars)
    return stats
