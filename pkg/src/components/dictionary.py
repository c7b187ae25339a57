"""
Character decomposition dictionary.
Maps each character code to its ordered component sequence.
"""

from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Set, Tuple
from src.config.logger import get_logger
from src.errors import DataError, RangeError

logger = get_logger(__name__)

DEFAULT_VOCAB_SIZE = 517


class DictionaryParseError(DataError):
    """Malformed dictionary line."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"Line {line_no}: {message}")


class ComponentRangeError(RangeError, DataError):
    """Component ID outside [1, vocab_size]."""
    pass


class DuplicateCharacterError(DataError):
    """Character listed twice in a dictionary file."""
    pass


class MissingCharacterError(DataError, KeyError):
    """Character has no dictionary entry."""

    def __init__(self, code: int):
        self.code = code
        super().__init__(f"No component sequence for U+{code:04X} ({chr(code)})")

    def __str__(self) -> str:
        return self.args[0]


ComponentSequence = Tuple[int, ...]


@dataclass(frozen=True)
class ComponentDictionary:
    """Immutable character → component sequence table."""

    entries: Mapping[int, ComponentSequence]
    vocab_size: int = DEFAULT_VOCAB_SIZE

    def __post_init__(self):
        frozen = MappingProxyType({int(k): tuple(v) for k, v in self.entries.items()})
        object.__setattr__(self, "entries", frozen)
        for code, seq in frozen.items():
            if not seq:
                raise DataError(f"Empty component sequence for U+{code:04X}")
            for cid in seq:
                check_component_id(cid, self.vocab_size)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, code: int) -> bool:
        return code in self.entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComponentDictionary):
            return NotImplemented
        return self.vocab_size == other.vocab_size and dict(self.entries) == dict(other.entries)

    def decompose(self, code: int) -> ComponentSequence:
        """Component sequence of one character."""
        return decompose(self, code)

    def coverage_report(self, chars: Iterable[int]) -> Set[int]:
        """Characters in ``chars`` without an entry."""
        return coverage_report(self, chars)


def check_component_id(cid: int, vocab_size: int = DEFAULT_VOCAB_SIZE) -> int:
    """Validate one component ID against the vocabulary."""
    if not 1 <= cid <= vocab_size:
        raise ComponentRangeError(f"Component ID {cid} outside [1, {vocab_size}]")
    return cid


def load_dictionary(path: str, vocab_size: int = DEFAULT_VOCAB_SIZE) -> ComponentDictionary:
    """
    Load a decomposition dictionary file.

    Each non-blank line is ``<character><TAB><id> <id> ...``.

    Args:
        path: Dictionary file (UTF-8)
        vocab_size: Largest valid component ID

    Returns:
        ComponentDictionary with one entry per non-blank line
    """
    entries: Dict[int, ComponentSequence] = {}

    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue

            parts = line.split("\t")
            if len(parts) != 2 or len(parts[0]) != 1:
                raise DictionaryParseError(
                    line_no, f"expected <character><TAB><ids>, got {line!r}"
                )

            char, id_text = parts
            tokens = id_text.split()
            if not tokens:
                raise DictionaryParseError(line_no, "no component IDs")
            try:
                ids = tuple(int(t) for t in tokens)
            except ValueError:
                raise DictionaryParseError(line_no, f"non-integer component ID in {id_text!r}")

            for cid in ids:
                if not 1 <= cid <= vocab_size:
                    raise ComponentRangeError(
                        f"Line {line_no}: component ID {cid} outside [1, {vocab_size}]"
                    )

            code = ord(char)
            if code in entries:
                raise DuplicateCharacterError(f"Line {line_no}: duplicate character {char!r}")
            entries[code] = ids

    logger.info(f"✓ Loaded {len(entries)} decompositions from {path} (vocab {vocab_size})")
    return ComponentDictionary(entries, vocab_size)


def write_dictionary(dictionary: ComponentDictionary, path: str):
    """Write a dictionary in the load_dictionary format, sorted by code point."""
    with open(path, "w", encoding="utf-8") as f:
        for code in sorted(dictionary.entries):
            ids = " ".join(str(cid) for cid in dictionary.entries[code])
            f.write(f"{chr(code)}\t{ids}\n")


def decompose(dictionary: ComponentDictionary, code: int) -> ComponentSequence:
    """
    Look up the component sequence of a character.

    Raises:
        MissingCharacterError: character not in the dictionary
    """
    try:
        return dictionary.entries[code]
    except KeyError:
        raise MissingCharacterError(code) from None


def coverage_report(dictionary: ComponentDictionary, chars: Iterable[int]) -> Set[int]:
    """Subset of ``chars`` with no dictionary entry; empty means full coverage."""
    return {code for code in chars if code not in dictionary.entries}
