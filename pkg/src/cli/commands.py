"""
Workflow commands behind the command-line entry point.
Each command validates its inputs before writing anything.
"""

import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

from PIL import Image

from src.components.dictionary import ComponentDictionary, MissingCharacterError, decompose, load_dictionary
from src.config.logger import get_logger
from src.config.settings import Settings
from src.data.corpus import GlyphCorpus
from src.data.glyphs import (
    CANVAS_SIZE,
    DirectoryGlyphProvider,
    FontGlyphProvider,
    MissingGlyphError,
    codepoint_name,
    render_source_glyph,
    save_glyph,
    to_uint8,
)
from src.data.samples import BuildReport, TrainingSample, build_samples
from src.data.split import (
    DatasetSplit,
    SplitStatistics,
    load_manifest,
    split_dataset,
    split_statistics,
    write_manifest,
)
from src.errors import ConfigurationError, DataError
from src.evaluation.report import EvalReport, evaluate_checkpoint, generate_batch
from src.networks.encoders import StyleRangeError
from src.training.ablation import AblationReport, load_matrix, run_ablation
from src.training.checkpoint import TrainState, load_generator
from src.training.config import TrainConfig
from src.training.engine import train

logger = get_logger(__name__)

MANIFEST_NAME = "manifest.txt"
STATISTICS_NAME = "statistics.txt"


@dataclass
class PrepareResult:
    """Files and counts written by cmd_prepare."""

    split: DatasetSplit
    statistics: SplitStatistics
    manifest_path: str
    statistics_path: str
    cached: int


def _require_file(path: Optional[str], what: str) -> str:
    if not path:
        raise ConfigurationError(f"No {what} given")
    if not os.path.exists(path):
        raise DataError(f"{what.capitalize()} not found: {path}")
    return path


def open_dictionary(path: Optional[str], vocab_size: int = 517) -> ComponentDictionary:
    return load_dictionary(_require_file(path, "dictionary"), vocab_size)


def open_provider(source_dir: Optional[str] = None, font_path: Optional[str] = None):
    """Source glyph provider: a directory of PNGs, or a font file."""
    if source_dir:
        if not os.path.isdir(source_dir):
            raise DataError(f"Source glyph directory not found: {source_dir}")
        return DirectoryGlyphProvider(source_dir)
    _require_file(font_path, "source directory or font")
    try:
        return FontGlyphProvider(font_path)
    except OSError as e:
        raise DataError(f"Cannot open font {font_path}: {e}") from e


def check_style(style: int, styles_count: int) -> int:
    if not 1 <= style <= styles_count:
        raise StyleRangeError(f"Style {style} outside [1, {styles_count}]")
    return style


def cmd_prepare(corpus_root: str, dictionary_path: str, out_dir: str, test_count: int,
                seed: int, skip_missing: bool = False, workers: int = 4,
                vocab_size: int = 517) -> PrepareResult:
    """
    Split the corpus by character, cache normalized targets and write the
    statistics table.

    Args:
        corpus_root: Ground-truth corpus root
        dictionary_path: Decomposition dictionary
        out_dir: Receives manifest.txt, statistics.txt and cache/
        test_count: Characters held out for testing
        seed: Split seed
        skip_missing: Warn instead of aborting on characters without a decomposition
            and on unreadable corpus images
        workers: Normalization threads

    Raises:
        DataError: characters without a decomposition or unreadable images, and
            skip_missing is off (checked before anything is written)
    """
    dictionary = open_dictionary(dictionary_path, vocab_size)
    corpus = GlyphCorpus(corpus_root)
    if not corpus.records:
        raise DataError(f"Corpus {corpus_root} contains no glyph images")

    missing = dictionary.coverage_report(corpus.characters())
    if missing:
        listing = " ".join(codepoint_name(c) for c in sorted(missing))
        if not skip_missing:
            raise DataError(f"{len(missing)} characters lack a decomposition: {listing}")
        logger.warning(f"{len(missing)} characters lack a decomposition and will be skipped: {listing}")

    unreadable = corpus.find_unreadable(workers)
    if unreadable:
        listing = " ".join(r.path for r in unreadable)
        if not skip_missing:
            raise DataError(f"{len(unreadable)} corpus images are unreadable: {listing}")
        logger.warning(f"{len(unreadable)} unreadable corpus images will be skipped: {listing}")
        corpus.exclude(unreadable)
        if not corpus.records:
            raise DataError(f"Corpus {corpus_root} contains no readable glyph images")

    split = split_dataset(corpus.chars_by_style(), test_count, seed)
    stats = split_statistics(corpus.image_counts(), split)

    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    statistics_path = os.path.join(out_dir, STATISTICS_NAME)
    write_manifest(split, manifest_path)
    with open(statistics_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(stats.to_table())
    cached = corpus.build_cache(os.path.join(out_dir, "cache"), workers)

    logger.info(f"✓ Prepared {corpus_root}: {stats.train_total} training / {stats.test_total} test images")
    return PrepareResult(split, stats, manifest_path, statistics_path, cached)


def resolve_split(corpus: GlyphCorpus, manifest_path: Optional[str],
                  test_count: int, seed: int) -> DatasetSplit:
    """The manifest's split when given, otherwise a fresh seeded split."""
    if manifest_path:
        return load_manifest(_require_file(manifest_path, "test manifest"))
    return split_dataset(corpus.chars_by_style(), test_count, seed)


def open_corpus(corpus_root: Optional[str], manifest_path: Optional[str] = None) -> GlyphCorpus:
    """Corpus handle reading the cache that sits next to the manifest, if any."""
    if not corpus_root:
        raise ConfigurationError("No corpus given")
    cache_dir = None
    if manifest_path:
        candidate = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), "cache")
        cache_dir = candidate if os.path.isdir(candidate) else None
    return GlyphCorpus(corpus_root, cache_dir)


def collect_samples(split: DatasetSplit, corpus: GlyphCorpus, dictionary: ComponentDictionary,
                    provider, part: str, skip_missing: bool,
                    styles: Optional[Sequence[int]] = None) -> List[TrainingSample]:
    report = BuildReport()
    samples = list(build_samples(split, corpus, dictionary, provider, part=part,
                                 skip_missing=skip_missing, skip_unreadable=skip_missing,
                                 styles=styles, report=report))
    if report.skipped:
        logger.warning(f"Skipped {report.skipped} {part} images")
    return samples


def cmd_train(cfg: TrainConfig, corpus_root: str, dictionary_path: str, provider, out_dir: str,
              manifest_path: Optional[str] = None, test_count: int = 1000,
              style: Optional[int] = None, skip_missing: bool = False,
              resume: Optional[str] = None, validate: bool = False,
              settings: Optional[Settings] = None) -> TrainState:
    """
    Train on the train part of a split and write checkpoints into out_dir.

    ``style`` restricts the data to one style (single-style protocol);
    ``validate`` selects best.pt by SSIM on the test part.
    """
    if not cfg.model_config().uses_style and style is None:
        raise ConfigurationError("Single-style training needs --style")
    styles = [check_style(style, cfg.styles_count)] if style is not None else None
    if resume:
        _require_file(resume, "resume checkpoint")

    dictionary = open_dictionary(dictionary_path, cfg.vocab_size)
    corpus = open_corpus(corpus_root, manifest_path)
    split = resolve_split(corpus, manifest_path, test_count, cfg.seed)
    samples = collect_samples(split, corpus, dictionary, provider, "train", skip_missing, styles)
    validation = (collect_samples(split, corpus, dictionary, provider, "test", skip_missing, styles)
                  if validate else None)

    os.makedirs(out_dir, exist_ok=True)
    cfg.to_settings(settings).save(os.path.join(out_dir, "config.ini"))
    return train(cfg, samples, out_dir, dictionary=None if skip_missing else dictionary,
                 resume=resume, validation=validation)


def cmd_generate(checkpoint: str, characters: str, style: int, out_dir: str,
                 dictionary_path: str, provider, sheet: bool = False) -> List[str]:
    """
    Write ``<CODEPOINT>_<style>.png`` for every character of the text.

    Raises:
        StyleRangeError: style outside the checkpoint's label range
        DataError: characters without a decomposition or source glyph (all listed)
    """
    generator, model_cfg = load_generator(_require_file(checkpoint, "checkpoint"))
    check_style(style, model_cfg.styles_count)
    dictionary = open_dictionary(dictionary_path, model_cfg.vocab_size)

    codes = list(dict.fromkeys(ord(ch) for ch in characters if not ch.isspace()))
    if not codes:
        raise ConfigurationError("No characters to generate")

    samples, problems = [], []
    for code in codes:
        try:
            components = decompose(dictionary, code)
            source = render_source_glyph(code, provider)
        except (MissingCharacterError, MissingGlyphError) as e:
            problems.append(f"{chr(code)} ({codepoint_name(code)}): {e}")
            continue
        samples.append(TrainingSample(code, style, components, source, source))
    if problems:
        raise DataError("Cannot generate:\n  " + "\n  ".join(problems))

    images = generate_batch(generator, samples)[:, 0].cpu().numpy()
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for sample, image in zip(samples, images):
        path = os.path.join(out_dir, f"{codepoint_name(sample.character)}_{style}.png")
        save_glyph(image, path)
        paths.append(path)

    if sheet:
        contact = Image.new("L", (CANVAS_SIZE * len(images), CANVAS_SIZE), color=255)
        for i, image in enumerate(images):
            contact.paste(Image.fromarray(to_uint8(image)), (i * CANVAS_SIZE, 0))
        sheet_path = os.path.join(out_dir, f"sheet_{style}.png")
        contact.save(sheet_path)
        paths.append(sheet_path)

    logger.info(f"✓ Generated {len(samples)} glyphs in style {style} into {out_dir}")
    return paths


def cmd_evaluate(checkpoint: str, corpus_root: str, manifest_path: str, dictionary_path: str,
                 provider, out_dir: str, style: Optional[int] = None) -> EvalReport:
    """Evaluate on the manifest's test part; writes evaluation.txt and evaluation.tsv."""
    _, model_cfg = load_generator(_require_file(checkpoint, "checkpoint"))
    styles = [check_style(style, model_cfg.styles_count)] if style is not None else None
    dictionary = open_dictionary(dictionary_path, model_cfg.vocab_size)
    corpus = open_corpus(corpus_root, manifest_path)
    split = load_manifest(_require_file(manifest_path, "test manifest"))

    report = evaluate_checkpoint(checkpoint, corpus, split, dictionary, provider, styles=styles)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "evaluation.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_table())
    report.write_tsv(os.path.join(out_dir, "evaluation.tsv"))
    return report


def cmd_ablate(cfg: TrainConfig, matrix_path: str, corpus_root: str, dictionary_path: str,
               provider, out_dir: str, manifest_path: Optional[str] = None,
               test_count: int = 1000, skip_missing: bool = False) -> AblationReport:
    """Run the matrix file's configurations; writes ablation.txt and ablation.tsv."""
    matrix = load_matrix(matrix_path)
    for name in matrix:
        if name.startswith("single-style"):
            raise ConfigurationError(f"Mode {name} trains one style per model; use train --style")

    dictionary = open_dictionary(dictionary_path, cfg.vocab_size)
    corpus = open_corpus(corpus_root, manifest_path)
    split = resolve_split(corpus, manifest_path, test_count, cfg.seed)
    train_samples = collect_samples(split, corpus, dictionary, provider, "train", skip_missing)
    test_samples = collect_samples(split, corpus, dictionary, provider, "test", skip_missing)

    report = run_ablation(matrix, cfg, train_samples, test_samples, out_dir,
                          dictionary=None if skip_missing else dictionary)
    with open(os.path.join(out_dir, "ablation.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write(report.to_table())
    report.write_tsv(os.path.join(out_dir, "ablation.tsv"))
    return report
