"""
Tests glyph normalization, the corpus handle, the character split and
sample assembly.
"""

import glob
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from conftest import TOY_CHARS, TOY_STYLES, toy_dictionary, write_corpus, write_sources
from src.components.dictionary import MissingCharacterError, decompose
from src.data.corpus import CorpusLayoutError, GlyphCorpus
from src.data.glyphs import (
    DirectoryGlyphProvider,
    FontGlyphProvider,
    InvalidImageError,
    MissingGlyphError,
    codepoint_name,
    normalize_ground_truth,
    render_source_glyph,
    scaled_size,
    to_uint8,
)
from src.data.samples import BuildReport, SampleError, build_samples
from src.data.split import (
    DatasetSplit,
    common_characters,
    load_manifest,
    split_dataset,
    split_statistics,
    write_manifest,
)
from src.errors import ConfigurationError, DataError


# --- normalization ---

def test_portrait_glyph_is_centered_with_background_columns():
    raw = Image.new("L", (100, 140), color=0)
    glyph = normalize_ground_truth(raw)

    assert glyph.shape == (256, 256)
    assert glyph.dtype == np.float32
    assert scaled_size(100, 140) == (183, 256)
    assert np.all(glyph[:, :36] == 1.0)
    assert np.all(glyph[:, 219:] == 1.0)
    assert np.all(glyph[:, 36:219] < 0.0)


def test_landscape_glyph_pads_rows():
    glyph = normalize_ground_truth(Image.new("L", (140, 100), color=0))
    assert np.all(glyph[:36, :] == 1.0)
    assert np.all(glyph[219:, :] == 1.0)


def test_all_white_input_stays_white():
    glyph = normalize_ground_truth(Image.new("L", (140, 140), color=255))
    assert np.all(glyph == 1.0)


def test_one_bit_input_keeps_resampled_grays():
    raw = Image.new("1", (70, 140), color=1)
    raw.paste(0, (20, 20, 50, 120))
    glyph = normalize_ground_truth(raw)
    assert glyph.min() >= -1.0 and glyph.max() <= 1.0
    gray = glyph[(glyph > -0.99) & (glyph < 0.99)]
    assert gray.size > 0


def test_degenerate_image_is_rejected():
    with pytest.raises(InvalidImageError):
        normalize_ground_truth(Image.new("L", (0, 140)))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 600), st.integers(1, 600))
def test_scaling_preserves_aspect(width, height):
    new_w, new_h = scaled_size(width, height)
    assert max(new_w, new_h) == 256
    if width >= height:
        assert abs(new_h - height * 256 / width) <= 0.5
    else:
        assert abs(new_w - width * 256 / height) <= 0.5


def test_codepoint_names():
    assert codepoint_name(0x4E00) == "4E00"
    assert codepoint_name(0x41) == "0041"
    assert codepoint_name(0x20000) == "20000"


def test_uint8_mapping_extremes():
    assert to_uint8(np.array([-1.0, 1.0])).tolist() == [0, 255]


# --- source glyphs ---

def test_directory_provider(source_dir):
    provider = DirectoryGlyphProvider(source_dir)
    assert provider.has(TOY_CHARS[0])
    x = render_source_glyph(TOY_CHARS[0], provider)
    assert x.shape == (256, 256) and x.min() >= -1.0
    with pytest.raises(MissingGlyphError):
        provider.load(0x9FA5)


def _find_font():
    for pattern in ("/usr/share/fonts/**/*.ttf", "/usr/share/fonts/**/*.otf", "/Library/Fonts/*.ttf"):
        found = sorted(glob.glob(pattern, recursive=True))
        if found:
            return found[0]
    return None


def test_font_provider_renders_latin_glyph():
    font = _find_font()
    if font is None:
        pytest.skip("no system font available")
    provider = FontGlyphProvider(font)
    x = render_source_glyph(ord("H"), provider)
    assert x.shape == (256, 256)
    assert x.min() < 0.0
    with pytest.raises(MissingGlyphError):
        provider.load(ord(" "))


# --- corpus ---

def test_corpus_scan_with_variants(tmp_path):
    root = write_corpus(str(tmp_path / "c"), variants={(2, TOY_CHARS[0]): 2})
    os.makedirs(os.path.join(root, "source"))
    corpus = GlyphCorpus(root)

    assert corpus.styles() == list(TOY_STYLES)
    assert corpus.characters() == set(TOY_CHARS)
    assert len(corpus.records) == len(TOY_STYLES) * len(TOY_CHARS) + 2
    assert corpus.image_counts()[2][TOY_CHARS[0]] == 3


def test_corpus_rejects_unexpected_names(tmp_path):
    root = write_corpus(str(tmp_path / "c"), chars=TOY_CHARS[:2])
    Image.new("L", (10, 10)).save(os.path.join(root, "1", "hello.png"))
    with pytest.raises(CorpusLayoutError):
        GlyphCorpus(root)


def test_missing_corpus_root(tmp_path):
    with pytest.raises(DataError):
        GlyphCorpus(str(tmp_path / "nowhere"))


def test_cache_matches_direct_normalization(tmp_path, corpus_dir):
    corpus = GlyphCorpus(corpus_dir)
    record = corpus.records[0]
    direct = corpus.load_target(record)

    assert corpus.build_cache(str(tmp_path / "cache"), workers=3) == len(corpus.records)
    assert os.path.exists(corpus.cache_path(record))
    np.testing.assert_array_equal(corpus.load_target(record), direct)


def test_find_and_exclude_unreadable_images(tmp_path):
    root = write_corpus(str(tmp_path / "c"), chars=TOY_CHARS[:3])
    bad = os.path.join(root, "3", f"{TOY_CHARS[2]:04X}.png")
    with open(bad, "wb") as f:
        f.write(b"not a png")
    corpus = GlyphCorpus(root)

    unreadable = corpus.find_unreadable(workers=2)
    assert [r.path for r in unreadable] == [bad]
    corpus.exclude(unreadable)
    assert len(corpus.records) == 3 * len(TOY_STYLES) - 1
    assert TOY_CHARS[2] not in corpus.chars_by_style()[3]
    assert corpus.find_unreadable() == []


# --- split ---

def test_split_is_disjoint_and_drawn_from_common_chars(tmp_path):
    root = write_corpus(str(tmp_path / "c"), skip={(3, TOY_CHARS[9])})
    corpus = GlyphCorpus(root)
    common = common_characters(corpus.chars_by_style())
    assert TOY_CHARS[9] not in common

    split = split_dataset(corpus.chars_by_style(), 4, seed=3)
    assert len(split.test_chars) == 4
    assert split.test_chars <= common
    assert not split.train_chars & split.test_chars
    assert split.train_chars | split.test_chars == set(TOY_CHARS)


def test_split_is_seed_deterministic(corpus_dir):
    by_style = GlyphCorpus(corpus_dir).chars_by_style()
    assert split_dataset(by_style, 3, seed=5) == split_dataset(by_style, 3, seed=5)


def test_split_test_count_too_large(corpus_dir):
    with pytest.raises(ConfigurationError):
        split_dataset(GlyphCorpus(corpus_dir).chars_by_style(), 11, seed=0)


def test_overlapping_split_is_rejected():
    with pytest.raises(DataError):
        DatasetSplit(frozenset({1, 2}), frozenset({2}), 0)


def test_manifest_is_byte_identical_across_runs(tmp_path, corpus_dir):
    by_style = GlyphCorpus(corpus_dir).chars_by_style()
    first, second = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
    write_manifest(split_dataset(by_style, 2, seed=0), first)
    write_manifest(split_dataset(by_style, 2, seed=0), second)

    text = open(first, encoding="utf-8").read()
    assert text == open(second, encoding="utf-8").read()
    lines = text.splitlines()
    assert lines[0] == "# seed=0 test_count=2"
    assert len(lines) == 1 + len(TOY_CHARS)
    assert sum(line.endswith("\ttest") for line in lines) == 2
    assert lines[1].startswith("4E00\t")

    loaded = load_manifest(first)
    assert loaded == split_dataset(by_style, 2, seed=0)


def test_statistics_account_for_every_image(tmp_path):
    root = write_corpus(str(tmp_path / "c"), variants={(1, TOY_CHARS[0]): 3, (2, TOY_CHARS[5]): 1})
    corpus = GlyphCorpus(root)
    split = split_dataset(corpus.chars_by_style(), 2, seed=1)
    stats = split_statistics(corpus.image_counts(), split)

    assert stats.train_total + stats.test_total == stats.grand_total == len(corpus.records)
    for style in TOY_STYLES:
        assert stats.test[style] >= 2
        assert stats.total(style) == sum(corpus.image_counts()[style].values())

    table = stats.to_table()
    assert table.splitlines()[0].split()[-1] == "Total"
    assert table.splitlines()[-1].split()[-1] == str(len(corpus.records))


# --- samples ---

def test_build_samples_pairs_every_image(corpus_dir, source_dir):
    corpus = GlyphCorpus(corpus_dir)
    dictionary = toy_dictionary()
    split = split_dataset(corpus.chars_by_style(), 2, seed=0)

    train = list(build_samples(split, corpus, dictionary, DirectoryGlyphProvider(source_dir)))
    test = list(build_samples(split, corpus, dictionary, DirectoryGlyphProvider(source_dir), part="test"))

    assert len(train) == 8 * len(TOY_STYLES)
    assert len(test) == 2 * len(TOY_STYLES)
    for sample in train + test:
        assert sample.components == decompose(dictionary, sample.character)
        assert sample.source.shape == sample.target.shape == (256, 256)
    assert {s.character for s in test} == set(split.test_chars)


def test_samples_load_pixels_on_access(tmp_path, corpus_dir, source_dir):
    corpus = GlyphCorpus(corpus_dir)
    provider = DirectoryGlyphProvider(source_dir)
    split = split_dataset(corpus.chars_by_style(), 0, seed=0)
    samples = list(build_samples(split, corpus, toy_dictionary(), provider))

    sample = samples[0]
    assert not isinstance(sample.target_glyph, np.ndarray)
    assert not isinstance(sample.source_glyph, np.ndarray)
    direct = corpus.load_target(corpus.records[0])
    np.testing.assert_array_equal(sample.target, direct)
    np.testing.assert_array_equal(sample.source, render_source_glyph(sample.character, provider))

    corpus.build_cache(str(tmp_path / "cache"))
    np.testing.assert_array_equal(sample.target, direct)


def test_build_samples_style_filter(corpus_dir, source_dir):
    corpus = GlyphCorpus(corpus_dir)
    split = split_dataset(corpus.chars_by_style(), 2, seed=0)
    samples = list(build_samples(split, corpus, toy_dictionary(), DirectoryGlyphProvider(source_dir),
                                 styles=[2]))
    assert {s.style for s in samples} == {2}


def test_missing_decomposition_aborts_or_skips(corpus_dir, source_dir):
    corpus = GlyphCorpus(corpus_dir)
    split = split_dataset(corpus.chars_by_style(), 0, seed=0)
    partial = toy_dictionary(TOY_CHARS[:8])
    provider = DirectoryGlyphProvider(source_dir)

    with pytest.raises(MissingCharacterError):
        list(build_samples(split, corpus, partial, provider))

    report = BuildReport()
    samples = list(build_samples(split, corpus, partial, provider, skip_missing=True, report=report))
    assert len(samples) == 8 * len(TOY_STYLES)
    assert len(report.skipped_missing) == 2 * len(TOY_STYLES)
    assert report.emitted == len(samples)


def test_unreadable_image(tmp_path, source_dir):
    root = write_corpus(str(tmp_path / "c"), chars=TOY_CHARS[:3])
    bad = os.path.join(root, "1", f"{TOY_CHARS[1]:04X}.png")
    with open(bad, "wb") as f:
        f.write(b"not a png")
    corpus = GlyphCorpus(root)
    split = split_dataset(corpus.chars_by_style(), 0, seed=0)
    provider = DirectoryGlyphProvider(source_dir)

    with pytest.raises(SampleError):
        list(build_samples(split, corpus, toy_dictionary(), provider))

    report = BuildReport()
    samples = list(build_samples(split, corpus, toy_dictionary(), provider,
                                 skip_unreadable=True, report=report))
    assert len(samples) == 3 * len(TOY_STYLES) - 1
    assert report.skipped_unreadable == [bad]


def test_missing_source_glyph(tmp_path, corpus_dir):
    sources = write_sources(str(tmp_path / "few"), chars=TOY_CHARS[:5])
    corpus = GlyphCorpus(corpus_dir)
    split = split_dataset(corpus.chars_by_style(), 0, seed=0)
    with pytest.raises(MissingGlyphError):
        list(build_samples(split, corpus, toy_dictionary(), DirectoryGlyphProvider(sources)))
