"""
Evaluation of a generator on a test set, aggregated per style.
"""

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import torch

from src.components.dictionary import ComponentDictionary
from src.config.logger import get_logger
from src.data.corpus import GlyphCorpus
from src.data.glyphs import GlyphProvider
from src.data.samples import BuildReport, TrainingSample, build_samples
from src.data.split import DatasetSplit
from src.errors import ConfigurationError, DataError
from src.evaluation.metrics import batch_mse, batch_ssim
from src.networks.config import ModelConfig
from src.networks.generator import Generator
from src.training.batching import collate
from src.training.checkpoint import load_generator

logger = get_logger(__name__)


@dataclass(frozen=True)
class MetricPair:
    """MSE and SSIM of one image pair or a mean over pairs."""

    mse: float
    ssim: float


@dataclass
class EvalReport:
    """Per-style and overall metric means."""

    per_style: Dict[int, MetricPair] = field(default_factory=dict)
    sample_count: Dict[int, int] = field(default_factory=dict)
    overall: MetricPair = MetricPair(0.0, 0.0)
    missing: int = 0

    @property
    def total_samples(self) -> int:
        return sum(self.sample_count.values())

    def to_table(self) -> str:
        """Aligned text table, one row per style plus the overall mean."""
        rows = [("Style", "Count", "MSE", "SSIM")]
        for style in sorted(self.per_style):
            m = self.per_style[style]
            rows.append((str(style), str(self.sample_count[style]), f"{m.mse:.4f}", f"{m.ssim:.4f}"))
        rows.append(("Mean", str(self.total_samples), f"{self.overall.mse:.4f}", f"{self.overall.ssim:.4f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        if self.missing:
            lines.append(f"({self.missing} test images missing and excluded)")
        return "\n".join(lines) + "\n"

    def write_tsv(self, path: str):
        """Machine-readable copy of the table."""
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, delimiter="\t", lineterminator="\n")
            writer.writerow(["style", "count", "mse", "ssim"])
            for style in sorted(self.per_style):
                m = self.per_style[style]
                writer.writerow([style, self.sample_count[style], repr(m.mse), repr(m.ssim)])
            writer.writerow(["overall", self.total_samples, repr(self.overall.mse), repr(self.overall.ssim)])


def aggregate(per_sample: Sequence[tuple], missing: int = 0) -> EvalReport:
    """
    Build an EvalReport from (style, mse, ssim) triples.

    The overall mean is the count-weighted mean of the per-style means.
    """
    sums: Dict[int, List[float]] = {}
    for style, m, s in per_sample:
        acc = sums.setdefault(style, [0.0, 0.0, 0])
        acc[0] += m
        acc[1] += s
        acc[2] += 1

    report = EvalReport(missing=missing)
    for style in sorted(sums):
        total_mse, total_ssim, count = sums[style]
        report.per_style[style] = MetricPair(total_mse / count, total_ssim / count)
        report.sample_count[style] = count

    n = report.total_samples
    if n:
        report.overall = MetricPair(
            sum(report.per_style[s].mse * report.sample_count[s] for s in report.per_style) / n,
            sum(report.per_style[s].ssim * report.sample_count[s] for s in report.per_style) / n,
        )
    return report


@torch.no_grad()
def generate_batch(generator: Generator, samples: Sequence[TrainingSample]) -> torch.Tensor:
    """Generated glyphs (B, 1, 256, 256) with dropout disabled."""
    was_training = generator.training
    generator.eval()
    try:
        batch = collate(samples, generator)
        return generator(batch.x, batch.styles, batch.component_ids, batch.lengths).image
    finally:
        generator.train(was_training)


def evaluate(generator: Generator, samples: Sequence[TrainingSample],
             batch_size: int = 16, missing: int = 0) -> EvalReport:
    """
    Generate every test pair and aggregate MSE/SSIM per style.

    Args:
        generator: Trained generator
        samples: Test samples (x, y, c, s)
        batch_size: Inference batch size
        missing: Number of test images already excluded upstream
    """
    per_sample = []
    for start in range(0, len(samples), batch_size):
        chunk = samples[start:start + batch_size]
        y_hat = generate_batch(generator, chunk).cpu()
        y = torch.stack([torch.from_numpy(s.target) for s in chunk])[:, None]
        mses = batch_mse(y, y_hat).tolist()
        ssims = batch_ssim(y, y_hat).tolist()
        per_sample.extend((s.style, m, v) for s, m, v in zip(chunk, mses, ssims))

    report = aggregate(per_sample, missing)
    logger.info(
        f"✓ Evaluated {report.total_samples} pairs: MSE {report.overall.mse:.4f}, "
        f"SSIM {report.overall.ssim:.4f}"
    )
    return report


def evaluate_checkpoint(path: str, corpus: GlyphCorpus, split: DatasetSplit,
                        dictionary: ComponentDictionary, provider: GlyphProvider,
                        expected: Optional[ModelConfig] = None,
                        styles: Optional[Sequence[int]] = None,
                        device: str = "cpu") -> EvalReport:
    """
    Evaluate a checkpoint on the test part of a split.

    Unreadable test images are excluded and counted; characters missing
    from the dictionary raise MissingCharacterError.
    """
    generator, model_cfg = load_generator(path, expected, device)
    if not model_cfg.uses_style and (styles is None or len(styles) != 1):
        raise ConfigurationError("A single-style checkpoint is evaluated on exactly one style")

    build = BuildReport()
    samples = list(build_samples(split, corpus, dictionary, provider, part="test",
                                 skip_unreadable=True, styles=styles, report=build))
    if not samples:
        raise DataError("No test samples to evaluate")
    return evaluate(generator, samples, missing=len(build.skipped_unreadable))
