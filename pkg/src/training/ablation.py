"""
Ablation harness: train several mode configurations on identical data
and tabulate their test metrics.
"""

import csv
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from src.components.dictionary import ComponentDictionary
from src.config.logger import get_logger
from src.data.samples import TrainingSample
from src.errors import ConfigurationError, DataError
from src.evaluation.report import evaluate
from src.networks.config import MODE_PRESETS, resolve_mode
from src.training.config import TrainConfig
from src.training.engine import train

logger = get_logger(__name__)

# a preset name, or (name, style_mode, components_enabled)
MatrixEntry = Union[str, Tuple[str, str, bool]]


@dataclass(frozen=True)
class AblationRow:
    """Test metrics of one trained configuration."""

    name: str
    style_mode: str
    components_enabled: bool
    mse: float
    ssim: float


@dataclass
class AblationReport:
    """Rows in matrix order."""

    rows: List[AblationRow] = field(default_factory=list)

    def to_table(self) -> str:
        """Aligned text table with MSE and SSIM columns."""
        cells = [("Configuration", "Style", "Components", "MSE", "SSIM")]
        for r in self.rows:
            cells.append((r.name, r.style_mode, "yes" if r.components_enabled else "no",
                          f"{r.mse:.4f}", f"{r.ssim:.4f}"))
        widths = [max(len(c[i]) for c in cells) for i in range(len(cells[0]))]
        lines = ["  ".join(c.ljust(w) if i < 3 else c.rjust(w)
                           for i, (c, w) in enumerate(zip(row, widths))).rstrip()
                 for row in cells]
        lines.insert(1, "-" * len(lines[0]))
        return "\n".join(lines) + "\n"

    def write_tsv(self, path: str):
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, delimiter="\t", lineterminator="\n")
            writer.writerow(["name", "style_mode", "components_enabled", "mse", "ssim"])
            for r in self.rows:
                writer.writerow([r.name, r.style_mode, str(r.components_enabled).lower(),
                                 repr(r.mse), repr(r.ssim)])


def load_matrix(path: str) -> List[str]:
    """
    Read an ablation matrix file: one mode preset name per line,
    '#' starts a comment.
    """
    if not os.path.exists(path):
        raise DataError(f"Matrix file not found: {path}")
    names = []
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            name = raw.split("#", 1)[0].strip()
            if not name:
                continue
            if name not in MODE_PRESETS:
                raise ConfigurationError(f"{path} line {line_no}: unknown mode {name!r}")
            names.append(name)
    if not names:
        raise ConfigurationError(f"Matrix file {path} lists no configurations")
    return names


def _resolve(entry: MatrixEntry) -> Tuple[str, str, bool]:
    if isinstance(entry, str):
        style_mode, components = resolve_mode(entry)
        return entry, style_mode, components
    return entry


def run_ablation(matrix: Sequence[MatrixEntry], cfg: TrainConfig,
                 train_samples: Sequence[TrainingSample],
                 test_samples: Sequence[TrainingSample], out_dir: str,
                 dictionary: Optional[ComponentDictionary] = None) -> AblationReport:
    """
    Train every configuration with cfg's seed and batch order, then
    evaluate each final generator on the same test samples.

    Args:
        matrix: Preset names or (name, style_mode, components_enabled) triples
        cfg: Shared training configuration; mode switches are overridden per row
        train_samples: Training data shared by every row
        test_samples: Evaluation data shared by every row
        out_dir: Each row trains into <out_dir>/<index>_<name>
        dictionary: Optional coverage check passed to train()

    Returns:
        AblationReport with one row per matrix entry, in order
    """
    entries = [_resolve(e) for e in matrix]
    # validate every row before any training starts
    configs = [cfg.with_overrides(style_mode=s, components_enabled=c) for _, s, c in entries]
    if not test_samples:
        raise DataError("Ablation needs a non-empty test set")

    report = AblationReport()
    for index, ((name, style_mode, components), row_cfg) in enumerate(zip(entries, configs), 1):
        logger.info(f"Ablation {index}/{len(entries)}: {name} (style {style_mode}, components {components})")
        state = train(row_cfg, train_samples, os.path.join(out_dir, f"{index:02d}_{name}"),
                      dictionary=dictionary)
        metrics = evaluate(state.generator, test_samples)
        report.rows.append(AblationRow(name, style_mode, components,
                                       metrics.overall.mse, metrics.overall.ssim))
        logger.info(f"✓ {name}: MSE {metrics.overall.mse:.4f}, SSIM {metrics.overall.ssim:.4f}")
    return report
