"""
Training configuration and learning-rate schedule.
"""

from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Optional

from src.config.settings import Settings
from src.errors import ConfigurationError, RangeError
from src.networks.config import STYLE_MODES, ModelConfig
from src.objective.losses import LossWeights

LR_DECAY_MODES = ("per_epoch", "single")

# keys of the flat [Training] section
TRAINING_KEYS = (
    "batch_size", "epochs", "lr_initial", "lr_phase2_decay", "lr_decay_start",
    "lr_decay_mode", "beta1", "beta2", "g_steps_per_d_step", "lambda_p",
    "lambda_c", "lambda_s", "style_mode", "components_enabled", "seed",
)
MODEL_KEYS = (
    "styles_count", "vocab_size", "style_embedding_dim", "generator_filters",
    "discriminator_filters", "final_dropout", "dropout_rate",
)


class EpochRangeError(RangeError):
    """Epoch outside [1, epochs]."""
    pass


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings plus the model switches they train."""

    batch_size: int = 16
    epochs: int = 40
    lr_initial: float = 0.001
    lr_phase2_decay: float = 0.5
    lr_decay_start: int = 20
    lr_decay_mode: str = "per_epoch"
    beta1: float = 0.5
    beta2: float = 0.999
    g_steps_per_d_step: int = 2
    lambda_p: float = 100.0
    lambda_c: float = 15.0
    lambda_s: float = 1.0
    style_mode: str = "onehot"
    components_enabled: bool = True
    seed: int = 0
    # model shape
    styles_count: int = 7
    vocab_size: int = 517
    style_embedding_dim: int = 128
    generator_filters: int = 64
    discriminator_filters: int = 64
    final_dropout: bool = True
    dropout_rate: float = 0.5
    device: str = "cpu"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.lr_initial <= 0 or self.lr_phase2_decay <= 0:
            raise ConfigurationError("learning rate and decay must be > 0")
        if self.lr_decay_mode not in LR_DECAY_MODES:
            raise ConfigurationError(f"lr_decay_mode must be one of {LR_DECAY_MODES}")
        if self.g_steps_per_d_step < 1:
            raise ConfigurationError("g_steps_per_d_step must be >= 1")
        if self.style_mode not in STYLE_MODES:
            raise ConfigurationError(f"style_mode must be one of {STYLE_MODES}")
        if min(self.lambda_p, self.lambda_c, self.lambda_s) < 0:
            raise ConfigurationError("loss weights must be >= 0")

    @property
    def weights(self) -> LossWeights:
        return LossWeights(self.lambda_p, self.lambda_c, self.lambda_s)

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            styles_count=self.styles_count,
            style_mode=self.style_mode,
            components_enabled=self.components_enabled,
            vocab_size=self.vocab_size,
            style_embedding_dim=self.style_embedding_dim,
            generator_filters=self.generator_filters,
            discriminator_filters=self.discriminator_filters,
            final_dropout=self.final_dropout,
            dropout_rate=self.dropout_rate,
        )

    def with_overrides(self, **overrides: Any) -> "TrainConfig":
        """Copy with non-None overrides applied (CLI flags beat file values)."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        """Create from dictionary, ignoring unknown keys."""
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_settings(cls, settings: Settings) -> "TrainConfig":
        """Read the [Training] and [Model] sections."""
        values: Dict[str, Any] = {}
        for f in fields(cls):
            section = "Training" if f.name in TRAINING_KEYS else "Model"
            if f.name not in TRAINING_KEYS and f.name not in MODEL_KEYS:
                continue
            if f.type in (int, "int"):
                values[f.name] = settings.get_int(section, f.name, f.default)
            elif f.type in (float, "float"):
                values[f.name] = settings.get_float(section, f.name, f.default)
            elif f.type in (bool, "bool"):
                values[f.name] = settings.get_bool(section, f.name, f.default)
            else:
                values[f.name] = settings.get(section, f.name, f.default)
        return cls(**values)

    def to_settings(self, settings: Optional[Settings] = None) -> Settings:
        """Write this configuration into a Settings object."""
        settings = settings or Settings()
        for key in TRAINING_KEYS:
            settings.set("Training", key, getattr(self, key))
        for key in MODEL_KEYS:
            settings.set("Model", key, getattr(self, key))
        return settings


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """
    Learning rate of a 1-based epoch.

    Constant up to lr_decay_start; afterwards either halved every epoch
    ('per_epoch') or halved once ('single').
    """
    if not 1 <= epoch <= cfg.epochs:
        raise EpochRangeError(f"Epoch {epoch} outside [1, {cfg.epochs}]")
    if epoch <= cfg.lr_decay_start:
        return cfg.lr_initial
    if cfg.lr_decay_mode == "per_epoch":
        return cfg.lr_initial * cfg.lr_phase2_decay ** (epoch - cfg.lr_decay_start)
    return cfg.lr_initial * cfg.lr_phase2_decay
