"""
Model configuration: style/component branch switches and layer widths.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Tuple

from src.errors import ConfigurationError

STYLE_MODES = ("onehot", "embedding", "disabled")

# preset name -> (style_mode, components_enabled)
MODE_PRESETS: Dict[str, Tuple[str, bool]] = {
    "proposed": ("onehot", True),
    "onehot": ("onehot", False),
    "components": ("embedding", True),
    "baseline": ("embedding", False),
    "single-style": ("disabled", True),
    "single-style-baseline": ("disabled", False),
}


def resolve_mode(name: str) -> Tuple[str, bool]:
    """(style_mode, components_enabled) of a preset name."""
    try:
        return MODE_PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown mode {name!r}; choose from {', '.join(MODE_PRESETS)}"
        ) from None


@dataclass(frozen=True)
class ModelConfig:
    """Everything that fixes parameter shapes; stored in every checkpoint."""

    styles_count: int = 7
    style_mode: str = "onehot"
    components_enabled: bool = True
    vocab_size: int = 517
    style_embedding_dim: int = 128
    component_embedding_dim: int = 128
    component_hidden: int = 256
    generator_filters: int = 64
    discriminator_filters: int = 64
    final_dropout: bool = True
    dropout_rate: float = 0.5

    def __post_init__(self):
        if self.style_mode not in STYLE_MODES:
            raise ConfigurationError(f"style_mode must be one of {STYLE_MODES}, got {self.style_mode!r}")
        if self.styles_count < 1:
            raise ConfigurationError("styles_count must be >= 1")
        if self.vocab_size < 1:
            raise ConfigurationError("vocab_size must be >= 1")
        if self.generator_filters < 1 or self.discriminator_filters < 1:
            raise ConfigurationError("filter widths must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError("dropout_rate must be in [0, 1)")

    @property
    def image_feature_dim(self) -> int:
        return self.generator_filters * 8

    @property
    def style_dim(self) -> int:
        if self.style_mode == "onehot":
            return self.styles_count
        if self.style_mode == "embedding":
            return self.style_embedding_dim
        return 0

    @property
    def component_dim(self) -> int:
        return self.component_hidden if self.components_enabled else 0

    @property
    def condition_dim(self) -> int:
        """Length of [v_i | v_s | v_c]."""
        return self.image_feature_dim + self.style_dim + self.component_dim

    @property
    def uses_style(self) -> bool:
        return self.style_mode != "disabled"

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        """Create from dictionary."""
        return cls(**data)
