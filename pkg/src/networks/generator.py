"""
Decoder G and the full generator (E_i, E_c, v_s, G) with mirror skip connections.
"""

from typing import List, NamedTuple, Optional

import torch
import torch.nn as nn

from src.errors import ShapeError
from src.networks.config import ModelConfig
from src.networks.encoders import ComponentEncoder, ImageEncoder, StyleEncoder
from src.networks.layers import KERNEL, deconv_block, init_weights


class Decoder(nn.Module):
    """
    Eight stride-2 transposed convolutions, 1x1 condition up to 256x256x1.

    Layer j >= 2 reads concat(previous output, encoder L(9-j)). The last
    layer has optional dropout on its input and a tanh output.
    """

    def __init__(self, condition_dim: int, filters: int = 64, final_dropout: bool = True,
                 dropout_rate: float = 0.5):
        super().__init__()
        self.condition_dim = condition_dim
        enc = [filters, filters * 2, filters * 4] + [filters * 8] * 4  # encoder L1..L7
        outs = [filters * 8] * 4 + [filters * 4, filters * 2, filters]

        blocks = [deconv_block(condition_dim, outs[0])]
        for j in range(1, 7):
            blocks.append(deconv_block(outs[j - 1] + enc[6 - (j - 1)], outs[j]))
        self.blocks = nn.ModuleList(blocks)

        self.dropout = nn.Dropout(dropout_rate) if final_dropout else nn.Identity()
        self.final = nn.ConvTranspose2d(
            outs[-1] + enc[0], 1, KERNEL, stride=2, padding=KERNEL // 2, output_padding=1
        )

    def forward(self, condition: torch.Tensor, skips: List[torch.Tensor],
                trace: Optional[List[torch.Tensor]] = None) -> torch.Tensor:
        """
        Decode a condition vector.

        Args:
            condition: (B, condition_dim)
            skips: encoder activations L1..L7
            trace: when given, receives every layer output
        """
        if condition.dim() != 2 or condition.shape[1] != self.condition_dim:
            raise ShapeError(
                f"Condition vector has shape {tuple(condition.shape)}, "
                f"expected (B, {self.condition_dim})"
            )
        if len(skips) != 7:
            raise ShapeError(f"Expected 7 skip activations, got {len(skips)}")

        h = self.blocks[0](condition[:, :, None, None])
        if trace is not None:
            trace.append(h)
        for j in range(1, 7):
            h = self.blocks[j](torch.cat([h, skips[6 - j + 1]], dim=1))
            if trace is not None:
                trace.append(h)
        h = torch.cat([h, skips[0]], dim=1)
        out = torch.tanh(self.final(self.dropout(h)))
        if trace is not None:
            trace.append(out)
        return out


class GeneratorOutput(NamedTuple):
    image: torch.Tensor
    features: torch.Tensor


class Generator(nn.Module):
    """Image encoder, optional component encoder, style vector and decoder."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.image_encoder = ImageEncoder(config.generator_filters)
        self.component_encoder = (
            ComponentEncoder(config.vocab_size, config.component_embedding_dim, config.component_hidden)
            if config.components_enabled
            else None
        )
        self.style_encoder = StyleEncoder(config.styles_count, config.style_mode,
                                          config.style_embedding_dim)
        self.decoder = Decoder(config.condition_dim, config.generator_filters,
                               config.final_dropout, config.dropout_rate)
        # LSTM and embeddings keep their default random initialization
        for module in (self.image_encoder, self.decoder):
            module.apply(init_weights)

    def condition(self, features: torch.Tensor, styles: torch.Tensor,
                  component_ids: Optional[torch.Tensor] = None,
                  lengths: Optional[torch.Tensor] = None) -> torch.Tensor:
        """[v_i | v_s | v_c]."""
        parts = [features, self.style_encoder(styles).to(features.dtype)]
        if self.component_encoder is not None:
            if component_ids is None or lengths is None:
                raise ShapeError("Component IDs are required when the component encoder is enabled")
            parts.append(self.component_encoder(component_ids, lengths))
        return torch.cat(parts, dim=1)

    def forward(self, x: torch.Tensor, styles: torch.Tensor,
                component_ids: Optional[torch.Tensor] = None,
                lengths: Optional[torch.Tensor] = None) -> GeneratorOutput:
        features, skips = self.image_encoder(x)
        condition = self.condition(features, styles, component_ids, lengths)
        return GeneratorOutput(self.decoder(condition, skips), features)

    def encode(self, image: torch.Tensor) -> torch.Tensor:
        """E_i(image) without skips."""
        return self.image_encoder(image)[0]
