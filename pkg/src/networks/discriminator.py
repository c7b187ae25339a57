"""
Image-pair discriminator D with auxiliary style classifier D_s.
Three shared convolution blocks, two independent linear heads.
"""

from typing import List, NamedTuple, Optional

import torch
import torch.nn as nn

from src.data.glyphs import CANVAS_SIZE
from src.errors import ShapeError
from src.networks.config import ModelConfig
from src.networks.encoders import check_glyph_batch
from src.networks.layers import conv_block, init_weights


class DiscriminatorOutput(NamedTuple):
    realness: torch.Tensor  # (B,) logits
    style_logits: torch.Tensor  # (B, S)


class Discriminator(nn.Module):
    """D(x, img) and D_s(s | x, img)."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        f = config.discriminator_filters
        self.trunk = nn.ModuleList([
            conv_block(2, f, stride=1, activation=nn.ReLU()),
            conv_block(f, f * 2, stride=2, activation=nn.ReLU()),
            conv_block(f * 2, f * 4, stride=2, activation=nn.ReLU()),
        ])
        flat = f * 4 * (CANVAS_SIZE // 4) ** 2
        self.realness_head = nn.Linear(flat, 1)
        self.style_head = nn.Linear(flat, config.styles_count)
        self.apply(init_weights)

    def forward(self, x: torch.Tensor, img: torch.Tensor,
                trace: Optional[List[torch.Tensor]] = None) -> DiscriminatorOutput:
        check_glyph_batch(x, "source")
        check_glyph_batch(img, "image")
        if x.shape[0] != img.shape[0]:
            raise ShapeError(f"Batch sizes differ: {x.shape[0]} vs {img.shape[0]}")

        h = torch.cat([x, img], dim=1)
        for block in self.trunk:
            h = block(h)
            if trace is not None:
                trace.append(h)
        h = h.flatten(1)
        return DiscriminatorOutput(self.realness_head(h).squeeze(1), self.style_head(h))
