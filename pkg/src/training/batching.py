"""
Batch assembly and the seeded per-epoch batch order.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import torch

from src.data.samples import TrainingSample
from src.networks.generator import Generator


@dataclass
class Batch:
    """Model-ready tensors for a list of samples."""

    x: torch.Tensor
    y: torch.Tensor
    styles: torch.Tensor
    component_ids: Optional[torch.Tensor]
    lengths: Optional[torch.Tensor]

    def __len__(self) -> int:
        return self.x.shape[0]


def collate(samples: Sequence[TrainingSample], generator: Generator) -> Batch:
    """Stack samples onto the generator's device."""
    device = next(generator.parameters()).device
    x = torch.from_numpy(np.stack([s.source for s in samples])[:, None]).float().to(device)
    y = torch.from_numpy(np.stack([s.target for s in samples])[:, None]).float().to(device)
    styles = torch.tensor([s.style for s in samples], dtype=torch.long, device=device)
    ids = lengths = None
    if generator.component_encoder is not None:
        ids, lengths = generator.component_encoder.pack([s.components for s in samples], device)
    return Batch(x, y, styles, ids, lengths)


def epoch_batches(count: int, batch_size: int, seed: int, epoch: int) -> List[List[int]]:
    """
    Shuffled sample indices of one epoch, keyed on (seed, epoch).

    The final partial batch is kept as is, even when it holds one sample.
    """
    gen = torch.Generator().manual_seed(seed * 1_000_003 + epoch)
    order = torch.randperm(count, generator=gen).tolist()
    return [order[i:i + batch_size] for i in range(0, count, batch_size)]
