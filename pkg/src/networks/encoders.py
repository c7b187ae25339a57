"""
Image encoder E_i, component encoder E_c and style vector v_s.
"""

from typing import List, Sequence, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch.nn.utils.rnn import pack_padded_sequence

from src.components.dictionary import ComponentRangeError
from src.data.glyphs import CANVAS_SIZE
from src.errors import DataError, RangeError, ShapeError
from src.networks.layers import conv_block


class InvalidSequenceError(DataError, ValueError):
    """Empty component sequence."""
    pass


class StyleRangeError(RangeError):
    """Style label outside [1, S]."""
    pass


def check_glyph_batch(x: torch.Tensor, name: str = "input"):
    """Require a (B, 1, 256, 256) batch."""
    if x.dim() != 4 or tuple(x.shape[1:]) != (1, CANVAS_SIZE, CANVAS_SIZE):
        raise ShapeError(
            f"{name} has shape {tuple(x.shape)}, expected (B, 1, {CANVAS_SIZE}, {CANVAS_SIZE})"
        )


class ImageEncoder(nn.Module):
    """Eight stride-2 convolution blocks, 256x256x1 down to 1x1x(8*filters)."""

    def __init__(self, filters: int = 64):
        super().__init__()
        widths = [filters, filters * 2, filters * 4] + [filters * 8] * 5
        blocks = []
        in_ch = 1
        for out_ch in widths:
            blocks.append(conv_block(in_ch, out_ch, stride=2, activation=nn.LeakyReLU(0.2)))
            in_ch = out_ch
        self.blocks = nn.ModuleList(blocks)
        self.feature_dim = widths[-1]

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, List[torch.Tensor]]:
        """
        Encode a glyph batch.

        Returns:
            (v_i of shape (B, 8*filters), [L1..L7] activations for skips)
        """
        check_glyph_batch(x)
        skips = []
        h = x
        for block in self.blocks:
            h = block(h)
            skips.append(h)
        return h.flatten(1), skips[:-1]


class ComponentEncoder(nn.Module):
    """Embedding layer followed by a single-layer LSTM; final hidden state is v_c."""

    def __init__(self, vocab_size: int = 517, embedding_dim: int = 128, hidden: int = 256):
        super().__init__()
        self.vocab_size = vocab_size
        # index 0 is padding; component IDs are 1-based
        self.embedding = nn.Embedding(vocab_size + 1, embedding_dim, padding_idx=0)
        self.lstm = nn.LSTM(embedding_dim, hidden, num_layers=1, batch_first=True)
        self.hidden = hidden

    def pack(self, sequences: Sequence[Sequence[int]],
             device=None) -> Tuple[torch.Tensor, torch.Tensor]:
        """
        Validate sequences and pad them into an ID matrix.

        Returns:
            (ids of shape (B, max_len), lengths of shape (B,))
        """
        lengths = []
        for seq in sequences:
            if len(seq) == 0:
                raise InvalidSequenceError("Component sequence is empty")
            for cid in seq:
                if not 1 <= cid <= self.vocab_size:
                    raise ComponentRangeError(f"Component ID {cid} outside [1, {self.vocab_size}]")
            lengths.append(len(seq))
        ids = torch.zeros(len(sequences), max(lengths), dtype=torch.long)
        for row, seq in enumerate(sequences):
            ids[row, : len(seq)] = torch.as_tensor(list(seq), dtype=torch.long)
        if device is not None:
            ids = ids.to(device)
        return ids, torch.as_tensor(lengths, dtype=torch.long)

    def forward(self, ids: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        emb = self.embedding(ids)
        packed = pack_padded_sequence(emb, lengths.cpu(), batch_first=True, enforce_sorted=False)
        _, (h_n, _) = self.lstm(packed)
        return h_n[-1]

    def encode(self, sequences: Sequence[Sequence[int]]) -> torch.Tensor:
        """v_c for a list of component sequences."""
        device = self.embedding.weight.device
        ids, lengths = self.pack(sequences, device)
        return self(ids, lengths)


class StyleEncoder(nn.Module):
    """One-hot v_s, a learned embedding row, or an empty vector when disabled."""

    def __init__(self, styles_count: int = 7, mode: str = "onehot", embedding_dim: int = 128):
        super().__init__()
        self.styles_count = styles_count
        self.mode = mode
        self.embedding = nn.Embedding(styles_count, embedding_dim) if mode == "embedding" else None
        if mode == "onehot":
            self.dim = styles_count
        elif mode == "embedding":
            self.dim = embedding_dim
        else:
            self.dim = 0

    def check_labels(self, labels: torch.Tensor):
        if labels.numel() and (int(labels.min()) < 1 or int(labels.max()) > self.styles_count):
            raise StyleRangeError(
                f"Style labels {labels.tolist()} outside [1, {self.styles_count}]"
            )

    def forward(self, labels: torch.Tensor) -> torch.Tensor:
        """v_s for 1-based style labels of shape (B,)."""
        self.check_labels(labels)
        index = labels.long() - 1
        if self.mode == "onehot":
            return F.one_hot(index, self.styles_count).float()
        if self.mode == "embedding":
            return self.embedding(index)
        return torch.zeros(labels.shape[0], 0, device=labels.device)


def style_vector(label: int, encoder: StyleEncoder) -> torch.Tensor:
    """v_s of a single style label."""
    return encoder(torch.tensor([label]))[0]
