"""
Adversarial, pixel, constancy and category losses and their weighted totals.
"""

import math
from dataclasses import asdict, dataclass
from typing import Tuple, Union

import torch
import torch.nn.functional as F

from src.errors import ShapeError
from src.networks.encoders import StyleRangeError

Number = Union[float, torch.Tensor]


@dataclass(frozen=True)
class LossWeights:
    """lambda_p, lambda_c, lambda_s."""

    lambda_p: float = 100.0
    lambda_c: float = 15.0
    lambda_s: float = 1.0

    def __post_init__(self):
        if min(self.lambda_p, self.lambda_c, self.lambda_s) < 0:
            raise ValueError(f"Loss weights must be >= 0: {self}")


@dataclass
class LossParts:
    """Unweighted loss terms of one step (tensors during training, floats in reports)."""

    d_adv: Number = 0.0
    g_adv: Number = 0.0
    pixel: Number = 0.0
    constancy: Number = 0.0
    category_real: Number = 0.0
    category_fake: Number = 0.0


@dataclass
class LossReport:
    """Scalar summary of one training step."""

    adv: float
    pixel: float
    constancy: float
    category: float
    total_g: float
    total_d: float
    d_adv: float = 0.0

    def to_dict(self) -> dict:
        """Convert to dictionary for serialization."""
        return asdict(self)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in asdict(self).values())

    def __str__(self) -> str:
        return (f"D={self.total_d:.4f} G={self.total_g:.4f} (adv {self.adv:.4f}, "
                f"pixel {self.pixel:.4f}, const {self.constancy:.4f}, cat {self.category:.4f})")


def _check_same_shape(a: torch.Tensor, b: torch.Tensor):
    if a.shape != b.shape:
        raise ShapeError(f"Shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")


def pixel_loss(y: torch.Tensor, y_hat: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference between target and generated glyphs."""
    _check_same_shape(y, y_hat)
    return F.l1_loss(y_hat, y, reduction="mean")


def constancy_loss(x: torch.Tensor, y_hat: torch.Tensor, encoder) -> torch.Tensor:
    """
    Mean absolute difference of image features E_i(x) and E_i(y_hat).

    Args:
        encoder: ImageEncoder (or any module returning (features, skips))
    """
    v_x = encoder(x)[0]
    v_hat = encoder(y_hat)[0]
    return feature_distance(v_x, v_hat)


def feature_distance(v_x: torch.Tensor, v_hat: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference of two feature batches."""
    _check_same_shape(v_x, v_hat)
    return (v_x - v_hat).abs().mean()


def adversarial_terms(d_real: torch.Tensor, d_fake: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Discriminator and non-saturating generator losses from realness logits.

    Returns:
        (d_loss, g_loss), each averaged over the batch
    """
    d_loss = (F.softplus(-d_real) + F.softplus(d_fake)).mean()
    return d_loss, generator_adversarial_loss(d_fake)


def generator_adversarial_loss(d_fake: torch.Tensor) -> torch.Tensor:
    """-log sigmoid(d_fake), averaged over the batch."""
    return F.softplus(-d_fake).mean()


def category_term(style_logits: torch.Tensor, styles: torch.Tensor) -> torch.Tensor:
    """Softmax cross-entropy of 1-based style labels."""
    styles = torch.as_tensor(styles, device=style_logits.device).long().reshape(-1)
    logits = style_logits.reshape(styles.shape[0], -1)
    count = logits.shape[1]
    if styles.numel() and (int(styles.min()) < 1 or int(styles.max()) > count):
        raise StyleRangeError(f"Style labels {styles.tolist()} outside [1, {count}]")
    return F.cross_entropy(logits, styles - 1)


def category_loss(style_logits_real: torch.Tensor, style_logits_fake: torch.Tensor,
                  styles: torch.Tensor) -> torch.Tensor:
    """Cross-entropy on the real pair plus cross-entropy on the generated pair."""
    return category_term(style_logits_real, styles) + category_term(style_logits_fake, styles)


def combine(parts: LossParts, weights: LossWeights) -> Tuple[Number, Number]:
    """
    Weighted generator and discriminator totals.

    total_g = g_adv + lp*pixel + lc*constancy + ls*category_fake
    total_d = d_adv + ls*category_real
    """
    total_g = (parts.g_adv + weights.lambda_p * parts.pixel
               + weights.lambda_c * parts.constancy + weights.lambda_s * parts.category_fake)
    total_d = parts.d_adv + weights.lambda_s * parts.category_real
    return total_g, total_d


def _scalar(value: Number) -> float:
    return float(value.detach().item()) if isinstance(value, torch.Tensor) else float(value)


def total_losses(parts: LossParts, weights: LossWeights) -> LossReport:
    """Combine loss parts into a LossReport of plain floats."""
    total_g, total_d = combine(parts, weights)
    return LossReport(
        adv=_scalar(parts.g_adv),
        pixel=_scalar(parts.pixel),
        constancy=_scalar(parts.constancy),
        category=_scalar(parts.category_real) + _scalar(parts.category_fake),
        total_g=_scalar(total_g),
        total_d=_scalar(total_d),
        d_adv=_scalar(parts.d_adv),
    )
